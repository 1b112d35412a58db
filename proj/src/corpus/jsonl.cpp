#include "amwp/corpus/jsonl.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"

#include "amwp/expr/infix.hpp"
#include "amwp/expr/tree.hpp"

namespace amwp::corpus {

namespace {

RawProblem parse_line(const std::string& line, std::size_t lineno) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw IngestError(std::string("invalid JSON: ") + e.what(), lineno);
  }
  if (!j.is_object()) throw IngestError("expected a JSON object", lineno);
  RawProblem raw;
  try {
    const auto& id = j.at("id");
    raw.id = id.is_string() ? id.get<std::string>() : id.dump();
    raw.text = j.at("text").get<std::string>();
    raw.equation = j.at("equation").get<std::string>();
    raw.answer = j.at("answer").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw IngestError(std::string("bad field: ") + e.what(), lineno);
  }
  return raw;
}

}  // namespace

IngestResult ingest_jsonl(std::istream& in, const DecoderUniverse& universe) {
  IngestResult result;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const RawProblem raw = parse_line(line, lineno);
    try {
      result.records.push_back(make_record(raw, universe.constants(), universe.max_slots()));
    } catch (const RecordRejected& e) {
      ++result.dropped;
      ++result.drop_reasons[e.reason()];
    }
  }
  if (in.bad()) throw IngestError("read failure", lineno);
  return result;
}

IngestResult ingest_jsonl_file(const std::string& path, const DecoderUniverse& universe) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path, 0);
  return ingest_jsonl(in, universe);
}

void emit_jsonl(std::ostream& out, std::span<const ProblemRecord> records) {
  for (const auto& r : records) {
    nlohmann::json j = {{"id", r.id},
                        {"text", r.text},
                        {"equation", expr::to_infix(expr::prefix_to_tree(r.gold_prefix))},
                        {"answer", r.gold_answer}};
    out << j.dump() << '\n';
  }
}

void emit_jsonl_file(const std::string& path, std::span<const ProblemRecord> records) {
  std::ofstream out(path);
  if (!out) throw IngestError("cannot write " + path, 0);
  emit_jsonl(out, records);
  if (!out) throw IngestError("write failure on " + path, 0);
}

}  // namespace amwp::corpus
