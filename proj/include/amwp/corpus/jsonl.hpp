#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "amwp/corpus/record.hpp"
#include "amwp/corpus/vocab.hpp"

namespace amwp::corpus {

/// Unreadable input or a malformed line; line() is 1-based, 0 for file errors.
class IngestError : public CorpusError {
 public:
  IngestError(const std::string& msg, std::size_t line)
      : CorpusError(line ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct IngestResult {
  std::vector<ProblemRecord> records;
  std::size_t dropped = 0;
  /// Drop reason -> count.
  std::map<std::string, std::size_t> drop_reasons;
};

/// Reads {"id", "text", "equation", "answer"} lines. Blank lines are
/// skipped; problems failing make_record are dropped and counted.
IngestResult ingest_jsonl(std::istream& in, const DecoderUniverse& universe = {});
IngestResult ingest_jsonl_file(const std::string& path, const DecoderUniverse& universe = {});

/// Writes records in the same line format. Equations are written with
/// N<i> slot names so reading them back reproduces the slot mapping.
void emit_jsonl(std::ostream& out, std::span<const ProblemRecord> records);
void emit_jsonl_file(const std::string& path, std::span<const ProblemRecord> records);

}  // namespace amwp::corpus
