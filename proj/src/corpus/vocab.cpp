#include "amwp/corpus/vocab.hpp"

#include <algorithm>
#include <numbers>

namespace amwp::corpus {

WordVocab::WordVocab() {
  add("<pad>");
  add("<unk>");
  add("<eos>");
}

WordVocab WordVocab::build(std::span<const ProblemRecord> records) {
  WordVocab v;
  for (const auto& r : records)
    for (const auto& w : r.words) v.add(w);
  return v;
}

int WordVocab::add(const std::string& word) {
  auto [it, inserted] = ids_.emplace(word, static_cast<int>(words_.size()));
  if (inserted) words_.push_back(word);
  return it->second;
}

int WordVocab::id(const std::string& word) const {
  auto it = ids_.find(word);
  return it == ids_.end() ? kUnk : it->second;
}

std::vector<int> WordVocab::encode(std::span<const std::string> words) const {
  std::vector<int> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(id(w));
  return out;
}

nlohmann::json WordVocab::to_json() const { return words_; }

WordVocab WordVocab::from_json(const nlohmann::json& j) {
  const auto words = j.get<std::vector<std::string>>();
  if (words.size() < 3 || words[0] != "<pad>" || words[1] != "<unk>" || words[2] != "<eos>")
    throw CorpusError("word vocabulary must start with <pad> <unk> <eos>");
  WordVocab v;
  for (const auto& w : words) v.add(w);
  if (v.size() != words.size()) throw CorpusError("word vocabulary has duplicates");
  return v;
}

DecoderUniverse::DecoderUniverse()
    : DecoderUniverse(kDefaultMaxSlots, {expr::Token::constant(1.0), expr::Token::constant(std::numbers::pi)}) {}

DecoderUniverse::DecoderUniverse(std::size_t max_slots, std::vector<expr::Token> constants)
    : max_slots_(max_slots), constants_(std::move(constants)) {
  for (expr::Operator o : expr::kOperators) tokens_.push_back(expr::Token::op(o));
  for (std::size_t i = 0; i < max_slots_; ++i) tokens_.push_back(expr::Token::slot(static_cast<int>(i)));
  for (const auto& c : constants_) {
    if (c.kind() != expr::Token::Kind::Constant) throw CorpusError("constant list holds " + c.text());
    if (std::count(constants_.begin(), constants_.end(), c) > 1) throw CorpusError("duplicate constant " + c.text());
    tokens_.push_back(c);
  }
}

std::size_t DecoderUniverse::id(const expr::Token& t) const {
  switch (t.kind()) {
    case expr::Token::Kind::Operator:
      return static_cast<std::size_t>(t.oper());
    case expr::Token::Kind::Slot:
      if (t.slot_index() < 0 || static_cast<std::size_t>(t.slot_index()) >= max_slots_) break;
      return expr::kOperators.size() + static_cast<std::size_t>(t.slot_index());
    case expr::Token::Kind::Constant: {
      auto it = std::find(constants_.begin(), constants_.end(), t);
      if (it == constants_.end()) break;
      return expr::kOperators.size() + max_slots_ + static_cast<std::size_t>(it - constants_.begin());
    }
  }
  throw CorpusError("token " + t.text() + " is outside the decoder universe");
}

std::vector<int> DecoderUniverse::encode(std::span<const expr::Token> eq) const {
  std::vector<int> out;
  out.reserve(eq.size());
  for (const auto& t : eq) out.push_back(static_cast<int>(id(t)));
  return out;
}

nlohmann::json DecoderUniverse::to_json() const {
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& c : constants_) cs.push_back({{"symbol", c.symbol()}, {"value", c.value()}});
  return {{"max_slots", max_slots_}, {"constants", cs}};
}

DecoderUniverse DecoderUniverse::from_json(const nlohmann::json& j) {
  std::vector<expr::Token> cs;
  for (const auto& c : j.at("constants"))
    cs.push_back(expr::Token::constant(c.at("symbol").get<std::string>(), c.at("value").get<double>()));
  return DecoderUniverse(j.at("max_slots").get<std::size_t>(), std::move(cs));
}

OutputMask build_mask(const ProblemRecord& record, const DecoderUniverse& universe, bool allow_constants) {
  const std::size_t n = record.slot_values.size();
  if (n > universe.max_slots())
    throw CorpusError("record " + record.id + " has " + std::to_string(n) + " numbers, universe has " +
                      std::to_string(universe.max_slots()) + " slots");
  OutputMask mask(universe.size(), 0);
  for (std::size_t i = 0; i < universe.size(); ++i) {
    const auto& t = universe.token(i);
    switch (t.kind()) {
      case expr::Token::Kind::Operator:
        mask[i] = 1;
        break;
      case expr::Token::Kind::Slot:
        mask[i] = static_cast<std::size_t>(t.slot_index()) < n;
        break;
      case expr::Token::Kind::Constant:
        mask[i] = allow_constants;
        break;
    }
  }
  return mask;
}

}  // namespace amwp::corpus
