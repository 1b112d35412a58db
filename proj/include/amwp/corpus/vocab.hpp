#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "amwp/corpus/record.hpp"
#include "amwp/expr/token.hpp"

namespace amwp::corpus {

/// Encoder word ids. 0, 1 and 2 are PAD, UNK and EOS.
class WordVocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kEos = 2;

  WordVocab();
  /// Words in first-seen order over the corpus.
  static WordVocab build(std::span<const ProblemRecord> records);

  int add(const std::string& word);
  int id(const std::string& word) const;
  const std::string& word(int id) const { return words_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return words_.size(); }
  /// Maps words to ids, unknown words to UNK.
  std::vector<int> encode(std::span<const std::string> words) const;

  nlohmann::json to_json() const;
  static WordVocab from_json(const nlohmann::json& j);

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> ids_;
};

inline constexpr std::size_t kDefaultMaxSlots = 10;

/// Every token the decoder can emit: the 5 operators, N0..N<max_slots-1>,
/// then the constants, in that id order.
class DecoderUniverse {
 public:
  /// Constants 1 and pi, 10 slots.
  DecoderUniverse();
  DecoderUniverse(std::size_t max_slots, std::vector<expr::Token> constants);

  std::size_t size() const { return tokens_.size(); }
  std::size_t max_slots() const { return max_slots_; }
  const std::vector<expr::Token>& constants() const { return constants_; }
  const expr::Token& token(std::size_t id) const { return tokens_.at(id); }
  /// Throws CorpusError for tokens outside the universe.
  std::size_t id(const expr::Token& t) const;
  std::vector<int> encode(std::span<const expr::Token> eq) const;

  nlohmann::json to_json() const;
  static DecoderUniverse from_json(const nlohmann::json& j);

 private:
  std::size_t max_slots_ = 0;
  std::vector<expr::Token> constants_;
  std::vector<expr::Token> tokens_;
};

/// Per-problem allowed-token flags over a DecoderUniverse.
using OutputMask = std::vector<std::uint8_t>;

/// Operators always allowed, slot i iff the record has more than i numbers,
/// constants iff allow_constants. Throws CorpusError when the record has
/// more numbers than the universe has slots.
OutputMask build_mask(const ProblemRecord& record, const DecoderUniverse& universe, bool allow_constants = true);

}  // namespace amwp::corpus
