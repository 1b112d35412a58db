#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "amwp/core/graph.hpp"
#include "amwp/core/layers.hpp"
#include "amwp/corpus/record.hpp"
#include "amwp/expr/signature.hpp"

namespace amwp::analogy {

using expr::OperatorSignature;

/// Problems bucketed by top-k operator signature for k = 1..max_level.
/// Problems are referred to by their position in the indexed corpus.
class SignatureIndex {
 public:
  SignatureIndex() = default;
  SignatureIndex(std::span<const expr::PrefixEquation> equations, std::size_t max_level, bool strict_left_child);

  std::size_t size() const { return size_; }
  std::size_t max_level() const { return signatures_.size(); }
  const std::optional<OperatorSignature>& signature(std::size_t level, std::size_t problem) const;
  const std::map<OperatorSignature, std::vector<std::size_t>>& buckets(std::size_t level) const;
  /// Members of the problem's level bucket (including itself); empty when it
  /// has no signature at that level.
  std::span<const std::size_t> bucket_of(std::size_t level, std::size_t problem) const;

 private:
  std::size_t size_ = 0;
  std::vector<std::vector<std::optional<OperatorSignature>>> signatures_;
  std::vector<std::map<OperatorSignature, std::vector<std::size_t>>> buckets_;
};

SignatureIndex build_index(std::span<const corpus::ProblemRecord> records, std::size_t max_level = 3,
                           bool strict_left_child = false);

struct Pair {
  std::size_t a = 0;  // a < b
  std::size_t b = 0;
  bool positive = false;

  friend auto operator<=>(const Pair&, const Pair&) = default;
};

/// Sampled pairs per signature level.
struct PairBatch {
  std::map<std::size_t, std::vector<Pair>> by_level;

  std::size_t size() const;
  std::size_t count(bool positive) const;
};

/// For each batch problem and each level where it has a signature, draws up
/// to per_problem positives from its bucket and per_problem negatives whose
/// signature at that level differs. Partners come from `pool` (every
/// indexed problem when empty). Pairs are stored lower index first and
/// deduplicated within a level.
PairBatch sample_pairs(const SignatureIndex& index, std::span<const std::size_t> batch, std::size_t per_problem,
                       std::span<const std::size_t> levels, core::Rng& rng, std::span<const std::size_t> pool = {});

/// One scoring MLP (2H -> H -> 1) per signature level.
class AnalogyHeads {
 public:
  AnalogyHeads() = default;
  AnalogyHeads(std::size_t hidden, std::span<const std::size_t> levels, core::Rng& rng);

  core::ScoringMlp& head(std::size_t level);
  std::vector<std::size_t> levels() const;
  void collect(std::vector<core::Parameter*>& out);

 private:
  std::map<std::size_t, core::ScoringMlp> heads_;
};

/// MLP([h1 : h2]) before the sigmoid. Throws ShapeError on dimension mismatch.
core::Var analogy_logit(core::Tape& t, core::Var h1, core::Var h2, core::ScoringMlp& head);
/// sigmoid(analogy_logit), in (0, 1).
core::Var analogy_score(core::Tape& t, core::Var h1, core::Var h2, core::ScoringMlp& head);

/// Per level: mean of -log s over positive pairs plus mean of -log(1 - s)
/// over negative pairs (an empty group contributes 0); levels are summed.
/// Zero for an empty batch. Every pair member must have an entry in
/// `encodings`.
core::Var analogy_loss(core::Tape& t, const PairBatch& pairs, const std::unordered_map<std::size_t, core::Var>& encodings,
                       AnalogyHeads& heads);

}  // namespace amwp::analogy
