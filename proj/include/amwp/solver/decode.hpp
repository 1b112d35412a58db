#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amwp/corpus/record.hpp"
#include "amwp/corpus/vocab.hpp"
#include "amwp/solver/model.hpp"

namespace amwp::solver {

/// Inverted dropout on the encoder outputs (states and problem vector).
Encoding dropout_encoding(const Encoding& e, double p, core::Rng& rng);

/// Teacher-forced mean over positions of -log p(y_t | y_<t, X) under the
/// masked softmax. Throws std::invalid_argument if a gold token is masked.
core::Var seq2seq_loss(core::Tape& t, PrefixDecoder& decoder, const Encoding& enc, std::span<const int> gold_ids,
                       std::span<const std::uint8_t> mask);

struct Hypothesis {
  std::vector<int> tokens;
  double log_prob = 0.0;
};

/// Arity-aware beam search. An operator is only expanded when the
/// hypothesis can still be completed within max_len; masked tokens are
/// never expanded. Each step keeps the `width` best expansions ranked by
/// log-prob, then parent rank, then lower token id. The greedy completion
/// is always among the candidates. Completed hypotheses come back by
/// descending log-prob. Empty when nothing completes within max_len.
std::vector<Hypothesis> beam_search(Seq2Seq& model, std::span<const int> word_ids, std::span<const std::uint8_t> mask,
                                    std::size_t width, std::size_t max_len);

/// Highest-probability token at every step (lowest id on ties), with the
/// same arity rule as beam_search.
std::optional<Hypothesis> greedy_decode(Seq2Seq& model, std::span<const int> word_ids,
                                        std::span<const std::uint8_t> mask, std::size_t max_len);

/// Longest equation over max_slots operands: 2 * max_slots + 1.
inline std::size_t default_max_len(std::size_t max_slots) { return 2 * max_slots + 1; }

/// Encodes a record's words and gold equation and builds its output mask.
struct PreparedRecord {
  std::vector<int> word_ids;
  std::vector<int> gold_ids;
  corpus::OutputMask mask;
};

PreparedRecord prepare(const corpus::ProblemRecord& r, const corpus::WordVocab& vocab,
                       const corpus::DecoderUniverse& universe);

/// True when the equation evaluates on the record's numbers to its gold
/// answer within 1e-4 relative; evaluation errors count as wrong.
bool value_correct(std::span<const expr::Token> eq, const corpus::ProblemRecord& r);

struct BucketStats {
  std::size_t count = 0;
  std::size_t correct = 0;
  double percentage = 0.0;  // percent of the evaluated corpus
  double accuracy() const { return count ? static_cast<double>(correct) / static_cast<double>(count) : 0.0; }
};

struct EvalReport {
  std::size_t total = 0;
  std::size_t correct = 0;
  /// Keyed by the gold equation's operator count.
  std::map<std::size_t, BucketStats> buckets;
  std::vector<std::string> predictions;  // top beam as canonical text, "" when empty

  double accuracy() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
  /// Accuracy over buckets with lo <= operators <= hi.
  double range_accuracy(std::size_t lo, std::size_t hi) const;
};

EvalReport evaluate_corpus(Seq2Seq& model, std::span<const corpus::ProblemRecord> records,
                           const corpus::WordVocab& vocab, const corpus::DecoderUniverse& universe, std::size_t width,
                           std::size_t max_len);

/// Fraction of records whose top beam is value-correct.
double value_accuracy(Seq2Seq& model, std::span<const corpus::ProblemRecord> records, const corpus::WordVocab& vocab,
                      const corpus::DecoderUniverse& universe, std::size_t width = 5);

}  // namespace amwp::solver
