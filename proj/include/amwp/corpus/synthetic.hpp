#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "amwp/corpus/record.hpp"
#include "amwp/corpus/vocab.hpp"

namespace amwp::corpus {

struct SyntheticConfig {
  std::size_t n_problems = 1000;
  std::size_t max_ops = 4;
  std::uint64_t seed = 0;
  /// Percentages for 1, 2, 3, 4 operators; entries beyond max_ops are ignored
  /// and the rest renormalised.
  std::vector<double> op_count_pct = {45, 35, 15, 5};
  /// Any of "shopping", "travel", "containers".
  std::vector<std::string> topics = {"shopping", "travel", "containers"};
  /// Chance of an extra sentence carrying an irrelevant number.
  double distractor_prob = 0.2;
  /// Chance that a leaf is the constant 1 (written "one") instead of a number.
  double constant_prob = 0.05;
  std::string id_prefix = "syn";
};

/// Throws CorpusError on an invalid config. Records are built through
/// make_record, so each one carries text, number mapping and a checked answer.
std::vector<ProblemRecord> generate_synthetic(const SyntheticConfig& cfg, const DecoderUniverse& universe = {});

}  // namespace amwp::corpus
