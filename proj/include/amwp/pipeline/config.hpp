#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "amwp/core/graph.hpp"
#include "amwp/solver/model.hpp"

namespace amwp::pipeline {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Flags {
  bool analogy_on = true;
  bool disc_on = true;
  /// Replace the gradient-selected token; random position when off.
  bool grad_guided_on = true;
  /// Add a random corpus equation and its variants to each negative set.
  bool extra_negs_on = true;

  friend bool operator==(const Flags&, const Flags&) = default;
};

struct TrainConfig {
  double lambda1 = 0.01;
  double lambda2 = 0.001;
  std::size_t batch_size = 32;
  std::size_t epochs = 160;
  double lr = 0.001;
  std::size_t lr_halving_every = 30;
  double dropout = 0.5;
  std::size_t beam = 5;
  std::uint64_t seed = 0;
  std::vector<std::size_t> levels{1, 2};
  Flags flags;

  solver::ModelDims dims;
  /// Positive and negative partners drawn per problem and level.
  std::size_t pairs_per_problem = 1;
  /// Signature operators must chain through left children.
  bool strict_signature = false;
  /// Dev evaluation cadence in epochs; the last epoch is always evaluated.
  std::size_t eval_every = 1;
  /// Stop once dev accuracy reaches this value (disabled above 1).
  double stop_at_dev_acc = 2.0;

  /// Desk-scale preset: the same settings with 40 epochs.
  static TrainConfig desk();

  /// Throws ConfigError on out-of-range values.
  void validate() const;
  nlohmann::json to_json() const;
  /// Keys missing from `j` keep the values of `base`; unknown keys throw.
  static TrainConfig from_json(const nlohmann::json& j, const TrainConfig& base);
  static TrainConfig from_json(const nlohmann::json& j) { return from_json(j, TrainConfig{}); }

  friend bool operator==(const TrainConfig& a, const TrainConfig& b) { return a.to_json() == b.to_json(); }
};

/// Learning rate for a 1-based epoch: lr halved every lr_halving_every epochs.
double learning_rate(const TrainConfig& cfg, std::size_t epoch);

/// Independent generators derived from the run seed, one per purpose, so a
/// module that is switched off does not shift the draws of the others.
enum class Stream : std::uint32_t {
  SolverInit = 1,
  HeadsInit = 2,
  DiscInit = 3,
  Shuffle = 4,
  Dropout = 5,
  Pairs = 6,
  Negatives = 7,
};

core::Rng stream_rng(std::uint64_t seed, Stream s);

}  // namespace amwp::pipeline
