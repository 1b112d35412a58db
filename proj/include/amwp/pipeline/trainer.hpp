#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "amwp/analogy/analogy.hpp"
#include "amwp/core/optim.hpp"
#include "amwp/corpus/record.hpp"
#include "amwp/pipeline/bundle.hpp"
#include "amwp/pipeline/config.hpp"
#include "amwp/pipeline/report.hpp"
#include "amwp/solver/decode.hpp"

namespace amwp::pipeline {

/// A non-finite value appeared during a step. Carries the batch record ids.
class TrainingAborted : public std::runtime_error {
 public:
  TrainingAborted(const std::string& what, std::vector<std::string> batch_ids)
      : std::runtime_error(what), batch_ids_(std::move(batch_ids)) {}
  const std::vector<std::string>& batch_ids() const { return batch_ids_; }

 private:
  std::vector<std::string> batch_ids_;
};

struct StepLosses {
  double l_seq = 0.0;   // batch mean
  double l_a = 0.0;
  double l_s = 0.0;     // batch mean
  double l_disc = 0.0;  // mean over problems with negatives
  double total = 0.0;   // l_seq + lambda1 * l_a + lambda2 * l_s
  std::size_t pairs = 0;
  std::size_t negatives = 0;
};

/// Owns the models, optimizers and random streams of one run.
class Trainer {
 public:
  /// The vocabulary is built from the training corpus. Throws ConfigError
  /// for an invalid config and std::invalid_argument for an empty corpus.
  Trainer(TrainConfig cfg, std::vector<corpus::ProblemRecord> train, std::vector<corpus::ProblemRecord> dev);

  /// One update on the given training-set positions: sample analogy pairs,
  /// build negative sets, update the discriminator, then update encoder,
  /// decoder and analogy heads on L_seq + lambda1 L_a + lambda2 L_s.
  /// Throws TrainingAborted on a non-finite value, std::invalid_argument on
  /// an empty batch.
  StepLosses train_step(std::span<const std::size_t> batch, double lr);

  /// Shuffles, steps through every batch and evaluates on the dev corpus
  /// when the cadence says so. epoch is 1-based.
  EpochMetrics run_epoch(std::size_t epoch);

  /// The full epoch loop. Keeps the best-dev weights (the last epoch's when
  /// there is no dev corpus) and restores them at the end.
  RunReport run(const std::function<void(const EpochMetrics&)>& on_epoch = {});

  ModelBundle& models() { return *bundle_; }
  std::unique_ptr<ModelBundle> release_models() { return std::move(bundle_); }
  const TrainConfig& config() const { return cfg_; }
  const std::vector<corpus::ProblemRecord>& train_records() const { return train_; }
  const core::AdamW& solver_optimizer() const { return *solver_opt_; }
  const core::AdamW& disc_optimizer() const { return *disc_opt_; }

 private:
  bool analogy_active() const;
  solver::EvalReport evaluate_dev();

  TrainConfig cfg_;
  std::vector<corpus::ProblemRecord> train_;
  std::vector<corpus::ProblemRecord> dev_;
  std::unique_ptr<ModelBundle> bundle_;
  std::vector<solver::PreparedRecord> prepared_;
  std::vector<std::vector<int>> corpus_gold_;
  analogy::SignatureIndex index_;
  std::unique_ptr<core::AdamW> solver_opt_;
  std::unique_ptr<core::AdamW> disc_opt_;
  core::Rng shuffle_rng_;
  core::Rng dropout_rng_;
  core::Rng pairs_rng_;
  core::Rng negatives_rng_;
  std::vector<std::size_t> order_;
};

struct TrainResult {
  RunReport report;
  std::unique_ptr<ModelBundle> models;
};

TrainResult train(const TrainConfig& cfg, std::vector<corpus::ProblemRecord> train_corpus,
                  std::vector<corpus::ProblemRecord> dev_corpus,
                  const std::function<void(const EpochMetrics&)>& on_epoch = {});

/// Top-beam evaluation of a bundle's solver.
solver::EvalReport evaluate(ModelBundle& m, std::span<const corpus::ProblemRecord> records, std::size_t beam);

}  // namespace amwp::pipeline
