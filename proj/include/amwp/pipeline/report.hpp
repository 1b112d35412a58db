#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "amwp/pipeline/config.hpp"
#include "amwp/solver/decode.hpp"

namespace amwp::pipeline {

/// Epoch means of the per-batch losses plus the dev evaluation, if one ran.
struct EpochMetrics {
  std::size_t epoch = 0;
  double lr = 0.0;
  double l_seq = 0.0;
  double l_a = 0.0;
  double l_s = 0.0;
  double l_disc = 0.0;
  std::optional<double> dev_acc;
  std::map<std::size_t, solver::BucketStats> buckets;
  double wall_seconds = 0.0;
};

struct RunReport {
  TrainConfig config;
  std::size_t train_size = 0;
  std::size_t dev_size = 0;
  std::vector<EpochMetrics> epochs;
  /// Epoch whose weights were kept; 0 before any epoch ran.
  std::size_t best_epoch = 0;
  double best_dev_acc = 0.0;
  double wall_seconds = 0.0;

  /// Throws NumericError if a loss is not finite. Wall times are left out
  /// when include_timing is false, which makes two reports of the same
  /// trajectory compare equal.
  nlohmann::json to_json(bool include_timing = true) const;
  /// epoch,l_seq,l_a,l_s,l_disc,dev_acc with an empty dev_acc on
  /// epochs without evaluation.
  std::string epochs_csv() const;
};

nlohmann::json bucket_json(const std::map<std::size_t, solver::BucketStats>& buckets);
nlohmann::json eval_report_json(const solver::EvalReport& r);

}  // namespace amwp::pipeline
