#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "amwp/analogy/analogy.hpp"
#include "amwp/corpus/vocab.hpp"
#include "amwp/disc/discriminator.hpp"
#include "amwp/pipeline/config.hpp"
#include "amwp/solver/model.hpp"

namespace amwp::pipeline {

/// Everything a checkpoint holds: the config, both vocabularies and the
/// solver, analogy heads and discriminator weights.
///
/// Optimizers keep pointers into the bundle, so it is neither copied nor
/// moved once training starts.
class ModelBundle {
 public:
  /// Initialises each module from its own seed stream.
  ModelBundle(TrainConfig cfg, corpus::WordVocab vocab, corpus::DecoderUniverse universe);
  ModelBundle(const ModelBundle&) = delete;
  ModelBundle& operator=(const ModelBundle&) = delete;

  TrainConfig config;
  corpus::WordVocab vocab;
  corpus::DecoderUniverse universe;
  solver::Seq2Seq solver;
  analogy::AnalogyHeads heads;
  disc::Discriminator disc;

  /// Solver parameters followed by the analogy heads.
  std::vector<core::Parameter*> solver_parameters();
  std::vector<core::Parameter*> parameters();

  nlohmann::json checkpoint() const;
  void save(const std::string& path) const;
  /// Throws CheckpointError on a malformed or mismatched document.
  static std::unique_ptr<ModelBundle> from_checkpoint(const nlohmann::json& doc);
  static std::unique_ptr<ModelBundle> load(const std::string& path);

  /// Evaluation-mode problem vector.
  core::Tensor problem_vec(std::span<const int> word_ids);
};

}  // namespace amwp::pipeline
