#include "amwp/pipeline/bundle.hpp"

#include "amwp/core/checkpoint.hpp"

namespace amwp::pipeline {

namespace {

solver::Seq2Seq make_solver(const TrainConfig& cfg, std::size_t vocab_size, std::size_t universe_size) {
  core::Rng rng = stream_rng(cfg.seed, Stream::SolverInit);
  return solver::Seq2Seq(vocab_size, universe_size, cfg.dims, rng);
}

analogy::AnalogyHeads make_heads(const TrainConfig& cfg) {
  core::Rng rng = stream_rng(cfg.seed, Stream::HeadsInit);
  return analogy::AnalogyHeads(cfg.dims.hidden, cfg.levels, rng);
}

disc::Discriminator make_disc(const TrainConfig& cfg, std::size_t universe_size) {
  core::Rng rng = stream_rng(cfg.seed, Stream::DiscInit);
  return disc::Discriminator(universe_size, cfg.dims.embed, cfg.dims.hidden, rng);
}

}  // namespace

ModelBundle::ModelBundle(TrainConfig cfg, corpus::WordVocab v, corpus::DecoderUniverse u)
    : config(std::move(cfg)),
      vocab(std::move(v)),
      universe(std::move(u)),
      solver(make_solver(config, vocab.size(), universe.size())),
      heads(make_heads(config)),
      disc(make_disc(config, universe.size())) {}

std::vector<core::Parameter*> ModelBundle::solver_parameters() {
  std::vector<core::Parameter*> out = solver.parameters();
  heads.collect(out);
  return out;
}

std::vector<core::Parameter*> ModelBundle::parameters() {
  std::vector<core::Parameter*> out = solver_parameters();
  for (core::Parameter* p : disc.parameters()) out.push_back(p);
  return out;
}

nlohmann::json ModelBundle::checkpoint() const {
  // parameters() only hands out pointers; nothing is modified here
  auto& self = const_cast<ModelBundle&>(*this);
  const nlohmann::json cfg = {
      {"train_config", config.to_json()}, {"vocab", vocab.to_json()}, {"universe", universe.to_json()}};
  return core::checkpoint_document(cfg, self.parameters());
}

void ModelBundle::save(const std::string& path) const { core::write_json_file(path, checkpoint()); }

std::unique_ptr<ModelBundle> ModelBundle::from_checkpoint(const nlohmann::json& doc) {
  std::unique_ptr<ModelBundle> m;
  try {
    const nlohmann::json& cfg = doc.at("config");
    m = std::make_unique<ModelBundle>(TrainConfig::from_json(cfg.at("train_config")),
                                      corpus::WordVocab::from_json(cfg.at("vocab")),
                                      corpus::DecoderUniverse::from_json(cfg.at("universe")));
  } catch (const nlohmann::json::exception& e) {
    throw core::CheckpointError(std::string("malformed checkpoint config: ") + e.what());
  } catch (const ConfigError& e) {
    throw core::CheckpointError(std::string("bad checkpoint config: ") + e.what());
  } catch (const corpus::CorpusError& e) {
    throw core::CheckpointError(std::string("bad checkpoint vocabulary: ") + e.what());
  }
  core::restore_parameters(doc, m->parameters());
  return m;
}

std::unique_ptr<ModelBundle> ModelBundle::load(const std::string& path) {
  return from_checkpoint(core::read_json_file(path));
}

core::Tensor ModelBundle::problem_vec(std::span<const int> word_ids) {
  core::Tape t(false);
  return solver.encoder.encode(t, word_ids).problem_vec.value();
}

}  // namespace amwp::pipeline
