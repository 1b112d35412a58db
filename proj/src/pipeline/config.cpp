#include "amwp/pipeline/config.hpp"

#include <cmath>
#include <random>
#include <set>

namespace amwp::pipeline {

using nlohmann::json;

TrainConfig TrainConfig::desk() {
  TrainConfig c;
  c.epochs = 40;
  return c;
}

void TrainConfig::validate() const {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  need(std::isfinite(lambda1) && lambda1 >= 0.0, "lambda1 must be a finite value >= 0");
  need(std::isfinite(lambda2) && lambda2 >= 0.0, "lambda2 must be a finite value >= 0");
  need(batch_size >= 1, "batch_size must be at least 1");
  need(std::isfinite(lr) && lr > 0.0, "lr must be positive");
  need(lr_halving_every >= 1, "lr_halving_every must be at least 1");
  need(dropout >= 0.0 && dropout < 1.0, "dropout must be in [0, 1)");
  need(beam >= 1, "beam must be at least 1");
  need(pairs_per_problem >= 1, "pairs_per_problem must be at least 1");
  need(eval_every >= 1, "eval_every must be at least 1");
  need(dims.embed >= 1, "dims.embed must be at least 1");
  need(dims.hidden >= 2 && dims.hidden % 2 == 0, "dims.hidden must be even and at least 2");
  std::set<std::size_t> seen;
  for (std::size_t l : levels) {
    need(l >= 1 && l <= 3, "levels must be drawn from {1, 2, 3}");
    need(seen.insert(l).second, "levels must not repeat");
  }
}

json TrainConfig::to_json() const {
  return {
      {"lambda1", lambda1},
      {"lambda2", lambda2},
      {"batch_size", batch_size},
      {"epochs", epochs},
      {"lr", lr},
      {"lr_halving_every", lr_halving_every},
      {"dropout", dropout},
      {"beam", beam},
      {"seed", seed},
      {"levels", levels},
      {"flags",
       {{"analogy_on", flags.analogy_on},
        {"disc_on", flags.disc_on},
        {"grad_guided_on", flags.grad_guided_on},
        {"extra_negs_on", flags.extra_negs_on}}},
      {"dims", {{"embed", dims.embed}, {"hidden", dims.hidden}}},
      {"pairs_per_problem", pairs_per_problem},
      {"strict_signature", strict_signature},
      {"eval_every", eval_every},
      {"stop_at_dev_acc", stop_at_dev_acc},
  };
}

namespace {

template <class T>
void take(const json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key ") + key + ": " + e.what());
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ConfigError("unknown config key " + where + it.key());
  }
}

}  // namespace

TrainConfig TrainConfig::from_json(const json& j, const TrainConfig& base) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j,
                 {"lambda1", "lambda2", "batch_size", "epochs", "lr", "lr_halving_every", "dropout", "beam", "seed",
                  "levels", "flags", "dims", "pairs_per_problem", "strict_signature", "eval_every", "stop_at_dev_acc"},
                 "");
  TrainConfig c = base;
  take(j, "lambda1", c.lambda1);
  take(j, "lambda2", c.lambda2);
  take(j, "batch_size", c.batch_size);
  take(j, "epochs", c.epochs);
  take(j, "lr", c.lr);
  take(j, "lr_halving_every", c.lr_halving_every);
  take(j, "dropout", c.dropout);
  take(j, "beam", c.beam);
  take(j, "seed", c.seed);
  take(j, "levels", c.levels);
  take(j, "pairs_per_problem", c.pairs_per_problem);
  take(j, "strict_signature", c.strict_signature);
  take(j, "eval_every", c.eval_every);
  take(j, "stop_at_dev_acc", c.stop_at_dev_acc);
  if (auto f = j.find("flags"); f != j.end()) {
    if (!f->is_object()) throw ConfigError("config key flags must be an object");
    reject_unknown(*f, {"analogy_on", "disc_on", "grad_guided_on", "extra_negs_on"}, "flags.");
    take(*f, "analogy_on", c.flags.analogy_on);
    take(*f, "disc_on", c.flags.disc_on);
    take(*f, "grad_guided_on", c.flags.grad_guided_on);
    take(*f, "extra_negs_on", c.flags.extra_negs_on);
  }
  if (auto d = j.find("dims"); d != j.end()) {
    if (!d->is_object()) throw ConfigError("config key dims must be an object");
    reject_unknown(*d, {"embed", "hidden"}, "dims.");
    take(*d, "embed", c.dims.embed);
    take(*d, "hidden", c.dims.hidden);
  }
  c.validate();
  return c;
}

double learning_rate(const TrainConfig& cfg, std::size_t epoch) {
  if (epoch == 0) throw std::invalid_argument("epochs are 1-based");
  const std::size_t halvings = (epoch - 1) / cfg.lr_halving_every;
  return std::ldexp(cfg.lr, -static_cast<int>(halvings));
}

core::Rng stream_rng(std::uint64_t seed, Stream s) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(s)};
  return core::Rng(seq);
}

}  // namespace amwp::pipeline
