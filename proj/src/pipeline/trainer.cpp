#include "amwp/pipeline/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <unordered_map>

#include "amwp/disc/discriminator.hpp"

namespace amwp::pipeline {

using core::Tape;
using core::Tensor;
using core::Var;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Trainer::Trainer(TrainConfig cfg, std::vector<corpus::ProblemRecord> train, std::vector<corpus::ProblemRecord> dev)
    : cfg_(std::move(cfg)),
      train_(std::move(train)),
      dev_(std::move(dev)),
      shuffle_rng_(stream_rng(cfg_.seed, Stream::Shuffle)),
      dropout_rng_(stream_rng(cfg_.seed, Stream::Dropout)),
      pairs_rng_(stream_rng(cfg_.seed, Stream::Pairs)),
      negatives_rng_(stream_rng(cfg_.seed, Stream::Negatives)) {
  cfg_.validate();
  if (train_.empty()) throw std::invalid_argument("training corpus is empty");

  bundle_ = std::make_unique<ModelBundle>(cfg_, corpus::WordVocab::build(train_), corpus::DecoderUniverse());
  prepared_.reserve(train_.size());
  corpus_gold_.reserve(train_.size());
  for (const corpus::ProblemRecord& r : train_) {
    prepared_.push_back(solver::prepare(r, bundle_->vocab, bundle_->universe));
    corpus_gold_.push_back(prepared_.back().gold_ids);
  }
  const std::size_t max_level = cfg_.levels.empty() ? 1 : *std::max_element(cfg_.levels.begin(), cfg_.levels.end());
  index_ = analogy::build_index(train_, max_level, cfg_.strict_signature);

  solver_opt_ = std::make_unique<core::AdamW>(bundle_->solver_parameters());
  disc_opt_ = std::make_unique<core::AdamW>(bundle_->disc.parameters());
  order_.resize(train_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
}

bool Trainer::analogy_active() const { return cfg_.flags.analogy_on && !cfg_.levels.empty(); }

StepLosses Trainer::train_step(std::span<const std::size_t> batch, double lr) {
  if (batch.empty()) throw std::invalid_argument("train_step needs a nonempty batch");
  ModelBundle& m = *bundle_;
  const bool use_a = analogy_active();
  const bool use_d = cfg_.flags.disc_on;
  StepLosses out;

  try {
    analogy::PairBatch pairs;
    if (use_a) {
      pairs = analogy::sample_pairs(index_, batch, cfg_.pairs_per_problem, cfg_.levels, pairs_rng_, batch);
      out.pairs = pairs.size();
    }

    if (use_d) {
      disc::NegativeOptions opts;
      opts.gradient_guided = cfg_.flags.grad_guided_on;
      opts.extra_negatives = cfg_.flags.extra_negs_on;

      std::vector<Tensor> xs;
      std::vector<std::size_t> owners;
      std::vector<std::vector<std::vector<int>>> negs;
      for (std::size_t i : batch) {
        const solver::PreparedRecord& p = prepared_.at(i);
        Tensor x = m.problem_vec(p.word_ids);
        disc::NegativeSet set;
        try {
          set = disc::build_negative_set(m.disc, x, train_[i], p.gold_ids, corpus_gold_, m.universe, p.mask,
                                         negatives_rng_, opts);
        } catch (const disc::NoReplaceable&) {
          continue;
        }
        if (set.items.empty()) continue;
        std::vector<std::vector<int>> ids;
        for (disc::Negative& n : set.items) ids.push_back(std::move(n.token_ids));
        out.negatives += ids.size();
        xs.push_back(std::move(x));
        owners.push_back(i);
        negs.push_back(std::move(ids));
      }

      if (!xs.empty()) {
        disc_opt_->zero_grad();
        Tape t(true);
        std::vector<Var> terms;
        for (std::size_t k = 0; k < xs.size(); ++k)
          terms.push_back(disc::discriminator_loss(t, m.disc, t.constant(xs[k]), prepared_[owners[k]].gold_ids, negs[k]));
        const Var loss = core::scale(core::add_scalars(terms), 1.0 / static_cast<double>(terms.size()));
        t.backward(loss);
        disc_opt_->step(lr);
        out.l_disc = loss.item();
      }
    }

    solver_opt_->zero_grad();
    Tape t(true);
    std::vector<Var> seq_terms;
    std::vector<Var> guide_terms;
    std::unordered_map<std::size_t, Var> encodings;
    for (std::size_t i : batch) {
      const solver::PreparedRecord& p = prepared_.at(i);
      const solver::Encoding enc = m.solver.encoder.encode(t, p.word_ids);
      const solver::Encoding dropped = solver::dropout_encoding(enc, cfg_.dropout, dropout_rng_);
      seq_terms.push_back(solver::seq2seq_loss(t, m.solver.decoder, dropped, p.gold_ids, p.mask));
      if (use_a) encodings.emplace(i, enc.problem_vec);
      if (use_d) guide_terms.push_back(disc::guidance_loss(t, m.disc, enc.problem_vec, p.gold_ids));
    }
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    const Var l_seq = core::scale(core::add_scalars(seq_terms), inv_b);
    std::vector<Var> total{l_seq};
    if (use_a) {
      const Var l_a = analogy::analogy_loss(t, pairs, encodings, m.heads);
      out.l_a = l_a.item();
      total.push_back(core::scale(l_a, cfg_.lambda1));
    }
    if (use_d) {
      const Var l_s = core::scale(core::add_scalars(guide_terms), inv_b);
      out.l_s = l_s.item();
      total.push_back(core::scale(l_s, cfg_.lambda2));
    }
    const Var loss = core::add_scalars(total);
    t.backward(loss);
    solver_opt_->step(lr);
    out.l_seq = l_seq.item();
    out.total = loss.item();
  } catch (const core::NumericError& e) {
    std::vector<std::string> ids;
    std::string list;
    for (std::size_t i : batch) {
      ids.push_back(train_[i].id);
      list += (list.empty() ? "" : ",") + train_[i].id;
    }
    throw TrainingAborted(std::string(e.what()) + "; batch ids: " + list, std::move(ids));
  }
  return out;
}

solver::EvalReport Trainer::evaluate_dev() { return evaluate(*bundle_, dev_, cfg_.beam); }

EpochMetrics Trainer::run_epoch(std::size_t epoch) {
  const auto t0 = std::chrono::steady_clock::now();
  EpochMetrics em;
  em.epoch = epoch;
  em.lr = learning_rate(cfg_, epoch);

  std::shuffle(order_.begin(), order_.end(), shuffle_rng_);
  std::size_t n_batches = 0;
  for (std::size_t start = 0; start < order_.size(); start += cfg_.batch_size) {
    const std::size_t len = std::min(cfg_.batch_size, order_.size() - start);
    const StepLosses s = train_step(std::span<const std::size_t>(order_).subspan(start, len), em.lr);
    em.l_seq += s.l_seq;
    em.l_a += s.l_a;
    em.l_s += s.l_s;
    em.l_disc += s.l_disc;
    ++n_batches;
  }
  const double inv = 1.0 / static_cast<double>(n_batches);
  em.l_seq *= inv;
  em.l_a *= inv;
  em.l_s *= inv;
  em.l_disc *= inv;

  if (!dev_.empty() && (epoch % cfg_.eval_every == 0 || epoch == cfg_.epochs)) {
    const solver::EvalReport r = evaluate_dev();
    em.dev_acc = r.accuracy();
    em.buckets = r.buckets;
  }
  em.wall_seconds = seconds_since(t0);
  return em;
}

RunReport Trainer::run(const std::function<void(const EpochMetrics&)>& on_epoch) {
  const auto t0 = std::chrono::steady_clock::now();
  RunReport rep;
  rep.config = cfg_;
  rep.train_size = train_.size();
  rep.dev_size = dev_.size();

  const std::vector<core::Parameter*> params = bundle_->parameters();
  std::vector<Tensor> best;
  for (std::size_t epoch = 1; epoch <= cfg_.epochs; ++epoch) {
    EpochMetrics em = run_epoch(epoch);
    if (on_epoch) on_epoch(em);
    const bool improved = em.dev_acc && (best.empty() || *em.dev_acc > rep.best_dev_acc);
    if (improved) {
      rep.best_epoch = epoch;
      rep.best_dev_acc = *em.dev_acc;
      best.clear();
      for (const core::Parameter* p : params) best.push_back(p->value);
    }
    if (dev_.empty()) rep.best_epoch = epoch;
    const bool stop = em.dev_acc && *em.dev_acc >= cfg_.stop_at_dev_acc;
    rep.epochs.push_back(std::move(em));
    if (stop) break;
  }
  if (!best.empty() && rep.best_epoch != rep.epochs.size()) {
    for (std::size_t k = 0; k < params.size(); ++k) params[k]->value = best[k];
  }
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

TrainResult train(const TrainConfig& cfg, std::vector<corpus::ProblemRecord> train_corpus,
                  std::vector<corpus::ProblemRecord> dev_corpus,
                  const std::function<void(const EpochMetrics&)>& on_epoch) {
  Trainer t(cfg, std::move(train_corpus), std::move(dev_corpus));
  TrainResult out;
  out.report = t.run(on_epoch);
  out.models = t.release_models();
  return out;
}

solver::EvalReport evaluate(ModelBundle& m, std::span<const corpus::ProblemRecord> records, std::size_t beam) {
  return solver::evaluate_corpus(m.solver, records, m.vocab, m.universe, beam,
                                 solver::default_max_len(m.universe.max_slots()));
}

}  // namespace amwp::pipeline
