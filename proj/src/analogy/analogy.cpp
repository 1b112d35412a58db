#include "amwp/analogy/analogy.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

namespace amwp::analogy {

SignatureIndex::SignatureIndex(std::span<const expr::PrefixEquation> equations, std::size_t max_level,
                               bool strict_left_child)
    : size_(equations.size()), signatures_(max_level), buckets_(max_level) {
  for (std::size_t k = 1; k <= max_level; ++k) {
    auto& sigs = signatures_[k - 1];
    sigs.reserve(size_);
    for (std::size_t i = 0; i < size_; ++i) {
      sigs.push_back(expr::signature(equations[i], k, strict_left_child));
      if (sigs.back()) buckets_[k - 1][*sigs.back()].push_back(i);
    }
  }
}

const std::optional<OperatorSignature>& SignatureIndex::signature(std::size_t level, std::size_t problem) const {
  if (level < 1 || level > max_level()) throw std::out_of_range("signature level " + std::to_string(level));
  return signatures_[level - 1].at(problem);
}

const std::map<OperatorSignature, std::vector<std::size_t>>& SignatureIndex::buckets(std::size_t level) const {
  if (level < 1 || level > max_level()) throw std::out_of_range("signature level " + std::to_string(level));
  return buckets_[level - 1];
}

std::span<const std::size_t> SignatureIndex::bucket_of(std::size_t level, std::size_t problem) const {
  const auto& sig = signature(level, problem);
  if (!sig) return {};
  return buckets_[level - 1].at(*sig);
}

SignatureIndex build_index(std::span<const corpus::ProblemRecord> records, std::size_t max_level,
                           bool strict_left_child) {
  std::vector<expr::PrefixEquation> eqs;
  eqs.reserve(records.size());
  for (const auto& r : records) eqs.push_back(r.gold_prefix);
  return SignatureIndex(eqs, max_level, strict_left_child);
}

std::size_t PairBatch::size() const {
  std::size_t n = 0;
  for (const auto& [level, pairs] : by_level) n += pairs.size();
  return n;
}

std::size_t PairBatch::count(bool positive) const {
  std::size_t n = 0;
  for (const auto& [level, pairs] : by_level)
    n += static_cast<std::size_t>(std::count_if(pairs.begin(), pairs.end(),
                                                [&](const Pair& p) { return p.positive == positive; }));
  return n;
}

namespace {

// Moves up to n uniformly chosen elements to the front of v.
void partial_shuffle(std::vector<std::size_t>& v, std::size_t n, core::Rng& rng) {
  n = std::min(n, v.size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(i, v.size() - 1)(rng);
    std::swap(v[i], v[j]);
  }
  v.resize(n);
}

}  // namespace

PairBatch sample_pairs(const SignatureIndex& index, std::span<const std::size_t> batch, std::size_t per_problem,
                       std::span<const std::size_t> levels, core::Rng& rng, std::span<const std::size_t> pool) {
  if (per_problem < 1) throw std::invalid_argument("per_problem must be at least 1");
  std::vector<std::size_t> candidates(pool.begin(), pool.end());
  if (pool.empty())
    for (std::size_t i = 0; i < index.size(); ++i) candidates.push_back(i);

  PairBatch out;
  for (std::size_t level : levels) {
    std::set<Pair> seen;
    auto& pairs = out.by_level[level];
    auto keep = [&](std::size_t x, std::size_t y, bool positive) {
      const Pair p{std::min(x, y), std::max(x, y), positive};
      if (seen.insert(p).second) pairs.push_back(p);
    };
    for (std::size_t i : batch) {
      const auto& sig = index.signature(level, i);
      if (!sig) continue;
      std::vector<std::size_t> pos, neg;
      for (std::size_t j : candidates) {
        if (j == i) continue;
        const auto& other = index.signature(level, j);
        if (!other) continue;
        (*other == *sig ? pos : neg).push_back(j);
      }
      partial_shuffle(pos, per_problem, rng);
      partial_shuffle(neg, per_problem, rng);
      for (std::size_t j : pos) keep(i, j, true);
      for (std::size_t j : neg) keep(i, j, false);
    }
  }
  return out;
}

AnalogyHeads::AnalogyHeads(std::size_t hidden, std::span<const std::size_t> levels, core::Rng& rng) {
  for (std::size_t level : levels)
    heads_.emplace(level, core::ScoringMlp("analogy.top" + std::to_string(level), 2 * hidden, hidden, rng));
}

core::ScoringMlp& AnalogyHeads::head(std::size_t level) {
  auto it = heads_.find(level);
  if (it == heads_.end()) throw std::out_of_range("no analogy head for level " + std::to_string(level));
  return it->second;
}

std::vector<std::size_t> AnalogyHeads::levels() const {
  std::vector<std::size_t> out;
  for (const auto& [level, head] : heads_) out.push_back(level);
  return out;
}

void AnalogyHeads::collect(std::vector<core::Parameter*>& out) {
  for (auto& [level, head] : heads_) head.collect(out);
}

core::Var analogy_logit(core::Tape& t, core::Var h1, core::Var h2, core::ScoringMlp& head) {
  if (h1.shape().rank() != 1 || !(h1.shape() == h2.shape()) || 2 * h1.shape()[0] != head.in_dim())
    throw core::ShapeError("analogy_logit: encodings " + h1.shape().str() + " and " + h2.shape().str() +
                           " do not fit a head of input " + std::to_string(head.in_dim()));
  const core::Var parts[] = {h1, h2};
  return head.forward(t, core::concat(parts));
}

core::Var analogy_score(core::Tape& t, core::Var h1, core::Var h2, core::ScoringMlp& head) {
  return core::sigmoid(analogy_logit(t, h1, h2, head));
}

core::Var analogy_loss(core::Tape& t, const PairBatch& pairs, const std::unordered_map<std::size_t, core::Var>& encodings,
                       AnalogyHeads& heads) {
  auto enc = [&](std::size_t i) {
    auto it = encodings.find(i);
    if (it == encodings.end()) throw std::invalid_argument("analogy_loss: problem " + std::to_string(i) + " not encoded");
    return it->second;
  };
  std::vector<core::Var> level_losses;
  for (const auto& [level, list] : pairs.by_level) {
    if (list.empty()) continue;
    core::ScoringMlp& head = heads.head(level);
    std::vector<core::Var> pos, neg;
    for (const Pair& p : list) {
      const core::Var logit = analogy_logit(t, enc(p.a), enc(p.b), head);
      // -log s = -log_sigmoid(z); -log(1 - s) = -log_sigmoid(-z)
      if (p.positive) pos.push_back(core::log_sigmoid(logit));
      else neg.push_back(core::log_sigmoid(core::scale(logit, -1.0)));
    }
    for (const auto* group : {&pos, &neg})
      if (!group->empty())
        level_losses.push_back(core::scale(core::add_scalars(*group), -1.0 / static_cast<double>(group->size())));
  }
  if (level_losses.empty()) return t.constant(core::Tensor::scalar(0.0));
  return core::add_scalars(level_losses);
}

}  // namespace amwp::analogy
