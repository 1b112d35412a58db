#include "amwp/disc/discriminator.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "amwp/expr/tree.hpp"

namespace amwp::disc {

using core::Var;

SolutionEncoder::SolutionEncoder(std::size_t universe_size, std::size_t embed, std::size_t hidden, core::Rng& rng)
    : tokens_("disc.tokens", universe_size, embed, rng), cell_("disc.cell", embed, hidden, rng) {}

Var SolutionEncoder::encode_rows(core::Tape& t, std::span<const Var> rows) {
  if (rows.empty()) throw std::invalid_argument("cannot encode an empty equation");
  Var h = cell_.zero_state(t);
  for (const Var& x : rows) h = cell_.step(t, x, h);
  return h;
}

Var SolutionEncoder::encode(core::Tape& t, std::span<const int> token_ids) {
  for (int id : token_ids)
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.rows())
      throw std::out_of_range("solution token id " + std::to_string(id) + " outside the universe");
  const std::vector<Var> rows = tokens_.lookup(t, token_ids);
  return encode_rows(t, rows);
}

void SolutionEncoder::collect(std::vector<core::Parameter*>& out) {
  tokens_.collect(out);
  cell_.collect(out);
}

Discriminator::Discriminator(std::size_t universe_size, std::size_t embed, std::size_t hidden, core::Rng& rng)
    : solution(universe_size, embed, hidden, rng), w_("disc.bilinear", core::Tensor::zeros(core::Shape{hidden, hidden})) {}

Var Discriminator::score(core::Tape& t, Var problem_vec, Var solution_vec) {
  const core::Shape h{hidden()};
  if (!(problem_vec.shape() == h) || !(solution_vec.shape() == h))
    throw core::ShapeError("discriminator: expected " + h.str() + " inputs, got " + problem_vec.shape().str() + " and " +
                           solution_vec.shape().str());
  return core::dot(core::matmul(problem_vec, t.param(w_)), solution_vec);
}

std::vector<core::Parameter*> Discriminator::parameters() {
  std::vector<core::Parameter*> out;
  solution.collect(out);
  out.push_back(&w_);
  return out;
}

Discrimination discriminate(Discriminator& d, const core::Tensor& problem_vec, std::span<const int> token_ids) {
  core::Tape t(false);
  const double raw = d.score(t, t.constant(problem_vec), d.solution.encode(t, token_ids)).item();
  return {raw, 1.0 / (1.0 + std::exp(-raw))};
}

namespace {

bool is_operator_id(int id) { return id < static_cast<int>(expr::kOperators.size()); }

std::vector<int> allowed_operands(const corpus::DecoderUniverse& universe, std::span<const std::uint8_t> mask) {
  std::vector<int> out;
  for (std::size_t i = expr::kOperators.size(); i < universe.size(); ++i)
    if (mask.empty() || mask[i]) out.push_back(static_cast<int>(i));
  return out;
}

std::size_t pick_position(Discriminator& d, const core::Tensor& problem_vec, std::span<const int> ids,
                          const corpus::DecoderUniverse& universe, std::span<const std::uint8_t> mask, core::Rng& rng,
                          bool gradient_guided) {
  if (gradient_guided) return select_vulnerable_token(d, problem_vec, ids, universe, mask).position;
  const auto positions = replaceable_positions(ids, universe, mask);
  if (positions.empty()) throw NoReplaceable("no replaceable position");
  return positions[std::uniform_int_distribution<std::size_t>(0, positions.size() - 1)(rng)];
}

}  // namespace

std::vector<std::size_t> replaceable_positions(std::span<const int> token_ids, const corpus::DecoderUniverse& universe,
                                               std::span<const std::uint8_t> mask) {
  const bool operand_choice = allowed_operands(universe, mask).size() >= 2;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < token_ids.size(); ++i)
    if (is_operator_id(token_ids[i]) || operand_choice) out.push_back(i);
  return out;
}

VulnerableToken select_vulnerable_token(Discriminator& d, const core::Tensor& problem_vec, std::span<const int> token_ids,
                                        const corpus::DecoderUniverse& universe, std::span<const std::uint8_t> mask) {
  const auto positions = replaceable_positions(token_ids, universe, mask);
  if (positions.empty()) throw NoReplaceable("no replaceable position in " + std::to_string(token_ids.size()) + " tokens");

  // Each position gets its own copy of its embedding row as a leaf, so
  // repeated tokens get separate gradients and the real parameters stay
  // frozen.
  core::Tape t(false);
  const auto params = d.parameters();
  t.freeze(params);
  const core::Tensor& table = d.solution.embedding().table().value;
  const std::size_t dim = table.cols();
  std::vector<core::Parameter> rows;
  rows.reserve(token_ids.size());
  for (int id : token_ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= table.rows())
      throw std::out_of_range("solution token id " + std::to_string(id) + " outside the universe");
    const auto begin = table.values.begin() + static_cast<long>(static_cast<std::size_t>(id) * dim);
    rows.emplace_back("row", core::Tensor::vector(std::vector<double>(begin, begin + static_cast<long>(dim))));
  }
  std::vector<Var> vars;
  for (auto& r : rows) vars.push_back(t.param(r));
  t.backward(d.score(t, t.constant(problem_vec), d.solution.encode_rows(t, vars)));

  VulnerableToken out;
  for (const auto& r : rows) {
    double s = 0.0;
    for (double g : r.grad.values) s += g * g;
    out.grad_norms.push_back(std::sqrt(s));
  }
  out.position = positions.front();
  for (std::size_t p : positions)
    if (out.grad_norms[p] > out.grad_norms[out.position]) out.position = p;
  return out;
}

std::vector<std::vector<int>> enumerate_negatives(std::span<const int> token_ids, std::size_t pos,
                                                  const corpus::DecoderUniverse& universe,
                                                  std::span<const std::uint8_t> mask) {
  const int original = token_ids[pos];
  std::vector<int> alternatives;
  if (is_operator_id(original)) {
    for (std::size_t o = 0; o < expr::kOperators.size(); ++o) alternatives.push_back(static_cast<int>(o));
  } else {
    alternatives = allowed_operands(universe, mask);
  }
  std::vector<std::vector<int>> out;
  for (int alt : alternatives) {
    if (alt == original) continue;
    std::vector<int> neg(token_ids.begin(), token_ids.end());
    neg[pos] = alt;
    out.push_back(std::move(neg));
  }
  return out;
}

std::optional<std::vector<int>> sample_random_negative(std::span<const int> gold_ids,
                                                       std::span<const std::vector<int>> corpus_gold_ids,
                                                       std::span<const std::uint8_t> mask, core::Rng& rng,
                                                       std::size_t max_tries) {
  if (corpus_gold_ids.empty()) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick(0, corpus_gold_ids.size() - 1);
  for (std::size_t i = 0; i < max_tries; ++i) {
    const auto& cand = corpus_gold_ids[pick(rng)];
    if (std::equal(cand.begin(), cand.end(), gold_ids.begin(), gold_ids.end())) continue;
    const bool subset = std::all_of(cand.begin(), cand.end(), [&](int id) {
      return id >= 0 && static_cast<std::size_t>(id) < mask.size() && mask[static_cast<std::size_t>(id)];
    });
    if (subset) return cand;
  }
  return std::nullopt;
}

const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::GoldVariant:
      return "gt-variant";
    case Provenance::Random:
      return "random";
    case Provenance::RandomVariant:
      return "random-variant";
  }
  return "?";
}

NegativeSet build_negative_set(Discriminator& d, const core::Tensor& problem_vec, const corpus::ProblemRecord& record,
                               std::span<const int> gold_ids, std::span<const std::vector<int>> corpus_gold_ids,
                               const corpus::DecoderUniverse& universe, std::span<const std::uint8_t> mask,
                               core::Rng& rng, const NegativeOptions& opts) {
  NegativeSet out;
  std::set<std::vector<int>> seen{std::vector<int>(gold_ids.begin(), gold_ids.end())};
  auto add = [&](std::vector<int> ids, Provenance prov) {
    if (seen.count(ids)) return;
    expr::PrefixEquation eq;
    for (int id : ids) eq.push_back(universe.token(static_cast<std::size_t>(id)));
    try {
      if (expr::rel_close(expr::evaluate(eq, record.slot_values), record.gold_answer, kValueCollision)) return;
    } catch (const expr::EvalError&) {
      // an equation that cannot be evaluated cannot reach the gold answer
    }
    seen.insert(ids);
    out.items.push_back({std::move(ids), prov});
  };

  bool any_branch = false;
  try {
    const std::size_t pos = pick_position(d, problem_vec, gold_ids, universe, mask, rng, opts.gradient_guided);
    out.gold_position = pos;
    for (auto& n : enumerate_negatives(gold_ids, pos, universe, mask)) add(std::move(n), Provenance::GoldVariant);
    any_branch = true;
  } catch (const NoReplaceable&) {
  }

  if (opts.extra_negatives) {
    if (auto rnd = sample_random_negative(gold_ids, corpus_gold_ids, mask, rng, opts.max_tries)) {
      add(*rnd, Provenance::Random);
      try {
        const std::size_t pos = pick_position(d, problem_vec, *rnd, universe, mask, rng, opts.gradient_guided);
        out.random_position = pos;
        for (auto& n : enumerate_negatives(*rnd, pos, universe, mask)) add(std::move(n), Provenance::RandomVariant);
        any_branch = true;
      } catch (const NoReplaceable&) {
      }
    }
  }
  if (!any_branch) throw NoReplaceable("record " + record.id + ": no replaceable position in gold or random equation");
  return out;
}

Var discriminator_loss(core::Tape& t, Discriminator& d, Var problem_vec, std::span<const int> gold_ids,
                       std::span<const std::vector<int>> negatives) {
  if (negatives.empty()) throw std::invalid_argument("discriminator_loss: no negatives");
  const Var pos = core::log_sigmoid(d.score(t, problem_vec, d.solution.encode(t, gold_ids)));
  std::vector<Var> neg;
  neg.reserve(negatives.size());
  for (const auto& n : negatives)
    neg.push_back(core::log_sigmoid(core::scale(d.score(t, problem_vec, d.solution.encode(t, n)), -1.0)));
  const Var neg_mean = core::scale(core::add_scalars(neg), 1.0 / static_cast<double>(neg.size()));
  const Var parts[] = {pos, neg_mean};
  return core::scale(core::add_scalars(parts), -1.0);
}

Var guidance_loss(core::Tape& t, Discriminator& d, Var problem_vec, std::span<const int> gold_ids) {
  std::vector<core::Parameter*> unfrozen;
  for (auto* p : d.parameters())
    if (!t.frozen(*p)) unfrozen.push_back(p);
  t.freeze(unfrozen);
  return core::scale(core::log_sigmoid(d.score(t, problem_vec, d.solution.encode(t, gold_ids))), -1.0);
}

}  // namespace amwp::disc
