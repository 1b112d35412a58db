#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "amwp/core/graph.hpp"
#include "amwp/core/layers.hpp"
#include "amwp/corpus/record.hpp"
#include "amwp/corpus/vocab.hpp"

namespace amwp::disc {

/// Token embeddings over the decoder universe followed by a GRU; the
/// encoding is the final hidden state.
class SolutionEncoder {
 public:
  SolutionEncoder() = default;
  SolutionEncoder(std::size_t universe_size, std::size_t embed, std::size_t hidden, core::Rng& rng);

  /// Encodes already-gathered token rows (one [E] Var per position).
  core::Var encode_rows(core::Tape& t, std::span<const core::Var> rows);
  /// Throws std::out_of_range for ids outside the universe.
  core::Var encode(core::Tape& t, std::span<const int> token_ids);
  void collect(std::vector<core::Parameter*>& out);

  core::Embedding& embedding() { return tokens_; }
  std::size_t hidden() const { return cell_.hidden(); }

 private:
  core::Embedding tokens_;
  core::GruCell cell_;
};

/// Problem-solution scorer: raw = a^T W b, probability sigmoid(raw).
class Discriminator {
 public:
  Discriminator() = default;
  /// W starts at zero.
  Discriminator(std::size_t universe_size, std::size_t embed, std::size_t hidden, core::Rng& rng);

  SolutionEncoder solution;

  /// Throws ShapeError unless both inputs are [H].
  core::Var score(core::Tape& t, core::Var problem_vec, core::Var solution_vec);
  std::vector<core::Parameter*> parameters();
  core::Parameter& bilinear() { return w_; }
  std::size_t hidden() const { return w_.value.shape[0]; }

 private:
  core::Parameter w_;
};

struct Discrimination {
  double raw = 0.0;
  double prob = 0.5;
};

/// Evaluation-mode score of a problem vector against an equation.
Discrimination discriminate(Discriminator& d, const core::Tensor& problem_vec, std::span<const int> token_ids);

class NoReplaceable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Positions whose token has at least one same-type alternative under the
/// mask: operators always, slots and constants when another operand token
/// is allowed.
std::vector<std::size_t> replaceable_positions(std::span<const int> token_ids, const corpus::DecoderUniverse& universe,
                                               std::span<const std::uint8_t> mask);

struct VulnerableToken {
  std::size_t position = 0;
  /// L2 norm of d(raw score)/d(embedding row) for every position.
  std::vector<double> grad_norms;
};

/// Replaceable position with the largest gradient norm of the raw score
/// with respect to its token embedding; ties go to the lowest index.
/// Leaves every parameter gradient untouched. Throws NoReplaceable.
VulnerableToken select_vulnerable_token(Discriminator& d, const core::Tensor& problem_vec, std::span<const int> token_ids,
                                        const corpus::DecoderUniverse& universe, std::span<const std::uint8_t> mask);

/// One equation per same-type alternative at `pos` (the original token excluded).
std::vector<std::vector<int>> enumerate_negatives(std::span<const int> token_ids, std::size_t pos,
                                                  const corpus::DecoderUniverse& universe,
                                                  std::span<const std::uint8_t> mask);

/// Gold equation of a uniformly drawn corpus problem whose tokens are all
/// allowed by `mask` and which differs from `gold_ids`; nullopt after
/// max_tries rejected draws.
std::optional<std::vector<int>> sample_random_negative(std::span<const int> gold_ids,
                                                       std::span<const std::vector<int>> corpus_gold_ids,
                                                       std::span<const std::uint8_t> mask, core::Rng& rng,
                                                       std::size_t max_tries = 50);

enum class Provenance { GoldVariant, Random, RandomVariant };
const char* provenance_name(Provenance p);

struct Negative {
  std::vector<int> token_ids;
  Provenance provenance = Provenance::GoldVariant;
};

struct NegativeSet {
  std::vector<Negative> items;
  /// Vulnerable positions chosen in the gold and random equations, when any.
  std::optional<std::size_t> gold_position;
  std::optional<std::size_t> random_position;
};

struct NegativeOptions {
  /// Pick the replaced position by gradient; otherwise uniformly among
  /// replaceable positions.
  bool gradient_guided = true;
  /// Add a random corpus equation and its variants.
  bool extra_negatives = true;
  std::size_t max_tries = 50;
};

/// Relative tolerance under which a negative counts as reaching the gold answer.
inline constexpr double kValueCollision = 1e-6;

/// Gold variants, then the random negative and its variants. Duplicates,
/// copies of the gold sequence and equations that evaluate to the gold
/// answer are dropped. Throws NoReplaceable when neither the gold nor the
/// random equation has a replaceable position.
NegativeSet build_negative_set(Discriminator& d, const core::Tensor& problem_vec, const corpus::ProblemRecord& record,
                               std::span<const int> gold_ids, std::span<const std::vector<int>> corpus_gold_ids,
                               const corpus::DecoderUniverse& universe, std::span<const std::uint8_t> mask,
                               core::Rng& rng, const NegativeOptions& opts = {});

/// -log sigmoid(score(x, gold)) - mean over negatives of log(1 - sigmoid(score(x, neg))).
/// Throws std::invalid_argument for an empty negative list.
core::Var discriminator_loss(core::Tape& t, Discriminator& d, core::Var problem_vec, std::span<const int> gold_ids,
                             std::span<const std::vector<int>> negatives);

/// -log sigmoid(score(x, gold)) with the discriminator frozen on this tape,
/// so gradients reach only whatever produced problem_vec.
core::Var guidance_loss(core::Tape& t, Discriminator& d, core::Var problem_vec, std::span<const int> gold_ids);

}  // namespace amwp::disc
