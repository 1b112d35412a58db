#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "amwp/expr/token.hpp"

namespace amwp::corpus {

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A problem that cannot become a record. reason() is a short stable key
/// such as "unbound-slot"; what() adds detail.
class RecordRejected : public CorpusError {
 public:
  RecordRejected(std::string reason, const std::string& detail)
      : CorpusError(reason + ": " + detail), reason_(std::move(reason)) {}
  const std::string& reason() const { return reason_; }

 private:
  std::string reason_;
};

/// One problem after number mapping, with its gold solution in prefix form.
struct ProblemRecord {
  std::string id;
  std::string text;
  std::vector<std::string> words;
  std::vector<double> slot_values;
  expr::PrefixEquation gold_prefix;
  double gold_answer = 0.0;
  std::size_t n_operators = 0;

  friend bool operator==(const ProblemRecord&, const ProblemRecord&) = default;
};

/// A corpus line before any processing.
struct RawProblem {
  std::string id;
  std::string text;
  std::string equation;
  double answer = 0.0;
};

struct NumberMapping {
  std::vector<std::string> words;
  std::vector<double> slot_values;
};

/// Tokenizes text and replaces every numeric literal, in reading order, by
/// N0, N1, ... Each occurrence gets its own slot; "25%" maps to 0.25.
/// Letters are lower-cased, punctuation becomes separate tokens.
NumberMapping number_map(std::string_view text);

/// Relative tolerance for the gold answer check.
inline constexpr double kAnswerTolerance = 1e-4;

/// Number-maps the text, parses the equation and checks it against the
/// stated answer. Constants must match one of `constants` by symbol and
/// take its value. Throws RecordRejected when the problem cannot become a
/// valid record.
ProblemRecord make_record(const RawProblem& raw, std::span<const expr::Token> constants, std::size_t max_slots);

/// True when every slot is bound and the gold equation evaluates to the
/// gold answer.
bool record_is_consistent(const ProblemRecord& r);

}  // namespace amwp::corpus
