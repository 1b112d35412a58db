#include "amwp/corpus/record.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "amwp/expr/infix.hpp"
#include "amwp/expr/tree.hpp"

namespace amwp::corpus {

namespace {

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalpha(u) || u >= 0x80 || c == '\'';
}

}  // namespace

NumberMapping number_map(std::string_view text) {
  NumberMapping out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (is_digit(c)) {
      std::size_t j = i;
      while (j < text.size() && is_digit(text[j])) ++j;
      if (j + 1 < text.size() && text[j] == '.' && is_digit(text[j + 1])) {
        ++j;
        while (j < text.size() && is_digit(text[j])) ++j;
      }
      double v = 0.0;
      std::from_chars(text.data() + i, text.data() + j, v);
      if (j < text.size() && text[j] == '%') {
        v /= 100.0;
        ++j;
      }
      out.words.push_back("N" + std::to_string(out.slot_values.size()));
      out.slot_values.push_back(v);
      i = j;
    } else if (is_word_char(c)) {
      std::size_t j = i;
      while (j < text.size() && (is_word_char(text[j]) || is_digit(text[j]))) ++j;
      std::string w(text.substr(i, j - i));
      std::transform(w.begin(), w.end(), w.begin(), [](char ch) {
        return static_cast<unsigned char>(ch) < 0x80 ? static_cast<char>(std::tolower(ch)) : ch;
      });
      out.words.push_back(std::move(w));
      i = j;
    } else {
      out.words.emplace_back(1, c);
      ++i;
    }
  }
  return out;
}

ProblemRecord make_record(const RawProblem& raw, std::span<const expr::Token> constants, std::size_t max_slots) {
  NumberMapping m = number_map(raw.text);
  if (m.slot_values.size() > max_slots)
    throw RecordRejected("too-many-numbers",
                         std::to_string(m.slot_values.size()) + " > " + std::to_string(max_slots));
  if (m.words.empty()) throw RecordRejected("empty-text", raw.id);

  expr::PrefixEquation eq;
  try {
    eq = expr::tree_to_prefix(expr::parse_infix(raw.equation, m.slot_values));
  } catch (const expr::ParseError& e) {
    throw RecordRejected("unparsable-equation", e.what());
  }
  for (expr::Token& t : eq) {
    if (t.kind() == expr::Token::Kind::Slot) {
      if (static_cast<std::size_t>(t.slot_index()) >= m.slot_values.size())
        throw RecordRejected("unbound-slot", t.text() + " with " + std::to_string(m.slot_values.size()) +
                                                   " numbers in the text");
    } else if (t.kind() == expr::Token::Kind::Constant) {
      auto it = std::find(constants.begin(), constants.end(), t);
      if (it == constants.end()) throw RecordRejected("unknown-number", t.symbol() + " is neither in the text nor a constant");
      t = *it;
    }
  }

  ProblemRecord r;
  r.id = raw.id;
  r.text = raw.text;
  r.words = std::move(m.words);
  r.slot_values = std::move(m.slot_values);
  r.gold_prefix = std::move(eq);
  r.gold_answer = raw.answer;
  r.n_operators = expr::count_operators(r.gold_prefix);
  if (!record_is_consistent(r)) throw RecordRejected("answer-mismatch", raw.id);
  return r;
}

bool record_is_consistent(const ProblemRecord& r) {
  if (!expr::validate_prefix(r.gold_prefix)) return false;
  try {
    return expr::rel_close(expr::evaluate(r.gold_prefix, r.slot_values), r.gold_answer, kAnswerTolerance);
  } catch (const expr::EvalError&) {
    return false;
  }
}

}  // namespace amwp::corpus
