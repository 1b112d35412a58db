#include "amwp/corpus/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <random>
#include <string_view>

#include "amwp/expr/infix.hpp"
#include "amwp/expr/tree.hpp"

namespace amwp::corpus {

namespace {

using expr::Operator;

struct Topic {
  std::string_view name;
  std::string_view unit;
  std::string_view group;
  std::array<std::string_view, 5> subjects;
};

constexpr std::array<Topic, 3> kTopics = {{
    {"shopping", "dollars", "bags", {"Tom", "Anna", "Li", "Maria", "Sam"}},
    {"travel", "km", "days", {"Ken", "Rosa", "Omar", "Jing", "Paul"}},
    {"containers", "apples", "boxes", {"Mia", "Ivan", "Lucy", "Ben", "Nora"}},
}};

// {s} subject, {u} unit, {c} group noun. {L}/{R} render an operand bare,
// {L:u}/{R:c} etc. append the noun when the operand is a number.
struct Templates {
  std::vector<std::string_view> statements;
  std::vector<std::string_view> questions;
};

const Templates& templates_for(Operator op) {
  static const std::array<Templates, 5> table = {{
      {{"{s} has {L:u} and then gets {R:u} more .", "{s} adds {R:u} to {L:u} ."},
       {"how many {u} does {s} have with {L:u} and {R:u} more ?", "what is the total of {L:u} and {R:u} ?"}},
      {{"{s} has {L:u} and spends {R:u} .", "{s} takes {R:u} away from {L:u} ."},
       {"how many {u} are left when {s} uses {R:u} out of {L:u} ?",
        "{s} has {L:u} and loses {R:u} . how many {u} remain ?"}},
      {{"{s} fills {L:c} with {R:u} in each .", "each of {R:c} holds {L:u} for {s} ."},
       {"how many {u} are in {L:c} with {R:u} each ?", "what is {L} times {R} ?"}},
      {{"{s} shares {L:u} equally among {R:c} .", "{R:c} split {L:u} evenly for {s} ."},
       {"how many {u} does each of {R:c} get if {s} shares {L:u} equally ?",
        "what is {L:u} divided into {R} equal parts ?"}},
      {{"{s} raises {L} to the power {R} ."}, {"what is {L} raised to the power {R} ?"}},
  }};
  return table[static_cast<std::size_t>(op)];
}

constexpr std::array<std::string_view, 3> kDistractors = {
    "{s} is {D} years old .", "there are {D} people in the queue .", "the weather is {D} degrees today ."};

constexpr std::array<std::string_view, 3> kOrdinals = {"first", "second", "third"};

struct Node {
  bool leaf = true;
  Operator op = Operator::Add;
  int left = -1;
  int right = -1;
  double value = 0.0;
  bool is_one = false;  // constant 1 rather than a number from the text
  int ordinal = -1;     // statement order for non-root operator nodes
};

class Generator {
 public:
  Generator(const SyntheticConfig& cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) {}

  std::vector<Node> nodes;

  int shape(std::size_t n_ops) {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    if (n_ops == 0) return id;
    const std::size_t k = std::uniform_int_distribution<std::size_t>(0, n_ops - 1)(rng_);
    const int l = shape(k);
    const int r = shape(n_ops - 1 - k);
    Node& n = nodes[static_cast<std::size_t>(id)];
    n.leaf = false;
    n.left = l;
    n.right = r;
    const bool right_leaf = nodes[static_cast<std::size_t>(r)].leaf;
    std::discrete_distribution<int> pick(right_leaf ? std::initializer_list<double>{25, 25, 22, 22, 6}
                                                    : std::initializer_list<double>{25, 25, 25, 25, 0});
    n.op = static_cast<Operator>(pick(rng_));
    return id;
  }

  // Distinct values for every number that appears in the text.
  bool assign_values() {
    std::vector<double> used;
    auto fresh = [&](double v) { return std::find(used.begin(), used.end(), v) == used.end(); };
    for (Node& n : nodes) {
      if (n.leaf) continue;
      Node& r = nodes[static_cast<std::size_t>(n.right)];
      if (!r.leaf) continue;
      if (n.op == Operator::Pow) {
        r.value = std::uniform_int_distribution<int>(2, 3)(rng_);
        if (!fresh(r.value)) return false;
        used.push_back(r.value);
      } else if ((n.op == Operator::Add || n.op == Operator::Sub) && unit_(rng_) < cfg_.constant_prob) {
        r.is_one = true;
        r.value = 1.0;
      }
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      Node& n = nodes[i];
      if (!n.leaf || n.is_one || is_exponent(i)) continue;
      for (int tries = 0;; ++tries) {
        if (tries > 50) return false;
        const double v = number();
        if (fresh(v)) {
          n.value = v;
          used.push_back(v);
          break;
        }
      }
    }
    used_ = used;
    return true;
  }

  double distractor() {
    for (;;) {
      const double v = std::uniform_int_distribution<int>(2, 90)(rng_);
      if (std::find(used_.begin(), used_.end(), v) == used_.end()) return v;
    }
  }

  double number() {
    const int base = std::uniform_int_distribution<int>(2, 60)(rng_);
    return unit_(rng_) < 0.2 ? base + 0.5 : base;
  }

  expr::ExprTree tree(int id) const {
    const Node& n = nodes[static_cast<std::size_t>(id)];
    if (n.leaf) return expr::ExprTree::leaf(expr::Token::constant(n.value));
    return expr::ExprTree::node(n.op, tree(n.left), tree(n.right));
  }

  std::mt19937_64& rng() { return rng_; }
  double uniform() { return unit_(rng_); }

 private:
  bool is_exponent(std::size_t i) const {
    for (const Node& n : nodes)
      if (!n.leaf && n.op == Operator::Pow && n.right == static_cast<int>(i)) return true;
    return false;
  }

  const SyntheticConfig& cfg_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::vector<double> used_;
};

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t p = s.find(from); p != std::string::npos; p = s.find(from, p + to.size()))
    s.replace(p, from.size(), to);
}

std::string operand(const Node& n, std::string_view noun) {
  if (!n.leaf) return "the " + std::string(kOrdinals.at(static_cast<std::size_t>(n.ordinal))) + " amount";
  std::string text = n.is_one ? "one" : expr::format_number(n.value);
  if (!noun.empty()) text += " " + std::string(noun);
  return text;
}

std::string render(std::string_view tmpl, const Node& l, const Node& r, const Topic& topic, std::string_view subject) {
  std::string s(tmpl);
  replace_all(s, "{L:u}", operand(l, topic.unit));
  replace_all(s, "{L:c}", operand(l, topic.group));
  replace_all(s, "{R:u}", operand(r, topic.unit));
  replace_all(s, "{R:c}", operand(r, topic.group));
  replace_all(s, "{L}", operand(l, {}));
  replace_all(s, "{R}", operand(r, {}));
  replace_all(s, "{u}", topic.unit);
  replace_all(s, "{c}", topic.group);
  replace_all(s, "{s}", subject);
  return s;
}

std::string capitalise(std::string s) {
  for (std::size_t i = 0; i < s.size(); ++i)
    if (i == 0 || (i >= 2 && s[i - 2] == '.' && s[i - 1] == ' '))
      s[i] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[i])));
  return s;
}

void validate(const SyntheticConfig& cfg) {
  if (cfg.max_ops < 1 || cfg.max_ops > 4) throw CorpusError("max_ops must be in 1..4");
  if (cfg.op_count_pct.size() < cfg.max_ops) throw CorpusError("op_count_pct needs one entry per operator count");
  double total = 0.0;
  for (std::size_t i = 0; i < cfg.max_ops; ++i) {
    if (!(cfg.op_count_pct[i] >= 0.0)) throw CorpusError("op_count_pct entries must be non-negative");
    total += cfg.op_count_pct[i];
  }
  if (total <= 0.0) throw CorpusError("op_count_pct sums to zero");
  if (cfg.topics.empty()) throw CorpusError("no topics");
  for (const auto& t : cfg.topics)
    if (std::none_of(kTopics.begin(), kTopics.end(), [&](const Topic& k) { return k.name == t; }))
      throw CorpusError("unknown topic " + t);
  if (!(cfg.distractor_prob >= 0.0 && cfg.distractor_prob <= 1.0) ||
      !(cfg.constant_prob >= 0.0 && cfg.constant_prob <= 1.0))
    throw CorpusError("probabilities must lie in [0, 1]");
}

}  // namespace

std::vector<ProblemRecord> generate_synthetic(const SyntheticConfig& cfg, const DecoderUniverse& universe) {
  validate(cfg);
  std::vector<const Topic*> topics;
  for (const auto& t : cfg.topics)
    topics.push_back(&*std::find_if(kTopics.begin(), kTopics.end(), [&](const Topic& k) { return k.name == t; }));

  std::mt19937_64 master(cfg.seed);
  std::discrete_distribution<std::size_t> op_count(cfg.op_count_pct.begin(),
                                                   cfg.op_count_pct.begin() + static_cast<long>(cfg.max_ops));
  std::vector<ProblemRecord> out;
  out.reserve(cfg.n_problems);
  for (std::size_t i = 0; i < cfg.n_problems; ++i) {
    const std::size_t n_ops = op_count(master) + 1;
    Generator g(cfg, master());
    const Topic& topic = *topics[std::uniform_int_distribution<std::size_t>(0, topics.size() - 1)(g.rng())];
    const std::string subject(topic.subjects[std::uniform_int_distribution<std::size_t>(0, 4)(g.rng())]);

    // Resample values (and shape) until the equation evaluates cleanly.
    expr::ExprTree tree;
    double answer = 0.0;
    for (;;) {
      g.nodes.clear();
      g.shape(n_ops);
      if (!g.assign_values()) continue;
      tree = g.tree(0);
      try {
        answer = expr::evaluate(tree, std::span<const double>{});
      } catch (const expr::EvalError&) {
        continue;
      }
      if (std::abs(answer) < 1e6) break;
    }

    // Post-order statements; the root becomes the question.
    std::vector<std::string> sentences;
    int next_ordinal = 0;
    auto emit = [&](auto& self, int id) -> void {
      Node& n = g.nodes[static_cast<std::size_t>(id)];
      if (n.leaf) return;
      self(self, n.left);
      self(self, n.right);
      const Templates& t = templates_for(n.op);
      const auto& pool = id == 0 ? t.questions : t.statements;
      const auto tmpl = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(g.rng())];
      sentences.push_back(render(tmpl, g.nodes[static_cast<std::size_t>(n.left)],
                                 g.nodes[static_cast<std::size_t>(n.right)], topic, subject));
      if (id != 0) n.ordinal = next_ordinal++;
    };
    emit(emit, 0);
    if (g.uniform() < cfg.distractor_prob) {
      std::string d(kDistractors[std::uniform_int_distribution<std::size_t>(0, kDistractors.size() - 1)(g.rng())]);
      replace_all(d, "{D}", expr::format_number(g.distractor()));
      replace_all(d, "{s}", subject);
      const std::size_t at = std::uniform_int_distribution<std::size_t>(0, sentences.size() - 1)(g.rng());
      sentences.insert(sentences.begin() + static_cast<long>(at), d);
    }

    RawProblem raw;
    raw.id = cfg.id_prefix + "-" + std::to_string(cfg.seed) + "-" + std::to_string(i);
    for (const auto& s : sentences) {
      if (!raw.text.empty()) raw.text += ' ';
      raw.text += capitalise(s);
    }
    raw.equation = expr::to_infix(tree);
    raw.answer = answer;
    out.push_back(make_record(raw, universe.constants(), universe.max_slots()));
  }
  return out;
}

}  // namespace amwp::corpus
