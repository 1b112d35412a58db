#include "amwp/pipeline/embeddings.hpp"

#include <algorithm>
#include <array>

#include "amwp/expr/signature.hpp"

namespace amwp::pipeline {

std::vector<EmbeddingRow> export_embeddings(ModelBundle& m, std::span<const corpus::ProblemRecord> records,
                                            std::size_t n, std::uint64_t seed) {
  constexpr std::array<expr::Operator, 4> kClasses = {expr::Operator::Add, expr::Operator::Sub, expr::Operator::Mul,
                                                      expr::Operator::Div};
  std::array<std::vector<std::size_t>, 4> members;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto sig = expr::signature(records[i].gold_prefix, 1);
    if (!sig) continue;
    for (std::size_t c = 0; c < kClasses.size(); ++c)
      if (sig->ops[0] == kClasses[c]) members[c].push_back(i);
  }
  core::Rng rng(seed);
  for (auto& v : members) std::shuffle(v.begin(), v.end(), rng);

  std::vector<std::size_t> picked;
  for (std::size_t round = 0; picked.size() < n; ++round) {
    bool any = false;
    for (std::size_t c = 0; c < kClasses.size() && picked.size() < n; ++c) {
      if (round < members[c].size()) {
        picked.push_back(members[c][round]);
        any = true;
      }
    }
    if (!any) break;
  }

  std::vector<EmbeddingRow> rows;
  rows.reserve(picked.size());
  for (std::size_t i : picked) {
    const corpus::ProblemRecord& r = records[i];
    const core::Tensor v = m.problem_vec(m.vocab.encode(r.words));
    rows.push_back({r.id, std::string(1, expr::op_symbol(r.gold_prefix[0].oper())), v.values});
  }
  return rows;
}

nlohmann::json embeddings_json(const std::vector<EmbeddingRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const EmbeddingRow& r : rows)
    out.push_back({{"id", r.id}, {"root_operator", r.root_operator}, {"problem_vec", r.problem_vec}});
  return out;
}

}  // namespace amwp::pipeline
