#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "amwp/corpus/record.hpp"
#include "amwp/pipeline/bundle.hpp"

namespace amwp::pipeline {

struct EmbeddingRow {
  std::string id;
  std::string root_operator;
  std::vector<double> problem_vec;
};

/// Problem vectors of up to n problems whose root operator is one of
/// + - * /, drawn round-robin across the four classes so they stay
/// balanced. The draw is fixed by the seed.
std::vector<EmbeddingRow> export_embeddings(ModelBundle& m, std::span<const corpus::ProblemRecord> records,
                                            std::size_t n = 150, std::uint64_t seed = 0);

nlohmann::json embeddings_json(const std::vector<EmbeddingRow>& rows);

}  // namespace amwp::pipeline
