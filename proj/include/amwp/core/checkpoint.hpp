#pragma once

#include <span>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "amwp/core/graph.hpp"

namespace amwp::core {

inline constexpr int kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// {version, config, parameters: {name -> {shape, values}}}
nlohmann::json checkpoint_document(const nlohmann::json& config, std::span<Parameter* const> params);

/// Copies every named parameter out of the document. Missing names and
/// shape mismatches throw CheckpointError; nothing is modified in that case.
void restore_parameters(const nlohmann::json& doc, std::span<Parameter* const> params);

void write_json_file(const std::string& path, const nlohmann::json& doc);
nlohmann::json read_json_file(const std::string& path);

}  // namespace amwp::core
