#include "amwp/core/checkpoint.hpp"

#include <fstream>
#include <vector>

namespace amwp::core {

nlohmann::json checkpoint_document(const nlohmann::json& config, std::span<Parameter* const> params) {
  nlohmann::json doc;
  doc["version"] = kCheckpointVersion;
  doc["config"] = config;
  nlohmann::json& ps = doc["parameters"] = nlohmann::json::object();
  for (const Parameter* p : params) {
    if (ps.contains(p->name)) throw CheckpointError("duplicate parameter name " + p->name);
    ps[p->name] = {{"shape", p->value.shape.dims()}, {"values", p->value.values}};
  }
  return doc;
}

void restore_parameters(const nlohmann::json& doc, std::span<Parameter* const> params) {
  if (!doc.contains("version") || doc["version"] != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version");
  if (!doc.contains("parameters") || !doc["parameters"].is_object())
    throw CheckpointError("checkpoint has no parameters object");
  const nlohmann::json& ps = doc["parameters"];

  std::vector<Tensor> staged;
  staged.reserve(params.size());
  for (const Parameter* p : params) {
    auto it = ps.find(p->name);
    if (it == ps.end()) throw CheckpointError("checkpoint lacks parameter " + p->name);
    Shape shape;
    std::vector<double> values;
    try {
      shape = Shape(it->at("shape").get<std::vector<std::size_t>>());
      values = it->at("values").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw CheckpointError("malformed parameter " + p->name + ": " + e.what());
    } catch (const ShapeError& e) {
      throw CheckpointError("malformed parameter " + p->name + ": " + e.what());
    }
    if (!(shape == p->value.shape))
      throw CheckpointError("parameter " + p->name + ": checkpoint shape " + shape.str() + " but model expects " +
                            p->value.shape.str());
    if (values.size() != shape.numel())
      throw CheckpointError("parameter " + p->name + ": " + std::to_string(values.size()) +
                            " values for shape " + shape.str());
    staged.emplace_back(shape, std::move(values));
  }
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = std::move(staged[i]);
}

void write_json_file(const std::string& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << doc.dump() << '\n';
  if (!out) throw std::runtime_error("failed writing " + path);
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

}  // namespace amwp::core
