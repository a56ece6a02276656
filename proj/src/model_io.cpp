#include "ruellelab/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ruellelab/errors.hpp"

namespace ruellelab {

namespace {

using nlohmann::json;

RealFn parse_fn(const SymbolicSystem& system, const json& node, const std::string& field) {
  if (!node.is_object() || !node.contains("depth") || !node.contains("values")) {
    throw ValidationError(field + " must be an object with depth and values");
  }
  int depth = node.at("depth").get<int>();
  if (depth < 1) throw ValidationError(field + ".depth must be >= 1");
  std::vector<double> values = node.at("values").get<std::vector<double>>();
  auto idx = make_word_index(system, depth);
  if (values.size() != idx->size()) {
    throw ValidationError(field + ".values has " + std::to_string(values.size()) +
                          " entries; depth " + std::to_string(depth) + " needs " +
                          std::to_string(idx->size()) +
                          " (lexicographic admissible-word order)");
  }
  return RealFn(system, idx, std::move(values));
}

json fn_to_json(const RealFn& fn) {
  json node;
  node["depth"] = fn.depth();
  node["values"] = fn.values();
  return node;
}

}  // namespace

SuspensionModel parse_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("model JSON malformed: ") + e.what());
  }
  try {
    if (!doc.is_object()) throw ValidationError("model document must be a JSON object");
    int k0 = doc.at("alphabet_size").get<int>();
    auto rows = doc.at("transitions").get<std::vector<std::vector<int>>>();
    if (static_cast<int>(rows.size()) != k0) {
      throw ValidationError("transitions must have alphabet_size rows");
    }
    std::vector<std::vector<int>> matrix;
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != k0) {
        throw ValidationError("transitions must have alphabet_size columns");
      }
      for (int v : row) {
        if (v != 0 && v != 1) throw ValidationError("transitions entries must be 0 or 1");
      }
      matrix.push_back(row);
    }
    SymbolicSystem system(k0, matrix);
    double theta = doc.at("theta").get<double>();
    RealFn roof = parse_fn(system, doc.at("roof"), "roof");
    RealFn potential = parse_fn(system, doc.at("potential"), "potential");
    std::string label = doc.value("label", std::string("model"));
    return make_model(std::move(system), std::move(roof), std::move(potential), theta,
                      std::move(label));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model JSON invalid: ") + e.what());
  }
}

SuspensionModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

std::string serialize_model(const SuspensionModel& model) {
  json doc;
  doc["alphabet_size"] = model.system.alphabet_size();
  std::vector<std::vector<int>> rows;
  for (int i = 0; i < model.system.alphabet_size(); ++i) {
    std::vector<int> row;
    for (int j = 0; j < model.system.alphabet_size(); ++j) {
      row.push_back(model.system.allowed(i, j) ? 1 : 0);
    }
    rows.push_back(std::move(row));
  }
  doc["transitions"] = rows;
  doc["theta"] = model.theta;
  doc["roof"] = fn_to_json(model.roof);
  doc["potential"] = fn_to_json(model.potential);
  doc["label"] = model.label;
  return doc.dump(2) + "\n";
}

void save_model(const SuspensionModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write model file: " + path);
  out << serialize_model(model);
}

}  // namespace ruellelab
