#pragma once

#include <string>

#include "ruellelab/models.hpp"

namespace ruellelab {

// JSON schema: {alphabet_size, transitions: [[0/1]], theta,
// roof: {depth, values[]}, potential: {depth, values[]}, label}. Values
// arrays are in lexicographic admissible-word order; their lengths must
// match the admissible-word counts.
SuspensionModel parse_model(const std::string& text);
SuspensionModel load_model(const std::string& path);

std::string serialize_model(const SuspensionModel& model);
void save_model(const SuspensionModel& model, const std::string& path);

}  // namespace ruellelab
