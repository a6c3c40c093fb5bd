#pragma once

#include <string>

#include "baryflow/flow.hpp"

namespace baryflow {

// Versioned JSON with sorted keys and shortest round-trip doubles, so
// identical models serialize to identical bytes and reload bit-exact.
std::string model_to_json(const FlowModel& model);
FlowModel model_from_json(const std::string& text);

void save_model(const FlowModel& model, const std::string& path);
FlowModel load_model(const std::string& path);

}  // namespace baryflow
