#pragma once

#include <string>

#include <json.hpp>

#include "mlvsbm/model_select.hpp"
#include "mlvsbm/network.hpp"
#include "mlvsbm/params.hpp"
#include "mlvsbm/vem.hpp"

namespace mlvsbm {

/// Ordered keys keep serialized artifacts deterministic.
using Json = nlohmann::ordered_json;

Json network_to_json(const MultilevelNetwork& net);
MultilevelNetwork network_from_json(const Json& j);

Json params_to_json(const ModelParams& params);
ModelParams params_from_json(const Json& j);

Json assignments_to_json(const Assignments& z);
Assignments assignments_from_json(const Json& j);

Json fit_to_json(const FitResult& fit, const FitOptions& options);
FitResult fit_from_json(const Json& j);

Json selection_to_json(const SelectionResult& sel, const FitOptions& options);

Json load_json_file(const std::string& path);
void save_json_file(const Json& j, const std::string& path);

}  // namespace mlvsbm
