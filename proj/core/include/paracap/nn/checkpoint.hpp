#pragma once

#include "paracap/nn/tensor.hpp"

#include <nlohmann/json.hpp>

#include <vector>

namespace paracap::nn {

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

/// {name: {rows, cols, data}} for every parameter and buffer.
nlohmann::json params_to_json(const std::vector<Param*>& params);

/// Loads values by name. Throws DataError on a missing name or a shape
/// mismatch.
void params_from_json(const nlohmann::json& j, const std::vector<Param*>& params);

/// Deep copy of parameter values, used to keep the best epoch.
std::vector<Matrix> snapshot(const std::vector<Param*>& params);
void restore(const std::vector<Param*>& params, const std::vector<Matrix>& values);

} // namespace paracap::nn
