#include "paracap/nn/checkpoint.hpp"
#include "paracap/error.hpp"

namespace paracap::nn {

nlohmann::json matrix_to_json(const Matrix& m)
{
  std::vector<double> data(m.data(), m.data() + m.size());
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const nlohmann::json& j)
{
  try {
    const auto rows = j.at("rows").get<Index>();
    const auto cols = j.at("cols").get<Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (rows < 0 || cols < 0 || static_cast<Index>(data.size()) != rows * cols)
      throw DataError("matrix payload does not match its shape");
    Matrix m(rows, cols);
    std::copy(data.begin(), data.end(), m.data());
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed matrix: ") + e.what());
  }
}

nlohmann::json params_to_json(const std::vector<Param*>& params)
{
  nlohmann::json j = nlohmann::json::object();
  for (const Param* p : params) {
    if (j.contains(p->name))
      throw DataError("duplicate parameter name '" + p->name + "'");
    j[p->name] = matrix_to_json(p->value);
  }
  return j;
}

void params_from_json(const nlohmann::json& j, const std::vector<Param*>& params)
{
  if (j.size() != params.size())
    throw DataError("checkpoint holds " + std::to_string(j.size()) + " tensors, model expects " +
                    std::to_string(params.size()));
  for (Param* p : params) {
    if (!j.contains(p->name))
      throw DataError("checkpoint is missing tensor '" + p->name + "'");
    Matrix m = matrix_from_json(j.at(p->name));
    if (m.rows() != p->value.rows() || m.cols() != p->value.cols())
      throw DataError("shape mismatch for tensor '" + p->name + "'");
    p->value = std::move(m);
  }
}

std::vector<Matrix> snapshot(const std::vector<Param*>& params)
{
  std::vector<Matrix> out;
  out.reserve(params.size());
  for (const Param* p : params)
    out.push_back(p->value);
  return out;
}

void restore(const std::vector<Param*>& params, const std::vector<Matrix>& values)
{
  for (std::size_t i = 0; i < params.size(); ++i)
    params[i]->value = values[i];
}

} // namespace paracap::nn
