#include "paracap/error.hpp"
#include "paracap/graph.hpp"

namespace paracap {

namespace {

constexpr int kGraphSchemaVersion = 1;

nlohmann::json matrix_to_json(const Matrix& m)
{
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["data"] = std::vector<double>(m.data(), m.data() + m.size());
  return j;
}

Matrix matrix_from_json(const nlohmann::json& j, Index expected_cols, const char* what)
{
  const auto rows = j.at("rows").get<Index>();
  const auto cols = j.at("cols").get<Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (cols != expected_cols || static_cast<Index>(data.size()) != rows * cols)
    throw DataError(std::string("graph JSON: bad shape for ") + what);
  Matrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

nlohmann::json row_to_json(const RowVector& v)
{
  return std::vector<double>(v.data(), v.data() + v.size());
}

RowVector row_from_json(const nlohmann::json& j, Index cols)
{
  const auto data = j.get<std::vector<double>>();
  if (static_cast<Index>(data.size()) != cols)
    throw DataError("normalization JSON: bad width");
  RowVector v(cols);
  std::copy(data.begin(), data.end(), v.data());
  return v;
}

} // namespace

nlohmann::json graph_to_json(const HeteroGraph& g)
{
  nlohmann::json j;
  j["format"] = "paracap.graph";
  j["schema_version"] = kGraphSchemaVersion;
  nlohmann::json nets = nlohmann::json::array();
  for (const auto& n : g.nets)
    nets.push_back({n.name, n.owner_depth});
  nlohmann::json devs = nlohmann::json::array();
  for (const auto& d : g.devs)
    devs.push_back({d.path, device_kind_name(d.kind)});
  nlohmann::json subs = nlohmann::json::array();
  for (const auto& s : g.subs)
    subs.push_back({s.path, s.level});
  std::vector<int> edges;
  edges.reserve(g.edges.size() * 2);
  for (const auto& [u, v] : g.edges) {
    edges.push_back(u);
    edges.push_back(v);
  }
  j["net_nodes"] = std::move(nets);
  j["dev_nodes"] = std::move(devs);
  j["sub_nodes"] = std::move(subs);
  j["edges"] = std::move(edges);
  j["schema"] = {{"net", FeatureSchema::net_columns},
                 {"dev", FeatureSchema::dev_columns},
                 {"sub", FeatureSchema::sub_columns}};
  j["feat_net"] = matrix_to_json(g.feat_net);
  j["feat_dev"] = matrix_to_json(g.feat_dev);
  j["feat_sub"] = matrix_to_json(g.feat_sub);
  return j;
}

HeteroGraph graph_from_json(const nlohmann::json& j)
{
  if (j.value("format", "") != "paracap.graph")
    throw DataError("not a paracap graph container");
  if (j.at("schema_version").get<int>() != kGraphSchemaVersion)
    throw DataError("unsupported graph schema version");
  HeteroGraph g;
  for (const auto& n : j.at("net_nodes"))
    g.nets.push_back({n.at(0).get<std::string>(), n.at(1).get<int>()});
  for (const auto& d : j.at("dev_nodes")) {
    auto kind = device_kind_from_name(d.at(1).get<std::string>());
    if (!kind)
      throw DataError("graph JSON: unknown device kind");
    g.devs.push_back({d.at(0).get<std::string>(), *kind});
  }
  for (const auto& s : j.at("sub_nodes"))
    g.subs.push_back({s.at(0).get<std::string>(), s.at(1).get<int>()});
  const auto flat = j.at("edges").get<std::vector<int>>();
  if (flat.size() % 2 != 0)
    throw DataError("graph JSON: odd edge array");
  const int n = static_cast<int>(g.num_nodes());
  for (std::size_t i = 0; i < flat.size(); i += 2) {
    const int u = flat[i];
    const int v = flat[i + 1];
    if (u < 0 || v < 0 || u >= n || v >= n || u >= v)
      throw DataError("graph JSON: invalid edge");
    g.edges.emplace_back(u, v);
  }
  g.feat_net = matrix_from_json(j.at("feat_net"), FeatureSchema::kNetWidth, "feat_net");
  g.feat_dev = matrix_from_json(j.at("feat_dev"), FeatureSchema::kDevWidth, "feat_dev");
  g.feat_sub = matrix_from_json(j.at("feat_sub"), FeatureSchema::kSubWidth, "feat_sub");
  if (static_cast<std::size_t>(g.feat_net.rows()) != g.nets.size() ||
      static_cast<std::size_t>(g.feat_dev.rows()) != g.devs.size() ||
      static_cast<std::size_t>(g.feat_sub.rows()) != g.subs.size())
    throw DataError("graph JSON: feature rows do not match node counts");
  return g;
}

nlohmann::json normalization_to_json(const NormalizationStats& s)
{
  return {{"net", row_to_json(s.net)}, {"dev", row_to_json(s.dev)}, {"sub", row_to_json(s.sub)}};
}

NormalizationStats normalization_from_json(const nlohmann::json& j)
{
  return {row_from_json(j.at("net"), FeatureSchema::kNetWidth),
          row_from_json(j.at("dev"), FeatureSchema::kDevWidth),
          row_from_json(j.at("sub"), FeatureSchema::kSubWidth)};
}

} // namespace paracap
