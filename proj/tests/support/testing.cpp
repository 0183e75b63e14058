#include "testing.hpp"

#include <algorithm>
#include <cmath>
#include <array>
#include <filesystem>

namespace paracap::testkit {

namespace fs = std::filesystem;

std::string fixture_dir()
{
  return PARACAP_FIXTURE_DIR;
}

std::vector<std::string> fixture_files(const std::string& subdir, const std::string& ext)
{
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(fs::path(fixture_dir()) / subdir))
    if (e.is_regular_file() && e.path().extension() == ext)
      out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

constexpr double kVanishingGradient = 1e-7;

double relative_error(const Matrix& analytic, const Matrix& numeric)
{
  const double scale = std::max(analytic.norm(), numeric.norm());
  const double diff = (analytic - numeric).norm();
  if (scale < kVanishingGradient)
    return diff;
  return diff / scale;
}

Matrix numeric_gradient(const std::function<double()>& f, Matrix& x, double h)
{
  Matrix g(x.rows(), x.cols());
  for (Index i = 0; i < x.size(); ++i) {
    double& xi = x.data()[i];
    const double saved = xi;
    xi = saved + h;
    const double fp = f();
    xi = saved - h;
    const double fm = f();
    xi = saved;
    g.data()[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

namespace {

template <class Forward, class Backward>
std::vector<GradCheck> check_generic(Forward forward, Backward backward,
                                     const std::vector<nn::Param*>& params, const Matrix& x0,
                                     std::uint64_t seed)
{
  // Offset stream so R is not a copy of an input drawn from the same seed.
  nn::Rng rng(seed * 7919 + 104729);
  Matrix x = x0;
  const Matrix y0 = forward(x);
  const Matrix r = nn::uniform_matrix(y0.rows(), y0.cols(), -1.0, 1.0, rng);
  auto loss = [&] { return (forward(x).array() * r.array()).sum(); };

  for (nn::Param* p : params)
    p->zero_grad();
  forward(x);
  const Matrix dx = backward(r);
  std::vector<std::pair<std::string, Matrix>> analytic;
  for (nn::Param* p : params)
    if (p->trainable)
      analytic.emplace_back(p->name, p->grad);

  std::vector<GradCheck> out;
  out.push_back({"input", relative_error(dx, numeric_gradient(loss, x))});
  std::size_t k = 0;
  for (nn::Param* p : params) {
    if (!p->trainable)
      continue;
    out.push_back({p->name, relative_error(analytic[k].second, numeric_gradient(loss, p->value))});
    ++k;
  }
  return out;
}

} // namespace

std::vector<GradCheck> check_layer(nn::Layer& layer, const Matrix& x, bool train,
                                   std::uint64_t seed)
{
  return check_generic([&](const Matrix& in) { return layer.forward(in, train); },
                       [&](const Matrix& dy) { return layer.backward(dy); }, layer.params(), x,
                       seed);
}

std::vector<GradCheck> check_conv(model::GraphConv& conv, const model::Adjacency& adj,
                                  const Matrix& h, std::uint64_t seed)
{
  return check_generic([&](const Matrix& in) { return conv.forward(adj, in); },
                       [&](const Matrix& dy) { return conv.backward(dy); }, conv.params(), h,
                       seed);
}

namespace {

FixtureGraph path(int n)
{
  FixtureGraph g{"path" + std::to_string(n), n, {}};
  for (int i = 0; i + 1 < n; ++i)
    g.edges.emplace_back(i, i + 1);
  return g;
}

FixtureGraph star(int leaves)
{
  FixtureGraph g{"star" + std::to_string(leaves), leaves + 1, {}};
  for (int i = 1; i <= leaves; ++i)
    g.edges.emplace_back(0, i);
  return g;
}

FixtureGraph clique(int n)
{
  FixtureGraph g{"clique" + std::to_string(n), n, {}};
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      g.edges.emplace_back(i, j);
  return g;
}

FixtureGraph cycle(int n)
{
  FixtureGraph g = path(n);
  g.name = "cycle" + std::to_string(n);
  g.edges.emplace_back(0, n - 1);
  return g;
}

FixtureGraph with_isolated(FixtureGraph g, int extra)
{
  g.name += "+iso" + std::to_string(extra);
  g.n += extra;
  return g;
}

FixtureGraph disjoint(const FixtureGraph& a, const FixtureGraph& b)
{
  FixtureGraph g{a.name + "|" + b.name, a.n + b.n, a.edges};
  for (auto [u, v] : b.edges)
    g.edges.emplace_back(u + a.n, v + a.n);
  return g;
}

} // namespace

std::vector<FixtureGraph> fixture_graphs()
{
  std::vector<FixtureGraph> out;
  out.push_back({"single", 1, {}});
  out.push_back({"isolated4", 4, {}});
  out.push_back(path(2));
  out.push_back(path(3));
  out.push_back(path(6));
  out.push_back(path(10));
  out.push_back(star(3));
  out.push_back(star(6));
  out.push_back(star(9));
  out.push_back(clique(3));
  out.push_back(clique(4));
  out.push_back(clique(6));
  out.push_back(cycle(5));
  out.push_back(cycle(8));
  FixtureGraph tree{"tree7", 7, {{0, 1}, {0, 2}, {1, 3}, {1, 4}, {2, 5}, {2, 6}}};
  out.push_back(tree);
  out.push_back(with_isolated(path(4), 2));
  out.push_back(with_isolated(star(4), 1));
  out.push_back(disjoint(clique(3), path(2)));
  out.push_back(disjoint(star(3), clique(4)));
  FixtureGraph pendant = clique(5);
  pendant.name = "clique5+pendant";
  pendant.n = 7;
  pendant.edges.emplace_back(4, 5);
  pendant.edges.emplace_back(5, 6);
  out.push_back(pendant);
  return out;
}

FixtureGraph random_graph(int n, double p, nn::Rng& rng)
{
  FixtureGraph g{"random" + std::to_string(n), n, {}};
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < p)
        g.edges.emplace_back(i, j);
  return g;
}

Matrix dense_adjacency(const FixtureGraph& g)
{
  Matrix a = Matrix::Zero(g.n, g.n);
  for (auto [u, v] : g.edges) {
    a(u, v) = 1.0;
    a(v, u) = 1.0;
  }
  return a;
}

namespace {

Matrix add_bias(Matrix y, const Matrix& b)
{
  for (Index i = 0; i < y.rows(); ++i)
    y.row(i) += b.row(0);
  return y;
}

} // namespace

Matrix dense_gcn(const FixtureGraph& g, const Matrix& h, const Matrix& w, const Matrix& b)
{
  const Matrix a_hat = dense_adjacency(g) + Matrix::Identity(g.n, g.n);
  Matrix d_inv_sqrt = Matrix::Zero(g.n, g.n);
  for (int i = 0; i < g.n; ++i)
    d_inv_sqrt(i, i) = 1.0 / std::sqrt(a_hat.row(i).sum());
  return add_bias(d_inv_sqrt * a_hat * d_inv_sqrt * h * w, b);
}

Matrix dense_sage_mean(const FixtureGraph& g, const Matrix& h, const Matrix& w, const Matrix& b)
{
  const Matrix a = dense_adjacency(g);
  Matrix mean = Matrix::Zero(g.n, h.cols());
  for (int u = 0; u < g.n; ++u) {
    const double deg = a.row(u).sum();
    if (deg > 0)
      mean.row(u) = (a.row(u) * h) / deg;
  }
  Matrix cat(g.n, 2 * h.cols());
  cat << h, mean;
  return add_bias(cat * w, b);
}

Matrix dense_sage_pool(const FixtureGraph& g, const Matrix& h, const Matrix& wp, const Matrix& bp,
                       const Matrix& w, const Matrix& b)
{
  const Matrix a = dense_adjacency(g);
  const Matrix z = add_bias(h * wp, bp).cwiseMax(0.0);
  Matrix pool = Matrix::Zero(g.n, z.cols());
  for (int u = 0; u < g.n; ++u) {
    bool any = false;
    for (int v = 0; v < g.n; ++v) {
      if (a(u, v) == 0.0)
        continue;
      pool.row(u) = any ? pool.row(u).cwiseMax(z.row(v)).eval() : z.row(v);
      any = true;
    }
  }
  Matrix cat(g.n, h.cols() + z.cols());
  cat << h, pool;
  return add_bias(cat * w, b);
}

Matrix dense_gat(const FixtureGraph& g, const Matrix& h, const Matrix& w, const Matrix& a_dst,
                 const Matrix& a_src, const Matrix& b, double slope)
{
  const Matrix a = dense_adjacency(g) + Matrix::Identity(g.n, g.n);
  const Matrix wh = h * w;
  Matrix out = Matrix::Zero(g.n, wh.cols());
  for (int u = 0; u < g.n; ++u) {
    std::vector<double> e(g.n, -INFINITY);
    double emax = -INFINITY;
    for (int v = 0; v < g.n; ++v) {
      if (a(u, v) == 0.0)
        continue;
      const double s = a_dst.row(0).dot(wh.row(u)) + a_src.row(0).dot(wh.row(v));
      e[v] = s > 0 ? s : slope * s;
      emax = std::max(emax, e[v]);
    }
    double z = 0.0;
    for (int v = 0; v < g.n; ++v)
      if (a(u, v) != 0.0)
        z += std::exp(e[v] - emax);
    for (int v = 0; v < g.n; ++v)
      if (a(u, v) != 0.0)
        out.row(u) += (std::exp(e[v] - emax) / z) * wh.row(v);
  }
  return add_bias(out, b);
}

double max_abs_diff(const Matrix& a, const Matrix& b)
{
  if (a.rows() != b.rows() || a.cols() != b.cols())
    return INFINITY;
  if (a.size() == 0)
    return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

void randomize(const std::vector<nn::Param*>& params, nn::Rng& rng)
{
  for (nn::Param* p : params)
    if (p->trainable)
      p->value = nn::uniform_matrix(p->value.rows(), p->value.cols(), -1.0, 1.0, rng);
}

} // namespace paracap::testkit

namespace paracap::testkit {

std::string graph_identity_violation(const HeteroGraph& g)
{
  const std::size_t nv = g.nets.size() + g.devs.size() + g.subs.size();
  if (g.num_nodes() != nv)
    return "node count is not the sum of the partitions";
  if (static_cast<std::size_t>(g.feat_net.rows()) != g.nets.size() ||
      static_cast<std::size_t>(g.feat_dev.rows()) != g.devs.size() ||
      static_cast<std::size_t>(g.feat_sub.rows()) != g.subs.size())
    return "feature rows do not match partitions";
  if (g.feat_net.cols() != 13 || g.feat_dev.cols() != 11 || g.feat_sub.cols() != 4)
    return "feature widths";

  std::vector<std::array<int, 3>> net_nbrs(g.nets.size(), {0, 0, 0}); // mos, res, cap
  std::vector<int> net_subs(g.nets.size(), 0);
  std::vector<int> dev_degree(g.devs.size(), 0);
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const auto [u, v] = g.edges[i];
    if (!(u < v))
      return "edge " + std::to_string(i) + " is not stored with u < v";
    if (u < 0 || static_cast<std::size_t>(v) >= nv)
      return "edge endpoint out of range";
    if (i > 0 && !(g.edges[i - 1] < g.edges[i]))
      return "edges not sorted and unique";
    const NodeType tu = g.type_of(u);
    const NodeType tv = g.type_of(v);
    if (tu == NodeType::Net && tv == NodeType::Net)
      return "net-net edge";
    if (tu == NodeType::Dev && tv == NodeType::Dev)
      return "dev-dev edge";
    if (tu == NodeType::Dev && tv == NodeType::Sub)
      return "dev-sub edge";
    if (tu == NodeType::Net && tv == NodeType::Dev) {
      const std::size_t d = static_cast<std::size_t>(v) - g.nets.size();
      ++dev_degree[d];
      switch (g.devs[d].kind) {
      case DeviceKind::Nmos:
      case DeviceKind::Pmos: ++net_nbrs[u][0]; break;
      case DeviceKind::Res: ++net_nbrs[u][1]; break;
      case DeviceKind::Cap: ++net_nbrs[u][2]; break;
      default: break;
      }
    }
    if (tu == NodeType::Net && tv == NodeType::Sub)
      ++net_subs[u];
  }

  for (std::size_t n = 0; n < g.nets.size(); ++n) {
    const auto r = g.feat_net.row(static_cast<Index>(n));
    if ((r.array() < 0).any())
      return "negative net feature at " + g.nets[n].name;
    if (r(netcol::NGate) + r(netcol::NSd) + r(netcol::NBulk) < r(netcol::NMos))
      return "N_g+N_sd+N_b < N_mos at " + g.nets[n].name;
    if (r(netcol::NMos) != net_nbrs[n][0] || r(netcol::NRes) != net_nbrs[n][1] ||
        r(netcol::NCap) != net_nbrs[n][2])
      return "device counts disagree with adjacency at " + g.nets[n].name;
    if (r(netcol::NPort) < (net_subs[n] > 0 ? 1 : 0))
      return "N_port disagrees with adjacency at " + g.nets[n].name;
    if (r(netcol::NMos) == 0 &&
        (r(netcol::NGate) != 0 || r(netcol::NSd) != 0 || r(netcol::NBulk) != 0 ||
         r(netcol::WTot) != 0 || r(netcol::LTot) != 0))
      return "MOS columns set on a net without MOS at " + g.nets[n].name;
  }

  for (std::size_t d = 0; d < g.devs.size(); ++d) {
    const auto r = g.feat_dev.row(static_cast<Index>(d));
    const DeviceKind k = g.devs[d].kind;
    const bool mos = k == DeviceKind::Nmos || k == DeviceKind::Pmos;
    const bool res = k == DeviceKind::Res;
    const bool cap = k == DeviceKind::Cap;
    auto zero = [&](std::initializer_list<int> cols) {
      for (int c : cols)
        if (r(c) != 0.0)
          return false;
      return true;
    };
    if (!mos && !zero({devcol::MMos, devcol::L, devcol::W}))
      return "MOS columns not zero-filled at " + g.devs[d].path;
    if (!res && !zero({devcol::MRes, devcol::LRes, devcol::WRes}))
      return "resistor columns not zero-filled at " + g.devs[d].path;
    if (!cap && !zero({devcol::MCap, devcol::Lr, devcol::Nr}))
      return "capacitor columns not zero-filled at " + g.devs[d].path;
    if (r(devcol::Type) != device_type_code(k))
      return "device type code at " + g.devs[d].path;
    if (r(devcol::NPins) < dev_degree[d])
      return "N_p below device degree at " + g.devs[d].path;
  }

  for (std::size_t s = 0; s < g.subs.size(); ++s) {
    const auto r = g.feat_sub.row(static_cast<Index>(s));
    if (r(subcol::Level) != g.subs[s].level || r(subcol::Level) < 1)
      return "subcircuit level at " + g.subs[s].path;
    if (r(subcol::NNets) + 1 < r(subcol::NPort))
      return "subcircuit net count at " + g.subs[s].path;
  }
  return {};
}

} // namespace paracap::testkit
