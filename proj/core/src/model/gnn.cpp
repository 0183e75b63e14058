#include "paracap/model/gnn.hpp"
#include "paracap/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace paracap::model {

Adjacency Adjacency::from_edges(Index n, const std::vector<std::pair<int, int>>& edges)
{
  Adjacency a;
  a.n = n;
  a.offsets.assign(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n)
      throw DataError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                      ") out of range");
    if (u == v)
      continue;
    ++a.offsets[u + 1];
    ++a.offsets[v + 1];
  }
  for (Index i = 0; i < n; ++i)
    a.offsets[i + 1] += a.offsets[i];
  a.neighbors.resize(static_cast<std::size_t>(a.offsets[n]));
  std::vector<Index> fill(a.offsets.begin(), a.offsets.end() - 1);
  for (const auto& [u, v] : edges) {
    if (u == v)
      continue;
    a.neighbors[fill[u]++] = v;
    a.neighbors[fill[v]++] = u;
  }
  for (Index i = 0; i < n; ++i) {
    auto* b = a.neighbors.data() + a.offsets[i];
    auto* e = a.neighbors.data() + a.offsets[i + 1];
    std::sort(b, e);
    if (std::adjacent_find(b, e) != e)
      throw DataError("duplicate edge at node " + std::to_string(i));
  }
  return a;
}

const char* variant_name(Variant v)
{
  switch (v) {
  case Variant::None: return "none";
  case Variant::Gcn: return "gcn";
  case Variant::Gat: return "gat";
  case Variant::SageMean: return "sage_mean";
  case Variant::SagePool: return "sage_pool";
  }
  return "none";
}

Variant variant_from_name(const std::string& name)
{
  if (name == "none")
    return Variant::None;
  if (name == "gcn")
    return Variant::Gcn;
  if (name == "gat")
    return Variant::Gat;
  if (name == "sage_mean")
    return Variant::SageMean;
  if (name == "sage_pool")
    return Variant::SagePool;
  throw UsageError("unknown variant '" + name + "'");
}

int default_layers(Variant v)
{
  switch (v) {
  case Variant::Gcn:
  case Variant::Gat: return 3;
  case Variant::SageMean:
  case Variant::SagePool: return 2;
  case Variant::None: return 0;
  }
  return 0;
}

nn::Norm default_norm(Variant v)
{
  return v == Variant::Gat ? nn::Norm::Layer : nn::Norm::Batch;
}

namespace {

Matrix glorot(Index in, Index out, nn::Rng& rng)
{
  const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
  return nn::uniform_matrix(in, out, -bound, bound, rng);
}

void require_rows(const Adjacency& adj, const Matrix& h, const char* layer)
{
  if (h.rows() != adj.n)
    throw DataError(std::string(layer) + ": feature rows " + std::to_string(h.rows()) +
                    " do not match " + std::to_string(adj.n) + " nodes");
}

void require_forward(const Adjacency* adj, const char* layer)
{
  if (adj == nullptr)
    throw UsageError(std::string(layer) + ": backward before forward");
}

} // namespace

GcnConv::GcnConv(Index in, Index out, nn::Rng& rng, const std::string& name)
    : w_(name + ".weight", glorot(in, out, rng)), b_(name + ".bias", Matrix::Zero(1, out))
{
}

Matrix GcnConv::propagate(const Matrix& x) const
{
  const Adjacency& a = *adj_;
  std::vector<double> scale(static_cast<std::size_t>(a.n));
  for (Index u = 0; u < a.n; ++u)
    scale[u] = 1.0 / std::sqrt(static_cast<double>(a.degree(u) + 1));
  Matrix y(x.rows(), x.cols());
  for (Index u = 0; u < a.n; ++u) {
    auto row = y.row(u);
    row = (scale[u] * scale[u]) * x.row(u);
    for (const int* v = a.begin(u); v != a.end(u); ++v)
      row += (scale[u] * scale[*v]) * x.row(*v);
  }
  return y;
}

Matrix GcnConv::forward(const Adjacency& adj, const Matrix& h)
{
  require_rows(adj, h, "gcn");
  adj_ = &adj;
  h_ = h;
  Matrix y = propagate(h * w_.value);
  y.rowwise() += b_.value.row(0);
  return y;
}

Matrix GcnConv::backward(const Matrix& dy)
{
  require_forward(adj_, "gcn");
  b_.grad += dy.colwise().sum();
  const Matrix dxw = propagate(dy);
  w_.grad.noalias() += h_.transpose() * dxw;
  return dxw * w_.value.transpose();
}

SageMeanConv::SageMeanConv(Index in, Index out, nn::Rng& rng, const std::string& name)
    : w_(name + ".weight", glorot(2 * in, out, rng)), b_(name + ".bias", Matrix::Zero(1, out))
{
}

Matrix SageMeanConv::forward(const Adjacency& adj, const Matrix& h)
{
  require_rows(adj, h, "sage_mean");
  adj_ = &adj;
  h_ = h;
  agg_ = Matrix::Zero(h.rows(), h.cols());
  for (Index u = 0; u < adj.n; ++u) {
    const Index d = adj.degree(u);
    if (d == 0)
      continue;
    auto row = agg_.row(u);
    for (const int* v = adj.begin(u); v != adj.end(u); ++v)
      row += h.row(*v);
    row /= static_cast<double>(d);
  }
  const Index in = h.cols();
  Matrix y = h * w_.value.topRows(in);
  y.noalias() += agg_ * w_.value.bottomRows(in);
  y.rowwise() += b_.value.row(0);
  return y;
}

Matrix SageMeanConv::backward(const Matrix& dy)
{
  require_forward(adj_, "sage_mean");
  const Index in = h_.cols();
  b_.grad += dy.colwise().sum();
  w_.grad.topRows(in).noalias() += h_.transpose() * dy;
  w_.grad.bottomRows(in).noalias() += agg_.transpose() * dy;
  Matrix dh = dy * w_.value.topRows(in).transpose();
  const Matrix dagg = dy * w_.value.bottomRows(in).transpose();
  const Adjacency& a = *adj_;
  for (Index u = 0; u < a.n; ++u) {
    const Index d = a.degree(u);
    if (d == 0)
      continue;
    const double inv = 1.0 / static_cast<double>(d);
    for (const int* v = a.begin(u); v != a.end(u); ++v)
      dh.row(*v) += inv * dagg.row(u);
  }
  return dh;
}

SagePoolConv::SagePoolConv(Index in, Index out, nn::Rng& rng, const std::string& name)
    : wp_(name + ".pool.weight", glorot(in, in, rng)),
      bp_(name + ".pool.bias", Matrix::Zero(1, in)),
      w_(name + ".weight", glorot(2 * in, out, rng)),
      b_(name + ".bias", Matrix::Zero(1, out))
{
}

Matrix SagePoolConv::forward(const Adjacency& adj, const Matrix& h)
{
  require_rows(adj, h, "sage_pool");
  adj_ = &adj;
  h_ = h;
  z_ = h * wp_.value;
  z_.rowwise() += bp_.value.row(0);
  z_ = z_.cwiseMax(0.0);
  const Index in = h.cols();
  agg_ = Matrix::Zero(h.rows(), in);
  arg_.assign(static_cast<std::size_t>(h.rows() * in), -1);
  for (Index u = 0; u < adj.n; ++u) {
    if (adj.degree(u) == 0)
      continue;
    int* arg = arg_.data() + u * in;
    double* best = agg_.data() + u * in;
    const int* first = adj.begin(u);
    const double* z0 = z_.data() + static_cast<Index>(*first) * in;
    for (Index k = 0; k < in; ++k) {
      best[k] = z0[k];
      arg[k] = *first;
    }
    // Strict comparison keeps the first maximising neighbour.
    for (const int* v = first + 1; v != adj.end(u); ++v) {
      const double* z = z_.data() + static_cast<Index>(*v) * in;
      const int id = *v;
      for (Index k = 0; k < in; ++k) {
        const bool take = z[k] > best[k];
        best[k] = take ? z[k] : best[k];
        arg[k] = take ? id : arg[k];
      }
    }
  }
  Matrix y = h * w_.value.topRows(in);
  y.noalias() += agg_ * w_.value.bottomRows(in);
  y.rowwise() += b_.value.row(0);
  return y;
}

Matrix SagePoolConv::backward(const Matrix& dy)
{
  require_forward(adj_, "sage_pool");
  const Index in = h_.cols();
  b_.grad += dy.colwise().sum();
  w_.grad.topRows(in).noalias() += h_.transpose() * dy;
  w_.grad.bottomRows(in).noalias() += agg_.transpose() * dy;
  Matrix dh = dy * w_.value.topRows(in).transpose();
  const Matrix dagg = dy * w_.value.bottomRows(in).transpose();
  Matrix dz = Matrix::Zero(h_.rows(), in);
  for (Index u = 0; u < adj_->n; ++u) {
    const int* arg = arg_.data() + u * in;
    for (Index k = 0; k < in; ++k)
      if (arg[k] >= 0)
        dz(arg[k], k) += dagg(u, k);
  }
  dz = (z_.array() > 0.0).select(dz, 0.0);
  wp_.grad.noalias() += h_.transpose() * dz;
  bp_.grad += dz.colwise().sum();
  dh.noalias() += dz * wp_.value.transpose();
  return dh;
}

GatConv::GatConv(Index in, Index out, nn::Rng& rng, const std::string& name, double slope)
    : w_(name + ".weight", glorot(in, out, rng)),
      a_dst_(name + ".att_dst", glorot(1, out, rng)),
      a_src_(name + ".att_src", glorot(1, out, rng)),
      b_(name + ".bias", Matrix::Zero(1, out)),
      slope_(slope)
{
}

Matrix GatConv::forward(const Adjacency& adj, const Matrix& h)
{
  require_rows(adj, h, "gat");
  adj_ = &adj;
  h_ = h;
  wh_ = h * w_.value;
  const Vector el = wh_ * a_dst_.value.row(0).transpose();
  const Vector er = wh_ * a_src_.value.row(0).transpose();
  alpha_.resize(static_cast<std::size_t>(adj.n + adj.offsets[adj.n]));
  positive_.resize(alpha_.size());
  Matrix y(h.rows(), wh_.cols());
  std::vector<double> e;
  for (Index u = 0; u < adj.n; ++u) {
    const std::size_t base = static_cast<std::size_t>(u + adj.offsets[u]);
    const Index d = adj.degree(u);
    e.resize(static_cast<std::size_t>(d + 1));
    auto score = [&](std::size_t slot, int v) {
      const double pre = el[u] + er[v];
      positive_[base + slot] = pre > 0.0;
      e[slot] = pre > 0.0 ? pre : slope_ * pre;
    };
    score(0, static_cast<int>(u));
    for (Index j = 0; j < d; ++j)
      score(static_cast<std::size_t>(j + 1), adj.begin(u)[j]);
    const double mx = *std::max_element(e.begin(), e.end());
    double sum = 0.0;
    for (double& x : e) {
      x = std::exp(x - mx);
      sum += x;
    }
    auto row = y.row(u);
    row = (e[0] / sum) * wh_.row(u);
    alpha_[base] = e[0] / sum;
    for (Index j = 0; j < d; ++j) {
      const double a = e[j + 1] / sum;
      alpha_[base + j + 1] = a;
      row += a * wh_.row(adj.begin(u)[j]);
    }
  }
  y.rowwise() += b_.value.row(0);
  return y;
}

Matrix GatConv::backward(const Matrix& dy)
{
  require_forward(adj_, "gat");
  const Adjacency& a = *adj_;
  b_.grad += dy.colwise().sum();
  Matrix dwh = Matrix::Zero(wh_.rows(), wh_.cols());
  Vector del = Vector::Zero(a.n);
  Vector der = Vector::Zero(a.n);
  std::vector<double> dalpha;
  for (Index u = 0; u < a.n; ++u) {
    const std::size_t base = static_cast<std::size_t>(u + a.offsets[u]);
    const Index d = a.degree(u);
    dalpha.resize(static_cast<std::size_t>(d + 1));
    auto source = [&](Index j) { return j == 0 ? static_cast<int>(u) : a.begin(u)[j - 1]; };
    double s = 0.0;
    for (Index j = 0; j <= d; ++j) {
      const int v = source(j);
      const double al = alpha_[base + j];
      dwh.row(v) += al * dy.row(u);
      dalpha[j] = dy.row(u).dot(wh_.row(v));
      s += al * dalpha[j];
    }
    for (Index j = 0; j <= d; ++j) {
      const double de = alpha_[base + j] * (dalpha[j] - s);
      const double dpre = positive_[base + j] ? de : slope_ * de;
      del[u] += dpre;
      der[source(j)] += dpre;
    }
  }
  a_dst_.grad.row(0) += (wh_.transpose() * del).transpose();
  a_src_.grad.row(0) += (wh_.transpose() * der).transpose();
  dwh.noalias() += del * a_dst_.value.row(0);
  dwh.noalias() += der * a_src_.value.row(0);
  w_.grad.noalias() += h_.transpose() * dwh;
  return dwh * w_.value.transpose();
}

std::vector<double> GatConv::attention(Index u) const
{
  require_forward(adj_, "gat");
  const std::size_t base = static_cast<std::size_t>(u + adj_->offsets[u]);
  return {alpha_.begin() + static_cast<std::ptrdiff_t>(base),
          alpha_.begin() + static_cast<std::ptrdiff_t>(base + adj_->degree(u) + 1)};
}

std::unique_ptr<GraphConv> make_conv(Variant v, Index in, Index out, nn::Rng& rng,
                                     const std::string& name)
{
  switch (v) {
  case Variant::Gcn: return std::make_unique<GcnConv>(in, out, rng, name);
  case Variant::Gat: return std::make_unique<GatConv>(in, out, rng, name);
  case Variant::SageMean: return std::make_unique<SageMeanConv>(in, out, rng, name);
  case Variant::SagePool: return std::make_unique<SagePoolConv>(in, out, rng, name);
  case Variant::None: break;
  }
  throw UsageError("variant 'none' has no graph convolution");
}

} // namespace paracap::model
