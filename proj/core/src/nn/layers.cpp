#include "paracap/nn/layers.hpp"
#include "paracap/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace paracap::nn {

Param::Param(std::string n, Matrix init, bool train)
    : name(std::move(n)), value(std::move(init)), trainable(train)
{
  grad = Matrix::Zero(value.rows(), value.cols());
  m = Matrix::Zero(value.rows(), value.cols());
  v = Matrix::Zero(value.rows(), value.cols());
}

void check_finite(const Matrix& x, std::string_view where)
{
  if (!x.allFinite())
    throw NumericError("non-finite value in " + std::string(where));
}

double Rng::normal()
{
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
  has_spare_ = true;
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

Matrix uniform_matrix(Index rows, Index cols, double lo, double hi, Rng& rng)
{
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      m(i, j) = rng.uniform(lo, hi);
  return m;
}

namespace {

void require_cols(const Matrix& x, Index cols, const char* layer)
{
  if (x.cols() != cols)
    throw DataError(std::string(layer) + ": expected " + std::to_string(cols) + " columns, got " +
                    std::to_string(x.cols()));
}

void require_size(const Matrix& x, Index size, const char* layer)
{
  if (x.size() != size)
    throw DataError(std::string(layer) + ": expected " + std::to_string(size) + " values, got " +
                    std::to_string(x.size()));
}

} // namespace

Linear::Linear(Index in, Index out, Rng& rng, const std::string& name)
{
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  w_ = Param(name + ".weight", uniform_matrix(in, out, -bound, bound, rng));
  b_ = Param(name + ".bias", uniform_matrix(1, out, -bound, bound, rng));
}

Matrix Linear::forward(const Matrix& x, bool)
{
  require_cols(x, w_.value.rows(), "linear");
  x_ = x;
  Matrix y = x * w_.value;
  y.rowwise() += b_.value.row(0);
  return y;
}

Matrix Linear::backward(const Matrix& dy)
{
  require_cols(dy, w_.value.cols(), "linear backward");
  w_.grad.noalias() += x_.transpose() * dy;
  b_.grad += dy.colwise().sum();
  return dy * w_.value.transpose();
}

Matrix ReLU::forward(const Matrix& x, bool)
{
  Matrix y(x.rows(), x.cols());
  mask_.resize(static_cast<std::size_t>(x.size()));
  const Index n = x.size();
  const double* in = x.data();
  double* out = y.data();
  std::uint8_t* m = mask_.data();
  for (Index i = 0; i < n; ++i)
    out[i] = std::max(in[i], 0.0);
  for (Index i = 0; i < n; ++i)
    m[i] = in[i] > 0.0;
  return y;
}

Matrix ReLU::backward(const Matrix& dy)
{
  require_size(dy, static_cast<Index>(mask_.size()), "relu backward");
  Matrix dx(dy.rows(), dy.cols());
  const Index n = dy.size();
  const double* up = dy.data();
  double* out = dx.data();
  for (Index i = 0; i < n; ++i)
    out[i] = mask_[i] ? up[i] : 0.0;
  return dx;
}

Matrix LeakyReLU::forward(const Matrix& x, bool)
{
  x_ = x;
  return (x.array() > 0.0).select(x, slope_ * x);
}

Matrix LeakyReLU::backward(const Matrix& dy)
{
  return (x_.array() > 0.0).select(dy, slope_ * dy);
}

Dropout::Dropout(double p, std::uint64_t seed) : p_(p), rng_(seed)
{
  if (!(p >= 0.0 && p < 1.0))
    throw UsageError("dropout rate must lie in [0, 1)");
}

Matrix Dropout::forward(const Matrix& x, bool train)
{
  active_ = train && p_ > 0.0;
  if (!active_)
    return x;
  const double keep = 1.0 / (1.0 - p_);
  // Each 64-bit draw yields two 32-bit uniforms.
  const auto threshold = static_cast<std::uint64_t>(p_ * 4294967296.0);
  mask_.resize(static_cast<std::size_t>(x.size()));
  keep_ = keep;
  Matrix y(x.rows(), x.cols());
  const Index n = x.size();
  const double* in = x.data();
  std::uint8_t* m = mask_.data();
  double* out = y.data();
  for (Index i = 0; i < n; i += 2) {
    const std::uint64_t r = rng_.next();
    m[i] = (r & 0xffffffffu) >= threshold;
    out[i] = m[i] ? in[i] * keep : 0.0;
    if (i + 1 < n) {
      m[i + 1] = (r >> 32) >= threshold;
      out[i + 1] = m[i + 1] ? in[i + 1] * keep : 0.0;
    }
  }
  return y;
}

Matrix Dropout::backward(const Matrix& dy)
{
  if (!active_)
    return dy;
  require_size(dy, static_cast<Index>(mask_.size()), "dropout backward");
  Matrix dx(dy.rows(), dy.cols());
  const Index n = dy.size();
  const double* up = dy.data();
  double* out = dx.data();
  for (Index i = 0; i < n; ++i)
    out[i] = mask_[i] ? up[i] * keep_ : 0.0;
  return dx;
}

BatchNorm::BatchNorm(Index width, const std::string& name, double momentum, double eps)
    : gamma_(name + ".gamma", Matrix::Ones(1, width)),
      beta_(name + ".beta", Matrix::Zero(1, width)),
      mean_(name + ".running_mean", Matrix::Zero(1, width), false),
      var_(name + ".running_var", Matrix::Ones(1, width), false),
      momentum_(momentum),
      eps_(eps)
{
}

Matrix BatchNorm::forward(const Matrix& x, bool train)
{
  require_cols(x, gamma_.value.cols(), "batch-norm");
  const Index rows = x.rows();
  const Index cols = x.cols();
  used_batch_ = train && rows > 0;
  std::vector<double> mean(static_cast<std::size_t>(cols), 0.0);
  std::vector<double> var(static_cast<std::size_t>(cols), 0.0);
  if (used_batch_) {
    for (Index i = 0; i < rows; ++i) {
      const double* r = x.data() + i * cols;
      for (Index j = 0; j < cols; ++j)
        mean[j] += r[j];
    }
    for (double& m : mean)
      m /= static_cast<double>(rows);
    for (Index i = 0; i < rows; ++i) {
      const double* r = x.data() + i * cols;
      for (Index j = 0; j < cols; ++j) {
        const double c = r[j] - mean[j];
        var[j] += c * c;
      }
    }
    const auto n = static_cast<double>(rows);
    const double unbias = rows > 1 ? n / (n - 1.0) : 1.0;
    const double m = seeded_ ? momentum_ : 1.0;
    seeded_ = true;
    for (Index j = 0; j < cols; ++j) {
      var[j] /= n;
      mean_.value(0, j) = (1.0 - m) * mean_.value(0, j) + m * mean[j];
      var_.value(0, j) = (1.0 - m) * var_.value(0, j) + m * unbias * var[j];
    }
  } else {
    for (Index j = 0; j < cols; ++j) {
      mean[j] = mean_.value(0, j);
      var[j] = var_.value(0, j);
    }
  }
  inv_std_.resize(cols);
  for (Index j = 0; j < cols; ++j)
    inv_std_[j] = 1.0 / std::sqrt(var[j] + eps_);
  xhat_.resize(rows, cols);
  Matrix y(rows, cols);
  const double* g = gamma_.value.data();
  const double* b = beta_.value.data();
  for (Index i = 0; i < rows; ++i) {
    const double* r = x.data() + i * cols;
    double* xh = xhat_.data() + i * cols;
    double* out = y.data() + i * cols;
    for (Index j = 0; j < cols; ++j) {
      xh[j] = (r[j] - mean[j]) * inv_std_[j];
      out[j] = xh[j] * g[j] + b[j];
    }
  }
  return y;
}

Matrix BatchNorm::backward(const Matrix& dy)
{
  const Index rows = dy.rows();
  const Index cols = dy.cols();
  std::vector<double> sum_d(static_cast<std::size_t>(cols), 0.0);
  std::vector<double> sum_dx(static_cast<std::size_t>(cols), 0.0);
  for (Index i = 0; i < rows; ++i) {
    const double* d = dy.data() + i * cols;
    const double* xh = xhat_.data() + i * cols;
    for (Index j = 0; j < cols; ++j) {
      sum_d[j] += d[j];
      sum_dx[j] += d[j] * xh[j];
    }
  }
  for (Index j = 0; j < cols; ++j) {
    gamma_.grad(0, j) += sum_dx[j];
    beta_.grad(0, j) += sum_d[j];
  }
  const double* g = gamma_.value.data();
  Matrix dx(rows, cols);
  if (!used_batch_) {
    for (Index i = 0; i < rows; ++i) {
      const double* d = dy.data() + i * cols;
      double* out = dx.data() + i * cols;
      for (Index j = 0; j < cols; ++j)
        out[j] = d[j] * g[j] * inv_std_[j];
    }
    return dx;
  }
  const auto n = static_cast<double>(rows);
  std::vector<double> mean_d(static_cast<std::size_t>(cols));
  std::vector<double> mean_dx(static_cast<std::size_t>(cols));
  std::vector<double> scale(static_cast<std::size_t>(cols));
  for (Index j = 0; j < cols; ++j) {
    mean_d[j] = g[j] * sum_d[j] / n;
    mean_dx[j] = g[j] * sum_dx[j] / n;
    scale[j] = inv_std_[j];
  }
  for (Index i = 0; i < rows; ++i) {
    const double* d = dy.data() + i * cols;
    const double* xh = xhat_.data() + i * cols;
    double* out = dx.data() + i * cols;
    for (Index j = 0; j < cols; ++j)
      out[j] = (d[j] * g[j] - mean_d[j] - xh[j] * mean_dx[j]) * scale[j];
  }
  return dx;
}

LayerNorm::LayerNorm(Index width, const std::string& name, double eps)
    : gamma_(name + ".gamma", Matrix::Ones(1, width)),
      beta_(name + ".beta", Matrix::Zero(1, width)),
      eps_(eps)
{
}

Matrix LayerNorm::forward(const Matrix& x, bool)
{
  require_cols(x, gamma_.value.cols(), "layer-norm");
  const Index n = x.rows();
  const Index w = x.cols();
  const auto d = static_cast<double>(w);
  const double* g = gamma_.value.data();
  const double* b = beta_.value.data();
  xhat_.resize(n, w);
  inv_std_.resize(n);
  Matrix y(n, w);
  for (Index r = 0; r < n; ++r) {
    const double* in = x.data() + r * w;
    double* xh = xhat_.data() + r * w;
    double* out = y.data() + r * w;
    double mean = 0.0;
    for (Index c = 0; c < w; ++c)
      mean += in[c];
    mean /= d;
    double var = 0.0;
    for (Index c = 0; c < w; ++c) {
      const double t = in[c] - mean;
      var += t * t;
    }
    const double inv = 1.0 / std::sqrt(var / d + eps_);
    inv_std_[r] = inv;
    for (Index c = 0; c < w; ++c) {
      xh[c] = (in[c] - mean) * inv;
      out[c] = xh[c] * g[c] + b[c];
    }
  }
  return y;
}

Matrix LayerNorm::backward(const Matrix& dy)
{
  require_cols(dy, gamma_.value.cols(), "layer-norm backward");
  const Index n = dy.rows();
  const Index w = dy.cols();
  const auto d = static_cast<double>(w);
  const double* g = gamma_.value.data();
  double* gg = gamma_.grad.data();
  double* gb = beta_.grad.data();
  Matrix dx(n, w);
  for (Index r = 0; r < n; ++r) {
    const double* up = dy.data() + r * w;
    const double* xh = xhat_.data() + r * w;
    double* out = dx.data() + r * w;
    double sum_d = 0.0;
    double sum_dx = 0.0;
    for (Index c = 0; c < w; ++c) {
      gg[c] += up[c] * xh[c];
      gb[c] += up[c];
      const double t = up[c] * g[c];
      sum_d += t;
      sum_dx += t * xh[c];
    }
    const double s = inv_std_[r] / d;
    for (Index c = 0; c < w; ++c)
      out[c] = (up[c] * g[c] * d - sum_d - xh[c] * sum_dx) * s;
  }
  return dx;
}

Matrix softmax_rows(const Matrix& logits)
{
  Matrix y = logits.colwise() - logits.rowwise().maxCoeff();
  y = y.array().exp();
  y.array().colwise() /= y.rowwise().sum().array();
  return y;
}

Matrix Softmax::forward(const Matrix& x, bool)
{
  y_ = softmax_rows(x);
  return y_;
}

Matrix Softmax::backward(const Matrix& dy)
{
  const Vector dot = dy.cwiseProduct(y_).rowwise().sum();
  return y_.cwiseProduct(Matrix(dy.colwise() - dot));
}

Norm norm_from_name(const std::string& name)
{
  if (name == "none")
    return Norm::None;
  if (name == "batch")
    return Norm::Batch;
  if (name == "layer")
    return Norm::Layer;
  throw UsageError("unknown norm '" + name + "'");
}

const char* norm_name(Norm n)
{
  switch (n) {
  case Norm::None: return "none";
  case Norm::Batch: return "batch";
  case Norm::Layer: return "layer";
  }
  return "none";
}

std::unique_ptr<Layer> make_norm(Norm n, Index width, const std::string& name)
{
  switch (n) {
  case Norm::Batch: return std::make_unique<BatchNorm>(width, name);
  case Norm::Layer: return std::make_unique<LayerNorm>(width, name);
  case Norm::None: break;
  }
  return nullptr;
}

Mlp::Mlp(const MlpSpec& spec, Rng& rng, const std::string& name) : spec_(spec)
{
  if (spec.widths.size() < 2)
    throw UsageError("an MLP needs at least one linear layer");
  const std::size_t linears = spec.widths.size() - 1;
  for (std::size_t i = 0; i < linears; ++i) {
    const std::string prefix = name + "." + std::to_string(i);
    auto lin = std::make_unique<Linear>(spec.widths[i], spec.widths[i + 1], rng, prefix);
    last_ = lin.get();
    layers_.push_back(std::move(lin));
    if (i + 1 == linears && !spec.activate_output)
      break;
    if (auto norm = make_norm(spec.norm, spec.widths[i + 1], prefix + ".norm"))
      layers_.push_back(std::move(norm));
    layers_.push_back(std::make_unique<ReLU>());
    if (spec.dropout > 0.0)
      layers_.push_back(std::make_unique<Dropout>(spec.dropout, rng.next()));
  }
}

Matrix Mlp::forward(const Matrix& x, bool train)
{
  Matrix h = x;
  for (auto& layer : layers_)
    h = layer->forward(h, train);
  return h;
}

Matrix Mlp::backward(const Matrix& dy)
{
  Matrix g = dy;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
    g = (*it)->backward(g);
  return g;
}

std::vector<Param*> Mlp::params()
{
  std::vector<Param*> out;
  for (auto& layer : layers_)
    for (Param* p : layer->params())
      out.push_back(p);
  return out;
}

} // namespace paracap::nn
