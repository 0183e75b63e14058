#pragma once

#include "paracap/nn/tensor.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace paracap::nn {

/// Differentiable layer on row-batched inputs. forward caches what backward
/// needs; backward accumulates parameter gradients and returns dL/dx.
class Layer {
public:
  virtual ~Layer() = default;
  virtual Matrix forward(const Matrix& x, bool train) = 0;
  virtual Matrix backward(const Matrix& dy) = 0;
  virtual std::vector<Param*> params() { return {}; }
};

/// y = x W + b, W is in x out.
class Linear : public Layer {
public:
  Linear(Index in, Index out, Rng& rng, const std::string& name);
  Matrix forward(const Matrix& x, bool train) override;
  Matrix backward(const Matrix& dy) override;
  std::vector<Param*> params() override { return {&w_, &b_}; }

  Param& weight() { return w_; }
  Param& bias() { return b_; }

private:
  Param w_;
  Param b_;
  Matrix x_;
};

class ReLU : public Layer {
public:
  Matrix forward(const Matrix& x, bool train) override;
  Matrix backward(const Matrix& dy) override;

private:
  std::vector<std::uint8_t> mask_;
};

class LeakyReLU : public Layer {
public:
  explicit LeakyReLU(double slope = 0.2) : slope_(slope) {}
  Matrix forward(const Matrix& x, bool train) override;
  Matrix backward(const Matrix& dy) override;

private:
  double slope_;
  Matrix x_;
};

/// Inverted dropout: scales kept units by 1/(1-p) at train time, identity
/// at inference.
class Dropout : public Layer {
public:
  Dropout(double p, std::uint64_t seed);
  Matrix forward(const Matrix& x, bool train) override;
  Matrix backward(const Matrix& dy) override;

private:
  double p_;
  Rng rng_;
  std::vector<std::uint8_t> mask_;
  double keep_ = 1.0;
  bool active_ = false;
};

/// Normalises each column over the batch; running statistics are used at
/// inference. The first training batch replaces the initial running
/// statistics instead of being blended into them.
class BatchNorm : public Layer {
public:
  BatchNorm(Index width, const std::string& name, double momentum = 0.1, double eps = 1e-5);
  Matrix forward(const Matrix& x, bool train) override;
  Matrix backward(const Matrix& dy) override;
  std::vector<Param*> params() override { return {&gamma_, &beta_, &mean_, &var_}; }

private:
  Param gamma_;
  Param beta_;
  Param mean_;
  Param var_;
  double momentum_;
  double eps_;
  Matrix xhat_;
  RowVector inv_std_;
  bool used_batch_ = false;
  bool seeded_ = false;
};

/// Normalises each row over its features.
class LayerNorm : public Layer {
public:
  LayerNorm(Index width, const std::string& name, double eps = 1e-5);
  Matrix forward(const Matrix& x, bool train) override;
  Matrix backward(const Matrix& dy) override;
  std::vector<Param*> params() override { return {&gamma_, &beta_}; }

private:
  Param gamma_;
  Param beta_;
  double eps_;
  Matrix xhat_;
  Vector inv_std_;
};

/// Row-wise softmax.
class Softmax : public Layer {
public:
  Matrix forward(const Matrix& x, bool train) override;
  Matrix backward(const Matrix& dy) override;

private:
  Matrix y_;
};

Matrix softmax_rows(const Matrix& logits);

enum class Norm { None, Batch, Layer };

Norm norm_from_name(const std::string& name);
const char* norm_name(Norm n);

std::unique_ptr<Layer> make_norm(Norm n, Index width, const std::string& name);

struct MlpSpec {
  /// Input width followed by every layer's output width.
  std::vector<Index> widths;
  double dropout = 0.0;
  Norm norm = Norm::None;
  /// Apply norm/ReLU/dropout after the last linear layer as well.
  bool activate_output = false;
};

/// Linear -> norm -> ReLU -> dropout per hidden layer, plain final linear.
class Mlp : public Layer {
public:
  Mlp(const MlpSpec& spec, Rng& rng, const std::string& name);
  Matrix forward(const Matrix& x, bool train) override;
  Matrix backward(const Matrix& dy) override;
  std::vector<Param*> params() override;

  const MlpSpec& spec() const { return spec_; }
  Linear& last_linear() { return *last_; }

private:
  MlpSpec spec_;
  std::vector<std::unique_ptr<Layer>> layers_;
  Linear* last_ = nullptr;
};

} // namespace paracap::nn
