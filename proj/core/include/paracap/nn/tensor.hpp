#pragma once

#include "paracap/common.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace paracap::nn {

/// A named parameter with its gradient and adaptive-moment state. Buffers
/// (batch-norm running statistics) are non-trainable parameters.
struct Param {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix m;
  Matrix v;
  bool trainable = true;

  Param() = default;
  Param(std::string n, Matrix init, bool train = true);

  void zero_grad() { grad.setZero(); }
};

/// Throws NumericError when `x` holds NaN or Inf.
void check_finite(const Matrix& x, std::string_view where);

/// 64-bit Mersenne twister with portable uniform and normal draws.
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  /// Uniform in [0, n).
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

Matrix uniform_matrix(Index rows, Index cols, double lo, double hi, Rng& rng);

} // namespace paracap::nn
