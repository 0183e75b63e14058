#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace paracap {

/// Row-major dense matrix; one row per node or sample.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using Vector = Eigen::VectorXd;

using Index = std::int64_t;

} // namespace paracap
