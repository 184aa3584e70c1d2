#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace nodefeat {

/// Dense row-major float64 matrix used for features, activations and weights.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace nodefeat
