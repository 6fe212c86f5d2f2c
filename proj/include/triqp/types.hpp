#pragma once

#include <Eigen/Dense>

namespace triqp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Position of entry (i,j), i <= j, in a row-major packed upper triangle of order n.
inline Index packed_index(Index n, Index i, Index j) {
  if (i > j) std::swap(i, j);
  return i * n - i * (i - 1) / 2 + (j - i);
}

inline Index packed_size(Index n) { return n * (n + 1) / 2; }

}  // namespace triqp
