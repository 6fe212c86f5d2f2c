#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "triqp/types.hpp"

namespace triqp {

/// Dense symmetric matrix with packed upper-triangular storage, so reads of
/// (j,i) always return the (i,j) entry.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Index dim) : dim_(dim), data_(Vec::Zero(packed_size(dim))) {
    if (dim < 1) throw std::invalid_argument("SymMatrix: dim must be >= 1");
  }

  /// Builds from a dense matrix, symmetrizing as (A + A^T)/2.
  static SymMatrix from_dense(const Mat& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("SymMatrix: matrix not square");
    SymMatrix s(a.rows());
    for (Index i = 0; i < a.rows(); ++i)
      for (Index j = i; j < a.cols(); ++j) s.set(i, j, 0.5 * (a(i, j) + a(j, i)));
    return s;
  }

  static SymMatrix identity(Index dim) {
    SymMatrix s(dim);
    for (Index i = 0; i < dim; ++i) s.set(i, i, 1.0);
    return s;
  }

  Index dim() const { return dim_; }

  double operator()(Index i, Index j) const { return data_[packed_index(dim_, i, j)]; }
  void set(Index i, Index j, double v) { data_[packed_index(dim_, i, j)] = v; }
  void add(Index i, Index j, double v) { data_[packed_index(dim_, i, j)] += v; }

  Mat to_dense() const {
    Mat a(dim_, dim_);
    for (Index i = 0; i < dim_; ++i)
      for (Index j = i; j < dim_; ++j) a(i, j) = a(j, i) = (*this)(i, j);
    return a;
  }

  const Vec& packed() const { return data_; }
  Vec& packed() { return data_; }

  friend bool operator==(const SymMatrix& a, const SymMatrix& b) {
    return a.dim_ == b.dim_ && a.data_ == b.data_;
  }

 private:
  Index dim_ = 0;
  Vec data_;
};

struct EigenDecomposition {
  Vec values;   // ascending
  Mat vectors;  // orthonormal columns, vectors.col(k) pairs with values[k]
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix expression.
/// Templated on the scalar through the Eigen expression it receives.
template <typename Derived>
std::pair<Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>,
          Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>>
jacobi_eigen(const Eigen::MatrixBase<Derived>& input) {
  using Scalar = typename Derived::Scalar;
  using MatT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VecT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  const Index n = input.rows();
  MatT a = input.derived();
  MatT v = MatT::Identity(n, n);
  if (n == 1) return {a.diagonal(), v};

  const Scalar scale = a.norm();
  const Scalar stop = scale * Scalar(1e-15);
  const long rotation_cap = 100 * static_cast<long>(n) * static_cast<long>(n);
  long rotations = 0;

  auto off_norm = [&a, n]() {
    Scalar s = 0;
    for (Index p = 0; p < n; ++p)
      for (Index q = p + 1; q < n; ++q) s += a(p, q) * a(p, q);
    return std::sqrt(Scalar(2) * s);
  };

  while (off_norm() > stop) {
    for (Index p = 0; p < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (std::abs(apq) <= stop / Scalar(n)) continue;
        if (++rotations > rotation_cap)
          throw std::runtime_error("jacobi_eigen: no convergence within iteration cap");
        const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
        const Scalar t = (theta >= 0 ? Scalar(1) : Scalar(-1)) /
                         (std::abs(theta) + std::sqrt(theta * theta + Scalar(1)));
        const Scalar c = Scalar(1) / std::sqrt(t * t + Scalar(1));
        const Scalar s = t * c;

        for (Index k = 0; k < n; ++k) {
          const Scalar akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const Scalar apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Index k = 0; k < n; ++k) {
          const Scalar vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  VecT w = a.diagonal();
  // sort ascending, reorder eigenvector columns to match
  std::vector<Index> order(n);
  for (Index i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&w](Index x, Index y) { return w[x] < w[y]; });
  VecT ws(n);
  MatT vs(n, n);
  for (Index i = 0; i < n; ++i) {
    ws[i] = w[order[i]];
    vs.col(i) = v.col(order[i]);
  }
  return {ws, vs};
}

EigenDecomposition eig_symmetric(const SymMatrix& a);
std::pair<double, Vec> min_eigenvalue(const SymMatrix& a);
double quad_form(const SymMatrix& a, const Vec& x);

/// lambda_min at or above -kPsdTol counts as positive semi-definite.
inline constexpr double kPsdTol = 1e-7;

inline bool is_psd(const SymMatrix& a) { return min_eigenvalue(a).first >= -kPsdTol; }

}  // namespace triqp
