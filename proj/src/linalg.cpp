#include "triqp/linalg.hpp"

#include <vector>

namespace triqp {

EigenDecomposition eig_symmetric(const SymMatrix& a) {
  auto [values, vectors] = jacobi_eigen(a.to_dense());
  return {std::move(values), std::move(vectors)};
}

std::pair<double, Vec> min_eigenvalue(const SymMatrix& a) {
  EigenDecomposition d = eig_symmetric(a);
  return {d.values[0], d.vectors.col(0)};
}

double quad_form(const SymMatrix& a, const Vec& x) {
  if (a.dim() != x.size()) throw std::invalid_argument("quad_form: dimension mismatch");
  double diag = 0.0, off = 0.0;
  for (Index i = 0; i < a.dim(); ++i) {
    diag += a(i, i) * x[i] * x[i];
    for (Index j = i + 1; j < a.dim(); ++j) off += a(i, j) * x[i] * x[j];
  }
  return diag + 2.0 * off;
}

}  // namespace triqp
