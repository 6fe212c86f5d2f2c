#include "triqp/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "triqp/bnb.hpp"
#include "triqp/lp.hpp"

namespace triqp {

OracleResult grid_minimize(const QcqpInstance& inst, int steps_per_dim) {
  const Index n = inst.num_vars();
  const Index m = inst.num_constraints();
  if (n > 4) throw std::invalid_argument("grid_minimize is guarded to n <= 4");
  if (steps_per_dim < 11) throw std::invalid_argument("grid_minimize needs steps_per_dim >= 11");

  const Vec& lo = inst.lower();
  const Vec& up = inst.upper();
  Vec step(n);
  for (Index i = 0; i < n; ++i) step[i] = (up[i] - lo[i]) / (steps_per_dim - 1);

  Vec x(n);
  std::vector<int> ticks(n, 0);
  bool found = false;
  double best_value = 0.0;
  Vec best_point;

  // lexicographic odometer; strict improvement keeps the first argmin among ties
  while (true) {
    for (Index i = 0; i < n; ++i) x[i] = lo[i] + ticks[i] * step[i];
    bool feasible = true;
    for (Index r = 1; r <= m && feasible; ++r)
      feasible = evaluate_constraint(inst, r, x) <= inst.rhs(r) + 1e-6;
    if (feasible) {
      const double f = evaluate_constraint(inst, 0, x);
      if (!found || f < best_value) {
        found = true;
        best_value = f;
        best_point = x;
      }
    }
    Index d = n - 1;
    while (d >= 0 && ++ticks[d] == steps_per_dim) ticks[d--] = 0;
    if (d < 0) break;
  }

  if (!found)
    throw std::runtime_error("no feasible grid point; possibly infeasible at this resolution");

  if (auto polished = local_search(inst, best_point, lo, up)) {
    const double f = evaluate_constraint(inst, 0, *polished);
    if (f < best_value) {
      best_value = f;
      best_point = *polished;
    }
  }

  OracleResult out;
  out.value = best_value;
  out.argmin = best_point;
  out.resolution = step.maxCoeff();
  return out;
}

bool certify_redundant(const Vec& lower, const Vec& upper, const Cut& candidate) {
  const Index i = candidate.indices[0];
  const Index j = candidate.indices[1];
  const Index k = candidate.indices[2];
  if (!(i < j && j < k) || k >= lower.size())
    throw std::invalid_argument("candidate must index a single triple i < j < k");

  // local variables: x_i, x_j, x_k, Y_ij, Y_ik, Y_jk
  auto xvar = [&](Index a) -> Index { return a == i ? 0 : (a == j ? 1 : 2); };
  auto yvar = [&](Index a, Index b) -> Index {
    if (a == i) return b == j ? 3 : 4;
    return 5;
  };

  LpProblem lp;
  lp.cost = Vec::Zero(6);
  for (const Cut::YTerm& t : candidate.y_terms) lp.cost[yvar(t.a, t.b)] -= t.coeff;
  for (const Cut::XTerm& t : candidate.x_terms) lp.cost[xvar(t.a)] -= t.coeff;

  lp.var_lower = Vec(6);
  lp.var_upper = Vec(6);
  const std::array<Index, 3> vars{i, j, k};
  for (int a = 0; a < 3; ++a) {
    lp.var_lower[a] = lower[vars[a]];
    lp.var_upper[a] = upper[vars[a]];
  }
  const std::array<std::pair<Index, Index>, 3> pairs{{{i, j}, {i, k}, {j, k}}};
  for (int p = 0; p < 3; ++p) {
    const auto [a, b] = pairs[p];
    const double corner[4] = {lower[a] * lower[b], lower[a] * upper[b], upper[a] * lower[b],
                              upper[a] * upper[b]};
    lp.var_lower[3 + p] = *std::min_element(corner, corner + 4);
    lp.var_upper[3 + p] = *std::max_element(corner, corner + 4);
  }

  for (const auto& [a, b] : pairs) {
    for (const Cut& mc : mccormick_cuts(lower, upper, a, b)) {
      LpRow row;
      row.coeffs = Vec::Zero(6);
      for (const Cut::YTerm& t : mc.y_terms) row.coeffs[yvar(t.a, t.b)] += t.coeff;
      for (const Cut::XTerm& t : mc.x_terms) row.coeffs[xvar(t.a)] += t.coeff;
      row.rhs = -mc.constant;
      row.sense = '<';
      lp.rows.push_back(std::move(row));
    }
  }

  LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::kOptimal)
    throw std::runtime_error("redundancy LP did not solve: " + to_string(sol.status));
  const double max_violation = -sol.objective + candidate.constant;
  return max_violation <= 1e-7;
}

}  // namespace triqp
