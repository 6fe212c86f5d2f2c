#include "triqp/relax.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "triqp/linalg.hpp"

namespace triqp {

namespace {

double sym_inner(const SymMatrix& a, const SymMatrix& b) {
  double diag = 0.0, off = 0.0;
  for (Index i = 0; i < a.dim(); ++i) {
    diag += a(i, i) * b(i, i);
    for (Index j = i + 1; j < a.dim(); ++j) off += a(i, j) * b(i, j);
  }
  return diag + 2.0 * off;
}

LiftedPoint unpack(const Vec& z, Index n) {
  LiftedPoint p;
  p.x = z.head(n);
  p.Y = SymMatrix(n);
  for (Index a = 0; a < n; ++a)
    for (Index b = a; b < n; ++b) p.Y.set(a, b, z[n + packed_index(n, a, b)]);
  return p;
}

}  // namespace

double f_perturbed(const QcqpInstance& inst, Index r, const SymMatrix& s_r, const LiftedPoint& p) {
  if (r < 0 || r > inst.num_constraints())
    throw std::out_of_range("constraint index out of range");
  SymMatrix rest = inst.quad(r);
  for (Index i = 0; i < rest.dim(); ++i)
    for (Index j = i; j < rest.dim(); ++j) rest.add(i, j, -s_r(i, j));
  return quad_form(s_r, p.x) + inst.linear(r).dot(p.x) + sym_inner(rest, p.Y);
}

LpProblem build_linearization(const QcqpInstance& inst, const Vec& lower, const Vec& upper,
                              const CutPool& pool) {
  const Index n = inst.num_vars();
  const Index ny = packed_size(n);
  const Index nvars = n + ny;

  LpProblem lp;
  lp.cost = Vec::Zero(nvars);
  lp.cost.head(n) = inst.linear(0);
  for (Index a = 0; a < n; ++a)
    for (Index b = a; b < n; ++b)
      lp.cost[n + packed_index(n, a, b)] = (a == b ? 1.0 : 2.0) * inst.quad(0)(a, b);

  lp.var_lower = Vec(nvars);
  lp.var_upper = Vec(nvars);
  lp.var_lower.head(n) = lower;
  lp.var_upper.head(n) = upper;
  for (Index a = 0; a < n; ++a)
    for (Index b = a; b < n; ++b) {
      const double products[4] = {lower[a] * lower[b], lower[a] * upper[b], upper[a] * lower[b],
                                  upper[a] * upper[b]};
      const Index v = n + packed_index(n, a, b);
      lp.var_lower[v] = *std::min_element(products, products + 4);
      lp.var_upper[v] = *std::max_element(products, products + 4);
    }

  for (Index r = 1; r <= inst.num_constraints(); ++r) {
    LpRow row;
    row.coeffs = Vec::Zero(nvars);
    row.coeffs.head(n) = inst.linear(r);
    for (Index a = 0; a < n; ++a)
      for (Index b = a; b < n; ++b)
        row.coeffs[n + packed_index(n, a, b)] = (a == b ? 1.0 : 2.0) * inst.quad(r)(a, b);
    row.rhs = inst.rhs(r);
    row.sense = '<';
    lp.rows.push_back(std::move(row));
  }

  for (const Cut& cut : pool.cuts()) {
    LpRow row;
    row.coeffs = Vec::Zero(nvars);
    for (const Cut::YTerm& t : cut.y_terms) row.coeffs[n + packed_index(n, t.a, t.b)] += t.coeff;
    for (const Cut::XTerm& t : cut.x_terms) row.coeffs[t.a] += t.coeff;
    row.rhs = -cut.constant;
    row.sense = '<';
    lp.rows.push_back(std::move(row));
  }
  return lp;
}

SymMatrix assemble_S0(const QcqpInstance& inst, const DualState& d) {
  const Index n = inst.num_vars();
  if (d.alpha.size() != inst.num_constraints() || d.phi1.size() != n || d.phi2.size() != n ||
      d.phi3.size() != n ||
      d.cut_multipliers.size() != static_cast<Index>(d.working_cuts.size()))
    throw std::invalid_argument("dual state does not match the instance");

  SymMatrix s0 = inst.quad(0);
  for (Index r = 1; r <= inst.num_constraints(); ++r) {
    const double a = d.alpha[r - 1];
    if (a == 0.0) continue;
    for (Index i = 0; i < n; ++i)
      for (Index j = i; j < n; ++j) s0.add(i, j, a * inst.quad(r)(i, j));
  }
  for (std::size_t c = 0; c < d.working_cuts.size(); ++c) {
    const double mu = d.cut_multipliers[static_cast<Index>(c)];
    if (mu == 0.0) continue;
    for (const Cut::YTerm& t : d.working_cuts[c].y_terms) {
      if (t.a >= n || t.b >= n) throw std::invalid_argument("multiplier keyed to unknown cut");
      s0.add(t.a, t.b, mu * (t.a == t.b ? t.coeff : 0.5 * t.coeff));
    }
  }
  for (Index i = 0; i < n; ++i) s0.add(i, i, d.phi1[i] - d.phi2[i] - d.phi3[i]);
  return s0;
}

RelaxationSolution frank_wolfe(const SymMatrix& s0, const QcqpInstance& inst, const LpProblem& lp,
                               double tol) {
  const Index n = inst.num_vars();
  if (s0.dim() != n) throw std::invalid_argument("S0 has wrong order");
  if (min_eigenvalue(s0).first < -kPsdTol)
    throw std::invalid_argument("frank_wolfe requires a positive semi-definite S0");

  const Mat s0_dense = s0.to_dense();
  Vec ylin(packed_size(n));  // gradient of the Y block, constant in the iterate
  for (Index a = 0; a < n; ++a)
    for (Index b = a; b < n; ++b)
      ylin[packed_index(n, a, b)] = (a == b ? 1.0 : 2.0) * (inst.quad(0)(a, b) - s0(a, b));

  auto objective = [&](const Vec& z) {
    const Vec x = z.head(n);
    return x.dot(s0_dense * x) + inst.linear(0).dot(x) + ylin.dot(z.tail(packed_size(n)));
  };

  LpProblem oracle = lp;
  SimplexBasis basis;
  LpSolution start = solve_lp(oracle, &basis);
  RelaxationSolution out;
  if (start.status == LpStatus::kInfeasible) {
    out.status = RelaxStatus::kInfeasible;
    return out;
  }
  if (start.status != LpStatus::kOptimal) {
    out.status = RelaxStatus::kStalled;
    out.bound = -std::numeric_limits<double>::infinity();
    return out;
  }

  Vec z = start.x;
  double best_bound = -std::numeric_limits<double>::infinity();
  out.status = RelaxStatus::kStalled;
  const double gap_tol = std::max(tol, tol * std::abs(start.objective));
  for (long it = 0; it < 150; ++it) {
    Vec grad(z.size());
    grad.head(n) = 2.0 * (s0_dense * z.head(n)) + inst.linear(0);
    grad.tail(packed_size(n)) = ylin;

    oracle.cost = grad;
    LpSolution vertex = solve_lp(oracle, &basis);
    if (vertex.status != LpStatus::kOptimal) break;

    const Vec dir = vertex.x - z;
    const double gap = -grad.dot(dir);  // f(z) - min linearization >= f(z) - f*
    best_bound = std::max(best_bound, objective(z) - gap);
    if (gap <= gap_tol) {
      out.status = RelaxStatus::kOptimal;
      break;
    }
    const Vec dx = dir.head(n);
    const double curvature = dx.dot(s0_dense * dx);
    double gamma = 1.0;
    if (curvature > 1e-14) gamma = std::min(1.0, gap / (2.0 * curvature));
    z += gamma * dir;
  }
  out.point = unpack(z, n);
  out.bound = best_bound;
  return out;
}

RelaxationSolution solve_node_relaxation(const QcqpInstance& inst, const Vec& lower,
                                         const Vec& upper, CutPool& pool,
                                         const NodeSolveOptions& options,
                                         SimplexBasis* basis_io) {
  SimplexBasis local_basis;
  SimplexBasis& basis = basis_io ? *basis_io : local_basis;
  SimplexBasis* warm = basis_io && !basis.basic_cols.empty() ? basis_io : nullptr;
  RelaxationSolution out;
  const Index n = inst.num_vars();

  SeparationOptions sep;
  sep.min_violation = options.separation_tol;
  sep.triangles = options.use_triangles;

  double lp_bound = -std::numeric_limits<double>::infinity();
  for (int round = 0; round <= options.max_rounds; ++round) {
    const LpProblem lp = build_linearization(inst, lower, upper, pool);
    if (warm) {
      // rows were appended at the end; keep the old basis and make the new
      // slacks basic
      const std::size_t want = static_cast<std::size_t>(lp.num_vars() + lp.num_rows());
      if (basis.col_status.size() > want) {
        basis.col_status.clear();
        basis.basic_cols.clear();
      }
      while (basis.col_status.size() < want) {
        basis.col_status.push_back(SimplexBasis::kBasic);
        basis.basic_cols.push_back(static_cast<Index>(basis.col_status.size()) - 1);
      }
    }
    LpSolution sol = solve_lp(lp, &basis);
    warm = &basis;

    if (sol.status == LpStatus::kInfeasible) {
      out.status = RelaxStatus::kInfeasible;
      return out;
    }
    if (sol.status != LpStatus::kOptimal) {
      out.status = RelaxStatus::kStalled;
      out.bound = lp_bound;
      return out;
    }
    lp_bound = sol.objective;
    out.point = unpack(sol.x, n);
    out.status = RelaxStatus::kOptimal;

    if (round == options.max_rounds) break;
    SeparationOptions round_sep = sep;
    std::size_t budget = options.cuts_per_round;
    if (options.pool_cap > 0 && pool.size() >= options.pool_cap) {
      // the cap gates triangle growth only; the envelopes stay separable so
      // every pair keeps its McCormick support
      round_sep.triangles = false;
    } else if (options.pool_cap > 0) {
      budget = std::min(budget, options.pool_cap - pool.size());
    }
    std::vector<Cut> found = separate(out.point, lower, upper, budget, pool, round_sep);
    if (found.empty()) break;
    for (const Cut& cut : found) pool.add(cut);
  }
  out.bound = lp_bound;

  if (options.s0 != nullptr) {
    const LpProblem lp = build_linearization(inst, lower, upper, pool);
    RelaxationSolution fw = frank_wolfe(*options.s0, inst, lp, options.fw_tol);
    if (fw.status == RelaxStatus::kInfeasible) return fw;
    if (std::isfinite(fw.bound) && fw.bound > out.bound) {
      out.bound = fw.bound;
      out.point = fw.point;
    }
  }
  return out;
}

}  // namespace triqp
