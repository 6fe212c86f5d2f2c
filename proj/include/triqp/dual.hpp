#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include "triqp/cuts.hpp"
#include "triqp/model.hpp"

namespace triqp {

/// Multipliers of the spectral Lagrangian dual: alpha on the quadratic
/// constraints, phi1..3 on the diagonal envelopes, rho on the fixed corner of
/// the lifted matrix, plus one multiplier per working-set cut (phi for
/// McCormick cuts, delta for triangles, held in one array parallel to
/// `working_cuts`).
struct DualState {
  Vec alpha;
  Vec phi1, phi2, phi3;
  double rho = 0.0;
  std::vector<Cut> working_cuts;
  Vec cut_multipliers;
  double best_bound = -std::numeric_limits<double>::infinity();

  static DualState zeros(Index n, Index m);

  /// Multiplier of a McCormick working cut (kind check included), by position.
  double phi(std::size_t idx) const;
  /// Multiplier of a triangle working cut, by position.
  double delta(std::size_t idx) const;
};

/// Valid trace cap 1 + sum_i max(lower_i^2, upper_i^2) for the lifted matrix.
double trace_cap(const QcqpInstance& inst);

/// The (n+1)-order block matrix [[rho, d^T/2], [d/2, S]] of the dual aggregate.
SymMatrix aggregate_matrix(const QcqpInstance& inst, const DualState& d);

struct DualEvaluation {
  double bound = 0.0;       // valid lower bound on the instance minimum
  double lambda_min = 0.0;  // of the aggregate at the optimized rho
  double rho_star = 0.0;
  Vec subgrad_alpha, subgrad_phi1, subgrad_phi2, subgrad_phi3, subgrad_cuts;
  Mat z_star;  // inner minimizer over {Z >= 0, tr Z <= trace_cap}
};

/// Evaluates the dual functional at the state's multipliers after an exact
/// 1-D concave search over rho; reports the supergradient at the inner
/// minimizer. Weak duality makes every returned value a valid bound.
DualEvaluation evaluate_dual(const QcqpInstance& inst, const DualState& d, double trace_cap);

struct DualOptions {
  /// Working-set cap; the default resolves to ceil(0.04 * (4 C(n,2) + 12 C(n,3))).
  std::uint64_t p = kDefaultP;
  long max_iter = 500;
  double time_limit_seconds = std::numeric_limits<double>::infinity();
  int sep_period = 10;
  double drop_tol = 1e-8;
  /// Polyak target (a known feasible objective value); NaN selects the
  /// diminishing 1/(k+10) step instead.
  double target = std::numeric_limits<double>::quiet_NaN();
  bool use_triangles = true;
  std::ostream* trace = nullptr;

  static constexpr std::uint64_t kDefaultP = std::numeric_limits<std::uint64_t>::max();
};

/// Projected-supergradient ascent with a monotone center and a dynamic
/// working set: the base multipliers ascend first; once they stall (or half
/// the budget is spent) violated cuts are separated at the running primal
/// average and admitted up to the cap p, with near-zero multipliers dropped.
DualState run_dual_heuristic(const QcqpInstance& inst, const Vec& lower, const Vec& upper,
                             const DualOptions& options = {});

}  // namespace triqp
