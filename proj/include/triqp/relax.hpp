#pragma once

#include <vector>

#include "triqp/cuts.hpp"
#include "triqp/dual.hpp"
#include "triqp/lp.hpp"
#include "triqp/model.hpp"

namespace triqp {

/// PSD objective/constraint perturbations S_0..S_m.
struct PerturbationSet {
  std::vector<SymMatrix> S;

  bool all_psd() const {
    for (const SymMatrix& s : S)
      if (!is_psd(s)) return false;
    return true;
  }
};

enum class RelaxStatus { kOptimal, kInfeasible, kStalled };

struct RelaxationSolution {
  RelaxStatus status = RelaxStatus::kInfeasible;
  LiftedPoint point;
  double bound = 0.0;  // valid lower bound on the instance over the node box
};

/// f_{r,S_r}(x, Y) = <S_r, xx^T> + c_r^T x + <Q_r - S_r, Y>.
double f_perturbed(const QcqpInstance& inst, Index r, const SymMatrix& s_r, const LiftedPoint& p);

/// LP over variables (x, packed upper-triangular Y): the m linearized
/// constraints, every pool cut, box bounds on x, and corner-product bounds on
/// each Y variable. Objective is the standard linearization of f_0.
LpProblem build_linearization(const QcqpInstance& inst, const Vec& lower, const Vec& upper,
                              const CutPool& pool);

/// S_0^* = Q_0 + sum alpha_r Q_r + Phi + Delta assembled from the dual state.
SymMatrix assemble_S0(const QcqpInstance& inst, const DualState& d);

/// Conditional-gradient minimization of the convex objective f_{0,S0} over
/// the polytope of `lp` (whose cost vector is ignored). The returned bound is
/// the best linear-minorant value, valid even at early termination.
RelaxationSolution frank_wolfe(const SymMatrix& s0, const QcqpInstance& inst, const LpProblem& lp,
                               double tol);

struct NodeSolveOptions {
  bool use_triangles = true;
  std::size_t cuts_per_round = 200;
  int max_rounds = 40;
  double separation_tol = 1e-7;
  /// Separation stops once the pool reaches this many cuts (0 = unlimited).
  std::size_t pool_cap = 0;
  const SymMatrix* s0 = nullptr;  // convexified objective, used when present
  double fw_tol = 1e-6;
};

/// Cutting-plane relaxation solve: alternates LP solves with McCormick /
/// triangle separation at the LP optimum, growing `pool`; finishes with a
/// conditional-gradient pass when a convexified objective is supplied.
/// A basis passed in warm-starts the first LP (row order must be the m
/// constraint rows then the pool cuts) and returns holding the final basis.
RelaxationSolution solve_node_relaxation(const QcqpInstance& inst, const Vec& lower,
                                         const Vec& upper, CutPool& pool,
                                         const NodeSolveOptions& options = {},
                                         SimplexBasis* basis_io = nullptr);

}  // namespace triqp
