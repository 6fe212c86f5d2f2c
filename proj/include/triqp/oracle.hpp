#pragma once

#include "triqp/cuts.hpp"
#include "triqp/model.hpp"

namespace triqp {

struct OracleResult {
  double value = 0.0;
  Vec argmin;
  double resolution = 0.0;  // largest per-dimension grid step
};

/// Exhaustive grid scan (endpoints included) over the box keeping feasible
/// points, finished by one local-search polish from the best grid point.
/// Guarded to n <= 4; throws when no grid point is feasible.
OracleResult grid_minimize(const QcqpInstance& inst, int steps_per_dim);

/// True iff the candidate's maximum violation subject to the twelve McCormick
/// cuts of its triple plus the box bounds is at most 1e-7 (LP certificate).
bool certify_redundant(const Vec& lower, const Vec& upper, const Cut& candidate);

}  // namespace triqp
