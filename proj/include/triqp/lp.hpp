#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "triqp/types.hpp"

namespace triqp {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kStalled };

std::string to_string(LpStatus s);

struct LpRow {
  Vec coeffs;
  double rhs = 0.0;
  char sense = '<';  // '<' inequality (<=) or '=' equality
};

struct LpProblem {
  Vec cost;
  std::vector<LpRow> rows;
  Vec var_lower, var_upper;  // +-inf allowed

  Index num_vars() const { return cost.size(); }
  Index num_rows() const { return static_cast<Index>(rows.size()); }
};

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  Vec x;
  double objective = 0.0;
  /// Row multipliers y = c_B^T B^-1; for a minimization, '<' rows carry
  /// y_r <= 0 at optimality and c^T x = y^T b + sum of nonbasic reduced
  /// costs times bound values.
  Vec duals;
};

/// Basis snapshot for warm starts across related solves. Column order is
/// structurals then one slack per row.
struct SimplexBasis {
  enum : std::uint8_t { kAtLower = 0, kAtUpper = 1, kBasic = 2, kAtZero = 3 };
  std::vector<std::uint8_t> col_status;
  std::vector<Index> basic_cols;  // one per row
};

/// Cumulative instrumentation counters (single-threaded accuracy only).
struct LpStats {
  long solves = 0, cold_starts = 0, warm_loads = 0, pivots = 0, rows = 0;
};
extern LpStats g_lp_stats;

/// Bounded-variable revised simplex, Dantzig pricing with a Bland fallback
/// after 1000 consecutive degenerate pivots; iteration cap 50,000 reports
/// "stalled". Pass a basis to warm-start; on return it holds the final basis.
LpSolution solve_lp(const LpProblem& p, SimplexBasis* basis = nullptr);

}  // namespace triqp
