#include "triqp/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace triqp {

LpStats g_lp_stats;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFeasTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr long kMaxIterations = 50000;
constexpr int kBlandTrigger = 1000;
constexpr int kRefactorPeriod = 100;

class Simplex {
 public:
  Simplex(const LpProblem& p, SimplexBasis* warm) : p_(p), n_(p.num_vars()), r_(p.num_rows()) {
    ncols_ = n_ + r_;
    lo_.resize(ncols_);
    up_.resize(ncols_);
    for (Index j = 0; j < n_; ++j) {
      lo_[j] = p.var_lower[j];
      up_[j] = p.var_upper[j];
      if (lo_[j] > up_[j]) throw std::invalid_argument("variable bounds inverted");
    }
    for (Index i = 0; i < r_; ++i) {
      lo_[n_ + i] = 0.0;
      up_[n_ + i] = p.rows[i].sense == '=' ? 0.0 : kInf;
    }
    b_.resize(r_);
    for (Index i = 0; i < r_; ++i) b_[i] = p.rows[i].rhs;

    if (load_warm(warm)) {
      ++g_lp_stats.warm_loads;
    } else {
      cold_start();
      ++g_lp_stats.cold_starts;
    }
    refactor();
  }

  LpSolution run(SimplexBasis* basis_out) {
    LpSolution sol;
    if (!phase(true)) {
      sol.status = stalled_ ? LpStatus::kStalled : LpStatus::kInfeasible;
    } else if (!phase(false)) {
      sol.status = stalled_ ? LpStatus::kStalled : LpStatus::kUnbounded;
    } else {
      sol.status = LpStatus::kOptimal;
    }
    sol.x = Vec(n_);
    for (Index j = 0; j < n_; ++j) sol.x[j] = value(j);
    sol.objective = p_.cost.dot(sol.x);
    sol.duals = duals(false);
    if (sol.status == LpStatus::kOptimal &&
        (!sol.x.allFinite() || !std::isfinite(sol.objective)))
      sol.status = LpStatus::kStalled;
    if (basis_out) {
      basis_out->col_status.assign(status_.begin(), status_.end());
      basis_out->basic_cols = basic_;
    }
    return sol;
  }

 private:
  double column_entry(Index col, Index row) const {
    return col < n_ ? p_.rows[row].coeffs[col] : (col - n_ == row ? 1.0 : 0.0);
  }

  Vec column(Index col) const {
    if (col < n_) {
      Vec a(r_);
      for (Index i = 0; i < r_; ++i) a[i] = p_.rows[i].coeffs[col];
      return a;
    }
    Vec a = Vec::Zero(r_);
    a[col - n_] = 1.0;
    return a;
  }

  double value(Index col) const {
    if (status_[col] == SimplexBasis::kBasic) return xb_[basic_row_[col]];
    if (status_[col] == SimplexBasis::kAtLower) return lo_[col];
    if (status_[col] == SimplexBasis::kAtUpper) return up_[col];
    return 0.0;
  }

  double bound_value(Index col) const {
    switch (status_[col]) {
      case SimplexBasis::kAtLower: return lo_[col];
      case SimplexBasis::kAtUpper: return up_[col];
      default: return 0.0;
    }
  }

  void cold_start() {
    status_.assign(ncols_, SimplexBasis::kAtLower);
    for (Index j = 0; j < ncols_; ++j) {
      if (std::isfinite(lo_[j])) {
        status_[j] = SimplexBasis::kAtLower;
      } else if (std::isfinite(up_[j])) {
        status_[j] = SimplexBasis::kAtUpper;
      } else {
        status_[j] = SimplexBasis::kAtZero;
      }
    }
    basic_.resize(r_);
    for (Index i = 0; i < r_; ++i) {
      basic_[i] = n_ + i;
      status_[n_ + i] = SimplexBasis::kBasic;
    }
  }

  bool load_warm(SimplexBasis* warm) {
    if (!warm || warm->col_status.size() != static_cast<std::size_t>(ncols_) ||
        warm->basic_cols.size() != static_cast<std::size_t>(r_))
      return false;
    status_.assign(warm->col_status.begin(), warm->col_status.end());
    basic_ = warm->basic_cols;
    for (Index i = 0; i < r_; ++i)
      if (basic_[i] < 0 || basic_[i] >= ncols_ || status_[basic_[i]] != SimplexBasis::kBasic)
        return false;
    // basis matrix must be invertible; bail out to a cold start otherwise
    Mat bmat(r_, r_);
    for (Index i = 0; i < r_; ++i) bmat.col(i) = column(basic_[i]);
    Eigen::FullPivLU<Mat> lu(bmat);
    if (!lu.isInvertible()) return false;
    return true;
  }

  void refactor() {
    basic_row_.assign(ncols_, -1);
    for (Index i = 0; i < r_; ++i) basic_row_[basic_[i]] = i;
    if (r_ == 0) {
      xb_.resize(0);
      return;
    }
    Mat bmat(r_, r_);
    for (Index i = 0; i < r_; ++i) bmat.col(i) = column(basic_[i]);
    binv_ = bmat.partialPivLu().inverse();
    if (!binv_.allFinite()) {
      // singular basis (possible on near-degenerate boxes); restart clean
      cold_start();
      basic_row_.assign(ncols_, -1);
      for (Index i = 0; i < r_; ++i) basic_row_[basic_[i]] = i;
      binv_ = Mat::Identity(r_, r_);
    }
    recompute_basic_values();
    pivots_since_refactor_ = 0;
  }

  void recompute_basic_values() {
    Vec residual = b_;
    for (Index j = 0; j < ncols_; ++j) {
      if (status_[j] == SimplexBasis::kBasic) continue;
      const double v = bound_value(j);
      if (v == 0.0) continue;
      if (j < n_) {
        for (Index i = 0; i < r_; ++i) residual[i] -= p_.rows[i].coeffs[j] * v;
      } else {
        residual[j - n_] -= v;
      }
    }
    xb_ = binv_ * residual;
  }

  // phase-1 cost: +1 / -1 on out-of-bound basics
  double infeasibility(Vec* costs) const {
    double total = 0.0;
    if (costs) costs->setZero();
    for (Index i = 0; i < r_; ++i) {
      const Index col = basic_[i];
      if (xb_[i] < lo_[col] - kFeasTol) {
        total += lo_[col] - xb_[i];
        if (costs) (*costs)[i] = -1.0;
      } else if (xb_[i] > up_[col] + kFeasTol) {
        total += xb_[i] - up_[col];
        if (costs) (*costs)[i] = 1.0;
      }
    }
    return total;
  }

  Vec duals(bool phase1) const {
    if (r_ == 0) return Vec();
    Vec cb(r_);
    if (phase1) {
      infeasibility(&cb);
    } else {
      for (Index i = 0; i < r_; ++i) cb[i] = basic_[i] < n_ ? p_.cost[basic_[i]] : 0.0;
    }
    return binv_.transpose() * cb;
  }

  double reduced_cost(Index col, const Vec& y, bool phase1) const {
    double c = 0.0;
    if (!phase1 && col < n_) c = p_.cost[col];
    if (r_ == 0) return c;
    if (col < n_) {
      for (Index i = 0; i < r_; ++i) c -= y[i] * p_.rows[i].coeffs[col];
      return c;
    }
    return c - y[col - n_];
  }

  // Runs one simplex phase; returns true when it reaches its optimum with the
  // goal met (phase 1: zero infeasibility, phase 2: optimality).
  bool phase(bool phase1) {
    int degenerate_run = 0;
    bool bland = false;
    while (true) {
      ++g_lp_stats.pivots;
      if (iterations_++ > kMaxIterations) {
        stalled_ = true;
        return false;
      }
      if (phase1 && infeasibility(nullptr) <= kFeasTol) return true;

      const Vec y = duals(phase1);

      // entering column: Dantzig (most violated reduced cost), or the first
      // eligible index under Bland's rule
      Index enter = -1;
      int dir = 0;
      double best_score = phase1 ? kFeasTol : kDualTol;
      for (Index j = 0; j < ncols_; ++j) {
        if (status_[j] == SimplexBasis::kBasic) continue;
        if (up_[j] - lo_[j] <= kFeasTol && status_[j] != SimplexBasis::kAtZero) continue;
        const double d = reduced_cost(j, y, phase1);
        int cand_dir = 0;
        if (status_[j] == SimplexBasis::kAtLower && d < -best_score) {
          cand_dir = 1;
        } else if (status_[j] == SimplexBasis::kAtUpper && d > best_score) {
          cand_dir = -1;
        } else if (status_[j] == SimplexBasis::kAtZero && std::abs(d) > best_score) {
          cand_dir = d < 0 ? 1 : -1;
        }
        if (cand_dir == 0) continue;
        enter = j;
        dir = cand_dir;
        if (bland) break;
        best_score = std::abs(d);
      }
      if (enter < 0) {
        if (phase1) return infeasibility(nullptr) <= kFeasTol;
        return true;  // optimal
      }

      const Vec w = r_ > 0 ? Vec(binv_ * column(enter)) : Vec();

      // ratio test; out-of-bound basics in phase 1 block at the bound they
      // are returning to
      const double own_flip = up_[enter] - lo_[enter];
      double theta = own_flip;
      Index leave_row = -1;
      int leave_to_upper = 0;
      for (Index i = 0; i < r_; ++i) {
        const double g = -dir * w[i];  // change of basic i per unit step
        if (std::abs(g) <= kPivotTol) continue;
        const Index col = basic_[i];
        double limit = kInf;
        int to_upper = 0;
        if (phase1 && xb_[i] < lo_[col] - kFeasTol) {
          if (g > 0) limit = (lo_[col] - xb_[i]) / g;
        } else if (phase1 && xb_[i] > up_[col] + kFeasTol) {
          if (g < 0) {
            limit = (up_[col] - xb_[i]) / g;
            to_upper = 1;
          }
        } else if (g > 0) {
          if (std::isfinite(up_[col])) {
            limit = (up_[col] - xb_[i]) / g;
            to_upper = 1;
          }
        } else {
          if (std::isfinite(lo_[col])) limit = (lo_[col] - xb_[i]) / g;
        }
        if (limit == kInf) continue;
        limit = std::max(limit, 0.0);
        bool take = false;
        if (limit < theta - 1e-12) {
          take = true;
        } else if (leave_row >= 0 && limit <= theta + 1e-12) {
          // tie-break: largest pivot for stability, smallest column under Bland
          take = bland ? basic_[i] < basic_[leave_row]
                       : std::abs(w[i]) > std::abs(w[leave_row]);
        } else if (leave_row < 0 && limit <= theta) {
          take = true;
        }
        if (take) {
          theta = std::min(theta, limit);
          leave_row = i;
          leave_to_upper = to_upper;
        }
      }

      if (!std::isfinite(theta)) {
        if (phase1) throw std::runtime_error("simplex: unbounded phase-1 direction");
        return false;  // unbounded
      }

      if (theta <= kFeasTol) {
        if (++degenerate_run >= kBlandTrigger) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }

      if (leave_row < 0) {
        // bound flip, no basis change
        xb_ -= dir * theta * w;
        status_[enter] =
            status_[enter] == SimplexBasis::kAtLower ? SimplexBasis::kAtUpper : SimplexBasis::kAtLower;
        continue;
      }

      // pivot: enter becomes basic at bound + dir*theta, leaving variable
      // rests at the bound it hit
      const Index leave_col = basic_[leave_row];
      const double enter_value = bound_value(enter) + dir * theta;
      xb_ -= dir * theta * w;
      status_[leave_col] = leave_to_upper ? SimplexBasis::kAtUpper : SimplexBasis::kAtLower;
      if (!std::isfinite(leave_to_upper ? up_[leave_col] : lo_[leave_col]))
        status_[leave_col] = SimplexBasis::kAtZero;
      status_[enter] = SimplexBasis::kBasic;
      basic_[leave_row] = enter;
      basic_row_[leave_col] = -1;
      basic_row_[enter] = leave_row;
      xb_[leave_row] = enter_value;

      // product-form update of the explicit inverse
      const double pivot = w[leave_row];
      binv_.row(leave_row) /= pivot;
      for (Index i = 0; i < r_; ++i) {
        if (i == leave_row) continue;
        const double factor = w[i];
        if (factor != 0.0) binv_.row(i) -= factor * binv_.row(leave_row);
      }

      if (++pivots_since_refactor_ >= kRefactorPeriod) refactor();
    }
  }

  const LpProblem& p_;
  Index n_, r_, ncols_;
  std::vector<double> lo_, up_;
  Vec b_;
  std::vector<std::uint8_t> status_;
  std::vector<Index> basic_;
  std::vector<Index> basic_row_;
  Mat binv_;
  Vec xb_;
  long iterations_ = 0;
  int pivots_since_refactor_ = 0;
  bool stalled_ = false;
};

}  // namespace

std::string to_string(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kStalled: return "stalled";
  }
  return "unknown";
}

LpSolution solve_lp(const LpProblem& p, SimplexBasis* basis) {
  ++g_lp_stats.solves;
  g_lp_stats.rows += p.num_rows();
  if (p.var_lower.size() != p.num_vars() || p.var_upper.size() != p.num_vars())
    throw std::invalid_argument("cost/bound dimensions disagree");
  for (const LpRow& row : p.rows)
    if (row.coeffs.size() != p.num_vars())
      throw std::invalid_argument("row dimension disagrees with variable count");
  Simplex solver(p, basis);
  return solver.run(basis);
}

}  // namespace triqp
