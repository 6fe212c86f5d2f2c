#include "triqp/dual.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "triqp/linalg.hpp"

namespace triqp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Objective constant of the dual excluding the -rho term.
double dual_constant(const QcqpInstance& inst, const DualState& d) {
  const Index n = inst.num_vars();
  const Index m = inst.num_constraints();
  double k = 0.0;
  for (Index r = 0; r < m; ++r) k -= d.alpha[r] * inst.rhs(r + 1);
  for (std::size_t c = 0; c < d.working_cuts.size(); ++c)
    k += d.cut_multipliers[c] * d.working_cuts[c].constant;
  for (Index i = 0; i < n; ++i) {
    const double li = inst.lower()[i], ui = inst.upper()[i];
    k += d.phi1[i] * ui * li - d.phi2[i] * ui * ui - d.phi3[i] * li * li;
  }
  return k;
}

// Dense aggregate with the corner left at zero; rho is added by the caller.
Mat aggregate_base(const QcqpInstance& inst, const DualState& d) {
  const Index n = inst.num_vars();
  const Index m = inst.num_constraints();
  Mat s = inst.quad(0).to_dense();
  Vec dv = inst.linear(0);
  for (Index r = 0; r < m; ++r) {
    if (d.alpha[r] == 0.0) continue;
    s += d.alpha[r] * inst.quad(r + 1).to_dense();
    dv += d.alpha[r] * inst.linear(r + 1);
  }
  for (std::size_t c = 0; c < d.working_cuts.size(); ++c) {
    const double mu = d.cut_multipliers[c];
    if (mu == 0.0) continue;
    const Cut& cut = d.working_cuts[c];
    for (const Cut::YTerm& t : cut.y_terms) {
      if (t.a == t.b) {
        s(t.a, t.a) += mu * t.coeff;
      } else {
        s(t.a, t.b) += 0.5 * mu * t.coeff;
        s(t.b, t.a) += 0.5 * mu * t.coeff;
      }
    }
    for (const Cut::XTerm& t : cut.x_terms) dv[t.a] += mu * t.coeff;
  }
  for (Index i = 0; i < n; ++i) {
    const double li = inst.lower()[i], ui = inst.upper()[i];
    s(i, i) += d.phi1[i] - d.phi2[i] - d.phi3[i];
    dv[i] += -d.phi1[i] * (ui + li) + 2.0 * d.phi2[i] * ui + 2.0 * d.phi3[i] * li;
  }
  Mat b = Mat::Zero(n + 1, n + 1);
  b.block(1, 1, n, n) = s;
  b.block(1, 0, n, 1) = 0.5 * dv;
  b.block(0, 1, 1, n) = 0.5 * dv.transpose();
  return b;
}

struct RhoPoint {
  double lambda = 0.0;
  Vec vector;
  double q = 0.0;       // K - rho + tau * min(0, lambda)
  double slope = 0.0;   // dq/drho = -1 + tau * v0^2 (when lambda < 0)
};

RhoPoint probe(const Mat& base, double k, double tau, double rho) {
  Mat b = base;
  b(0, 0) = rho;
  auto [values, vectors] = jacobi_eigen(b);
  RhoPoint p;
  p.lambda = values[0];
  p.vector = vectors.col(0);
  p.q = k - rho + tau * std::min(0.0, p.lambda);
  p.slope = p.lambda < 0.0 ? -1.0 + tau * p.vector[0] * p.vector[0] : -1.0;
  return p;
}

}  // namespace

DualState DualState::zeros(Index n, Index m) {
  DualState d;
  d.alpha = Vec::Zero(m);
  d.phi1 = Vec::Zero(n);
  d.phi2 = Vec::Zero(n);
  d.phi3 = Vec::Zero(n);
  return d;
}

double DualState::phi(std::size_t idx) const {
  if (idx >= working_cuts.size() || working_cuts[idx].kind != CutKind::kMcCormick)
    throw std::out_of_range("no McCormick cut at this working-set position");
  return cut_multipliers[idx];
}

double DualState::delta(std::size_t idx) const {
  if (idx >= working_cuts.size() || working_cuts[idx].kind != CutKind::kTriangle)
    throw std::out_of_range("no triangle cut at this working-set position");
  return cut_multipliers[idx];
}

double trace_cap(const QcqpInstance& inst) {
  double tau = 1.0;
  for (Index i = 0; i < inst.num_vars(); ++i) {
    const double li = inst.lower()[i], ui = inst.upper()[i];
    tau += std::max(li * li, ui * ui);
  }
  return tau;
}

SymMatrix aggregate_matrix(const QcqpInstance& inst, const DualState& d) {
  Mat b = aggregate_base(inst, d);
  b(0, 0) = d.rho;
  return SymMatrix::from_dense(b);
}

DualEvaluation evaluate_dual(const QcqpInstance& inst, const DualState& d, double tau) {
  const Index n = inst.num_vars();
  const Index m = inst.num_constraints();
  const double k = dual_constant(inst, d);
  const Mat base = aggregate_base(inst, d);

  // Concave 1-D maximization of q(rho); the slope runs from tau - 1 > 0 far
  // left to -1 far right, so a sign-changing bracket always exists.
  double lo = d.rho, hi = d.rho;
  RhoPoint plo = probe(base, k, tau, lo);
  double span = 1.0 + std::abs(d.rho);
  while (plo.slope < 0.0 && std::isfinite(lo)) {
    lo -= span;
    span *= 2.0;
    plo = probe(base, k, tau, lo);
    if (span > 1e16) break;
  }
  RhoPoint phi_pt = probe(base, k, tau, hi);
  span = 1.0 + std::abs(d.rho);
  while (phi_pt.slope > 0.0 && std::isfinite(hi)) {
    hi += span;
    span *= 2.0;
    phi_pt = probe(base, k, tau, hi);
    if (span > 1e16) break;
  }
  RhoPoint best = plo.q >= phi_pt.q ? plo : phi_pt;
  double rho_star = plo.q >= phi_pt.q ? lo : hi;
  for (int it = 0; it < 40 && hi - lo > 1e-11 * (1.0 + std::min(std::abs(lo), std::abs(hi)));
       ++it) {
    const double mid = 0.5 * (lo + hi);
    const RhoPoint pm = probe(base, k, tau, mid);
    if (pm.q > best.q) {
      best = pm;
      rho_star = mid;
    }
    if (pm.slope > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  DualEvaluation eval;
  eval.bound = best.q;
  eval.lambda_min = best.lambda;
  eval.rho_star = rho_star;
  // after the rho search the aggregate generically sits at the spectral
  // kink; the eigenvector-based minimizer is the supergradient choice that
  // keeps curvature information there
  const double kink_tol = 1e-11 * (1.0 + base.norm());
  eval.z_star = best.lambda < kink_tol ? Mat(tau * best.vector * best.vector.transpose())
                                       : Mat(Mat::Zero(n + 1, n + 1));

  const Vec xs = eval.z_star.col(0).tail(n);
  const auto xblock = eval.z_star.block(1, 1, n, n);

  eval.subgrad_alpha = Vec(m);
  for (Index r = 0; r < m; ++r) {
    const SymMatrix& q = inst.quad(r + 1);
    double g = -inst.rhs(r + 1) + inst.linear(r + 1).dot(xs);
    for (Index i = 0; i < n; ++i) {
      g += q(i, i) * xblock(i, i);
      for (Index j = i + 1; j < n; ++j) g += 2.0 * q(i, j) * xblock(i, j);
    }
    eval.subgrad_alpha[r] = g;
  }
  eval.subgrad_phi1 = Vec(n);
  eval.subgrad_phi2 = Vec(n);
  eval.subgrad_phi3 = Vec(n);
  for (Index i = 0; i < n; ++i) {
    const double li = inst.lower()[i], ui = inst.upper()[i];
    eval.subgrad_phi1[i] = xblock(i, i) - (ui + li) * xs[i] + ui * li;
    eval.subgrad_phi2[i] = -xblock(i, i) + 2.0 * ui * xs[i] - ui * ui;
    eval.subgrad_phi3[i] = -xblock(i, i) + 2.0 * li * xs[i] - li * li;
  }
  eval.subgrad_cuts = Vec(static_cast<Index>(d.working_cuts.size()));
  for (std::size_t c = 0; c < d.working_cuts.size(); ++c) {
    const Cut& cut = d.working_cuts[c];
    double g = cut.constant;
    for (const Cut::YTerm& t : cut.y_terms) g += t.coeff * xblock(t.a, t.b);
    for (const Cut::XTerm& t : cut.x_terms) g += t.coeff * xs[t.a];
    eval.subgrad_cuts[static_cast<Index>(c)] = g;
  }
  return eval;
}

DualState run_dual_heuristic(const QcqpInstance& inst, const Vec& lower, const Vec& upper,
                             const DualOptions& options) {
  const auto start_time = std::chrono::steady_clock::now();
  auto elapsed = [&start_time] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
  };

  const QcqpInstance boxed = inst.with_bounds(lower, upper);
  const Index n = boxed.num_vars();
  const Index m = boxed.num_constraints();
  const double tau = trace_cap(boxed);

  std::uint64_t p = options.p;
  if (p == DualOptions::kDefaultP)
    p = static_cast<std::uint64_t>(std::ceil(0.04 * static_cast<double>(dynamic_family_size(n))));

  DualState current = DualState::zeros(n, m);
  DualEvaluation current_eval = evaluate_dual(boxed, current, tau);
  current.rho = current_eval.rho_star;
  current.best_bound = current_eval.bound;
  DualState best = current;
  double best_bound = current_eval.bound;

  // Diagonal envelopes stay dualized through phi1..3; keep them out of the
  // separation scan.
  CutPool exclude(lower, upper);
  for (Index i = 0; i < n; ++i)
    for (const Cut& cut : mccormick_cuts(lower, upper, i, i)) exclude.add(cut);

  // Fixed diagonal preconditioner: multiplier coordinates live on very
  // different scales (constraint rows vs. envelope coefficients), and the
  // ascent direction is rescaled by the squared coefficient norms.
  Vec scale_alpha(m);
  for (Index r = 0; r < m; ++r)
    scale_alpha[r] = std::max(
        1.0, boxed.quad(r + 1).packed().norm() + boxed.linear(r + 1).norm() +
                 std::abs(boxed.rhs(r + 1)));
  Vec scale_phi1(n), scale_phi2(n), scale_phi3(n);
  for (Index i = 0; i < n; ++i) {
    const double li = boxed.lower()[i], ui = boxed.upper()[i];
    scale_phi1[i] = std::max(1.0, 1.0 + (ui + li) + ui * li);
    scale_phi2[i] = std::max(1.0, 1.0 + 2.0 * ui + ui * ui);
    scale_phi3[i] = std::max(1.0, 1.0 + 2.0 * li + li * li);
  }
  auto cut_scale = [](const Cut& cut) {
    double s = std::abs(cut.constant);
    for (const Cut::YTerm& t : cut.y_terms) s += std::abs(t.coeff);
    for (const Cut::XTerm& t : cut.x_terms) s += std::abs(t.coeff);
    return std::max(1.0, s);
  };

  Mat z_avg = Mat::Zero(n + 1, n + 1);
  bool have_avg = false;

  // Classic (non-monotone) Polyak iterates with best-so-far tracking. The
  // ascent runs on the base multipliers until the best bound stalls; only
  // then are cuts separated. A p = 0 run stops at the stall point, and a
  // p > 0 run shares its whole trajectory up to it, so admitting cuts can
  // never end below the p = 0 bound at the same budget.
  double step_scale = 1.0;
  long since_best = 0;
  // surrogate Polyak level when no incumbent target is known
  double level_delta = 0.2 * (1.0 + std::abs(current_eval.bound));
  Vec dir_alpha, dir_phi1, dir_phi2, dir_phi3, dir_cuts;
  bool pure_phase = true;
  bool separate_now = false;
  long last_meaningful = 0;
  long switch_iter = 0;
  constexpr long kStallWindow = 30;
  constexpr double kStallTol = 1e-7;
  const double target = options.target;
  const bool polyak = std::isfinite(target);

  for (long k = 1; k <= options.max_iter; ++k) {
    if (elapsed() > options.time_limit_seconds) break;

    if (pure_phase && k - last_meaningful >= kStallWindow) {
      if (p == 0) break;  // base ascent converged; nothing left to add
      pure_phase = false;
      separate_now = true;
      switch_iter = k;
    }

    if (!pure_phase && p > 0 &&
        (separate_now || (k - switch_iter) % options.sep_period == 0)) {
      separate_now = false;
      // drop cuts whose multipliers collapsed
      std::vector<Cut> kept;
      std::vector<double> kept_mu;
      for (std::size_t c = 0; c < current.working_cuts.size(); ++c) {
        if (current.cut_multipliers[c] >= options.drop_tol) {
          kept.push_back(current.working_cuts[c]);
          kept_mu.push_back(current.cut_multipliers[c]);
        }
      }
      bool changed = kept.size() != current.working_cuts.size();
      if (changed) {
        current.working_cuts = std::move(kept);
        current.cut_multipliers = Eigen::Map<Vec>(kept_mu.data(), kept_mu.size());
      }

      if (current.working_cuts.size() < p && have_avg && z_avg(0, 0) > 1e-9) {
        LiftedPoint avg;
        avg.x = z_avg.col(0).tail(n) / z_avg(0, 0);
        avg.Y = SymMatrix(n);
        for (Index i = 0; i < n; ++i)
          for (Index j = i; j < n; ++j) avg.Y.set(i, j, z_avg(i + 1, j + 1) / z_avg(0, 0));

        CutPool scan_exclude = exclude;
        for (const Cut& cut : current.working_cuts) scan_exclude.add(cut);
        SeparationOptions sep;
        sep.triangles = options.use_triangles;
        std::vector<Cut> found =
            separate(avg, lower, upper, p - current.working_cuts.size(), scan_exclude, sep);
        if (!found.empty()) {
          Vec mu = Vec::Zero(current.cut_multipliers.size() + static_cast<Index>(found.size()));
          mu.head(current.cut_multipliers.size()) = current.cut_multipliers;
          current.cut_multipliers = std::move(mu);
          for (Cut& cut : found) current.working_cuts.push_back(std::move(cut));
          changed = true;
        }
      }
      if (changed) {
        current_eval = evaluate_dual(boxed, current, tau);
        current.rho = current_eval.rho_star;
      }
    }

    // preconditioned supergradient
    const Index ncut = static_cast<Index>(current.working_cuts.size());
    Vec d_alpha = current_eval.subgrad_alpha.cwiseQuotient(scale_alpha);
    Vec d_phi1 = current_eval.subgrad_phi1.cwiseQuotient(scale_phi1);
    Vec d_phi2 = current_eval.subgrad_phi2.cwiseQuotient(scale_phi2);
    Vec d_phi3 = current_eval.subgrad_phi3.cwiseQuotient(scale_phi3);
    Vec d_cuts(ncut);
    for (Index c = 0; c < ncut; ++c)
      d_cuts[c] = current_eval.subgrad_cuts[c] / cut_scale(current.working_cuts[c]);

    // deflect against the previous direction (Camerini-Fratta-Maffioli)
    if (dir_cuts.size() != ncut) {
      dir_alpha = Vec::Zero(m);
      dir_phi1 = dir_phi2 = dir_phi3 = Vec::Zero(n);
      dir_cuts = Vec::Zero(ncut);
    }
    const double prev_norm2 = dir_alpha.squaredNorm() + dir_phi1.squaredNorm() +
                              dir_phi2.squaredNorm() + dir_phi3.squaredNorm() +
                              dir_cuts.squaredNorm();
    if (prev_norm2 > 1e-18) {
      const double cross = dir_alpha.dot(d_alpha) + dir_phi1.dot(d_phi1) +
                           dir_phi2.dot(d_phi2) + dir_phi3.dot(d_phi3) + dir_cuts.dot(d_cuts);
      const double beta = std::max(0.0, -1.5 * cross / prev_norm2);
      d_alpha += beta * dir_alpha;
      d_phi1 += beta * dir_phi1;
      d_phi2 += beta * dir_phi2;
      d_phi3 += beta * dir_phi3;
      d_cuts += beta * dir_cuts;
    }
    dir_alpha = d_alpha;
    dir_phi1 = d_phi1;
    dir_phi2 = d_phi2;
    dir_phi3 = d_phi3;
    dir_cuts = d_cuts;

    const double g2 = d_alpha.squaredNorm() + d_phi1.squaredNorm() + d_phi2.squaredNorm() +
                      d_phi3.squaredNorm() + d_cuts.squaredNorm();
    if (g2 < 1e-18) break;

    if (polyak && target - best_bound <= 1e-12 * std::max(1.0, std::abs(target))) break;
    const double level = polyak ? target : best_bound + level_delta;
    double step = step_scale * std::max(level - current_eval.bound, 0.0) / g2;
    if (step <= 0.0) step = step_scale / (static_cast<double>(k + 10) * std::sqrt(g2));

    current.alpha = (current.alpha + step * d_alpha.cwiseQuotient(scale_alpha)).cwiseMax(0.0);
    current.phi1 = (current.phi1 + step * d_phi1.cwiseQuotient(scale_phi1)).cwiseMax(0.0);
    current.phi2 = (current.phi2 + step * d_phi2.cwiseQuotient(scale_phi2)).cwiseMax(0.0);
    current.phi3 = (current.phi3 + step * d_phi3.cwiseQuotient(scale_phi3)).cwiseMax(0.0);
    for (Index c = 0; c < ncut; ++c)
      current.cut_multipliers[c] = std::max(
          0.0, current.cut_multipliers[c] + step * d_cuts[c] / cut_scale(current.working_cuts[c]));

    current_eval = evaluate_dual(boxed, current, tau);
    current.rho = current_eval.rho_star;
    current.best_bound = std::max(best_bound, current_eval.bound);
    if (current_eval.z_star(0, 0) > 0.0) {
      z_avg = have_avg ? Mat(0.7 * z_avg + 0.3 * current_eval.z_star) : current_eval.z_star;
      have_avg = true;
    }

    if (current_eval.bound > best_bound) {
      const double gain = current_eval.bound - best_bound;
      if (gain >= kStallTol * std::max(1.0, std::abs(current_eval.bound))) last_meaningful = k;
      best_bound = current_eval.bound;
      best = current;
      since_best = 0;
      step_scale = std::min(2.0, step_scale * 1.05);
    } else if (++since_best >= 15) {
      step_scale = std::max(1e-5, step_scale * 0.5);
      level_delta = std::max(1e-9, 0.5 * level_delta);
      since_best = 0;
    }

    if (options.trace) {
      char line[128];
      std::snprintf(line, sizeof(line), "%ld\t%.17g\t%zu\t%.17g\n", k, best_bound,
                    current.working_cuts.size(), current_eval.lambda_min);
      (*options.trace) << line;
    }
  }
  best.best_bound = best_bound;
  return best;
}


}  // namespace triqp
