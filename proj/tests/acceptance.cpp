// Acceptance suite: one line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "triqp/bench.hpp"
#include "triqp/bnb.hpp"
#include "triqp/cuts.hpp"
#include "triqp/dual.hpp"
#include "triqp/lp.hpp"
#include "triqp/model.hpp"
#include "triqp/oracle.hpp"
#include "triqp/relax.hpp"
#include "triqp/rng.hpp"

using namespace triqp;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail, double seconds) {
  std::printf("[%s] criterion %d: %s (%.1fs)\n", pass ? "PASS" : "FAIL", criterion,
              detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void random_box(SplitMix64& rng, Index n, Vec& lo, Vec& up) {
  lo.resize(n);
  up.resize(n);
  for (Index i = 0; i < n; ++i) {
    lo[i] = 9.0 * rng.uniform01();
    up[i] = lo[i] + 0.25 + (10.0 - lo[i] - 0.25) * rng.uniform01();
  }
}

// the n <= 4 verification set shared by criteria 4 and 7
std::vector<QcqpInstance> tiny_instances() {
  std::vector<QcqpInstance> out;
  int k = 0;
  while (out.size() < 30) {
    const Index n = 2 + (k % 3);
    const Index m = 1 + (k % 3);
    const double density = k % 2 == 0 ? 1.0 : 0.5;
    out.push_back(gen_unitbox(n, m, density, 9000 + static_cast<std::uint64_t>(k)));
    ++k;
  }
  return out;
}

OracleResult tiny_oracle(const QcqpInstance& inst) {
  const int steps = inst.num_vars() == 2 ? 101 : (inst.num_vars() == 3 ? 61 : 41);
  return grid_minimize(inst, steps);
}

void criterion1() {
  const auto t0 = Clock::now();
  SplitMix64 rng(1001);
  const std::pair<int, int> retained[12] = {{1, 1}, {1, 2}, {1, 3}, {2, 1}, {2, 2}, {3, 5},
                                            {3, 6}, {4, 5}, {4, 6}, {5, 6}, {6, 6}, {7, 6}};
  bool is_retained[48] = {};
  for (const auto& [f, v] : retained) is_retained[(f - 1) * 6 + (v - 1)] = true;

  bool pass = true;
  int boxes_done = 0;
  for (int b = 0; b < 100 && pass; ++b) {
    Vec lo, up;
    random_box(rng, 3, lo, up);
    const auto cands = candidate_cuts(lo, up, 0, 1, 2);
    int cutting = 0;
    for (int c = 0; c < 48; ++c) {
      const bool redundant = certify_redundant(lo, up, cands[c]);
      if (!redundant) ++cutting;
      if (redundant == is_retained[c]) pass = false;
    }
    if (cutting != 12) pass = false;
    ++boxes_done;
  }
  const double secs = elapsed(t0);
  report(1, pass && secs < 60.0,
         "12 of 48 candidates cut, 36 redundant on " + std::to_string(boxes_done) +
             " random boxes (LP tol 1e-7)",
         secs);
}

void criterion2() {
  const auto t0 = Clock::now();
  SplitMix64 rng(2002);
  double worst_exact = 0.0, worst_mc = 0.0;
  for (int b = 0; b < 100; ++b) {
    Vec lo, up;
    random_box(rng, 3, lo, up);
    const double expect = 0.5 * (up[0] - lo[0]) * (up[1] - lo[1]) * (up[2] - lo[2]);
    for (int t = 1; t <= 12; ++t) {
      const LiftedPoint w = witness_point(lo, up, 0, 1, 2, t);
      worst_exact =
          std::max(worst_exact, std::abs(violation(triangle_cut(lo, up, 0, 1, 2, t), w) - expect));
      for (Index i = 0; i < 3; ++i)
        for (Index j = i; j < 3; ++j)
          for (const Cut& mc : mccormick_cuts(lo, up, i, j))
            worst_mc = std::max(worst_mc, violation(mc, w));
    }
  }
  const double secs = elapsed(t0);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "witness violation equals w_i*w_j*w_k/2 (max err %.1e), McCormick residual %.1e",
                worst_exact, worst_mc);
  report(2, worst_exact <= 1e-9 && worst_mc <= 1e-9 && secs < 10.0, buf, secs);
}

void criterion3() {
  const auto t0 = Clock::now();
  Vec lo = Vec::Zero(3), up = Vec::Ones(3);
  // the four 0-1 triangle forms as (Yij, Yik, Yjk, xi, xj, xk, const)
  const double forms[4][7] = {{-1, -1, -1, 1, 1, 1, -1},
                              {1, 1, -1, -1, 0, 0, 0},
                              {1, -1, 1, 0, -1, 0, 0},
                              {-1, 1, 1, 0, 0, -1, 0}};
  const int expected_form[12] = {1, 1, 1, 4, 4, 3, 3, 2, 2, 2, 3, 4};
  bool pass = true;
  for (int t = 1; t <= 12; ++t) {
    const Cut cut = triangle_cut(lo, up, 0, 1, 2, t);
    double got[7] = {0, 0, 0, 0, 0, 0, cut.constant};
    for (const Cut::YTerm& y : cut.y_terms) {
      const int slot = y.a == 0 ? (y.b == 1 ? 0 : 1) : 2;
      got[slot] += y.coeff;
    }
    for (const Cut::XTerm& x : cut.x_terms) got[3 + x.a] += x.coeff;
    const double* want = forms[expected_form[t - 1] - 1];
    for (int c = 0; c < 7; ++c)
      if (got[c] != want[c]) pass = false;  // exact: 0/1 bound arithmetic
  }
  const double secs = elapsed(t0);
  report(3, pass && secs < 1.0,
         "all 12 cuts reduce to classical 0-1 triangle forms at l=0, u=1 (exact match)", secs);
}

void criterion4() {
  const auto t0 = Clock::now();
  const auto instances = tiny_instances();
  bool pass = true;
  double worst_margin = -1e300;
  for (const QcqpInstance& inst : instances) {
    const OracleResult truth = tiny_oracle(inst);
    std::ostringstream trace;
    DualOptions options;
    options.max_iter = 400;
    options.trace = &trace;
    const DualState state = run_dual_heuristic(inst, inst.lower(), inst.upper(), options);

    // best-so-far covers every iterate; the trace must be nondecreasing
    worst_margin = std::max(worst_margin, state.best_bound - truth.value);
    if (state.best_bound > truth.value + 1e-6) pass = false;
    std::istringstream in(trace.str());
    std::string line;
    double prev = -1e300;
    while (std::getline(in, line)) {
      std::istringstream fields(line);
      long it;
      double bound;
      fields >> it >> bound;
      if (bound < prev - 1e-12) pass = false;
      if (bound > truth.value + 1e-6) pass = false;
      prev = bound;
    }
  }
  const double secs = elapsed(t0);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "dual iterates stay below the grid optimum on 30 instances (worst margin %.1e)",
                worst_margin);
  report(4, pass && secs < 300.0, buf, secs);
}

void criterion5(const std::vector<BenchEntry>& entries) {
  const auto t0 = Clock::now();
  int ordered = 0, strict = 0;
  for (const BenchEntry& e : entries) {
    if (e.root_bound_tri >= e.root_bound_mc - 1e-9) ++ordered;
    if (e.root_bound_tri > e.root_bound_mc + 1e-6) ++strict;
  }
  const int count = static_cast<int>(entries.size());
  const double secs = elapsed(t0);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "triangle root bound >= McCormick root bound on %d/%d, strictly better on %d (need >= %d)",
                ordered, count, strict, (3 * count + 9) / 10);
  report(5, ordered == count && strict * 10 >= count * 3, buf, secs);
}

void criterion6(const std::vector<BenchEntry>& entries, double suite_seconds) {
  int solved_pairs = 0, not_worse = 0;
  double log_ratio = 0.0;
  bool all_solved = true;
  for (const BenchEntry& e : entries) {
    if (e.status_tri != "optimal" || e.status_mc != "optimal") {
      all_solved = false;
      continue;
    }
    ++solved_pairs;
    if (e.nodes_tri <= e.nodes_mc) ++not_worse;
    log_ratio += std::log(static_cast<double>(e.nodes_tri) / static_cast<double>(e.nodes_mc));
  }
  const double geomean = solved_pairs > 0 ? std::exp(log_ratio / solved_pairs) : 1.0;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "nodes(tri) <= nodes(mc) on %d/%d solved pairs, geomean node ratio %.3f%s",
                not_worse, solved_pairs, geomean,
                all_solved ? "" : " [not all pairs solved]");
  report(6, all_solved && not_worse * 10 >= solved_pairs * 8 && suite_seconds < 1800.0, buf,
         suite_seconds);
}

void criterion7() {
  const auto t0 = Clock::now();
  const auto instances = tiny_instances();
  bool pass = true;
  double worst_dev = 0.0;
  for (const QcqpInstance& inst : instances) {
    const OracleResult truth = tiny_oracle(inst);
    const GlobalResult r = solve(inst);
    if (r.status != SolveStatus::kOptimal || !r.incumbent) {
      pass = false;
      continue;
    }
    worst_dev = std::max(worst_dev, std::abs(r.value - truth.value));
    if (std::abs(r.value - truth.value) > 1e-3) pass = false;
    if (r.best_bound > truth.value + 1e-6) pass = false;
  }
  const double secs = elapsed(t0);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "global solve matches the grid oracle on 30 instances (worst |dev| %.1e)",
                worst_dev);
  report(7, pass && secs < 300.0, buf, secs);
}

bool lp_substrate() {
  SplitMix64 rng(808);
  int agree = 0, total = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const Index n = 3 + static_cast<Index>(rng.next() % 3);
    LpProblem p;
    p.cost = Vec(n);
    p.var_lower = Vec(n);
    p.var_upper = Vec(n);
    for (Index j = 0; j < n; ++j) {
      p.cost[j] = rng.uniform(-5, 5);
      p.var_lower[j] = rng.uniform(-2, 0);
      p.var_upper[j] = p.var_lower[j] + rng.uniform(0.5, 4);
    }
    for (int i = 0; i < 6; ++i) {
      LpRow row;
      row.coeffs = Vec(n);
      for (Index j = 0; j < n; ++j) row.coeffs[j] = rng.uniform(-3, 3);
      row.rhs = rng.uniform(-1, 5);
      row.sense = '<';
      p.rows.push_back(std::move(row));
    }
    const LpSolution s = solve_lp(p);
    // brute force: enumerate all n-subsets of rows+bounds as active sets
    struct Plane {
      Vec a;
      double b;
    };
    std::vector<Plane> planes;
    for (const LpRow& row : p.rows) planes.push_back({row.coeffs, row.rhs});
    for (Index j = 0; j < n; ++j) {
      Vec e = Vec::Zero(n);
      e[j] = 1;
      planes.push_back({e, p.var_lower[j]});
      planes.push_back({e, p.var_upper[j]});
    }
    double best = std::numeric_limits<double>::infinity();
    bool feasible = false;
    std::vector<int> idx(n);
    for (Index i = 0; i < n; ++i) idx[i] = static_cast<int>(i);
    const int np = static_cast<int>(planes.size());
    while (true) {
      Mat a(n, n);
      Vec b(n);
      for (Index i = 0; i < n; ++i) {
        a.row(i) = planes[idx[i]].a.transpose();
        b[i] = planes[idx[i]].b;
      }
      Eigen::FullPivLU<Mat> lu(a);
      if (lu.isInvertible()) {
        const Vec x = lu.solve(b);
        bool ok = true;
        for (const LpRow& row : p.rows)
          if (row.coeffs.dot(x) > row.rhs + 1e-7) ok = false;
        for (Index j = 0; j < n; ++j)
          if (x[j] < p.var_lower[j] - 1e-7 || x[j] > p.var_upper[j] + 1e-7) ok = false;
        if (ok) {
          feasible = true;
          best = std::min(best, p.cost.dot(x));
        }
      }
      Index i = n - 1;
      while (i >= 0 && idx[i] == np - static_cast<int>(n - i)) --i;
      if (i < 0) break;
      ++idx[i];
      for (Index j = i + 1; j < n; ++j) idx[j] = idx[j - 1] + 1;
    }
    ++total;
    if (s.status == LpStatus::kOptimal && feasible &&
        std::abs(s.objective - best) <= 1e-7 * std::max(1.0, std::abs(best))) {
      ++agree;
    } else if (s.status == LpStatus::kInfeasible && !feasible) {
      ++agree;
    }
  }
  return agree == total;
}

bool eig_substrate() {
  SplitMix64 rng(909);
  for (const Index n : {5, 17, 34, 51}) {
    SymMatrix a(n);
    for (Index i = 0; i < n; ++i)
      for (Index j = i; j < n; ++j) a.set(i, j, rng.uniform(-8, 8));
    const EigenDecomposition d = eig_symmetric(a);
    const Mat dense = a.to_dense();
    const Mat rebuilt = d.vectors * d.values.asDiagonal() * d.vectors.transpose();
    if ((rebuilt - dense).norm() > 1e-9 * std::max(1.0, dense.norm())) return false;
    if ((d.vectors.transpose() * d.vectors - Mat::Identity(n, n)).norm() > 1e-10) return false;
  }
  return true;
}

bool subgradient_substrate() {
  SplitMix64 rng(707);
  const QcqpInstance inst = gen_unitbox(3, 2, 1.0, 7070);
  const double tau = trace_cap(inst);
  const double h = 1e-6;
  for (int rep = 0; rep < 20; ++rep) {
    DualState d = DualState::zeros(3, 2);
    for (Index r = 0; r < 2; ++r) d.alpha[r] = rng.uniform(0, 0.5);
    for (Index i = 0; i < 3; ++i) {
      d.phi1[i] = rng.uniform(0, 1);
      d.phi2[i] = rng.uniform(0, 1);
      d.phi3[i] = rng.uniform(0, 1);
    }
    d.working_cuts.push_back(
        triangle_cut(inst.lower(), inst.upper(), 0, 1, 2, 1 + static_cast<int>(rng.next() % 12)));
    d.cut_multipliers = Vec::Constant(1, rng.uniform(0, 1));

    const DualEvaluation e = evaluate_dual(inst, d, tau);
    auto check = [&](double* slot, double grad) {
      const double saved = *slot;
      *slot = saved + h;
      const double up_v = evaluate_dual(inst, d, tau).bound;
      *slot = saved - h;
      const double dn_v = evaluate_dual(inst, d, tau).bound;
      *slot = saved;
      const double fd = (up_v - dn_v) / (2 * h);
      return std::abs(grad - fd) <= 1e-4 * std::max(1.0, std::abs(fd));
    };
    if (!check(&d.alpha[rep % 2], e.subgrad_alpha[rep % 2])) return false;
    if (!check(&d.phi1[rep % 3], e.subgrad_phi1[rep % 3])) return false;
    if (!check(&d.phi2[rep % 3], e.subgrad_phi2[rep % 3])) return false;
    if (!check(&d.phi3[rep % 3], e.subgrad_phi3[rep % 3])) return false;
    if (!check(&d.cut_multipliers[0], e.subgrad_cuts[0])) return false;
  }
  return true;
}

void criterion8() {
  const auto t0 = Clock::now();
  const bool lp_ok = lp_substrate();
  const bool eig_ok = eig_substrate();
  const bool sub_ok = subgradient_substrate();
  const double secs = elapsed(t0);
  std::string detail = std::string("LP vs vertex enumeration ") + (lp_ok ? "ok" : "FAIL") +
                       ", eigen reconstruction to order 51 " + (eig_ok ? "ok" : "FAIL") +
                       ", dual supergradient vs finite differences " + (sub_ok ? "ok" : "FAIL");
  report(8, lp_ok && eig_ok && sub_ok, detail, secs);
}

std::string format_result(const GlobalResult& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s|%.17g|%.17g|%ld|%.17g", to_string(r.status).c_str(),
                r.value, r.best_bound, r.nodes, r.root_bound);
  return buf;
}

void criterion9() {
  const auto t0 = Clock::now();
  bool pass = true;

  const QcqpInstance inst = gen_unitbox(8, 12, 0.5, 777);
  const GlobalResult a = solve(inst);
  const GlobalResult b = solve(inst);
  if (format_result(a) != format_result(b)) pass = false;

  BenchConfig bc;
  bc.suite_seed = 5;
  bc.count = 3;
  bc.roots_only = true;
  auto fmt_suite = [](const std::vector<BenchEntry>& es) {
    std::ostringstream out;
    for (const BenchEntry& e : es)
      out << e.name << '|' << std::hexfloat << e.root_bound_tri << '|' << e.root_bound_mc
          << '|' << e.nodes_tri << '|' << e.nodes_mc << '\n';
    return out.str();
  };
  const std::string s1 = fmt_suite(run_paired_suite(bc));
  const std::string s2 = fmt_suite(run_paired_suite(bc));
  if (s1 != s2) pass = false;

  const double secs = elapsed(t0);
  report(9, pass, "repeated solve and bench runs are bit-identical (single-threaded)", secs);
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  criterion1();
  criterion2();
  criterion3();
  criterion4();

  // criteria 5 and 6 share one paired suite run
  const auto suite_t0 = Clock::now();
  BenchConfig bc;
  bc.suite_seed = 1;
  bc.count = 50;
  bc.eps_rel = 1e-4;
  bc.time_limit_seconds = 240.0;
  const std::vector<BenchEntry> entries = run_paired_suite(bc);
  const double suite_seconds = elapsed(suite_t0);
  criterion5(entries);
  criterion6(entries, suite_seconds);

  criterion7();
  criterion8();
  criterion9();

  std::printf("%s: %d criteria failed (total %.1fs)\n", failures == 0 ? "ALL PASS" : "FAILURES",
              failures, elapsed(t0));
  return failures == 0 ? 0 : 1;
}
