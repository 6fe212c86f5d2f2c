#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "triqp/dual.hpp"
#include "triqp/oracle.hpp"
#include "triqp/relax.hpp"
#include "triqp/rng.hpp"

using namespace triqp;

namespace {

QcqpInstance make_instance(const Mat& q0, const Vec& c0, const Vec& lo, const Vec& up) {
  return QcqpInstance({SymMatrix::from_dense(q0)}, {c0}, Vec(0), lo, up);
}

DualState random_state(const QcqpInstance& inst, SplitMix64& rng, int num_cuts) {
  const Index n = inst.num_vars();
  DualState d = DualState::zeros(n, inst.num_constraints());
  for (Index r = 0; r < inst.num_constraints(); ++r) d.alpha[r] = rng.uniform(0, 0.5);
  for (Index i = 0; i < n; ++i) {
    d.phi1[i] = rng.uniform(0, 1);
    d.phi2[i] = rng.uniform(0, 1);
    d.phi3[i] = rng.uniform(0, 1);
  }
  for (int c = 0; c < num_cuts && n >= 3; ++c) {
    const int t = 1 + static_cast<int>(rng.next() % 12);
    d.working_cuts.push_back(triangle_cut(inst.lower(), inst.upper(), 0, 1, 2, t));
  }
  d.cut_multipliers = Vec(d.working_cuts.size());
  for (Index c = 0; c < d.cut_multipliers.size(); ++c) d.cut_multipliers[c] = rng.uniform(0, 1);
  return d;
}

}  // namespace

TEST_CASE("aggregate with zero multipliers is the objective block matrix") {
  const QcqpInstance inst = gen_unitbox(3, 2, 1.0, 4);
  const DualState d = DualState::zeros(3, 2);
  const SymMatrix agg = aggregate_matrix(inst, d);
  CHECK(agg.dim() == 4);
  CHECK(agg(0, 0) == 0.0);
  for (Index i = 0; i < 3; ++i) {
    CHECK(agg(0, i + 1) == doctest::Approx(0.5 * inst.linear(0)[i]));
    for (Index j = i; j < 3; ++j) CHECK(agg(i + 1, j + 1) == doctest::Approx(inst.quad(0)(i, j)));
  }
}

TEST_CASE("one McCormick multiplier shifts S and d as the envelope coefficients say") {
  Mat q0 = Mat::Zero(2, 2);
  const QcqpInstance inst = make_instance(q0, Vec::Zero(2), Vec::Zero(2), Vec::Ones(2));
  Vec lo(2), up(2);
  lo << 0.25, 0.5;
  up << 2.0, 3.0;
  const QcqpInstance boxed = inst.with_bounds(lo, up);

  DualState d = DualState::zeros(2, 0);
  const auto mc = mccormick_cuts(lo, up, 0, 1);
  d.working_cuts.push_back(mc[3]);  // mc4: -Y01 + l1 x0 + l0 x1 - l0 l1 <= 0
  REQUIRE(d.working_cuts[0].tag == 4);
  const double phi = 0.8;
  d.cut_multipliers = Vec::Constant(1, phi);

  const SymMatrix agg = aggregate_matrix(boxed, d);
  CHECK(agg(1, 2) == doctest::Approx(-0.5 * phi));
  CHECK(agg(0, 1) == doctest::Approx(0.5 * phi * lo[1]));  // d_0/2 = phi * l1 / 2
  CHECK(agg(0, 2) == doctest::Approx(0.5 * phi * lo[0]));
}

TEST_CASE("the aggregate's S block equals assemble_S0") {
  const QcqpInstance inst = gen_unitbox(4, 3, 1.0, 15);
  SplitMix64 rng(2);
  const DualState d = random_state(inst, rng, 3);
  const SymMatrix agg = aggregate_matrix(inst, d);
  const SymMatrix s0 = assemble_S0(inst, d);
  for (Index i = 0; i < 4; ++i)
    for (Index j = i; j < 4; ++j)
      CHECK(agg(i + 1, j + 1) == doctest::Approx(s0(i, j)).epsilon(1e-14));
}

TEST_CASE("PSD objective with centered box gives a zero bound") {
  Mat q0 = Mat::Identity(3, 3);
  const QcqpInstance inst = make_instance(q0, Vec::Zero(3), Vec::Zero(3), Vec::Ones(3));
  const DualState d = DualState::zeros(3, 0);
  const DualEvaluation e = evaluate_dual(inst, d, trace_cap(inst));
  CHECK(e.bound == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("negative-definite objective on the unit interval reaches -1") {
  Mat q0(1, 1);
  q0 << -1;
  const QcqpInstance inst = make_instance(q0, Vec::Zero(1), Vec::Zero(1), Vec::Ones(1));
  DualOptions options;
  options.p = 0;
  options.max_iter = 500;
  options.target = -1.0;  // known feasible value at x = 1
  const DualState state = run_dual_heuristic(inst, inst.lower(), inst.upper(), options);
  CHECK(state.best_bound <= -1.0 + 1e-9);
  CHECK(state.best_bound == doctest::Approx(-1.0).epsilon(1e-4));
  CHECK(state.working_cuts.empty());  // p = 0 admits no dynamic cuts
}

TEST_CASE("every evaluation is a valid lower bound (weak duality)") {
  SplitMix64 rng(6);
  for (const std::uint64_t seed : {31ULL, 32ULL, 33ULL}) {
    const QcqpInstance inst = gen_unitbox(3, 2, 1.0, seed);
    const OracleResult truth = grid_minimize(inst, 41);
    const double tau = trace_cap(inst);
    for (int rep = 0; rep < 15; ++rep) {
      const DualState d = random_state(inst, rng, rep % 4);
      const DualEvaluation e = evaluate_dual(inst, d, tau);
      CHECK(e.bound <= truth.value + 1e-6);
    }
  }
}

TEST_CASE("supergradient matches central finite differences") {
  SplitMix64 rng(14);
  const QcqpInstance inst = gen_unitbox(3, 2, 1.0, 44);
  const double tau = trace_cap(inst);
  const double h = 1e-6;
  int checked = 0;
  for (int rep = 0; rep < 20; ++rep) {
    DualState d = random_state(inst, rng, 2);
    const DualEvaluation e = evaluate_dual(inst, d, tau);

    auto check_coord = [&](double* slot, double grad) {
      const double saved = *slot;
      *slot = saved + h;
      const double up_v = evaluate_dual(inst, d, tau).bound;
      *slot = saved - h;
      const double dn_v = evaluate_dual(inst, d, tau).bound;
      *slot = saved;
      const double fd = (up_v - dn_v) / (2 * h);
      CHECK(grad == doctest::Approx(fd).epsilon(1e-4));
    };

    check_coord(&d.alpha[rep % 2], e.subgrad_alpha[rep % 2]);
    check_coord(&d.phi1[rep % 3], e.subgrad_phi1[rep % 3]);
    check_coord(&d.phi2[(rep + 1) % 3], e.subgrad_phi2[(rep + 1) % 3]);
    check_coord(&d.phi3[(rep + 2) % 3], e.subgrad_phi3[(rep + 2) % 3]);
    if (d.cut_multipliers.size() > 0) check_coord(&d.cut_multipliers[0], e.subgrad_cuts[0]);
    ++checked;
  }
  CHECK(checked == 20);
}

TEST_CASE("best bound trace is nondecreasing") {
  const QcqpInstance inst = gen_unitbox(4, 3, 1.0, 61);
  std::ostringstream trace;
  DualOptions options;
  options.max_iter = 120;
  options.trace = &trace;
  run_dual_heuristic(inst, inst.lower(), inst.upper(), options);

  std::istringstream in(trace.str());
  std::string line;
  double prev = -std::numeric_limits<double>::infinity();
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    long iter;
    double bound;
    fields >> iter >> bound;
    CHECK(bound >= prev - 1e-12);
    prev = bound;
    ++rows;
  }
  CHECK(rows > 0);
}

TEST_CASE("admitting triangle cuts never hurts at equal budgets") {
  for (const std::uint64_t seed : {71ULL, 72ULL, 73ULL, 74ULL, 75ULL}) {
    const QcqpInstance inst = gen_unitbox(4, 3, 1.0, seed);
    const OracleResult truth = grid_minimize(inst, 31);

    DualOptions base;
    base.max_iter = 400;
    base.target = truth.value;
    DualOptions with_cuts = base;
    base.p = 0;

    const DualState off = run_dual_heuristic(inst, inst.lower(), inst.upper(), base);
    const DualState on = run_dual_heuristic(inst, inst.lower(), inst.upper(), with_cuts);
    CHECK(on.best_bound >= off.best_bound - 1e-9);
    CHECK(off.best_bound <= truth.value + 1e-6);
    CHECK(on.best_bound <= truth.value + 1e-6);
  }
}

TEST_CASE("on a triangle-violating instance the working set picks up the cut") {
  // objective rewards pairwise agreement; its bilinear relaxation point
  // violates triangle cuts, which separation then admits
  Mat q0(3, 3);
  q0 << 0, -1, 1, -1, 0, -1, 1, -1, 0;
  const QcqpInstance inst = make_instance(q0, Vec::Zero(3), Vec::Zero(3), Vec::Ones(3));
  DualOptions options;
  options.max_iter = 800;
  options.p = 40;
  const DualState state = run_dual_heuristic(inst, inst.lower(), inst.upper(), options);
  CHECK(!state.working_cuts.empty());
}

TEST_CASE("dual state accessors check kinds") {
  Vec lo = Vec::Zero(3), up = Vec::Ones(3);
  DualState d = DualState::zeros(3, 0);
  d.working_cuts.push_back(triangle_cut(lo, up, 0, 1, 2, 1));
  d.working_cuts.push_back(mccormick_cuts(lo, up, 0, 1)[0]);
  d.cut_multipliers = Vec::Zero(2);
  d.cut_multipliers << 0.5, 0.25;
  CHECK(d.delta(0) == 0.5);
  CHECK(d.phi(1) == 0.25);
  CHECK_THROWS_AS(d.phi(0), std::out_of_range);
  CHECK_THROWS_AS(d.delta(1), std::out_of_range);
}
