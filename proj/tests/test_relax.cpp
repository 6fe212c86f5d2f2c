#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "triqp/oracle.hpp"
#include "triqp/relax.hpp"
#include "triqp/rng.hpp"

using namespace triqp;

namespace {

QcqpInstance make_instance(const Mat& q0, const Vec& c0, const Vec& lo, const Vec& up) {
  return QcqpInstance({SymMatrix::from_dense(q0)}, {c0}, Vec(0), lo, up);
}

QcqpInstance bilinear_min() {  // min -x0 x1 on [0,1]^2
  Mat q(2, 2);
  q << 0, -0.5, -0.5, 0;
  return make_instance(q, Vec::Zero(2), Vec::Zero(2), Vec::Ones(2));
}

CutPool full_mccormick(const Vec& lo, const Vec& up) {
  CutPool pool(lo, up);
  for (Index i = 0; i < lo.size(); ++i)
    for (Index j = i; j < lo.size(); ++j)
      for (const Cut& c : mccormick_cuts(lo, up, i, j)) pool.add(c);
  return pool;
}

LiftedPoint lift(const Vec& x) {
  LiftedPoint p;
  p.x = x;
  p.Y = SymMatrix(x.size());
  for (Index i = 0; i < x.size(); ++i)
    for (Index j = i; j < x.size(); ++j) p.Y.set(i, j, x[i] * x[j]);
  return p;
}

}  // namespace

TEST_CASE("f_perturbed reduces to the linearization at S = 0") {
  const QcqpInstance inst = gen_unitbox(4, 2, 1.0, 5);
  SplitMix64 rng(9);
  LiftedPoint p;
  p.x = Vec(4);
  for (Index i = 0; i < 4; ++i) p.x[i] = rng.uniform01();
  p.Y = SymMatrix(4);
  for (Index i = 0; i < 4; ++i)
    for (Index j = i; j < 4; ++j) p.Y.set(i, j, rng.uniform(-1, 1));

  const SymMatrix zero(4);
  for (Index r = 0; r <= 2; ++r) {
    double lin = inst.linear(r).dot(p.x);
    for (Index i = 0; i < 4; ++i)
      for (Index j = 0; j < 4; ++j) lin += inst.quad(r)(i, j) * p.Y(i, j);
    CHECK(f_perturbed(inst, r, zero, p) == doctest::Approx(lin).epsilon(1e-12));
  }
}

TEST_CASE("f_perturbed equals f_r on exact lifts for any PSD perturbation") {
  const QcqpInstance inst = gen_unitbox(3, 2, 1.0, 8);
  SplitMix64 rng(10);
  for (int rep = 0; rep < 10; ++rep) {
    Vec x(3);
    for (Index i = 0; i < 3; ++i) x[i] = rng.uniform01();
    const LiftedPoint p = lift(x);
    Mat g(3, 3);
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 3; ++j) g(i, j) = rng.uniform(-1, 1);
    const SymMatrix psd = SymMatrix::from_dense(g * g.transpose());
    for (Index r = 0; r <= 2; ++r)
      CHECK(f_perturbed(inst, r, psd, p) ==
            doctest::Approx(evaluate_constraint(inst, r, x)).epsilon(1e-10));
  }
}

TEST_CASE("f_perturbed with identity objective only") {
  Mat q = Mat::Identity(3, 3);
  const QcqpInstance inst = make_instance(q, Vec::Zero(3), Vec::Zero(3), Vec::Ones(3));
  LiftedPoint p;
  p.x = Vec::Ones(3);
  p.Y = SymMatrix(3);
  CHECK(f_perturbed(inst, 0, SymMatrix::identity(3), p) == doctest::Approx(3.0));
}

TEST_CASE("bilinear minimization over the unit square hits -1 with McCormick") {
  const QcqpInstance inst = bilinear_min();
  const CutPool pool = full_mccormick(inst.lower(), inst.upper());
  const LpProblem lp = build_linearization(inst, inst.lower(), inst.upper(), pool);
  const LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(-1.0));
  // Y01 rides the over-estimators: at the optimum Y = min(x0, x1)
  CHECK(sol.x[2 + packed_index(2, 0, 1)] ==
        doctest::Approx(std::min(sol.x[0], sol.x[1])).epsilon(1e-7));
}

TEST_CASE("bilinear maximization analogue: min x0 x1 gives 0") {
  Mat q(2, 2);
  q << 0, 0.5, 0.5, 0;
  const QcqpInstance inst = make_instance(q, Vec::Zero(2), Vec::Zero(2), Vec::Ones(2));
  const CutPool pool = full_mccormick(inst.lower(), inst.upper());
  const LpSolution sol = solve_lp(build_linearization(inst, inst.lower(), inst.upper(), pool));
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(0.0));
}

TEST_CASE("triangle cuts never weaken the linearization") {
  for (const std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
    const QcqpInstance inst = gen_unitbox(5, 4, 1.0, seed);
    CutPool pool = full_mccormick(inst.lower(), inst.upper());
    const LpSolution base = solve_lp(build_linearization(inst, inst.lower(), inst.upper(), pool));
    REQUIRE(base.status == LpStatus::kOptimal);
    for (Index i = 0; i < 5; ++i)
      for (Index j = i + 1; j < 5; ++j)
        for (Index k = j + 1; k < 5; ++k)
          for (const Cut& c : triangle_cuts(inst.lower(), inst.upper(), i, j, k)) pool.add(c);
    const LpSolution more = solve_lp(build_linearization(inst, inst.lower(), inst.upper(), pool));
    REQUIRE(more.status == LpStatus::kOptimal);
    CHECK(more.objective >= base.objective - 1e-9);
  }
}

TEST_CASE("assemble_S0 with zero multipliers returns Q0") {
  const QcqpInstance inst = gen_unitbox(4, 3, 1.0, 77);
  const DualState d = DualState::zeros(4, 3);
  const SymMatrix s0 = assemble_S0(inst, d);
  CHECK(s0 == inst.quad(0));
}

TEST_CASE("frank_wolfe on one-variable quadratics") {
  // min x^2 on [0, 1]
  Mat q(1, 1);
  q << 1;
  const QcqpInstance inst = make_instance(q, Vec::Zero(1), Vec::Zero(1), Vec::Ones(1));
  const CutPool pool = full_mccormick(inst.lower(), inst.upper());
  const LpProblem lp = build_linearization(inst, inst.lower(), inst.upper(), pool);
  const RelaxationSolution sol = frank_wolfe(SymMatrix::identity(1), inst, lp, 1e-8);
  CHECK(sol.status == RelaxStatus::kOptimal);
  CHECK(sol.bound == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(sol.point.x[0] == doctest::Approx(0.0).epsilon(1e-4));

  // min (x - 1/2)^2 - 1/4 = x^2 - x: gap closes fast, optimum -1/4 at 1/2
  Vec c(1);
  c << -1;
  const QcqpInstance shifted = make_instance(q, c, Vec::Zero(1), Vec::Ones(1));
  const LpProblem lp2 = build_linearization(shifted, shifted.lower(), shifted.upper(), pool);
  const RelaxationSolution s2 = frank_wolfe(SymMatrix::identity(1), shifted, lp2, 1e-6);
  CHECK(s2.status == RelaxStatus::kOptimal);
  CHECK(s2.bound == doctest::Approx(-0.25).epsilon(1e-5));
  CHECK(s2.point.x[0] == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("frank_wolfe with S0 = 0 matches the plain LP bound") {
  const QcqpInstance inst = bilinear_min();
  const CutPool pool = full_mccormick(inst.lower(), inst.upper());
  const LpProblem lp = build_linearization(inst, inst.lower(), inst.upper(), pool);
  const RelaxationSolution fw = frank_wolfe(SymMatrix(2), inst, lp, 1e-9);
  const LpSolution direct = solve_lp(lp);
  CHECK(fw.bound == doctest::Approx(direct.objective).epsilon(1e-9));
}

TEST_CASE("frank_wolfe rejects indefinite objectives") {
  const QcqpInstance inst = bilinear_min();
  const CutPool pool = full_mccormick(inst.lower(), inst.upper());
  const LpProblem lp = build_linearization(inst, inst.lower(), inst.upper(), pool);
  SymMatrix bad(2);
  bad.set(0, 0, -1.0);
  CHECK_THROWS_AS(frank_wolfe(bad, inst, lp, 1e-6), std::invalid_argument);
}

TEST_CASE("node relaxation bound is valid against the grid oracle") {
  for (const std::uint64_t seed : {11ULL, 12ULL, 13ULL}) {
    const QcqpInstance inst = gen_unitbox(3, 2, 1.0, seed);
    const OracleResult truth = grid_minimize(inst, 41);
    CutPool pool(inst.lower(), inst.upper());
    const RelaxationSolution sol =
        solve_node_relaxation(inst, inst.lower(), inst.upper(), pool);
    REQUIRE(sol.status == RelaxStatus::kOptimal);
    CHECK(sol.bound <= truth.value + 1e-6);
  }
}

TEST_CASE("monotone strengthening of the node relaxation") {
  int strict = 0;
  for (const std::uint64_t seed : {21ULL, 22ULL, 23ULL, 24ULL, 25ULL, 26ULL}) {
    const QcqpInstance inst = gen_unitbox(6, 5, 1.0, seed);
    NodeSolveOptions mc_only;
    mc_only.use_triangles = false;
    CutPool pool_mc(inst.lower(), inst.upper());
    const RelaxationSolution a =
        solve_node_relaxation(inst, inst.lower(), inst.upper(), pool_mc, mc_only);

    NodeSolveOptions with_tri;
    with_tri.use_triangles = true;
    CutPool pool_tri = pool_mc;  // continue from the McCormick pool
    const RelaxationSolution b =
        solve_node_relaxation(inst, inst.lower(), inst.upper(), pool_tri, with_tri);
    REQUIRE(a.status == RelaxStatus::kOptimal);
    REQUIRE(b.status == RelaxStatus::kOptimal);
    CHECK(b.bound >= a.bound - 1e-9);
    if (b.bound > a.bound + 1e-6) ++strict;
  }
  CHECK(strict >= 1);
}

TEST_CASE("perturbation sets validate PSD membership") {
  PerturbationSet good{{SymMatrix::identity(3), SymMatrix(3)}};
  CHECK(good.all_psd());
  SymMatrix bad(2);
  bad.set(0, 0, -1.0);
  PerturbationSet mixed{{SymMatrix::identity(2), bad}};
  CHECK_FALSE(mixed.all_psd());
}
