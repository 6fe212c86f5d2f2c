#include "triqp/bench.hpp"

#include <chrono>
#include <cmath>

#include "json.hpp"
#include "triqp/relax.hpp"

namespace triqp {

namespace {

std::string instance_name(const QcqpInstance& inst) {
  const auto meta = nlohmann::json::parse(inst.meta_json());
  if (meta.contains("name") && meta["name"].is_string()) return meta["name"].get<std::string>();
  return std::to_string(inst.num_vars()) + "_" + std::to_string(inst.num_constraints());
}

}  // namespace

RootBounds compute_root_bounds(const QcqpInstance& inst) {
  const Vec& lo = inst.lower();
  const Vec& up = inst.upper();

  NodeSolveOptions opts;
  opts.use_triangles = false;
  opts.separation_tol = 1e-9;
  opts.max_rounds = 200;

  RootBounds out;
  CutPool pool(lo, up);
  RelaxationSolution mc = solve_node_relaxation(inst, lo, up, pool, opts);
  out.mccormick = mc.status == RelaxStatus::kOptimal ? mc.bound
                                                     : -std::numeric_limits<double>::infinity();

  opts.use_triangles = true;
  RelaxationSolution tri = solve_node_relaxation(inst, lo, up, pool, opts);
  out.triangle = tri.status == RelaxStatus::kOptimal ? tri.bound : out.mccormick;

  const RelaxationSolution& pt = tri.status == RelaxStatus::kOptimal ? tri : mc;
  if (pt.point.x.size() == inst.num_vars())
    if (auto feas = local_search(inst, pt.point.x, lo, up))
      out.incumbent = evaluate_constraint(inst, 0, *feas);
  return out;
}

QcqpInstance suite_instance(std::uint64_t suite_seed, int index) {
  // weighted toward the small end so the paired global solves stay desk-scale
  static constexpr int kSizes[10] = {8, 9, 10, 8, 9, 10, 11, 12, 13, 10};
  static constexpr double kDensities[3] = {0.25, 0.5, 1.0};
  const int n = kSizes[index % 10];
  const Index m = index % 2 == 0 ? n : (3 * n + 1) / 2;
  const double density = kDensities[index % 3];
  const std::uint64_t seed = suite_seed * 1000003ULL + static_cast<std::uint64_t>(index);
  return gen_unitbox(n, m, density, seed);
}

std::vector<BenchEntry> run_paired_suite(const BenchConfig& config) {
  std::vector<BenchEntry> entries;
  entries.reserve(config.count);
  for (int idx = 0; idx < config.count; ++idx) {
    const QcqpInstance inst = suite_instance(config.suite_seed, idx);
    BenchEntry e;
    e.name = instance_name(inst);

    const RootBounds roots = compute_root_bounds(inst);
    const double scale = std::max(1.0, std::abs(roots.incumbent));
    e.root_bound_mc = roots.mccormick;
    e.root_bound_tri = roots.triangle;
    e.root_gap_mc = (roots.incumbent - roots.mccormick) / scale;
    e.root_gap_tri = (roots.incumbent - roots.triangle) / scale;

    if (!config.roots_only) {
      for (const bool triangles : {true, false}) {
        BnbConfig bc;
        bc.eps_rel = config.eps_rel;
        bc.time_limit_seconds = config.time_limit_seconds;
        bc.node_limit = config.node_limit;
        bc.use_triangles = triangles;
        bc.threads = config.threads;
        bc.seed = config.suite_seed;
        const auto t0 = std::chrono::steady_clock::now();
        GlobalResult r = solve(inst, bc);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (triangles) {
          e.nodes_tri = r.nodes;
          e.value_tri = r.value;
          e.time_tri = secs;
          e.status_tri = to_string(r.status);
        } else {
          e.nodes_mc = r.nodes;
          e.value_mc = r.value;
          e.time_mc = secs;
          e.status_mc = to_string(r.status);
        }
      }
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace triqp
