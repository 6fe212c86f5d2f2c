#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "triqp/bnb.hpp"
#include "triqp/model.hpp"

namespace triqp {

/// Root bounds computed on one shared cutting-plane path: the McCormick-only
/// relaxation is separated to exhaustion first, and the triangle run
/// continues from that same pool, so its final row set is a superset and its
/// bound can only be at least as strong.
struct RootBounds {
  double mccormick = 0.0;
  double triangle = 0.0;
  double incumbent = std::numeric_limits<double>::infinity();
};

RootBounds compute_root_bounds(const QcqpInstance& inst);

struct BenchEntry {
  std::string name;
  double root_bound_tri = 0.0, root_bound_mc = 0.0;
  double root_gap_tri = 0.0, root_gap_mc = 0.0;
  long nodes_tri = 0, nodes_mc = 0;
  double value_tri = 0.0, value_mc = 0.0;
  double time_tri = 0.0, time_mc = 0.0;
  std::string status_tri, status_mc;
};

struct BenchConfig {
  std::uint64_t suite_seed = 1;
  int count = 50;
  double eps_rel = 1e-4;
  double time_limit_seconds = 120.0;
  long node_limit = 200000;
  bool roots_only = false;  // skip the paired solves, report root bounds only
  int threads = 1;
};

/// The fixed seeded suite: n cycles over {8..20} weighted toward the small
/// end, m in {n, ceil(1.5 n)}, densities cycling {0.25, 0.5, 1.0}.
QcqpInstance suite_instance(std::uint64_t suite_seed, int index);

std::vector<BenchEntry> run_paired_suite(const BenchConfig& config);

}  // namespace triqp
