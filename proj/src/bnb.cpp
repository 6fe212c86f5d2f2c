#include "triqp/bnb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <mutex>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <thread>
#include <vector>

#include "triqp/dual.hpp"
#include "triqp/linalg.hpp"
#include "triqp/rng.hpp"

namespace triqp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLiftTol = 1e-6;   // leaf acceptance on |Y_ij - x_i x_j|
constexpr double kFeasTol = 1e-7;   // incumbent feasibility

double max_constraint_violation(const QcqpInstance& inst, const Vec& x) {
  double worst = 0.0;
  for (Index r = 1; r <= inst.num_constraints(); ++r)
    worst = std::max(worst, evaluate_constraint(inst, r, x) - inst.rhs(r));
  return worst;
}

double lift_mismatch(const LiftedPoint& p, Index i) {
  double total = 0.0;
  for (Index j = 0; j < p.x.size(); ++j) total += std::abs(p.Y(i, j) - p.x[i] * p.x[j]);
  return total;
}

// Keeps only cuts near-tight (or violated) at the relaxation point; the rest
// are regenerated by separation when they matter again. A dropped row always
// has slack above the threshold, hence a basic slack, so the basis stays
// consistent when those slack columns are removed with their rows.
CutPool active_cuts(const CutPool& pool, const LiftedPoint& at, Index num_fixed_rows,
                    SimplexBasis* basis) {
  CutPool kept(pool.lower(), pool.upper());
  const Index n = at.x.size();
  const Index nvars = n + packed_size(n);
  std::vector<char> keep_row;
  for (std::size_t c = 0; c < pool.cuts().size(); ++c) {
    const bool keep = violation(pool.cuts()[c], at) >= -1e-6;
    keep_row.push_back(keep ? 1 : 0);
    if (keep) kept.add(pool.cuts()[c]);
  }
  if (basis && !basis->basic_cols.empty()) {
    const Index old_rows = num_fixed_rows + static_cast<Index>(pool.cuts().size());
    if (basis->col_status.size() != static_cast<std::size_t>(nvars + old_rows)) {
      basis->col_status.clear();
      basis->basic_cols.clear();
      return kept;
    }
    std::vector<Index> new_slack(old_rows, -1);
    Index next = 0;
    for (Index r = 0; r < old_rows; ++r) {
      const bool keep = r < num_fixed_rows || keep_row[static_cast<std::size_t>(r - num_fixed_rows)];
      if (keep) new_slack[r] = next++;
    }
    SimplexBasis pruned;
    pruned.col_status.assign(basis->col_status.begin(), basis->col_status.begin() + nvars);
    for (Index r = 0; r < old_rows; ++r)
      if (new_slack[r] >= 0) pruned.col_status.push_back(basis->col_status[nvars + r]);
    for (Index col : basis->basic_cols) {
      if (col < nvars) {
        pruned.basic_cols.push_back(col);
      } else if (new_slack[col - nvars] >= 0) {
        pruned.basic_cols.push_back(nvars + new_slack[col - nvars]);
      }
      // basic slacks of dropped rows leave with their rows
    }
    if (pruned.basic_cols.size() != static_cast<std::size_t>(num_fixed_rows + kept.size())) {
      pruned.col_status.clear();
      pruned.basic_cols.clear();
    }
    *basis = std::move(pruned);
  }
  return kept;
}

CutPool regenerate_pool(const CutPool& parent, const Vec& lower, const Vec& upper) {
  CutPool pool(lower, upper);
  for (const Cut& cut : parent.cuts()) {
    if (cut.kind == CutKind::kMcCormick) {
      for (const Cut& fresh : mccormick_cuts(lower, upper, cut.indices[0], cut.indices[1]))
        if (fresh.tag == cut.tag) pool.add(fresh);
    } else if (cut.kind == CutKind::kTriangle) {
      pool.add(
          triangle_cut(lower, upper, cut.indices[0], cut.indices[1], cut.indices[2], cut.tag));
    }
  }
  return pool;
}

struct PenaltyObjective {
  const QcqpInstance& inst;
  double mu;

  double value(const Vec& x) const {
    double f = evaluate_constraint(inst, 0, x);
    for (Index r = 1; r <= inst.num_constraints(); ++r) {
      const double v = std::max(0.0, evaluate_constraint(inst, r, x) - inst.rhs(r));
      f += mu * v * v;
    }
    return f;
  }

  Vec gradient(const Vec& x) const {
    Vec g = 2.0 * (inst.quad(0).to_dense() * x) + inst.linear(0);
    for (Index r = 1; r <= inst.num_constraints(); ++r) {
      const double v = evaluate_constraint(inst, r, x) - inst.rhs(r);
      if (v > 0.0)
        g += (2.0 * mu * v) * (2.0 * (inst.quad(r).to_dense() * x) + inst.linear(r));
    }
    return g;
  }
};

Vec project_box(Vec x, const Vec& lower, const Vec& upper) {
  return x.cwiseMax(lower).cwiseMin(upper);
}

// Projected gradient with Barzilai-Borwein steps and an Armijo fallback.
Vec descend(const QcqpInstance& inst, Vec x, const Vec& lower, const Vec& upper) {
  for (double mu = 10.0; mu <= 1e8; mu *= 10.0) {
    PenaltyObjective obj{inst, mu};
    double f = obj.value(x);
    Vec g = obj.gradient(x);
    double step = 1.0 / std::max(1.0, g.norm());
    for (int it = 0; it < 400; ++it) {
      Vec trial = project_box(x - step * g, lower, upper);
      double ft = obj.value(trial);
      int backtracks = 0;
      while (ft > f - 1e-14 * std::max(1.0, std::abs(f)) && backtracks < 50) {
        step *= 0.5;
        trial = project_box(x - step * g, lower, upper);
        ft = obj.value(trial);
        ++backtracks;
      }
      const Vec gt = obj.gradient(trial);
      const Vec dx = trial - x;
      if (dx.lpNorm<Eigen::Infinity>() <= 1e-13 * std::max(1.0, x.lpNorm<Eigen::Infinity>())) {
        x = trial;
        break;
      }
      const double denom = dx.dot(gt - g);
      step = denom > 1e-16 ? dx.squaredNorm() / denom : step * 1.5;
      x = trial;
      f = ft;
      g = gt;
    }
    if (max_constraint_violation(inst, x) <= kFeasTol * 0.1) break;
  }
  return x;
}

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kGapLimit: return "gap_limit";
    case SolveStatus::kTimeLimit: return "time_limit";
    case SolveStatus::kInfeasible: return "infeasible";
  }
  return "unknown";
}

std::optional<Vec> local_search(const QcqpInstance& inst, const Vec& start, const Vec& lower,
                                const Vec& upper, std::uint64_t seed) {
  if (start.size() != inst.num_vars()) throw std::invalid_argument("start point has wrong length");
  SplitMix64 rng(seed ^ 0x5eedbeefULL);
  std::vector<Vec> starts{project_box(start, lower, upper)};
  for (int s = 0; s < 4; ++s) {
    Vec p = start;
    for (Index i = 0; i < p.size(); ++i)
      p[i] += 0.15 * (upper[i] - lower[i]) * rng.uniform(-1.0, 1.0);
    starts.push_back(project_box(std::move(p), lower, upper));
  }

  std::optional<Vec> best;
  double best_value = kInf;
  for (const Vec& s : starts) {
    const Vec x = descend(inst, s, lower, upper);
    if (max_constraint_violation(inst, x) > kFeasTol) continue;
    const double f = evaluate_constraint(inst, 0, x);
    if (f < best_value) {
      best_value = f;
      best = x;
    }
  }
  return best;
}

std::pair<BnbNode, BnbNode> branch(const BnbNode& node, const RelaxationSolution& sol) {
  const Index n = node.lower.size();
  Index split = -1;
  double worst = kLiftTol;
  for (Index i = 0; i < n; ++i) {
    if (node.upper[i] - node.lower[i] < 1e-10) continue;  // numerically a point
    const double mism = lift_mismatch(sol.point, i);
    if (mism > worst) {
      worst = mism;
      split = i;
    }
  }
  if (split < 0) throw std::logic_error("branch called on a lifted-consistent solution");

  const double lo = node.lower[split], up = node.upper[split];
  const double width = up - lo;
  const double beta = std::clamp(sol.point.x[split], lo + 0.2 * width, up - 0.2 * width);

  BnbNode left, right;
  left.lower = node.lower;
  left.upper = node.upper;
  left.upper[split] = beta;
  right.lower = node.lower;
  right.upper = node.upper;
  right.lower[split] = beta;
  left.bound = right.bound = node.bound;
  left.depth = right.depth = node.depth + 1;
  left.pool = regenerate_pool(node.pool, left.lower, left.upper);
  right.pool = regenerate_pool(node.pool, right.lower, right.upper);
  return {std::move(left), std::move(right)};
}

namespace {

struct QueuedNode {
  BnbNode node;
  SimplexBasis basis;
};

struct SearchShared {
  const QcqpInstance& inst;
  const BnbConfig& config;
  std::chrono::steady_clock::time_point start_time;

  std::mutex mutex;
  std::condition_variable work_ready;
  // best-first: smallest bound, deeper first on ties, then FIFO
  struct Order {
    bool operator()(const std::pair<std::pair<double, std::pair<int, long>>, QueuedNode*>& a,
                    const std::pair<std::pair<double, std::pair<int, long>>, QueuedNode*>& b) const {
      const auto& ka = a.first;
      const auto& kb = b.first;
      if (ka.first != kb.first) return ka.first > kb.first;
      if (ka.second.first != kb.second.first) return ka.second.first < kb.second.first;
      return ka.second.second > kb.second.second;
    }
  };
  std::priority_queue<std::pair<std::pair<double, std::pair<int, long>>, QueuedNode*>,
                      std::vector<std::pair<std::pair<double, std::pair<int, long>>, QueuedNode*>>,
                      Order>
      queue;
  long insert_counter = 0;
  int active_workers = 0;
  bool stop = false;

  std::optional<Vec> incumbent;
  double incumbent_value = kInf;
  double disposal_min = kInf;  // min bound over fathomed subtrees
  long nodes = 0;
  bool hit_time = false, hit_nodes = false;

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
  }

  double prune_threshold() const {
    return incumbent_value - config.eps_rel * std::max(1.0, std::abs(incumbent_value));
  }

  void push(BnbNode&& node, SimplexBasis basis) {
    auto* heap_node = new QueuedNode{std::move(node), std::move(basis)};
    queue.push({{heap_node->node.bound, {heap_node->node.depth, insert_counter++}}, heap_node});
  }

  void offer_incumbent(const Vec& x, double value) {
    if (value < incumbent_value) {
      incumbent_value = value;
      incumbent = x;
    }
  }
};

void process_node(SearchShared& shared, BnbNode node, SimplexBasis basis) {
  const QcqpInstance& inst = shared.inst;
  const BnbConfig& config = shared.config;

  const Index nv = inst.num_vars();
  NodeSolveOptions opts;
  opts.use_triangles = config.use_triangles;
  opts.cuts_per_round = 40;
  opts.max_rounds = 5;
  opts.separation_tol = 1e-6;
  opts.pool_cap = static_cast<std::size_t>(2 * packed_size(nv) + nv);

  // periodic convexified-objective refresh from a node-box dual run
  SymMatrix s0(1);
  bool have_s0 = false;
  if (config.use_dual_root && config.refresh_depth > 0 && node.depth > 0 &&
      node.depth % config.refresh_depth == 0) {
    DualOptions dopts;
    dopts.max_iter = config.refresh_dual_iters;
    dopts.use_triangles = config.use_triangles;
    dopts.p = config.p == BnbConfig::kAuto ? DualOptions::kDefaultP : config.p;
    {
      std::lock_guard<std::mutex> lock(shared.mutex);
      if (std::isfinite(shared.incumbent_value)) dopts.target = shared.incumbent_value;
    }
    DualState dual = run_dual_heuristic(inst, node.lower, node.upper, dopts);
    node.bound = std::max(node.bound, dual.best_bound);
    if (config.use_root_fw) {
      s0 = assemble_S0(inst, dual);
      const double lam = min_eigenvalue(s0).first;
      if (lam < 0.0)
        for (Index i = 0; i < s0.dim(); ++i) s0.add(i, i, -lam + 1e-12);
      have_s0 = true;
      opts.s0 = &s0;
    }
  }

  RelaxationSolution sol =
      solve_node_relaxation(inst, node.lower, node.upper, node.pool, opts, &basis);

  std::unique_lock<std::mutex> lock(shared.mutex);
  if (sol.status == RelaxStatus::kInfeasible) {
    // empty node: no feasible point below any bound; fathom silently
    return;
  }
  if (sol.point.x.size() != inst.num_vars())
    throw std::runtime_error("node relaxation stalled before producing a point");
  if (sol.status == RelaxStatus::kOptimal) node.bound = std::max(node.bound, sol.bound);

  if (node.bound >= shared.prune_threshold()) {
    shared.disposal_min = std::min(shared.disposal_min, node.bound);
    return;
  }

  lock.unlock();
  std::optional<Vec> polished =
      local_search(inst, sol.point.x, node.lower, node.upper, config.seed + 977 * node.depth);
  lock.lock();
  if (polished) shared.offer_incumbent(*polished, evaluate_constraint(inst, 0, *polished));

  double mismatch = 0.0;
  for (Index i = 0; i < inst.num_vars(); ++i)
    for (Index j = i; j < inst.num_vars(); ++j)
      mismatch =
          std::max(mismatch, std::abs(sol.point.Y(i, j) - sol.point.x[i] * sol.point.x[j]));

  if (mismatch <= kLiftTol) {
    // relaxation point is an exact lift: the node is solved
    if (max_constraint_violation(inst, sol.point.x) <= kFeasTol)
      shared.offer_incumbent(sol.point.x, evaluate_constraint(inst, 0, sol.point.x));
    shared.disposal_min = std::min(shared.disposal_min, node.bound);
    return;
  }
  if (node.bound >= shared.prune_threshold()) {
    shared.disposal_min = std::min(shared.disposal_min, node.bound);
    return;
  }

  lock.unlock();
  node.pool = active_cuts(node.pool, sol.point, inst.num_constraints(), &basis);
  auto children = branch(node, sol);
  lock.lock();
  shared.push(std::move(children.first), basis);
  shared.push(std::move(children.second), std::move(basis));
  shared.work_ready.notify_all();
}

void worker(SearchShared& shared) {
  std::unique_lock<std::mutex> lock(shared.mutex);
  while (true) {
    shared.work_ready.wait(lock, [&shared] {
      return shared.stop || !shared.queue.empty() || shared.active_workers == 0;
    });
    if (shared.stop) return;
    if (shared.queue.empty()) {
      if (shared.active_workers == 0) return;
      continue;
    }

    if (shared.elapsed() > shared.config.time_limit_seconds) {
      shared.hit_time = true;
      shared.stop = true;
      shared.work_ready.notify_all();
      return;
    }
    if (shared.nodes >= shared.config.node_limit) {
      shared.hit_nodes = true;
      shared.stop = true;
      shared.work_ready.notify_all();
      return;
    }

    QueuedNode* heap_node = shared.queue.top().second;
    shared.queue.pop();
    BnbNode node = std::move(heap_node->node);
    SimplexBasis basis = std::move(heap_node->basis);
    delete heap_node;

    if (node.bound >= shared.prune_threshold()) {
      shared.disposal_min = std::min(shared.disposal_min, node.bound);
      continue;
    }

    ++shared.nodes;
    ++shared.active_workers;
    if (shared.config.progress && shared.nodes % shared.config.progress_interval == 0) {
      const double open = shared.queue.empty() ? node.bound : shared.queue.top().first.first;
      (*shared.config.progress) << "nodes=" << shared.nodes << " bound=" << std::min(node.bound, open)
                                << " incumbent=" << shared.incumbent_value
                                << " open=" << shared.queue.size()
                                << " elapsed=" << shared.elapsed() << "\n";
    }
    lock.unlock();
    process_node(shared, std::move(node), std::move(basis));
    lock.lock();
    --shared.active_workers;
    shared.work_ready.notify_all();
  }
}

}  // namespace

GlobalResult solve(const QcqpInstance& inst, const BnbConfig& config) {
  SearchShared shared{inst, config, std::chrono::steady_clock::now()};
  GlobalResult result;

  // root: cutting-plane bound, incumbent polish, then the spectral dual and
  // the convexified objective when enabled
  BnbNode root;
  root.lower = inst.lower();
  root.upper = inst.upper();
  root.depth = 0;
  root.pool = CutPool(root.lower, root.upper);

  NodeSolveOptions root_opts;
  root_opts.use_triangles = config.use_triangles;
  root_opts.cuts_per_round = 150;
  root_opts.max_rounds = 15;
  root_opts.separation_tol = 1e-6;
  root_opts.pool_cap = static_cast<std::size_t>(3 * packed_size(inst.num_vars()));
  SimplexBasis root_basis;
  RelaxationSolution root_sol =
      solve_node_relaxation(inst, root.lower, root.upper, root.pool, root_opts, &root_basis);
  if (root_sol.status == RelaxStatus::kInfeasible) {
    result.status = SolveStatus::kInfeasible;
    result.elapsed_seconds = shared.elapsed();
    return result;
  }
  if (root_sol.point.x.size() != inst.num_vars())
    throw std::runtime_error("root relaxation stalled before producing a point");
  double root_bound = root_sol.status == RelaxStatus::kOptimal ? root_sol.bound : -kInf;

  if (auto polished = local_search(inst, root_sol.point.x, root.lower, root.upper, config.seed))
    shared.offer_incumbent(*polished, evaluate_constraint(inst, 0, *polished));

  SymMatrix s0(1);
  if (config.use_dual_root) {
    DualOptions dopts;
    dopts.max_iter = config.root_dual_iters;
    dopts.use_triangles = config.use_triangles;
    dopts.p = config.p == BnbConfig::kAuto ? DualOptions::kDefaultP : config.p;
    if (std::isfinite(shared.incumbent_value)) dopts.target = shared.incumbent_value;
    DualState dual = run_dual_heuristic(inst, root.lower, root.upper, dopts);
    root_bound = std::max(root_bound, dual.best_bound);

    // the convexified objective route to the same bound; opt-in since the
    // spectral dual already carries its value and the oracle loop is costly
    if (config.use_root_fw) {
      s0 = assemble_S0(inst, dual);
      const double lam = min_eigenvalue(s0).first;
      if (lam < 0.0)
        for (Index i = 0; i < s0.dim(); ++i) s0.add(i, i, -lam + 1e-12);
      SimplexBasis fw_basis = root_basis;
      const CutPool pruned =
          active_cuts(root.pool, root_sol.point, inst.num_constraints(), &fw_basis);
      const LpProblem lp = build_linearization(inst, root.lower, root.upper, pruned);
      RelaxationSolution fw = frank_wolfe(s0, inst, lp, 1e-8 * std::max(1.0, std::abs(root_bound)));
      if (fw.status != RelaxStatus::kInfeasible && std::isfinite(fw.bound) &&
          fw.bound > root_bound) {
        root_bound = fw.bound;
        root_sol.point = fw.point;
      }
    }
  }
  root.bound = root_bound;
  result.root_bound = root_bound;
  result.root_gap = std::isfinite(shared.incumbent_value)
                        ? (shared.incumbent_value - root_bound) /
                              std::max(1.0, std::abs(shared.incumbent_value))
                        : kInf;

  shared.nodes = 1;
  double root_mismatch = 0.0;
  for (Index i = 0; i < inst.num_vars(); ++i)
    for (Index j = i; j < inst.num_vars(); ++j)
      root_mismatch = std::max(
          root_mismatch, std::abs(root_sol.point.Y(i, j) - root_sol.point.x[i] * root_sol.point.x[j]));

  if (root_mismatch <= kLiftTol) {
    if (max_constraint_violation(inst, root_sol.point.x) <= kFeasTol)
      shared.offer_incumbent(root_sol.point.x, evaluate_constraint(inst, 0, root_sol.point.x));
    shared.disposal_min = root_bound;
  } else if (root_bound >= shared.prune_threshold()) {
    shared.disposal_min = root_bound;
  } else {
    root.pool = active_cuts(root.pool, root_sol.point, inst.num_constraints(), &root_basis);
    auto children = branch(root, root_sol);
    shared.push(std::move(children.first), root_basis);
    shared.push(std::move(children.second), std::move(root_basis));
  }

  const int threads = std::max(1, config.threads);
  if (threads == 1) {
    worker(shared);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, std::ref(shared));
    for (std::thread& t : pool) t.join();
  }

  // drain anything left by a limit stop
  double open_min = kInf;
  while (!shared.queue.empty()) {
    open_min = std::min(open_min, shared.queue.top().first.first);
    delete shared.queue.top().second;
    shared.queue.pop();
  }

  result.nodes = shared.nodes;
  result.incumbent = shared.incumbent;
  result.value = shared.incumbent_value;
  result.best_bound = std::min({shared.disposal_min, open_min, result.value});
  result.elapsed_seconds = shared.elapsed();

  if (!shared.incumbent) {
    result.status = SolveStatus::kInfeasible;
  } else if (shared.hit_time) {
    result.status = SolveStatus::kTimeLimit;
  } else if (shared.hit_nodes) {
    result.status = SolveStatus::kGapLimit;
  } else {
    result.status = SolveStatus::kOptimal;
  }
  return result;
}

}  // namespace triqp
