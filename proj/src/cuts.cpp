#include "triqp/cuts.hpp"

#include <algorithm>
#include <stdexcept>

namespace triqp {

namespace {

void check_box(const Vec& lower, const Vec& upper) {
  if (lower.size() != upper.size()) throw std::invalid_argument("bound vectors differ in length");
  for (Index i = 0; i < lower.size(); ++i)
    if (!(lower[i] < upper[i]))
      throw std::invalid_argument("bounds inverted at index " + std::to_string(i));
}

// Polynomial over {Y_ij, Y_ik, Y_jk, x_i, x_j, x_k, 1} for one triple.
struct TriplePoly {
  double y[3] = {0, 0, 0};  // coefficients of Y on pairs (i,j), (i,k), (j,k)
  double x[3] = {0, 0, 0};
  double c = 0;
};

Cut to_cut(const TriplePoly& p, Index i, Index j, Index k) {
  Cut cut;
  cut.indices = {i, j, k};
  const std::array<std::pair<Index, Index>, 3> pairs{{{i, j}, {i, k}, {j, k}}};
  for (int t = 0; t < 3; ++t)
    if (p.y[t] != 0.0) cut.y_terms.push_back({pairs[t].first, pairs[t].second, p.y[t]});
  const std::array<Index, 3> vars{i, j, k};
  for (int t = 0; t < 3; ++t)
    if (p.x[t] != 0.0) cut.x_terms.push_back({vars[t], p.x[t]});
  cut.constant = p.c;
  return cut;
}

// Candidate construction table: which position multiplies the estimator and
// which bounds the estimator of the remaining pair product uses.  Matched
// bound pairs (LL/UU) are under-estimators, mixed pairs over-estimators.
struct VariantSpec {
  int a;          // 0 = i, 1 = j, 2 = k
  bool b_upper;   // bound used for the smaller remaining index
  bool c_upper;   // bound used for the larger remaining index
};

constexpr bool kFamilyAtUpper[8][3] = {
    {true, true, true},   {true, true, false},  {true, false, true},  {false, true, true},
    {true, false, false}, {false, true, false}, {false, false, true}, {false, false, false},
};

constexpr VariantSpec kVariants[8][6] = {
    // family 1: under-estimators
    {{0, false, false}, {1, false, false}, {2, false, false}, {0, true, true}, {1, true, true}, {2, true, true}},
    // family 2: over-estimators
    {{0, false, true}, {1, false, true}, {2, true, false}, {2, false, true}, {0, true, false}, {1, true, false}},
    // family 3
    {{0, false, true}, {2, true, false}, {1, false, true}, {1, true, false}, {0, true, false}, {2, false, true}},
    // family 4
    {{0, false, true}, {0, true, false}, {1, false, true}, {2, false, true}, {1, true, false}, {2, true, false}},
    // family 5: under-estimators
    {{0, false, false}, {1, true, true}, {2, true, true}, {1, false, false}, {2, false, false}, {0, true, true}},
    // family 6
    {{0, false, false}, {2, false, false}, {0, true, true}, {2, true, true}, {1, false, false}, {1, true, true}},
    // family 7
    {{0, false, false}, {1, false, false}, {0, true, true}, {1, true, true}, {2, false, false}, {2, true, true}},
    // family 8: over-estimators
    {{0, true, false}, {1, true, false}, {2, false, true}, {0, false, true}, {1, false, true}, {2, true, false}},
};

// (family, variant) pairs retained as triangle cuts t = 1..12.
constexpr std::pair<int, int> kRetained[12] = {
    {1, 1}, {1, 2}, {1, 3}, {2, 1}, {2, 2}, {3, 5},
    {3, 6}, {4, 5}, {4, 6}, {5, 6}, {6, 6}, {7, 6},
};

// Index of the Y pair formed by positions p < q within {0: (i,j), 1: (i,k), 2: (j,k)}.
int pair_slot(int p, int q) { return p == 0 ? (q == 1 ? 0 : 1) : 2; }

TriplePoly derive_candidate(const Vec& lower, const Vec& upper, Index i, Index j, Index k,
                            int family, int variant) {
  const std::array<Index, 3> idx{i, j, k};
  const bool* at_upper = kFamilyAtUpper[family - 1];
  double beta[3];
  int upper_count = 0;
  for (int t = 0; t < 3; ++t) {
    beta[t] = at_upper[t] ? upper[idx[t]] : lower[idx[t]];
    upper_count += at_upper[t] ? 1 : 0;
  }

  // Expanding the signed product of the three box-distance factors bounds the
  // triple product x_i x_j x_k by the same quadratic either from above (odd
  // number of upper factors) or from below (even number):
  //   quad = beta_k Y_ij + beta_j Y_ik + beta_i Y_jk
  //        - beta_j beta_k x_i - beta_i beta_k x_j - beta_i beta_j x_k
  //        + beta_i beta_j beta_k
  TriplePoly quad;
  quad.y[0] = beta[2];
  quad.y[1] = beta[1];
  quad.y[2] = beta[0];
  quad.x[0] = -beta[1] * beta[2];
  quad.x[1] = -beta[0] * beta[2];
  quad.x[2] = -beta[0] * beta[1];
  quad.c = beta[0] * beta[1] * beta[2];
  const bool quad_is_upper = (upper_count % 2) == 1;

  // Multiply one McCormick estimator of the remaining pair product by x_a
  // (valid since lower >= 0): est = gc x_b + gb x_c - gb gc, so
  // x_a * est = gc Y_ab + gb Y_ac - gb gc x_a.
  const VariantSpec spec = kVariants[family - 1][variant - 1];
  const int a = spec.a;
  const int b = a == 0 ? 1 : 0;
  const int c = a == 2 ? 1 : 2;
  const double gb = spec.b_upper ? upper[idx[b]] : lower[idx[b]];
  const double gc = spec.c_upper ? upper[idx[c]] : lower[idx[c]];

  TriplePoly sub;
  sub.y[pair_slot(std::min(a, b), std::max(a, b))] += gc;
  sub.y[pair_slot(std::min(a, c), std::max(a, c))] += gb;
  sub.x[a] += -gb * gc;

  // quad >= xxx >= x_a * under  ->  sub - quad <= 0
  // quad <= xxx <= x_a * over   ->  quad - sub <= 0
  TriplePoly out;
  const double sign = quad_is_upper ? 1.0 : -1.0;
  for (int t = 0; t < 3; ++t) {
    out.y[t] = sign * (sub.y[t] - quad.y[t]);
    out.x[t] = sign * (sub.x[t] - quad.x[t]);
  }
  out.c = sign * (sub.c - quad.c);
  return out;
}

Cut make_candidate(const Vec& lower, const Vec& upper, Index i, Index j, Index k, int family,
                   int variant) {
  Cut cut = to_cut(derive_candidate(lower, upper, i, j, k, family, variant), i, j, k);
  cut.kind = CutKind::kCandidate;
  cut.family = family;
  cut.variant = variant;
  return cut;
}

Cut make_mccormick(const Vec& lower, const Vec& upper, Index i, Index j, int t) {
  const double li = lower[i], ui = upper[i], lj = lower[j], uj = upper[j];
  Cut cut;
  cut.kind = CutKind::kMcCormick;
  cut.indices = {i, j, -1};
  cut.tag = t;
  double yc = 0, xi = 0, xj = 0, c = 0;
  switch (t) {
    case 1: yc = 1;  xi = -uj; xj = -li; c = uj * li; break;
    case 2: yc = 1;  xi = -lj; xj = -ui; c = ui * lj; break;
    case 3: yc = -1; xi = uj;  xj = ui;  c = -ui * uj; break;
    case 4: yc = -1; xi = lj;  xj = li;  c = -li * lj; break;
    default: throw std::invalid_argument("McCormick tag must be in 1..4");
  }
  cut.y_terms.push_back({i, j, yc});
  if (i == j) {
    cut.x_terms.push_back({i, xi + xj});
  } else {
    cut.x_terms.push_back({i, xi});
    cut.x_terms.push_back({j, xj});
  }
  cut.constant = c;
  return cut;
}

}  // namespace

SymMatrix Cut::coefficient_matrix(Index n) const {
  SymMatrix m(n);
  for (const YTerm& t : y_terms) m.add(t.a, t.b, t.a == t.b ? t.coeff : 0.5 * t.coeff);
  return m;
}

Vec Cut::linear_vector(Index n) const {
  Vec v = Vec::Zero(n);
  for (const XTerm& t : x_terms) v[t.a] += t.coeff;
  return v;
}

std::uint64_t Cut::id() const {
  auto u16 = [](Index v) { return static_cast<std::uint64_t>(v) & 0xFFFFu; };
  return (static_cast<std::uint64_t>(kind) << 62) | (u16(indices[0]) << 46) |
         (u16(indices[1]) << 30) | (u16(indices[2]) << 14) |
         ((static_cast<std::uint64_t>(tag) & 0x3Fu) << 8) |
         ((static_cast<std::uint64_t>(family) & 0xFu) << 4) |
         (static_cast<std::uint64_t>(variant) & 0xFu);
}

double violation(const Cut& cut, const LiftedPoint& p) {
  double v = cut.constant;
  for (const Cut::YTerm& t : cut.y_terms) v += t.coeff * p.Y(t.a, t.b);
  for (const Cut::XTerm& t : cut.x_terms) v += t.coeff * p.x[t.a];
  return v;
}

std::vector<Cut> mccormick_cuts(const Vec& lower, const Vec& upper, Index i, Index j) {
  check_box(lower, upper);
  if (i > j) std::swap(i, j);
  std::vector<Cut> cuts;
  for (int t = 1; t <= 4; ++t) {
    if (i == j && t == 2) continue;  // coincides with t = 1 on the diagonal
    cuts.push_back(make_mccormick(lower, upper, i, j, t));
  }
  return cuts;
}

std::vector<Cut> candidate_cuts(const Vec& lower, const Vec& upper, Index i, Index j, Index k) {
  check_box(lower, upper);
  if (!(i < j && j < k)) throw std::invalid_argument("candidate_cuts requires i < j < k");
  std::vector<Cut> cuts;
  cuts.reserve(48);
  for (int family = 1; family <= 8; ++family)
    for (int variant = 1; variant <= 6; ++variant)
      cuts.push_back(make_candidate(lower, upper, i, j, k, family, variant));
  return cuts;
}

Cut triangle_cut(const Vec& lower, const Vec& upper, Index i, Index j, Index k, int t) {
  check_box(lower, upper);
  if (!(i < j && j < k)) throw std::invalid_argument("triangle_cut requires i < j < k");
  if (t < 1 || t > 12) throw std::invalid_argument("triangle tag must be in 1..12");
  const auto [family, variant] = kRetained[t - 1];
  Cut cut = make_candidate(lower, upper, i, j, k, family, variant);
  cut.kind = CutKind::kTriangle;
  cut.tag = t;
  cut.family = 0;
  cut.variant = 0;
  return cut;
}

std::vector<Cut> triangle_cuts(const Vec& lower, const Vec& upper, Index i, Index j, Index k) {
  std::vector<Cut> cuts;
  cuts.reserve(12);
  for (int t = 1; t <= 12; ++t) cuts.push_back(triangle_cut(lower, upper, i, j, k, t));
  return cuts;
}

LiftedPoint witness_point(const Vec& lower, const Vec& upper, Index i, Index j, Index k, int t) {
  check_box(lower, upper);
  const Index n = lower.size();
  LiftedPoint p;
  p.x = 0.5 * (lower + upper);
  p.Y = SymMatrix(n);
  for (Index a = 0; a < n; ++a)
    for (Index b = a; b < n; ++b) p.Y.set(a, b, p.x[a] * p.x[b]);

  // On each of the triple's pairs the McCormick envelopes at the midpoint
  // allow Y_ab between the mixed and the matched corner-product average; the
  // violating extreme is matched where the cut's Y coefficient is positive
  // and mixed where it is negative.
  const Cut cut = triangle_cut(lower, upper, i, j, k, t);
  for (const Cut::YTerm& term : cut.y_terms) {
    const Index a = term.a, b = term.b;
    const double matched = 0.5 * (upper[a] * upper[b] + lower[a] * lower[b]);
    const double mixed = 0.5 * (upper[a] * lower[b] + lower[a] * upper[b]);
    p.Y.set(a, b, term.coeff > 0.0 ? matched : mixed);
  }
  return p;
}

bool CutPool::add(const Cut& cut) {
  if (!ids_.insert(cut.id()).second) return false;
  cuts_.push_back(cut);
  return true;
}

std::vector<Cut> separate(const LiftedPoint& p, const Vec& lower, const Vec& upper,
                          std::size_t cap, const CutPool& exclude,
                          const SeparationOptions& options) {
  check_box(lower, upper);
  const Index n = lower.size();
  std::vector<std::pair<double, Cut>> found;
  if (cap == 0) return {};

  auto consider = [&](Cut&& cut) {
    const double v = violation(cut, p);
    if (v > options.min_violation && !exclude.contains(cut))
      found.emplace_back(v, std::move(cut));
  };

  if (options.mccormick) {
    for (Index i = 0; i < n; ++i)
      for (Index j = i; j < n; ++j)
        for (Cut& cut : mccormick_cuts(lower, upper, i, j)) consider(std::move(cut));
  }
  if (options.triangles) {
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j)
        for (Index k = j + 1; k < n; ++k)
          for (int t = 1; t <= 12; ++t) consider(triangle_cut(lower, upper, i, j, k, t));
  }

  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    if (a.second.indices != b.second.indices) return a.second.indices < b.second.indices;
    return a.second.tag < b.second.tag;
  });
  if (found.size() > cap) found.resize(cap);

  std::vector<Cut> cuts;
  cuts.reserve(found.size());
  for (auto& [v, cut] : found) cuts.push_back(std::move(cut));
  return cuts;
}

std::uint64_t dynamic_family_size(Index n) {
  const std::uint64_t un = static_cast<std::uint64_t>(n);
  return 4 * un * (un - 1) / 2 + 12 * un * (un - 1) * (un - 2) / 6;
}

}  // namespace triqp
