#pragma once

#include <array>
#include <cstdint>
#include <unordered_set>
#include <vector>

#include "triqp/model.hpp"
#include "triqp/types.hpp"

namespace triqp {

enum class CutKind : std::uint8_t { kMcCormick, kTriangle, kCandidate };

/// One linear inequality <M, Y> + v^T x + constant <= 0 in the lifted space.
/// Coefficients are stored sparsely; y_terms hold the full coefficient of
/// Y_ab once per unordered pair (the symmetric matrix M splits it in half
/// across (a,b) and (b,a) for a != b).
struct Cut {
  struct YTerm {
    Index a, b;  // a <= b
    double coeff;
  };
  struct XTerm {
    Index a;
    double coeff;
  };

  CutKind kind = CutKind::kMcCormick;
  std::array<Index, 3> indices{0, 0, -1};  // (i,j,-1) for pairs, (i,j,k) for triples
  int tag = 0;      // McCormick t in 1..4, triangle t in 1..12, candidates 0
  int family = 0;   // candidates only, 1..8
  int variant = 0;  // candidates only, 1..6

  std::vector<YTerm> y_terms;
  std::vector<XTerm> x_terms;
  double constant = 0.0;

  SymMatrix coefficient_matrix(Index n) const;
  Vec linear_vector(Index n) const;

  /// Stable identity for deduplication and working-set bookkeeping.
  std::uint64_t id() const;
};

double violation(const Cut& cut, const LiftedPoint& p);

/// McCormick envelopes of the pair (i,j), i <= j: four cuts off the diagonal,
/// three on it (the two over-estimators coincide there and one is dropped).
std::vector<Cut> mccormick_cuts(const Vec& lower, const Vec& upper, Index i, Index j);

/// All 8 families x 6 variants of signed-triple-product candidates for
/// i < j < k, derived by expanding the product and substituting one McCormick
/// estimator, in the fixed (family, variant) enumeration order.
std::vector<Cut> candidate_cuts(const Vec& lower, const Vec& upper, Index i, Index j, Index k);

/// The 12 retained general triangle cuts of the triple, tagged t = 1..12.
std::vector<Cut> triangle_cuts(const Vec& lower, const Vec& upper, Index i, Index j, Index k);
Cut triangle_cut(const Vec& lower, const Vec& upper, Index i, Index j, Index k, int t);

/// Point at the box midpoint whose Y entries sit on McCormick envelopes and
/// violate triangle cut t of the triple by exactly half the product of the
/// three box widths.
LiftedPoint witness_point(const Vec& lower, const Vec& upper, Index i, Index j, Index k, int t);

class CutPool {
 public:
  CutPool() = default;
  CutPool(Vec lower, Vec upper) : lower_(std::move(lower)), upper_(std::move(upper)) {}

  /// Adds the cut unless an identical (kind, indices, tag) is already present.
  bool add(const Cut& cut);
  bool contains(const Cut& cut) const { return ids_.count(cut.id()) > 0; }
  bool contains_id(std::uint64_t id) const { return ids_.count(id) > 0; }

  const std::vector<Cut>& cuts() const { return cuts_; }
  std::size_t size() const { return cuts_.size(); }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }

 private:
  Vec lower_, upper_;
  std::vector<Cut> cuts_;
  std::unordered_set<std::uint64_t> ids_;
};

struct SeparationOptions {
  double min_violation = 1e-6;
  bool mccormick = true;
  bool triangles = true;
};

/// Scans every McCormick pair (i <= j) and every triangle candidate
/// (i < j < k, t = 1..12) not already in `exclude`; returns up to `cap` cuts
/// with violation above the threshold, sorted by decreasing violation with
/// (indices, tag)-lexicographic tie-breaks.
std::vector<Cut> separate(const LiftedPoint& p, const Vec& lower, const Vec& upper,
                          std::size_t cap, const CutPool& exclude,
                          const SeparationOptions& options = {});

/// Number of off-diagonal McCormick plus triangle inequalities,
/// 4*C(n,2) + 12*C(n,3); the separation budget p defaults to a fraction of it.
std::uint64_t dynamic_family_size(Index n);

}  // namespace triqp
