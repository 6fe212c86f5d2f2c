#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "triqp/linalg.hpp"
#include "triqp/types.hpp"

namespace triqp {

/// A point in the lifted (x, Y) space; Y is symmetric by storage.
struct LiftedPoint {
  Vec x;
  SymMatrix Y;
};

/// min <Q_0, xx^T> + c_0^T x  s.t.  <Q_r, xx^T> + c_r^T x <= b_r (r = 1..m),
/// lower <= x <= upper.  All matrices are symmetrized at construction;
/// bounds must satisfy 0 <= lower_i < upper_i.
class QcqpInstance {
 public:
  QcqpInstance(std::vector<SymMatrix> quads, std::vector<Vec> linears, Vec rhs, Vec lower,
               Vec upper, std::string meta_json = "{}");

  Index num_vars() const { return n_; }
  Index num_constraints() const { return m_; }

  const SymMatrix& quad(Index r) const { return quads_.at(r); }  // r in 0..m
  const Vec& linear(Index r) const { return linears_.at(r); }
  double rhs(Index r) const;  // r in 1..m
  const Vec& rhs_vector() const { return rhs_; }

  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }

  const std::string& meta_json() const { return meta_; }

  /// Same objective/constraints over a different box (used at search-tree nodes).
  QcqpInstance with_bounds(Vec lower, Vec upper) const;

  friend bool operator==(const QcqpInstance& a, const QcqpInstance& b);

 private:
  Index n_ = 0, m_ = 0;
  std::vector<SymMatrix> quads_;  // Q_0 .. Q_m
  std::vector<Vec> linears_;      // c_0 .. c_m
  Vec rhs_;                       // b_1 .. b_m
  Vec lower_, upper_;
  std::string meta_;  // serialized JSON object, preserved through I/O
};

/// f_r(x) = <Q_r, xx^T> + c_r^T x.
double evaluate_constraint(const QcqpInstance& inst, Index r, const Vec& x);

/// Parses the JSON instance document. Q triplets [i, j, v] give the upper
/// triangle; for i < j, v is the full coefficient of x_i x_j.
QcqpInstance parse_instance(const std::string& text);
std::string serialize_instance(const QcqpInstance& inst);

QcqpInstance load_instance(const std::string& path);
void save_instance(const QcqpInstance& inst, const std::string& path);

/// Random box-constrained instance on [0,1]^n with m quadratic inequalities.
/// Entries of each Q_r are nonzero with probability `density`, uniform on
/// [-10, 10]; right-hand sides leave slack at a seeded interior point, so the
/// instance is feasible by construction (the point is stored in the metadata).
QcqpInstance gen_unitbox(Index n, Index m, double density, std::uint64_t seed);

/// Table-style name "n_m_seed_densitypct" for generated instances.
std::string unitbox_name(Index n, Index m, double density, std::uint64_t seed);

}  // namespace triqp
