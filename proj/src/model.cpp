#include "triqp/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "triqp/rng.hpp"

namespace triqp {

using nlohmann::json;

namespace {

void require(bool cond, const std::string& message) {
  if (!cond) throw std::invalid_argument(message);
}

void check_finite(const Vec& v, const std::string& path) {
  for (Index i = 0; i < v.size(); ++i)
    require(std::isfinite(v[i]), "non-finite entry at " + path + "[" + std::to_string(i) + "]");
}

}  // namespace

QcqpInstance::QcqpInstance(std::vector<SymMatrix> quads, std::vector<Vec> linears, Vec rhs,
                           Vec lower, Vec upper, std::string meta_json)
    : quads_(std::move(quads)),
      linears_(std::move(linears)),
      rhs_(std::move(rhs)),
      lower_(std::move(lower)),
      upper_(std::move(upper)),
      meta_(std::move(meta_json)) {
  n_ = lower_.size();
  m_ = rhs_.size();
  require(n_ >= 1, "instance must have n >= 1");
  require(upper_.size() == n_, "upper bound vector has wrong length");
  require(quads_.size() == static_cast<std::size_t>(m_ + 1), "expected m+1 quadratic matrices");
  require(linears_.size() == static_cast<std::size_t>(m_ + 1), "expected m+1 linear vectors");
  for (Index i = 0; i < n_; ++i) {
    require(std::isfinite(lower_[i]) && std::isfinite(upper_[i]),
            "non-finite bound at index " + std::to_string(i));
    require(lower_[i] >= 0.0, "negative lower bound at index " + std::to_string(i));
    require(lower_[i] < upper_[i], "bounds inverted at index " + std::to_string(i));
  }
  for (Index r = 0; r <= m_; ++r) {
    require(quads_[r].dim() == n_, "Q" + std::to_string(r) + " has wrong order");
    require(linears_[r].size() == n_, "c" + std::to_string(r) + " has wrong length");
    check_finite(quads_[r].packed(), "Q" + std::to_string(r));
    check_finite(linears_[r], "c" + std::to_string(r));
  }
  check_finite(rhs_, "b");
}

double QcqpInstance::rhs(Index r) const {
  if (r < 1 || r > m_) throw std::out_of_range("constraint index out of range");
  return rhs_[r - 1];
}

QcqpInstance QcqpInstance::with_bounds(Vec lower, Vec upper) const {
  return QcqpInstance(quads_, linears_, rhs_, std::move(lower), std::move(upper), meta_);
}

bool operator==(const QcqpInstance& a, const QcqpInstance& b) {
  return a.n_ == b.n_ && a.m_ == b.m_ && a.quads_ == b.quads_ && a.linears_ == b.linears_ &&
         a.rhs_ == b.rhs_ && a.lower_ == b.lower_ && a.upper_ == b.upper_ && a.meta_ == b.meta_;
}

double evaluate_constraint(const QcqpInstance& inst, Index r, const Vec& x) {
  if (r < 0 || r > inst.num_constraints()) throw std::out_of_range("constraint index out of range");
  if (x.size() != inst.num_vars()) throw std::invalid_argument("point has wrong length");
  return quad_form(inst.quad(r), x) + inst.linear(r).dot(x);
}

namespace {

// One {"Q": [[i,j,v],...], "c": [...]} block -> (SymMatrix, Vec).
std::pair<SymMatrix, Vec> parse_form(const json& j, Index n, const std::string& path) {
  require(j.is_object(), path + " must be an object");
  SymMatrix q(n);
  if (j.contains("Q")) {
    const json& triplets = j.at("Q");
    require(triplets.is_array(), path + ".Q must be an array of [i,j,v] triplets");
    for (std::size_t t = 0; t < triplets.size(); ++t) {
      const json& trip = triplets[t];
      const std::string tpath = path + ".Q[" + std::to_string(t) + "]";
      require(trip.is_array() && trip.size() == 3, tpath + " must be [i,j,v]");
      require(trip[0].is_number_integer() && trip[1].is_number_integer(),
              tpath + " indices must be integers");
      const Index i = trip[0].get<Index>();
      const Index j2 = trip[1].get<Index>();
      require(i >= 0 && j2 >= 0 && i < n && j2 < n, tpath + " index out of range");
      require(i <= j2, tpath + " must address the upper triangle (i <= j)");
      const double v = trip[2].get<double>();
      require(std::isfinite(v), "non-finite entry at " + tpath);
      // v is the full coefficient of x_i x_j; split across the symmetric pair
      q.set(i, j2, i == j2 ? v : 0.5 * v);
    }
  }
  Vec c = Vec::Zero(n);
  if (j.contains("c")) {
    const json& cj = j.at("c");
    require(cj.is_array() && cj.size() == static_cast<std::size_t>(n),
            path + ".c must have length n");
    for (Index i = 0; i < n; ++i) c[i] = cj[i].get<double>();
  }
  return {std::move(q), std::move(c)};
}

json dump_form(const SymMatrix& q, const Vec& c) {
  json triplets = json::array();
  const Index n = q.dim();
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j) {
      const double v = i == j ? q(i, j) : 2.0 * q(i, j);
      if (v != 0.0) triplets.push_back(json::array({i, j, v}));
    }
  json out;
  out["Q"] = std::move(triplets);
  out["c"] = std::vector<double>(c.data(), c.data() + c.size());
  return out;
}

}  // namespace

QcqpInstance parse_instance(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed instance document: ") + e.what());
  }
  require(doc.is_object(), "instance document must be a JSON object");
  require(doc.contains("n") && doc["n"].is_number_integer(), "missing integer field n");
  require(doc.contains("m") && doc["m"].is_number_integer(), "missing integer field m");
  const Index n = doc["n"].get<Index>();
  const Index m = doc["m"].get<Index>();
  require(n >= 1, "n must be >= 1");
  require(m >= 0, "m must be >= 0");

  auto read_vec = [&](const char* key) {
    require(doc.contains(key), std::string("missing field ") + key);
    const json& arr = doc[key];
    require(arr.is_array() && arr.size() == static_cast<std::size_t>(n),
            std::string(key) + " must have length n");
    Vec v(n);
    for (Index i = 0; i < n; ++i) v[i] = arr[i].get<double>();
    return v;
  };
  Vec lower = read_vec("l");
  Vec upper = read_vec("u");

  require(doc.contains("objective"), "missing field objective");
  std::vector<SymMatrix> quads;
  std::vector<Vec> linears;
  auto [q0, c0] = parse_form(doc["objective"], n, "objective");
  quads.push_back(std::move(q0));
  linears.push_back(std::move(c0));

  Vec rhs(m);
  const json& cons = doc.contains("constraints") ? doc["constraints"] : json::array();
  require(cons.is_array() && cons.size() == static_cast<std::size_t>(m),
          "constraints must have length m");
  for (Index r = 0; r < m; ++r) {
    const std::string path = "constraints[" + std::to_string(r) + "]";
    auto [q, c] = parse_form(cons[r], n, path);
    quads.push_back(std::move(q));
    linears.push_back(std::move(c));
    require(cons[r].contains("b"), path + " missing field b");
    rhs[r] = cons[r]["b"].get<double>();
    require(std::isfinite(rhs[r]), "non-finite entry at " + path + ".b");
  }

  std::string meta = doc.contains("meta") ? doc["meta"].dump() : "{}";
  return QcqpInstance(std::move(quads), std::move(linears), std::move(rhs), std::move(lower),
                      std::move(upper), std::move(meta));
}

std::string serialize_instance(const QcqpInstance& inst) {
  const Index n = inst.num_vars();
  const Index m = inst.num_constraints();
  json doc;
  doc["n"] = n;
  doc["m"] = m;
  doc["l"] = std::vector<double>(inst.lower().data(), inst.lower().data() + n);
  doc["u"] = std::vector<double>(inst.upper().data(), inst.upper().data() + n);
  doc["objective"] = dump_form(inst.quad(0), inst.linear(0));
  json cons = json::array();
  for (Index r = 1; r <= m; ++r) {
    json c = dump_form(inst.quad(r), inst.linear(r));
    c["b"] = inst.rhs(r);
    cons.push_back(std::move(c));
  }
  doc["constraints"] = std::move(cons);
  doc["meta"] = json::parse(inst.meta_json());
  return doc.dump(2);
}

QcqpInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

void save_instance(const QcqpInstance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write instance file: " + path);
  out << serialize_instance(inst) << "\n";
}

QcqpInstance gen_unitbox(Index n, Index m, double density, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("gen_unitbox requires n >= 2");
  if (!(density > 0.0 && density <= 1.0))
    throw std::invalid_argument("density must be in (0, 1]");

  SplitMix64 rng(seed);
  std::vector<SymMatrix> quads;
  std::vector<Vec> linears;
  quads.reserve(m + 1);
  linears.reserve(m + 1);

  // Draw order (fixed for reproducibility): for each r = 0..m the upper
  // triangle of Q_r row-major including the diagonal, then c_r; then the
  // interior point; then the right-hand sides.
  for (Index r = 0; r <= m; ++r) {
    SymMatrix q(n);
    for (Index i = 0; i < n; ++i)
      for (Index j = i; j < n; ++j) {
        const bool keep = rng.uniform01() < density;
        const double v = rng.uniform(-10.0, 10.0);
        if (keep) q.set(i, j, i == j ? v : 0.5 * v);
      }
    Vec c(n);
    for (Index i = 0; i < n; ++i) c[i] = rng.uniform(-10.0, 10.0);
    quads.push_back(std::move(q));
    linears.push_back(std::move(c));
  }

  Vec interior(n);
  for (Index i = 0; i < n; ++i) interior[i] = 0.05 + 0.9 * rng.uniform01();

  Vec rhs(m);
  for (Index r = 1; r <= m; ++r) {
    const double f = quad_form(quads[r], interior) + linears[r].dot(interior);
    rhs[r - 1] = f + std::abs(f);
  }

  nlohmann::json meta;
  meta["name"] = unitbox_name(n, m, density, seed);
  meta["generator"] = {{"n", n}, {"m", m}, {"density", density}, {"seed", seed}};
  meta["feasible_point"] = std::vector<double>(interior.data(), interior.data() + n);

  return QcqpInstance(std::move(quads), std::move(linears), std::move(rhs), Vec::Zero(n),
                      Vec::Ones(n), meta.dump());
}

std::string unitbox_name(Index n, Index m, double density, std::uint64_t seed) {
  const int pct = static_cast<int>(std::lround(100.0 * density));
  return std::to_string(n) + "_" + std::to_string(m) + "_" + std::to_string(seed) + "_" +
         std::to_string(pct);
}

}  // namespace triqp
