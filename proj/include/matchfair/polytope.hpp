#pragma once

// Rational constraint systems, an exact two-phase simplex (Bland's rule),
// vertex enumeration and polytope equality.
//
// A ConstraintSystem describes {x : E x = e, A x <= b}; variables are free
// unless a row says otherwise. Rows carry unique names so that tight sets,
// violations and certificates can refer to them.

#include <map>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "matchfair/exactmath.hpp"

namespace matchfair {

using Json = nlohmann::ordered_json;

inline Json rat_to_json(const Rat& r) { return r.str(); }

inline Rat rat_from_json(const Json& j, const std::string& where) {
  if (!j.is_string()) throw ParseError(where + ": expected a rational string");
  try {
    return Rat::parse(j.get<std::string>());
  } catch (const ParseError& e) {
    throw ParseError(where + ": " + e.what());
  }
}

inline Json vec_to_json(std::span<const Rat> v) {
  Json out = Json::array();
  for (const auto& r : v) out.push_back(r.str());
  return out;
}

inline RatVec vec_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected an array");
  RatVec out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(rat_from_json(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

struct Row {
  RatVec coefficients;
  Rat rhs;
  std::string name;

  friend bool operator==(const Row&, const Row&) = default;
};

class ConstraintSystem {
 public:
  ConstraintSystem() = default;
  explicit ConstraintSystem(std::size_t num_vars) : num_vars_(num_vars) {
    for (std::size_t i = 0; i < num_vars; ++i) variables_.push_back("v" + std::to_string(i + 1));
  }
  explicit ConstraintSystem(std::vector<std::string> variable_names)
      : num_vars_(variable_names.size()), variables_(std::move(variable_names)) {}

  /// coefficients · x = rhs
  void add_equality(RatVec coefficients, Rat rhs, std::string name) {
    check_row(coefficients, name);
    equalities_.push_back({std::move(coefficients), std::move(rhs), std::move(name)});
  }

  /// coefficients · x <= rhs
  void add_inequality(RatVec coefficients, Rat rhs, std::string name) {
    check_row(coefficients, name);
    inequalities_.push_back({std::move(coefficients), std::move(rhs), std::move(name)});
  }

  [[nodiscard]] std::size_t num_vars() const { return num_vars_; }
  [[nodiscard]] const std::vector<std::string>& variables() const { return variables_; }
  [[nodiscard]] const std::vector<Row>& equalities() const { return equalities_; }
  [[nodiscard]] const std::vector<Row>& inequalities() const { return inequalities_; }
  [[nodiscard]] std::size_t row_count() const { return equalities_.size() + inequalities_.size(); }

  /// Row by combined index: equalities first, then inequalities.
  [[nodiscard]] const Row& row(std::size_t index) const {
    return index < equalities_.size() ? equalities_[index]
                                      : inequalities_.at(index - equalities_.size());
  }

  [[nodiscard]] bool has_row(const std::string& name) const { return names_.contains(name); }

  friend bool operator==(const ConstraintSystem& a, const ConstraintSystem& b) {
    return a.num_vars_ == b.num_vars_ && a.variables_ == b.variables_ &&
           a.equalities_ == b.equalities_ && a.inequalities_ == b.inequalities_;
  }

 private:
  void check_row(const RatVec& coefficients, const std::string& name) {
    if (coefficients.size() != num_vars_) {
      throw DimensionError("row \"" + name + "\" has " + std::to_string(coefficients.size()) +
                           " coefficients, expected " + std::to_string(num_vars_));
    }
    if (!names_.insert(name).second) throw Error("duplicate row name \"" + name + "\"");
  }

  std::size_t num_vars_ = 0;
  std::vector<std::string> variables_;
  std::vector<Row> equalities_;
  std::vector<Row> inequalities_;
  std::unordered_set<std::string> names_;
};

inline Json to_json(const ConstraintSystem& cs) {
  auto rows = [](const std::vector<Row>& rs) {
    Json out = Json::array();
    for (const auto& r : rs) {
      out.push_back({{"name", r.name}, {"coefficients", vec_to_json(r.coefficients)},
                     {"rhs", r.rhs.str()}});
    }
    return out;
  };
  return Json{{"num_vars", cs.num_vars()},
              {"variables", cs.variables()},
              {"equalities", rows(cs.equalities())},
              {"inequalities", rows(cs.inequalities())}};
}

inline ConstraintSystem constraint_system_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("variables")) throw ParseError("constraint system: missing \"variables\"");
  ConstraintSystem cs(j.at("variables").get<std::vector<std::string>>());
  for (const auto& r : j.value("equalities", Json::array())) {
    const auto name = r.at("name").get<std::string>();
    cs.add_equality(vec_from_json(r.at("coefficients"), name), rat_from_json(r.at("rhs"), name), name);
  }
  for (const auto& r : j.value("inequalities", Json::array())) {
    const auto name = r.at("name").get<std::string>();
    cs.add_inequality(vec_from_json(r.at("coefficients"), name), rat_from_json(r.at("rhs"), name), name);
  }
  return cs;
}

// --- membership -------------------------------------------------------------

struct Membership {
  bool satisfied = true;
  std::vector<std::string> violated;
};

inline Membership contains(const ConstraintSystem& cs, std::span<const Rat> point) {
  if (point.size() != cs.num_vars()) {
    throw DimensionError("contains: point has " + std::to_string(point.size()) +
                         " entries, system has " + std::to_string(cs.num_vars()) + " variables");
  }
  Membership m;
  for (const auto& r : cs.equalities()) {
    if (dot(r.coefficients, point) != r.rhs) m.violated.push_back(r.name);
  }
  for (const auto& r : cs.inequalities()) {
    if (dot(r.coefficients, point) > r.rhs) m.violated.push_back(r.name);
  }
  m.satisfied = m.violated.empty();
  return m;
}

inline std::vector<std::string> tight_rows(const ConstraintSystem& cs, std::span<const Rat> point) {
  std::vector<std::string> out;
  for (const auto& r : cs.equalities()) out.push_back(r.name);
  for (const auto& r : cs.inequalities()) {
    if (dot(r.coefficients, point) == r.rhs) out.push_back(r.name);
  }
  return out;
}

// --- linear programming -----------------------------------------------------

enum class Sense { Maximize, Minimize };
enum class LpStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
  }
  return "?";
}

struct LpOutcome {
  LpStatus status = LpStatus::Infeasible;
  Rat value;
  RatVec point;
  std::vector<std::string> tight_rows;
  /// One multiplier per row (equalities first, then inequalities).
  /// Inequality multipliers are >= 0; the combination has zero
  /// coefficients and a negative right-hand side.
  RatVec infeasibility_witness;
};

/// Re-checks a Farkas witness: sum_r w_r * row_r gives 0 <= (negative).
inline bool verify_infeasibility_witness(const ConstraintSystem& cs, std::span<const Rat> witness) {
  if (witness.size() != cs.row_count()) return false;
  RatVec combo(cs.num_vars());
  Rat rhs;
  for (std::size_t r = 0; r < cs.row_count(); ++r) {
    const Rat& w = witness[r];
    if (r >= cs.equalities().size() && w.sign() < 0) return false;
    if (w.is_zero()) continue;
    const Row& row = cs.row(r);
    for (std::size_t c = 0; c < combo.size(); ++c) combo[c] += w * row.coefficients[c];
    rhs += w * row.rhs;
  }
  return is_zero_vector(combo) && rhs.sign() < 0;
}

namespace detail {

/// Dense tableau for min c·z, T z = rhs, z >= 0 with an explicit basis.
class Tableau {
 public:
  Tableau(std::vector<RatVec> rows, RatVec rhs, std::vector<std::size_t> basis)
      : rows_(std::move(rows)), rhs_(std::move(rhs)), basis_(std::move(basis)) {}

  [[nodiscard]] std::size_t num_rows() const { return rows_.size(); }
  [[nodiscard]] std::size_t num_cols() const { return rows_.empty() ? 0 : rows_.front().size(); }

  /// Installs costs and computes reduced costs for the current basis.
  void set_costs(const RatVec& costs) {
    reduced_ = costs;
    objective_ = Rat(0);
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const Rat& cb = costs[basis_[r]];
      if (cb.is_zero()) continue;
      for (std::size_t c = 0; c < reduced_.size(); ++c) {
        if (!rows_[r][c].is_zero()) reduced_[c] -= cb * rows_[r][c];
      }
      objective_ += cb * rhs_[r];
    }
  }

  /// Runs Bland's rule on the columns in `allowed`. Returns false when the
  /// objective is unbounded below.
  bool optimize(const std::vector<bool>& allowed, const RunLimits& limits) {
    for (;;) {
      limits.check();
      std::size_t entering = num_cols();
      for (std::size_t c = 0; c < reduced_.size(); ++c) {
        if (allowed[c] && reduced_[c].sign() < 0) {
          entering = c;
          break;
        }
      }
      if (entering == num_cols()) return true;
      std::size_t leaving = num_rows();
      Rat best_ratio;
      for (std::size_t r = 0; r < rows_.size(); ++r) {
        if (rows_[r][entering].sign() <= 0) continue;
        Rat ratio = rhs_[r] / rows_[r][entering];
        if (leaving == num_rows() || ratio < best_ratio ||
            (ratio == best_ratio && basis_[r] < basis_[leaving])) {
          leaving = r;
          best_ratio = std::move(ratio);
        }
      }
      if (leaving == num_rows()) return false;
      pivot(leaving, entering);
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    RatVec& prow = rows_[r];
    const Rat inv = Rat(1) / prow[c];
    for (auto& v : prow) {
      if (!v.is_zero()) v *= inv;
    }
    rhs_[r] *= inv;
    std::vector<std::size_t> nz;
    for (std::size_t k = 0; k < prow.size(); ++k) {
      if (!prow[k].is_zero()) nz.push_back(k);
    }
    for (std::size_t o = 0; o < rows_.size(); ++o) {
      if (o == r || rows_[o][c].is_zero()) continue;
      const Rat f = rows_[o][c];
      for (auto k : nz) rows_[o][k] -= f * prow[k];
      rhs_[o] -= f * rhs_[r];
    }
    if (!reduced_.empty() && !reduced_[c].is_zero()) {
      const Rat f = reduced_[c];
      for (auto k : nz) reduced_[k] -= f * prow[k];
      objective_ += f * rhs_[r];
    }
    basis_[r] = c;
  }

  void erase_row(std::size_t r) {
    rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(r));
    rhs_.erase(rhs_.begin() + static_cast<std::ptrdiff_t>(r));
    basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
  }

  [[nodiscard]] const RatVec& row(std::size_t r) const { return rows_[r]; }
  [[nodiscard]] const Rat& rhs(std::size_t r) const { return rhs_[r]; }
  [[nodiscard]] std::size_t basic(std::size_t r) const { return basis_[r]; }
  [[nodiscard]] const Rat& objective() const { return objective_; }
  [[nodiscard]] const RatVec& reduced_costs() const { return reduced_; }

  [[nodiscard]] RatVec solution() const {
    RatVec z(num_cols());
    for (std::size_t r = 0; r < rows_.size(); ++r) z[basis_[r]] = rhs_[r];
    return z;
  }

 private:
  std::vector<RatVec> rows_;
  RatVec rhs_;
  std::vector<std::size_t> basis_;
  RatVec reduced_;
  Rat objective_;
};

}  // namespace detail

/// Exact LP over a constraint system: two-phase simplex with Bland's rule.
/// Free variables are split as x = p - q; inequalities receive slacks.
inline LpOutcome lp_optimize(const ConstraintSystem& cs, std::span<const Rat> objective, Sense sense,
                             const RunLimits& limits = {}) {
  const std::size_t n = cs.num_vars();
  if (objective.size() != n) {
    throw DimensionError("lp_optimize: objective has " + std::to_string(objective.size()) +
                         " entries, system has " + std::to_string(n) + " variables");
  }
  const std::size_t n_eq = cs.equalities().size();
  const std::size_t n_in = cs.inequalities().size();
  const std::size_t m = n_eq + n_in;
  const std::size_t structural = 2 * n + n_in;
  const std::size_t cols = structural + m;  // artificials last

  std::vector<RatVec> rows(m, RatVec(cols));
  RatVec rhs(m);
  std::vector<int> flip(m, 1);
  for (std::size_t r = 0; r < m; ++r) {
    const Row& src = cs.row(r);
    flip[r] = src.rhs.sign() < 0 ? -1 : 1;
    const Rat s(flip[r]);
    for (std::size_t j = 0; j < n; ++j) {
      if (src.coefficients[j].is_zero()) continue;
      rows[r][j] = s * src.coefficients[j];
      rows[r][n + j] = -rows[r][j];
    }
    if (r >= n_eq) rows[r][2 * n + (r - n_eq)] = s;
    rows[r][structural + r] = 1;
    rhs[r] = s * src.rhs;
  }
  std::vector<std::size_t> basis(m);
  for (std::size_t r = 0; r < m; ++r) basis[r] = structural + r;
  detail::Tableau tab(std::move(rows), std::move(rhs), std::move(basis));

  // Phase 1: minimize the sum of artificials.
  RatVec phase1_costs(cols);
  for (std::size_t r = 0; r < m; ++r) phase1_costs[structural + r] = 1;
  tab.set_costs(phase1_costs);
  std::vector<bool> all_columns(cols, true);
  tab.optimize(all_columns, limits);

  LpOutcome out;
  if (tab.objective().sign() > 0) {
    // Dual of phase 1: pi_r = 1 - reduced cost of artificial r.
    out.status = LpStatus::Infeasible;
    out.infeasibility_witness.resize(m);
    for (std::size_t r = 0; r < m; ++r) {
      const Rat pi = Rat(1) - tab.reduced_costs()[structural + r];
      out.infeasibility_witness[r] = -pi * Rat(flip[r]);
    }
    if (!verify_infeasibility_witness(cs, out.infeasibility_witness)) {
      throw InternalError("lp_optimize: phase-1 dual is not a valid infeasibility witness");
    }
    return out;
  }

  // Drive remaining (zero-valued) artificials out of the basis.
  for (std::size_t r = 0; r < tab.num_rows();) {
    if (tab.basic(r) < structural) {
      ++r;
      continue;
    }
    std::size_t col = structural;
    for (std::size_t c = 0; c < structural; ++c) {
      if (!tab.row(r)[c].is_zero()) {
        col = c;
        break;
      }
    }
    if (col == structural) {
      tab.erase_row(r);  // redundant equality
    } else {
      tab.pivot(r, col);
      ++r;
    }
  }

  RatVec phase2_costs(cols);
  for (std::size_t j = 0; j < n; ++j) {
    const Rat c = sense == Sense::Maximize ? -objective[j] : objective[j];
    phase2_costs[j] = c;
    phase2_costs[n + j] = -c;
  }
  tab.set_costs(phase2_costs);
  std::vector<bool> structural_only(cols, false);
  std::fill(structural_only.begin(), structural_only.begin() + static_cast<std::ptrdiff_t>(structural),
            true);
  if (!tab.optimize(structural_only, limits)) {
    out.status = LpStatus::Unbounded;
    return out;
  }
  const RatVec z = tab.solution();
  out.status = LpStatus::Optimal;
  out.point.resize(n);
  for (std::size_t j = 0; j < n; ++j) out.point[j] = z[j] - z[n + j];
  out.value = dot(objective, out.point);
  out.tight_rows = tight_rows(cs, out.point);
  return out;
}

inline bool is_feasible(const ConstraintSystem& cs, const RunLimits& limits = {}) {
  const RatVec zero(cs.num_vars());
  return lp_optimize(cs, zero, Sense::Maximize, limits).status == LpStatus::Optimal;
}

// --- vertex enumeration -----------------------------------------------------

class UnboundedPolyhedron : public Error {
 public:
  UnboundedPolyhedron() : Error("polyhedron is unbounded") {}
};

enum class VertexMethod {
  /// Incremental double description on the homogenized cone.
  DoubleDescription,
  /// Exhaustive enumeration of full-rank tight sets.
  TightSet,
};

inline constexpr std::size_t kMaxEnumerationVars = 20;
inline constexpr std::size_t kMaxEnumerationRows = 60;

namespace detail {

/// The inequalities re-expressed on the affine hull of the equalities:
/// x = origin + sum_k z_k * directions[k], with G z <= h.
struct ReducedSystem {
  bool empty = false;
  RatVec origin;
  std::vector<RatVec> directions;
  std::vector<RatVec> g;
  RatVec h;

  [[nodiscard]] std::size_t dim() const { return directions.size(); }

  [[nodiscard]] RatVec lift(std::span<const Rat> z) const {
    RatVec x = origin;
    for (std::size_t k = 0; k < z.size(); ++k) {
      if (z[k].is_zero()) continue;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!directions[k][i].is_zero()) x[i] += z[k] * directions[k][i];
      }
    }
    return x;
  }

  [[nodiscard]] bool feasible(std::span<const Rat> z) const {
    for (std::size_t r = 0; r < g.size(); ++r) {
      if (dot(g[r], z) > h[r]) return false;
    }
    return true;
  }

  [[nodiscard]] ConstraintSystem as_system() const {
    ConstraintSystem cs(dim());
    for (std::size_t r = 0; r < g.size(); ++r) cs.add_inequality(g[r], h[r], "g" + std::to_string(r));
    return cs;
  }
};

inline ReducedSystem reduce(const ConstraintSystem& cs) {
  ReducedSystem red;
  const std::size_t n = cs.num_vars();
  if (cs.equalities().empty()) {
    red.origin = RatVec(n);
    for (std::size_t i = 0; i < n; ++i) {
      RatVec e(n);
      e[i] = 1;
      red.directions.push_back(std::move(e));
    }
  } else {
    std::vector<RatVec> rows;
    RatVec rhs;
    for (const auto& r : cs.equalities()) {
      rows.push_back(r.coefficients);
      rhs.push_back(r.rhs);
    }
    const auto solution = solve_linear(RatMatrix::from_rows(rows, n), rhs);
    if (std::holds_alternative<InconsistentSystem>(solution)) {
      red.empty = true;
      return red;
    }
    if (const auto* u = std::get_if<UniqueSolution>(&solution)) {
      red.origin = u->x;
    } else {
      const auto& p = std::get<ParametricSolution>(solution);
      red.origin = p.particular;
      red.directions = p.null_basis;
    }
  }
  std::set<std::pair<RatVec, Rat>> seen;
  for (const auto& r : cs.inequalities()) {
    RatVec gz(red.dim());
    for (std::size_t k = 0; k < red.dim(); ++k) gz[k] = dot(r.coefficients, red.directions[k]);
    Rat hz = r.rhs - dot(r.coefficients, red.origin);
    const auto lead = std::find_if(gz.begin(), gz.end(), [](const Rat& v) { return !v.is_zero(); });
    if (lead == gz.end()) {
      if (hz.sign() < 0) {
        red.empty = true;
        return red;
      }
      continue;
    }
    const Rat scale = Rat(1) / abs(*lead);
    for (auto& v : gz) v *= scale;
    hz *= scale;
    if (!seen.insert({gz, hz}).second) continue;
    red.g.push_back(std::move(gz));
    red.h.push_back(std::move(hz));
  }
  return red;
}

/// Scales a homogeneous ray to a primitive integer vector.
inline void make_primitive(RatVec& w) {
  mpz_class lcm = 1;
  for (const auto& v : w) mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), v.denominator().get_mpz_t());
  mpz_class g = 0;
  std::vector<mpz_class> ints;
  ints.reserve(w.size());
  for (const auto& v : w) {
    mpz_class k = v.numerator() * (lcm / v.denominator());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), k.get_mpz_t());
    ints.push_back(std::move(k));
  }
  if (g == 0) return;
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = Rat(mpq_class(ints[i] / g));
}

class Bits {
 public:
  explicit Bits(std::size_t n = 0) : words_((n + 63) / 64, 0) {}
  void set(std::size_t i) { words_[i / 64] |= (std::uint64_t{1} << (i % 64)); }
  [[nodiscard]] bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1U; }
  [[nodiscard]] Bits operator&(const Bits& o) const {
    Bits out = *this;
    for (std::size_t k = 0; k < words_.size(); ++k) out.words_[k] &= o.words_[k];
    return out;
  }
  [[nodiscard]] bool subset_of(const Bits& o) const {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      if ((words_[k] & ~o.words_[k]) != 0) return false;
    }
    return true;
  }
  [[nodiscard]] std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(__builtin_popcountll(w));
    return c;
  }

 private:
  std::vector<std::uint64_t> words_;
};

struct Ray {
  RatVec w;
  Bits zeros;
};

/// Extreme rays of {w : a_r · w >= 0}; `rows` must have full column rank.
inline std::vector<Ray> double_description(const std::vector<RatVec>& rows, const RunLimits& limits) {
  const std::size_t dim = rows.front().size();
  const std::size_t total = rows.size();

  // Initial simplicial cone from the first independent rows, in order.
  std::vector<std::size_t> chosen;
  std::vector<RatVec> echelon;
  for (std::size_t r = 0; r < total && chosen.size() < dim; ++r) {
    auto trial = echelon;
    trial.push_back(rows[r]);
    if (rank_of(trial) > echelon.size()) {
      echelon = std::move(trial);
      chosen.push_back(r);
    }
  }
  if (chosen.size() < dim) throw InternalError("double_description: constraint matrix is rank deficient");

  std::vector<RatVec> basis_rows;
  for (auto r : chosen) basis_rows.push_back(rows[r]);
  const RatMatrix basis = RatMatrix::from_rows(basis_rows, dim);
  std::vector<Ray> rays;
  for (std::size_t k = 0; k < dim; ++k) {
    RatVec e(dim);
    e[k] = 1;
    auto sol = solve_linear(basis, e);
    auto* u = std::get_if<UniqueSolution>(&sol);
    if (u == nullptr) throw InternalError("double_description: singular initial basis");
    Ray ray{std::move(u->x), Bits(total)};
    make_primitive(ray.w);
    for (std::size_t i = 0; i < dim; ++i) {
      if (i != k) ray.zeros.set(chosen[i]);
    }
    rays.push_back(std::move(ray));
  }

  std::vector<bool> processed(total, false);
  for (auto r : chosen) processed[r] = true;
  for (std::size_t r = 0; r < total; ++r) {
    if (processed[r]) continue;
    limits.check();
    std::vector<std::size_t> plus, minus;
    std::vector<Ray> next;
    std::vector<Rat> values(rays.size());
    for (std::size_t i = 0; i < rays.size(); ++i) {
      values[i] = dot(rows[r], rays[i].w);
      const int s = values[i].sign();
      if (s > 0) {
        plus.push_back(i);
      } else if (s < 0) {
        minus.push_back(i);
      } else {
        rays[i].zeros.set(r);
      }
    }
    for (auto p : plus) {
      for (auto q : minus) {
        const Bits common = rays[p].zeros & rays[q].zeros;
        if (common.count() + 2 < dim) continue;
        bool adjacent = true;
        for (std::size_t o = 0; o < rays.size() && adjacent; ++o) {
          if (o != p && o != q && common.subset_of(rays[o].zeros)) adjacent = false;
        }
        if (!adjacent) continue;
        Ray ray{RatVec(dim), common};
        for (std::size_t i = 0; i < dim; ++i) {
          ray.w[i] = values[p] * rays[q].w[i] - values[q] * rays[p].w[i];
        }
        make_primitive(ray.w);
        ray.zeros.set(r);
        next.push_back(std::move(ray));
      }
      if (next.size() % 256 == 0) limits.check();
    }
    for (std::size_t i = 0; i < rays.size(); ++i) {
      if (values[i].sign() >= 0) next.push_back(std::move(rays[i]));
    }
    rays = std::move(next);
    processed[r] = true;
  }
  return rays;
}

inline std::vector<RatVec> vertices_by_double_description(const ReducedSystem& red,
                                                         const RunLimits& limits) {
  const std::size_t d = red.dim();
  // Homogenized rows over w = (lambda, z): lambda >= 0 and h*lambda - g·z >= 0.
  std::vector<RatVec> rows;
  RatVec lambda_row(d + 1);
  lambda_row[0] = 1;
  rows.push_back(std::move(lambda_row));
  for (std::size_t r = 0; r < red.g.size(); ++r) {
    RatVec a(d + 1);
    a[0] = red.h[r];
    for (std::size_t k = 0; k < d; ++k) a[k + 1] = -red.g[r][k];
    rows.push_back(std::move(a));
  }
  if (rank_of(rows) < d + 1) {
    if (is_feasible(red.as_system(), limits)) throw UnboundedPolyhedron();
    return {};
  }
  const auto rays = double_description(rows, limits);
  std::vector<RatVec> vertices;
  bool recession = false;
  for (const auto& ray : rays) {
    if (ray.w[0].sign() == 0) {
      recession = true;
      continue;
    }
    RatVec z(d);
    for (std::size_t k = 0; k < d; ++k) z[k] = ray.w[k + 1] / ray.w[0];
    vertices.push_back(red.lift(z));
  }
  if (recession && !vertices.empty()) throw UnboundedPolyhedron();
  return vertices;
}

inline std::vector<RatVec> vertices_by_tight_sets(const ReducedSystem& red, const RunLimits& limits) {
  const std::size_t d = red.dim();
  const ConstraintSystem zsys = red.as_system();
  if (!is_feasible(zsys, limits)) return {};
  for (std::size_t k = 0; k < d; ++k) {
    RatVec e(d);
    e[k] = 1;
    for (auto sense : {Sense::Maximize, Sense::Minimize}) {
      if (lp_optimize(zsys, e, sense, limits).status == LpStatus::Unbounded) throw UnboundedPolyhedron();
    }
  }
  const std::size_t rows = red.g.size();
  std::vector<std::vector<RatVec>> per_branch(rows);

  // Depth-first over increasing row subsets; a row is only added when it
  // raises the rank, so every leaf is a basis.
  auto branch = [&](std::size_t first) {
    std::vector<std::size_t> chosen{first};
    std::vector<std::vector<RatVec>> echelons{{red.g[first]}};
    std::vector<RatVec>& found = per_branch[first];
    std::size_t visited = 0;
    auto recurse = [&](auto&& self, std::size_t start) -> void {
      if (++visited % 1024 == 0) limits.check();
      if (chosen.size() == d) {
        std::vector<RatVec> grows;
        RatVec hrows;
        for (auto c : chosen) {
          grows.push_back(red.g[c]);
          hrows.push_back(red.h[c]);
        }
        auto sol = solve_linear(RatMatrix::from_rows(grows, d), hrows);
        const auto* u = std::get_if<UniqueSolution>(&sol);
        if (u != nullptr && red.feasible(u->x)) found.push_back(red.lift(u->x));
        return;
      }
      for (std::size_t r = start; r + (d - chosen.size()) <= rows; ++r) {
        auto trial = echelons.back();
        trial.push_back(red.g[r]);
        if (rank_of(trial) <= chosen.size()) continue;
        chosen.push_back(r);
        echelons.push_back(std::move(trial));
        self(self, r + 1);
        chosen.pop_back();
        echelons.pop_back();
      }
    };
    recurse(recurse, first + 1);
  };

  if (d == 0) return {red.origin};
  parallel_for(rows, limits.threads, branch);
  std::vector<RatVec> out;
  for (auto& b : per_branch) {
    for (auto& v : b) out.push_back(std::move(v));
  }
  return out;
}

}  // namespace detail

/// Vertices of a bounded polyhedron, deduplicated and in lexicographic order.
inline std::vector<RatVec> vertex_enumerate(const ConstraintSystem& cs, const RunLimits& limits = {},
                                            VertexMethod method = VertexMethod::DoubleDescription) {
  if (!limits.override_caps &&
      (cs.num_vars() > kMaxEnumerationVars || cs.row_count() > kMaxEnumerationRows)) {
    throw CapExceeded("vertex enumeration capped at " + std::to_string(kMaxEnumerationVars) +
                      " variables and " + std::to_string(kMaxEnumerationRows) + " rows (system has " +
                      std::to_string(cs.num_vars()) + " variables, " +
                      std::to_string(cs.row_count()) + " rows)");
  }
  const auto red = detail::reduce(cs);
  if (red.empty) return {};
  std::vector<RatVec> vertices;
  if (red.dim() == 0) {
    if (red.feasible(RatVec{})) vertices.push_back(red.origin);
  } else if (method == VertexMethod::DoubleDescription) {
    vertices = detail::vertices_by_double_description(red, limits);
  } else {
    vertices = detail::vertices_by_tight_sets(red, limits);
  }
  std::sort(vertices.begin(), vertices.end());
  vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
  return vertices;
}

/// True iff both systems describe the same (bounded) point set.
inline bool polytopes_equal(const ConstraintSystem& a, const ConstraintSystem& b,
                            const RunLimits& limits = {}) {
  if (a.num_vars() != b.num_vars()) throw DimensionError("polytopes_equal: variable counts differ");
  const auto va = vertex_enumerate(a, limits);
  const auto vb = vertex_enumerate(b, limits);
  for (const auto& v : va) {
    if (!contains(b, v).satisfied) return false;
  }
  for (const auto& v : vb) {
    if (!contains(a, v).satisfied) return false;
  }
  return true;
}

}  // namespace matchfair
