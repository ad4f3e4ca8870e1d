#pragma once

// Matching-market instances and allocations.
//
// Two-sided markets have n agents and n jobs. Internally both sides are
// indexed 0..n-1; externally (labels, files, row names) agents are 1..n and
// jobs n+1..2n. Entities are numbered agents first, then jobs. A
// non-bipartite market has m vertices (m even) and an explicit edge list.
//
// An allocation is a fractional perfect matching. Every operation works on
// the instance's variable layout: x[i][j] at index i*n + j for two-sided
// markets, one variable per edge (in canonical edge order) otherwise.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "matchfair/polytope.hpp"

namespace matchfair {

enum class MarketMode { TwoSidedAsymmetric, TwoSidedSymmetric, NonBipartite };

inline std::string to_string(MarketMode mode) {
  switch (mode) {
    case MarketMode::TwoSidedAsymmetric: return "two_sided_asymmetric";
    case MarketMode::TwoSidedSymmetric: return "two_sided_symmetric";
    case MarketMode::NonBipartite: return "non_bipartite";
  }
  return "?";
}

inline MarketMode market_mode_from_string(const std::string& s) {
  if (s == "two_sided_asymmetric") return MarketMode::TwoSidedAsymmetric;
  if (s == "two_sided_symmetric") return MarketMode::TwoSidedSymmetric;
  if (s == "non_bipartite") return MarketMode::NonBipartite;
  throw ParseError("unknown market mode \"" + s + "\"");
}

/// Undirected weighted edge, 0-based endpoints with a < b.
struct Edge {
  std::size_t a = 0;
  std::size_t b = 0;
  Rat w;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Provenance of a generated instance.
struct GeneratorInfo {
  std::string algorithm;
  std::uint64_t seed = 0;

  friend bool operator==(const GeneratorInfo&, const GeneratorInfo&) = default;
};

using UtilityProfile = RatVec;

class MarketInstance {
 public:
  /// agent_utilities[i][j] = u_i(job j); job_utilities[j][i] = u_j(agent i).
  static MarketInstance two_sided_asymmetric(std::vector<RatVec> agent_utilities,
                                             std::vector<RatVec> job_utilities) {
    MarketInstance inst;
    inst.mode_ = MarketMode::TwoSidedAsymmetric;
    inst.size_ = agent_utilities.size();
    check_square(agent_utilities, inst.size_, "agent_utilities");
    check_square(job_utilities, inst.size_, "job_utilities");
    inst.agent_ = std::move(agent_utilities);
    inst.job_ = std::move(job_utilities);
    return inst;
  }

  /// u_i(j) = u_j(i) = weights[i][j].
  static MarketInstance two_sided_symmetric(std::vector<RatVec> weights) {
    MarketInstance inst;
    inst.mode_ = MarketMode::TwoSidedSymmetric;
    inst.size_ = weights.size();
    check_square(weights, inst.size_, "weights");
    inst.agent_ = std::move(weights);
    return inst;
  }

  static MarketInstance non_bipartite(std::size_t m, std::vector<Edge> edges) {
    if (m == 0 || m % 2 != 0) throw Error("non-bipartite market needs an even, positive vertex count (got " +
                                          std::to_string(m) + ")");
    for (auto& e : edges) {
      if (e.a == e.b) throw Error("self-loop at vertex " + std::to_string(e.a + 1));
      if (e.a >= m || e.b >= m) throw Error("edge endpoint outside 1.." + std::to_string(m));
      if (e.w.sign() < 0) throw Error("negative weight on edge " + pair_label(e.a, e.b));
      if (e.a > e.b) std::swap(e.a, e.b);
    }
    std::sort(edges.begin(), edges.end(),
              [](const Edge& x, const Edge& y) { return std::pair(x.a, x.b) < std::pair(y.a, y.b); });
    for (std::size_t k = 1; k < edges.size(); ++k) {
      if (edges[k - 1].a == edges[k].a && edges[k - 1].b == edges[k].b) {
        throw Error("edge " + pair_label(edges[k].a, edges[k].b) + " listed twice");
      }
    }
    MarketInstance inst;
    inst.mode_ = MarketMode::NonBipartite;
    inst.size_ = m;
    inst.edges_ = std::move(edges);
    return inst;
  }

  [[nodiscard]] MarketMode mode() const { return mode_; }
  [[nodiscard]] bool two_sided() const { return mode_ != MarketMode::NonBipartite; }
  /// Side size n (two-sided) or vertex count m (non-bipartite).
  [[nodiscard]] std::size_t size() const { return size_; }
  [[nodiscard]] std::size_t entity_count() const { return two_sided() ? 2 * size_ : size_; }
  [[nodiscard]] std::size_t num_vars() const { return two_sided() ? size_ * size_ : edges_.size(); }
  [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }

  [[nodiscard]] const Rat& agent_utility(std::size_t agent, std::size_t job) const {
    return agent_.at(agent).at(job);
  }
  [[nodiscard]] const Rat& job_utility(std::size_t job, std::size_t agent) const {
    return mode_ == MarketMode::TwoSidedSymmetric ? agent_.at(agent).at(job) : job_.at(job).at(agent);
  }
  [[nodiscard]] const std::vector<RatVec>& weights() const { return agent_; }
  [[nodiscard]] const std::vector<RatVec>& agent_utilities() const { return agent_; }
  [[nodiscard]] const std::vector<RatVec>& job_utilities() const { return job_; }

  /// Edge weight; zero for self pairs and absent edges.
  [[nodiscard]] Rat weight(std::size_t a, std::size_t b) const {
    const auto k = edge_index(a, b);
    return k ? edges_[*k].w : Rat(0);
  }

  [[nodiscard]] std::optional<std::size_t> edge_index(std::size_t a, std::size_t b) const {
    if (a > b) std::swap(a, b);
    const auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair(a, b),
                                     [](const Edge& e, const std::pair<std::size_t, std::size_t>& key) {
                                       return std::pair(e.a, e.b) < key;
                                     });
    if (it == edges_.end() || it->a != a || it->b != b) return std::nullopt;
    return static_cast<std::size_t>(it - edges_.begin());
  }

  [[nodiscard]] std::size_t var(std::size_t agent, std::size_t job) const { return agent * size_ + job; }

  /// External label of an entity: agents 1..n, jobs n+1..2n, vertices 1..m.
  [[nodiscard]] std::size_t label(std::size_t entity) const { return entity + 1; }

  [[nodiscard]] std::string entity_name(std::size_t entity) const {
    if (!two_sided()) return "vertex " + std::to_string(entity + 1);
    return (entity < size_ ? "agent " : "job ") + std::to_string(entity + 1);
  }

  [[nodiscard]] bool same_side(std::size_t e1, std::size_t e2) const {
    return !two_sided() || ((e1 < size_) == (e2 < size_));
  }

  [[nodiscard]] std::vector<std::string> variable_names() const {
    std::vector<std::string> names;
    if (two_sided()) {
      for (std::size_t i = 0; i < size_; ++i) {
        for (std::size_t j = 0; j < size_; ++j) names.push_back(var_name(i, size_ + j));
      }
    } else {
      for (const auto& e : edges_) names.push_back(var_name(e.a, e.b));
    }
    return names;
  }

  /// Coefficients c with u_observer(bundle of owner) = c · x.
  [[nodiscard]] RatVec view_row(std::size_t observer, std::size_t owner) const {
    RatVec c(num_vars());
    if (two_sided()) {
      if (!same_side(observer, owner)) throw Error("view_row: entities on different sides");
      if (observer < size_) {
        for (std::size_t j = 0; j < size_; ++j) c[var(owner, j)] = agent_utility(observer, j);
      } else {
        const std::size_t job = observer - size_, owned = owner - size_;
        for (std::size_t i = 0; i < size_; ++i) c[var(i, owned)] = job_utility(job, i);
      }
    } else {
      for (std::size_t k = 0; k < edges_.size(); ++k) {
        const Edge& e = edges_[k];
        if (e.a == owner) c[k] = weight(observer, e.b);
        if (e.b == owner) c[k] = weight(observer, e.a);
      }
    }
    return c;
  }

  /// Coefficients of the entity's own utility.
  [[nodiscard]] RatVec utility_row(std::size_t entity) const { return view_row(entity, entity); }

  static std::string var_name(std::size_t a, std::size_t b) {
    return "x_" + std::to_string(a + 1) + "_" + std::to_string(b + 1);
  }
  static std::string pair_label(std::size_t a, std::size_t b) {
    return "(" + std::to_string(a + 1) + "," + std::to_string(b + 1) + ")";
  }

  std::optional<GeneratorInfo> generator;

  friend bool operator==(const MarketInstance&, const MarketInstance&) = default;

 private:
  static void check_square(const std::vector<RatVec>& table, std::size_t n, const std::string& what) {
    if (n == 0) throw Error(what + ": empty market");
    if (table.size() != n) throw Error(what + ": expected " + std::to_string(n) + " rows");
    for (std::size_t r = 0; r < table.size(); ++r) {
      if (table[r].size() != n) {
        throw Error(what + "[" + std::to_string(r) + "]: expected " + std::to_string(n) + " entries");
      }
      for (std::size_t c = 0; c < n; ++c) {
        if (table[r][c].sign() < 0) {
          throw Error(what + "[" + std::to_string(r) + "][" + std::to_string(c) + "]: negative utility " +
                      table[r][c].str());
        }
      }
    }
  }

  MarketMode mode_ = MarketMode::TwoSidedAsymmetric;
  std::size_t size_ = 0;
  std::vector<RatVec> agent_;
  std::vector<RatVec> job_;
  std::vector<Edge> edges_;
};

/// A fractional perfect matching: an n x n doubly stochastic matrix or a
/// vertex-degree-one weighting of edges.
class Allocation {
 public:
  struct Share {
    std::size_t a = 0;
    std::size_t b = 0;
    Rat x;

    friend bool operator==(const Share&, const Share&) = default;
  };

  static Allocation bipartite(std::vector<RatVec> matrix) {
    const std::size_t n = matrix.size();
    if (n == 0) throw Error("allocation: empty matrix");
    for (std::size_t i = 0; i < n; ++i) {
      if (matrix[i].size() != n) throw Error("allocation row " + std::to_string(i + 1) + ": expected " +
                                             std::to_string(n) + " entries");
    }
    for (std::size_t i = 0; i < n; ++i) {
      Rat sum;
      for (std::size_t j = 0; j < n; ++j) {
        if (matrix[i][j].sign() < 0) {
          throw Error("allocation entry x_" + std::to_string(i + 1) + "_" + std::to_string(n + j + 1) +
                      " is negative");
        }
        sum += matrix[i][j];
      }
      if (sum != 1) {
        throw Error("allocation row " + std::to_string(i + 1) + " (agent " + std::to_string(i + 1) +
                    ") sums to " + sum.str() + ", expected 1");
      }
    }
    for (std::size_t j = 0; j < n; ++j) {
      Rat sum;
      for (std::size_t i = 0; i < n; ++i) sum += matrix[i][j];
      if (sum != 1) {
        throw Error("allocation column " + std::to_string(j + 1) + " (job " + std::to_string(n + j + 1) +
                    ") sums to " + sum.str() + ", expected 1");
      }
    }
    Allocation out;
    out.bipartite_ = true;
    out.size_ = n;
    out.matrix_ = std::move(matrix);
    return out;
  }

  static Allocation uniform(std::size_t n) {
    return bipartite(std::vector<RatVec>(n, RatVec(n, Rat(1, static_cast<long>(n)))));
  }

  /// Edge shares on m vertices; unlisted edges carry zero. Odd-set
  /// constraints are checked against an instance, not here.
  static Allocation on_edges(std::size_t m, std::vector<Share> shares) {
    for (auto& s : shares) {
      if (s.a == s.b || s.a >= m || s.b >= m) {
        throw Error("allocation edge " + MarketInstance::pair_label(s.a, s.b) + " is not a valid edge on " +
                    std::to_string(m) + " vertices");
      }
      if (s.x.sign() < 0) throw Error("allocation edge " + MarketInstance::pair_label(s.a, s.b) + " is negative");
      if (s.a > s.b) std::swap(s.a, s.b);
    }
    std::sort(shares.begin(), shares.end(),
              [](const Share& p, const Share& q) { return std::pair(p.a, p.b) < std::pair(q.a, q.b); });
    RatVec degree(m);
    for (std::size_t k = 0; k < shares.size(); ++k) {
      if (k > 0 && shares[k - 1].a == shares[k].a && shares[k - 1].b == shares[k].b) {
        throw Error("allocation edge " + MarketInstance::pair_label(shares[k].a, shares[k].b) + " listed twice");
      }
      degree[shares[k].a] += shares[k].x;
      degree[shares[k].b] += shares[k].x;
    }
    for (std::size_t v = 0; v < m; ++v) {
      if (degree[v] != 1) {
        throw Error("allocation vertex " + std::to_string(v + 1) + " has degree sum " + degree[v].str() +
                    ", expected 1");
      }
    }
    Allocation out;
    out.bipartite_ = false;
    out.size_ = m;
    out.shares_ = std::move(shares);
    return out;
  }

  [[nodiscard]] bool is_bipartite() const { return bipartite_; }
  [[nodiscard]] std::size_t size() const { return size_; }
  [[nodiscard]] const Rat& at(std::size_t agent, std::size_t job) const { return matrix_.at(agent).at(job); }
  [[nodiscard]] const std::vector<RatVec>& matrix() const { return matrix_; }
  [[nodiscard]] const std::vector<Share>& shares() const { return shares_; }

  friend bool operator==(const Allocation&, const Allocation&) = default;

 private:
  bool bipartite_ = true;
  std::size_t size_ = 0;
  std::vector<RatVec> matrix_;
  std::vector<Share> shares_;
};

inline constexpr std::size_t kMaxOddSetVertices = 10;

/// The fractional perfect matching polytope of the instance's graph.
/// Non-bipartite systems carry one odd-set row per odd S, 3 <= |S| <= m-1.
inline ConstraintSystem allocation_polytope(const MarketInstance& inst) {
  ConstraintSystem cs(inst.variable_names());
  const std::size_t nv = inst.num_vars();
  if (inst.two_sided()) {
    const std::size_t n = inst.size();
    for (std::size_t i = 0; i < n; ++i) {
      RatVec row(nv);
      for (std::size_t j = 0; j < n; ++j) row[inst.var(i, j)] = 1;
      cs.add_equality(std::move(row), 1, "agent_" + std::to_string(i + 1));
    }
    for (std::size_t j = 0; j < n; ++j) {
      RatVec col(nv);
      for (std::size_t i = 0; i < n; ++i) col[inst.var(i, j)] = 1;
      cs.add_equality(std::move(col), 1, "job_" + std::to_string(n + j + 1));
    }
  } else {
    const std::size_t m = inst.size();
    if (m > kMaxOddSetVertices) {
      throw CapExceeded("non-bipartite allocation polytope capped at " + std::to_string(kMaxOddSetVertices) +
                        " vertices (got " + std::to_string(m) + ")");
    }
    for (std::size_t v = 0; v < m; ++v) {
      RatVec row(nv);
      for (std::size_t k = 0; k < nv; ++k) {
        if (inst.edges()[k].a == v || inst.edges()[k].b == v) row[k] = 1;
      }
      cs.add_equality(std::move(row), 1, "vertex_" + std::to_string(v + 1));
    }
  }
  const auto names = inst.variable_names();
  for (std::size_t k = 0; k < nv; ++k) {
    RatVec e(nv);
    e[k] = -1;
    cs.add_inequality(std::move(e), 0, names[k] + ">=0");
  }
  if (!inst.two_sided()) {
    const std::size_t m = inst.size();
    for (std::uint32_t mask = 0; mask < (1U << m); ++mask) {
      const auto size = static_cast<std::size_t>(__builtin_popcount(mask));
      if (size < 3 || size > m - 1 || size % 2 == 0) continue;
      RatVec row(nv);
      std::string name = "odd{";
      for (std::size_t v = 0; v < m; ++v) {
        if ((mask >> v) & 1U) name += (name.size() > 4 ? "," : "") + std::to_string(v + 1);
      }
      name += "}";
      for (std::size_t k = 0; k < nv; ++k) {
        const auto& e = inst.edges()[k];
        if (((mask >> e.a) & 1U) && ((mask >> e.b) & 1U)) row[k] = 1;
      }
      cs.add_inequality(std::move(row), Rat(static_cast<long>(size - 1), 2), name);
    }
  }
  return cs;
}

/// Row/column system of a non-bipartite instance whose edges all cross a
/// bipartition: degree equalities and nonnegativity, no odd-set rows.
inline ConstraintSystem degree_polytope(const MarketInstance& inst) {
  ConstraintSystem full = allocation_polytope(inst);
  ConstraintSystem cs(full.variables());
  for (const auto& r : full.equalities()) cs.add_equality(r.coefficients, r.rhs, r.name);
  for (const auto& r : full.inequalities()) {
    if (r.name.rfind("odd{", 0) != 0) cs.add_inequality(r.coefficients, r.rhs, r.name);
  }
  return cs;
}

/// The allocation as a vector over the instance's variables, after checking
/// it is a valid allocation for the instance.
inline RatVec allocation_variables(const MarketInstance& inst, const Allocation& x) {
  RatVec v(inst.num_vars());
  if (inst.two_sided()) {
    if (!x.is_bipartite() || x.size() != inst.size()) {
      throw Error("allocation shape does not match a two-sided market with n = " + std::to_string(inst.size()));
    }
    for (std::size_t i = 0; i < inst.size(); ++i) {
      for (std::size_t j = 0; j < inst.size(); ++j) v[inst.var(i, j)] = x.at(i, j);
    }
    return v;
  }
  if (x.is_bipartite() || x.size() != inst.size()) {
    throw Error("allocation shape does not match a non-bipartite market with m = " + std::to_string(inst.size()));
  }
  for (const auto& s : x.shares()) {
    const auto k = inst.edge_index(s.a, s.b);
    if (!k) {
      if (s.x.is_zero()) continue;
      throw Error("allocation uses edge " + MarketInstance::pair_label(s.a, s.b) + " absent from the instance");
    }
    v[*k] = s.x;
  }
  const auto membership = contains(allocation_polytope(inst), v);
  if (!membership.satisfied) {
    throw Error("allocation violates " + membership.violated.front());
  }
  return v;
}

inline Allocation allocation_from_variables(const MarketInstance& inst, std::span<const Rat> v) {
  if (v.size() != inst.num_vars()) throw DimensionError("allocation vector length mismatch");
  if (inst.two_sided()) {
    const std::size_t n = inst.size();
    std::vector<RatVec> m(n, RatVec(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) m[i][j] = v[inst.var(i, j)];
    }
    return Allocation::bipartite(std::move(m));
  }
  std::vector<Allocation::Share> shares;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_zero()) shares.push_back({inst.edges()[k].a, inst.edges()[k].b, v[k]});
  }
  Allocation out = Allocation::on_edges(inst.size(), std::move(shares));
  allocation_variables(inst, out);
  return out;
}

inline UtilityProfile utility_profile_of(const MarketInstance& inst, std::span<const Rat> v) {
  UtilityProfile p(inst.entity_count());
  for (std::size_t e = 0; e < p.size(); ++e) p[e] = dot(inst.utility_row(e), v);
  return p;
}

/// Utility of every entity: agents then jobs, or vertices.
inline UtilityProfile utility_profile(const MarketInstance& inst, const Allocation& x) {
  return utility_profile_of(inst, allocation_variables(inst, x));
}

/// Labels keyed by (agent, job) or (vertex, vertex), 0-based.
using EdgeLabels = std::map<std::pair<std::size_t, std::size_t>, Rat>;

/// Fills the unlabeled cells greedily in row-major (or canonical edge)
/// order, each taking min(remaining row capacity, remaining column
/// capacity). With zero_weight_only, only cells worth nothing to both
/// endpoints receive mass.
inline Allocation complete_allocation(const MarketInstance& inst, const EdgeLabels& labeled,
                                      bool zero_weight_only = false) {
  const std::size_t nv = inst.num_vars();
  RatVec v(nv);
  std::vector<bool> is_label(nv, false);
  const std::size_t slots = inst.two_sided() ? 2 * inst.size() : inst.size();
  RatVec capacity(slots, Rat(1));
  auto endpoints = [&](std::size_t k) -> std::pair<std::size_t, std::size_t> {
    if (inst.two_sided()) return {k / inst.size(), inst.size() + k % inst.size()};
    return {inst.edges()[k].a, inst.edges()[k].b};
  };
  for (const auto& [key, value] : labeled) {
    std::optional<std::size_t> k;
    if (inst.two_sided()) {
      if (key.first < inst.size() && key.second < inst.size()) k = inst.var(key.first, key.second);
    } else {
      k = inst.edge_index(key.first, key.second);
    }
    if (!k) throw Error("label on " + MarketInstance::pair_label(key.first, key.second) + " is not an edge");
    if (value.sign() < 0) throw Error("negative label on " + MarketInstance::pair_label(key.first, key.second));
    v[*k] = value;
    is_label[*k] = true;
    const auto [p, q] = endpoints(*k);
    capacity[p] -= value;
    capacity[q] -= value;
  }
  for (std::size_t s = 0; s < slots; ++s) {
    if (capacity[s].sign() < 0) {
      throw Error("labeled mass at " + inst.entity_name(s) + " exceeds 1 by " + (-capacity[s]).str());
    }
  }
  for (std::size_t k = 0; k < nv; ++k) {
    if (is_label[k]) continue;
    const auto [p, q] = endpoints(k);
    if (zero_weight_only) {
      const bool worthless = inst.two_sided()
                                 ? inst.agent_utility(p, q - inst.size()).is_zero() &&
                                       inst.job_utility(q - inst.size(), p).is_zero()
                                 : inst.edges()[k].w.is_zero();
      if (!worthless) continue;
    }
    const Rat add = std::min(capacity[p], capacity[q]);
    if (add.sign() <= 0) continue;
    v[k] = add;
    capacity[p] -= add;
    capacity[q] -= add;
  }
  for (std::size_t s = 0; s < slots; ++s) {
    if (!capacity[s].is_zero()) {
      throw Error("greedy completion cannot fill " + inst.entity_name(s) + " (short by " + capacity[s].str() + ")");
    }
  }
  return allocation_from_variables(inst, v);
}

struct BirkhoffTerm {
  Rat coefficient;
  /// permutation[agent] = job, 0-based
  std::vector<std::size_t> permutation;
};

namespace detail {

inline bool kuhn_augment(std::size_t row, const std::vector<std::vector<bool>>& support,
                         const std::vector<bool>& row_active, std::vector<std::ptrdiff_t>& match_col,
                         std::vector<bool>& seen) {
  for (std::size_t c = 0; c < support.size(); ++c) {
    if (!support[row][c] || seen[c]) continue;
    seen[c] = true;
    if (match_col[c] < 0 ||
        kuhn_augment(static_cast<std::size_t>(match_col[c]), support, row_active, match_col, seen)) {
      match_col[c] = static_cast<std::ptrdiff_t>(row);
      return true;
    }
  }
  return false;
}

/// True if rows >= from can be perfectly matched into the unused columns.
inline bool completes(const std::vector<std::vector<bool>>& support, std::size_t from,
                      const std::vector<bool>& used) {
  const std::size_t n = support.size();
  std::vector<std::vector<bool>> restricted(n, std::vector<bool>(n, false));
  for (std::size_t r = from; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) restricted[r][c] = support[r][c] && !used[c];
  }
  std::vector<std::ptrdiff_t> match_col(n, -1);
  std::vector<bool> active(n, true);
  for (std::size_t r = from; r < n; ++r) {
    std::vector<bool> seen(n, false);
    if (!kuhn_augment(r, restricted, active, match_col, seen)) return false;
  }
  return true;
}

/// Lexicographically smallest permutation inside the support, if any.
inline std::optional<std::vector<std::size_t>> smallest_support_permutation(
    const std::vector<std::vector<bool>>& support) {
  const std::size_t n = support.size();
  std::vector<std::size_t> perm;
  std::vector<bool> used(n, false);
  for (std::size_t r = 0; r < n; ++r) {
    bool placed = false;
    for (std::size_t c = 0; c < n && !placed; ++c) {
      if (!support[r][c] || used[c]) continue;
      used[c] = true;
      if (completes(support, r + 1, used)) {
        perm.push_back(c);
        placed = true;
      } else {
        used[c] = false;
      }
    }
    if (!placed) return std::nullopt;
  }
  return perm;
}

}  // namespace detail

/// Writes a doubly stochastic matrix as a convex combination of
/// permutation matrices: repeatedly take the lexicographically smallest
/// permutation in the support and subtract its minimum entry.
inline std::vector<BirkhoffTerm> birkhoff_decompose(const Allocation& x) {
  if (!x.is_bipartite()) throw Error("birkhoff_decompose needs a bipartite allocation");
  const std::size_t n = x.size();
  std::vector<RatVec> rest = x.matrix();
  std::vector<BirkhoffTerm> terms;
  Rat remaining(1);
  while (remaining.sign() > 0) {
    std::vector<std::vector<bool>> support(n, std::vector<bool>(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) support[i][j] = rest[i][j].sign() > 0;
    }
    auto perm = detail::smallest_support_permutation(support);
    if (!perm) throw InternalError("birkhoff_decompose: support has no perfect matching");
    Rat coef = rest[0][(*perm)[0]];
    for (std::size_t i = 1; i < n; ++i) coef = std::min(coef, rest[i][(*perm)[i]]);
    for (std::size_t i = 0; i < n; ++i) rest[i][(*perm)[i]] -= coef;
    remaining -= coef;
    terms.push_back({std::move(coef), std::move(*perm)});
  }
  return terms;
}

// --- catalog ----------------------------------------------------------------

struct CatalogEntry {
  MarketInstance instance;
  /// The labeled allocation y (before completion).
  EdgeLabels y_labels;
};

/// Built-in instances: "thm1" (dichotomous asymmetric), "thm2" (symmetric,
/// weights in {0,1,2}) and "cor1" (thm2 as a non-bipartite market on the
/// nine cross edges). complete_graph adds the six within-side edges with
/// weight zero to cor1.
inline CatalogEntry catalog(const std::string& name, bool complete_graph = false) {
  const EdgeLabels labels{{{0, 0}, Rat(2, 3)}, {{1, 0}, Rat(1, 3)}, {{1, 1}, Rat(1, 3)}, {{1, 2}, Rat(1, 3)}};
  if (complete_graph && name != "cor1") throw Error("complete-graph variant exists only for cor1");
  if (name == "thm1") {
    std::vector<RatVec> agents{{1, 0, 0}, {0, 1, 1}, {0, 0, 0}};
    std::vector<RatVec> jobs{{0, 1, 0}, {0, 0, 0}, {0, 0, 0}};
    return {MarketInstance::two_sided_asymmetric(std::move(agents), std::move(jobs)), labels};
  }
  const std::vector<RatVec> weights{{1, 0, 0}, {2, 1, 1}, {0, 0, 0}};
  if (name == "thm2") return {MarketInstance::two_sided_symmetric(weights), labels};
  if (name == "cor1") {
    std::vector<Edge> edges;
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t j = 0; j < 3; ++j) edges.push_back({a, 3 + j, weights[a][j]});
    }
    if (complete_graph) {
      for (std::size_t side : {0U, 3U}) {
        for (std::size_t p = 0; p < 3; ++p) {
          for (std::size_t q = p + 1; q < 3; ++q) edges.push_back({side + p, side + q, Rat(0)});
        }
      }
    }
    EdgeLabels vertex_labels;
    for (const auto& [key, value] : labels) vertex_labels[{key.first, 3 + key.second}] = value;
    return {MarketInstance::non_bipartite(6, std::move(edges)), vertex_labels};
  }
  throw Error("unknown catalog instance \"" + name + "\" (expected thm1, thm2 or cor1)");
}

// --- random generation ------------------------------------------------------

/// SplitMix64 (Steele, Lea, Flood); the recorded generator for instances.
class SplitMix64 {
 public:
  static constexpr const char* kName = "splitmix64";

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  std::uint64_t state_;
};

/// Draws every utility uniformly from value_set. Tables are filled
/// row-major (agents, then jobs); non-bipartite markets are complete graphs
/// on n vertices with edges in canonical order.
inline MarketInstance gen_random(MarketMode mode, std::size_t n, const RatVec& value_set, std::uint64_t seed) {
  if (value_set.empty()) throw Error("gen_random: empty value set");
  for (const auto& v : value_set) {
    if (v.sign() < 0) throw Error("gen_random: negative value " + v.str());
  }
  if (n == 0) throw Error("gen_random: size must be positive");
  SplitMix64 rng(seed);
  auto draw = [&] { return value_set[rng.below(value_set.size())]; };
  auto table = [&] {
    std::vector<RatVec> t(n, RatVec(n));
    for (auto& row : t) {
      for (auto& v : row) v = draw();
    }
    return t;
  };
  MarketInstance inst;
  switch (mode) {
    case MarketMode::TwoSidedAsymmetric: {
      auto agents = table();
      auto jobs = table();
      inst = MarketInstance::two_sided_asymmetric(std::move(agents), std::move(jobs));
      break;
    }
    case MarketMode::TwoSidedSymmetric: inst = MarketInstance::two_sided_symmetric(table()); break;
    case MarketMode::NonBipartite: {
      if (n % 2 != 0) throw Error("gen_random: non-bipartite markets need an even vertex count");
      std::vector<Edge> edges;
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) edges.push_back({a, b, draw()});
      }
      inst = MarketInstance::non_bipartite(n, std::move(edges));
      break;
    }
  }
  inst.generator = GeneratorInfo{SplitMix64::kName, seed};
  return inst;
}

// --- JSON -------------------------------------------------------------------

inline Json table_to_json(const std::vector<RatVec>& t) {
  Json out = Json::array();
  for (const auto& row : t) out.push_back(vec_to_json(row));
  return out;
}

inline Json instance_to_json(const MarketInstance& inst) {
  Json j{{"mode", to_string(inst.mode())}};
  switch (inst.mode()) {
    case MarketMode::TwoSidedAsymmetric:
      j["n"] = inst.size();
      j["agent_utilities"] = table_to_json(inst.agent_utilities());
      j["job_utilities"] = table_to_json(inst.job_utilities());
      break;
    case MarketMode::TwoSidedSymmetric:
      j["n"] = inst.size();
      j["weights"] = table_to_json(inst.weights());
      break;
    case MarketMode::NonBipartite: {
      j["m"] = inst.size();
      Json edges = Json::array();
      for (const auto& e : inst.edges()) edges.push_back({{"a", e.a + 1}, {"b", e.b + 1}, {"w", e.w.str()}});
      j["edges"] = std::move(edges);
      break;
    }
  }
  if (inst.generator) j["generator"] = {{"algorithm", inst.generator->algorithm}, {"seed", inst.generator->seed}};
  return j;
}

namespace detail {

inline std::size_t positive_int(const Json& j, const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_number_integer() || j.at(key).get<long long>() <= 0) {
    throw ParseError("\"" + key + "\" must be a positive integer");
  }
  return j.at(key).get<std::size_t>();
}

inline std::vector<RatVec> table_from_json(const Json& j, const std::string& key, std::size_t n,
                                           bool nonnegative) {
  if (!j.contains(key) || !j.at(key).is_array()) throw ParseError("missing array \"" + key + "\"");
  const Json& t = j.at(key);
  if (t.size() != n) throw ParseError("\"" + key + "\" must have " + std::to_string(n) + " rows");
  std::vector<RatVec> out;
  for (std::size_t r = 0; r < n; ++r) {
    const std::string where = key + "[" + std::to_string(r) + "]";
    RatVec row = vec_from_json(t[r], where);
    if (row.size() != n) throw ParseError(where + " must have " + std::to_string(n) + " entries");
    for (std::size_t c = 0; c < n; ++c) {
      if (nonnegative && row[c].sign() < 0) {
        throw ParseError(where + "[" + std::to_string(c) + "]: negative utility " + row[c].str());
      }
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace detail

inline MarketInstance instance_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("instance must be a JSON object");
  if (!j.contains("mode") || !j.at("mode").is_string()) throw ParseError("missing \"mode\"");
  const MarketMode mode = market_mode_from_string(j.at("mode").get<std::string>());
  MarketInstance inst;
  try {
    switch (mode) {
      case MarketMode::TwoSidedAsymmetric: {
        const auto n = detail::positive_int(j, "n");
        inst = MarketInstance::two_sided_asymmetric(detail::table_from_json(j, "agent_utilities", n, true),
                                                    detail::table_from_json(j, "job_utilities", n, true));
        break;
      }
      case MarketMode::TwoSidedSymmetric: {
        const auto n = detail::positive_int(j, "n");
        inst = MarketInstance::two_sided_symmetric(detail::table_from_json(j, "weights", n, true));
        break;
      }
      case MarketMode::NonBipartite: {
        const auto m = detail::positive_int(j, "m");
        if (!j.contains("edges") || !j.at("edges").is_array()) throw ParseError("missing array \"edges\"");
        std::vector<Edge> edges;
        for (std::size_t k = 0; k < j.at("edges").size(); ++k) {
          const Json& e = j.at("edges")[k];
          const std::string where = "edges[" + std::to_string(k) + "]";
          if (!e.is_object() || !e.contains("a") || !e.contains("b") || !e.contains("w") ||
              !e.at("a").is_number_integer() || !e.at("b").is_number_integer()) {
            throw ParseError(where + ": expected {\"a\": int, \"b\": int, \"w\": rational}");
          }
          const auto a = e.at("a").get<long long>();
          const auto b = e.at("b").get<long long>();
          if (a < 1 || b < 1 || a > static_cast<long long>(m) || b > static_cast<long long>(m)) {
            throw ParseError(where + ": vertex outside 1.." + std::to_string(m));
          }
          Rat w = rat_from_json(e.at("w"), where + ".w");
          if (w.sign() < 0) throw ParseError(where + ".w: negative utility " + w.str());
          edges.push_back({static_cast<std::size_t>(a - 1), static_cast<std::size_t>(b - 1), std::move(w)});
        }
        inst = MarketInstance::non_bipartite(m, std::move(edges));
        break;
      }
    }
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(e.what());
  }
  if (j.contains("generator")) {
    const Json& g = j.at("generator");
    if (!g.is_object() || !g.contains("algorithm") || !g.contains("seed") || !g.at("algorithm").is_string() ||
        !g.at("seed").is_number_unsigned()) {
      throw ParseError("\"generator\" must be {\"algorithm\": string, \"seed\": unsigned}");
    }
    inst.generator = GeneratorInfo{g.at("algorithm").get<std::string>(), g.at("seed").get<std::uint64_t>()};
  }
  return inst;
}

inline Json allocation_to_json(const Allocation& x) {
  if (x.is_bipartite()) return Json{{"n", x.size()}, {"x", table_to_json(x.matrix())}};
  Json edges = Json::array();
  for (const auto& s : x.shares()) edges.push_back({{"a", s.a + 1}, {"b", s.b + 1}, {"x", s.x.str()}});
  return Json{{"m", x.size()}, {"edges", std::move(edges)}};
}

inline Allocation allocation_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("allocation must be a JSON object");
  try {
    if (j.contains("x")) {
      const auto n = detail::positive_int(j, "n");
      return Allocation::bipartite(detail::table_from_json(j, "x", n, false));
    }
    const auto m = detail::positive_int(j, "m");
    if (!j.contains("edges") || !j.at("edges").is_array()) throw ParseError("allocation needs \"x\" or \"edges\"");
    std::vector<Allocation::Share> shares;
    for (std::size_t k = 0; k < j.at("edges").size(); ++k) {
      const Json& e = j.at("edges")[k];
      const std::string where = "edges[" + std::to_string(k) + "]";
      if (!e.is_object() || !e.contains("a") || !e.contains("b") || !e.contains("x") ||
          !e.at("a").is_number_integer() || !e.at("b").is_number_integer()) {
        throw ParseError(where + ": expected {\"a\": int, \"b\": int, \"x\": rational}");
      }
      const auto a = e.at("a").get<long long>();
      const auto b = e.at("b").get<long long>();
      if (a < 1 || b < 1 || a > static_cast<long long>(m) || b > static_cast<long long>(m)) {
        throw ParseError(where + ": vertex outside 1.." + std::to_string(m));
      }
      shares.push_back({static_cast<std::size_t>(a - 1), static_cast<std::size_t>(b - 1),
                        rat_from_json(e.at("x"), where + ".x")});
    }
    return Allocation::on_edges(m, std::move(shares));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(e.what());
  }
}

}  // namespace matchfair
