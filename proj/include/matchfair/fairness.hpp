#pragma once

// Envy-freeness, Pareto dominance and Pareto-optimality certification.
//
// Envy is strict: i envies k when u_i(bundle of k) > u_i(bundle of i). In
// two-sided markets only same-side pairs are compared. In non-bipartite
// markets every ordered vertex pair is compared, with w(i,i) = 0, so the
// observer's own share of k's bundle is worth nothing to the observer.

#include <string>
#include <vector>

#include "matchfair/market.hpp"

namespace matchfair {

/// Which observers' envy constraints apply (two-sided markets only).
enum class EnvyScope { BothSides, AgentsOnly, JobsOnly };

struct EnvyWitness {
  std::size_t observer = 0;
  std::size_t envied = 0;
  Rat own_value;
  Rat envied_value;
};

namespace detail {

inline bool observes(const MarketInstance& inst, std::size_t entity, EnvyScope scope) {
  if (!inst.two_sided() || scope == EnvyScope::BothSides) return true;
  const bool agent = entity < inst.size();
  return scope == EnvyScope::AgentsOnly ? agent : !agent;
}

inline std::string label_pair(const MarketInstance& inst, std::size_t a, std::size_t b) {
  return "(" + std::to_string(inst.label(a)) + "," + std::to_string(inst.label(b)) + ")";
}

}  // namespace detail

inline std::vector<EnvyWitness> envy_pairs_of(const MarketInstance& inst, std::span<const Rat> v,
                                              EnvyScope scope = EnvyScope::BothSides) {
  std::vector<EnvyWitness> out;
  const std::size_t count = inst.entity_count();
  for (std::size_t i = 0; i < count; ++i) {
    if (!detail::observes(inst, i, scope)) continue;
    const Rat own = dot(inst.utility_row(i), v);
    for (std::size_t k = 0; k < count; ++k) {
      if (k == i || !inst.same_side(i, k)) continue;
      Rat other = dot(inst.view_row(i, k), v);
      if (other > own) out.push_back({i, k, own, std::move(other)});
    }
  }
  return out;
}

/// Every envious ordered pair; empty iff x is envy-free.
inline std::vector<EnvyWitness> envy_pairs(const MarketInstance& inst, const Allocation& x,
                                           EnvyScope scope = EnvyScope::BothSides) {
  return envy_pairs_of(inst, allocation_variables(inst, x), scope);
}

/// The allocation polytope plus one row EF(i,k): u_i(x_k) - u_i(x_i) <= 0
/// per ordered comparable pair.
inline ConstraintSystem ef_constraints(const MarketInstance& inst, EnvyScope scope = EnvyScope::BothSides) {
  ConstraintSystem cs = allocation_polytope(inst);
  const std::size_t count = inst.entity_count();
  for (std::size_t i = 0; i < count; ++i) {
    if (!detail::observes(inst, i, scope)) continue;
    const RatVec own = inst.utility_row(i);
    for (std::size_t k = 0; k < count; ++k) {
      if (k == i || !inst.same_side(i, k)) continue;
      RatVec row = inst.view_row(i, k);
      for (std::size_t c = 0; c < row.size(); ++c) row[c] -= own[c];
      cs.add_inequality(std::move(row), 0, "EF" + detail::label_pair(inst, i, k));
    }
  }
  return cs;
}

struct Dominance {
  bool dominates = false;
  /// Entities strictly better off under y.
  std::vector<std::size_t> strict;
};

inline Dominance pareto_dominates_profiles(const UtilityProfile& uy, const UtilityProfile& ux) {
  Dominance d;
  for (std::size_t e = 0; e < uy.size(); ++e) {
    if (uy[e] < ux[e]) return {};
    if (uy[e] > ux[e]) d.strict.push_back(e);
  }
  d.dominates = !d.strict.empty();
  return d;
}

/// Weak Pareto dominance of y over x: nobody worse off, somebody better.
inline Dominance pareto_dominates(const MarketInstance& inst, const Allocation& y, const Allocation& x) {
  return pareto_dominates_profiles(utility_profile(inst, y), utility_profile(inst, x));
}

struct ImprovementResult {
  /// Optimal total gain; zero iff x is Pareto optimal.
  Rat value;
  /// Optimal y over the instance's variables.
  RatVec witness;
  /// Per-entity gains t_e with u_e(y) - u_e(x) >= t_e >= 0.
  RatVec gains;
};

/// max sum t  s.t.  y in the allocation polytope, u_e(y) - t_e >= u_e(x), t >= 0.
inline ConstraintSystem improvement_system(const MarketInstance& inst, std::span<const Rat> x) {
  const ConstraintSystem base = allocation_polytope(inst);
  const std::size_t nv = inst.num_vars();
  const std::size_t ne = inst.entity_count();
  auto names = base.variables();
  for (std::size_t e = 0; e < ne; ++e) names.push_back("t_" + std::to_string(inst.label(e)));
  ConstraintSystem cs(names);
  auto widen = [&](const RatVec& c) {
    RatVec out = c;
    out.resize(nv + ne);
    return out;
  };
  for (const auto& r : base.equalities()) cs.add_equality(widen(r.coefficients), r.rhs, r.name);
  for (const auto& r : base.inequalities()) cs.add_inequality(widen(r.coefficients), r.rhs, r.name);
  for (std::size_t e = 0; e < ne; ++e) {
    const RatVec u = inst.utility_row(e);
    RatVec row(nv + ne);
    for (std::size_t c = 0; c < nv; ++c) row[c] = -u[c];
    row[nv + e] = 1;
    cs.add_inequality(std::move(row), -dot(u, x), "improve_" + std::to_string(inst.label(e)));
  }
  for (std::size_t e = 0; e < ne; ++e) {
    RatVec row(nv + ne);
    row[nv + e] = -1;
    cs.add_inequality(std::move(row), 0, "t_" + std::to_string(inst.label(e)) + ">=0");
  }
  return cs;
}

inline ImprovementResult improvement_value_of(const MarketInstance& inst, std::span<const Rat> x,
                                              const RunLimits& limits = {}) {
  const ConstraintSystem cs = improvement_system(inst, x);
  const std::size_t nv = inst.num_vars();
  RatVec objective(cs.num_vars());
  std::fill(objective.begin() + static_cast<std::ptrdiff_t>(nv), objective.end(), Rat(1));
  const LpOutcome lp = lp_optimize(cs, objective, Sense::Maximize, limits);
  if (lp.status != LpStatus::Optimal) {
    throw InternalError(std::string("improvement LP is ") + to_string(lp.status) + "; x is not a valid allocation");
  }
  ImprovementResult out;
  out.value = lp.value;
  out.witness.assign(lp.point.begin(), lp.point.begin() + static_cast<std::ptrdiff_t>(nv));
  out.gains.assign(lp.point.begin() + static_cast<std::ptrdiff_t>(nv), lp.point.end());
  return out;
}

inline ImprovementResult improvement_value(const MarketInstance& inst, const Allocation& x,
                                           const RunLimits& limits = {}) {
  return improvement_value_of(inst, allocation_variables(inst, x), limits);
}

struct ParetoCertificate {
  bool optimal = false;
  ImprovementResult improvement;
};

inline ParetoCertificate is_pareto_optimal(const MarketInstance& inst, const Allocation& x,
                                           const RunLimits& limits = {}) {
  auto r = improvement_value(inst, x, limits);
  const bool optimal = r.value.is_zero();
  return {optimal, std::move(r)};
}

/// A linear functional over allocation variables.
struct Functional {
  std::string name;
  RatVec coefficients;
};

/// "x_i_j" (external labels, either endpoint order for non-bipartite
/// markets; agent first for two-sided ones) or "u_i".
inline Functional parse_functional(const MarketInstance& inst, const std::string& spec) {
  auto number = [&](const std::string& s) -> std::size_t {
    if (s.empty() || s.size() > 6 || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      throw ParseError("functional \"" + spec + "\": bad index \"" + s + "\"");
    }
    return static_cast<std::size_t>(std::stoul(s));
  };
  if (spec.rfind("u_", 0) == 0) {
    const std::size_t label = number(spec.substr(2));
    if (label < 1 || label > inst.entity_count()) throw ParseError("functional \"" + spec + "\": no such entity");
    return {spec, inst.utility_row(label - 1)};
  }
  if (spec.rfind("x_", 0) == 0) {
    const auto sep = spec.find('_', 2);
    if (sep == std::string::npos) throw ParseError("functional \"" + spec + "\": expected x_i_j");
    const std::size_t a = number(spec.substr(2, sep - 2));
    const std::size_t b = number(spec.substr(sep + 1));
    RatVec c(inst.num_vars());
    if (inst.two_sided()) {
      const std::size_t n = inst.size();
      if (a < 1 || a > n || b < n + 1 || b > 2 * n) {
        throw ParseError("functional \"" + spec + "\": expected agent 1.." + std::to_string(n) + " and job " +
                         std::to_string(n + 1) + ".." + std::to_string(2 * n));
      }
      c[inst.var(a - 1, b - n - 1)] = 1;
    } else {
      if (a < 1 || b < 1) throw ParseError("functional \"" + spec + "\": labels start at 1");
      const auto k = inst.edge_index(a - 1, b - 1);
      if (!k) throw ParseError("functional \"" + spec + "\": no such edge");
      c[*k] = 1;
    }
    return {spec, std::move(c)};
  }
  throw ParseError("functional \"" + spec + "\": expected x_i_j or u_i");
}

struct ForcedValue {
  Rat min;
  Rat max;
  bool forced = false;
};

/// Range of a functional over the envy-free polytope.
inline ForcedValue forced_value(const MarketInstance& inst, std::span<const Rat> functional,
                                EnvyScope scope = EnvyScope::BothSides, const RunLimits& limits = {}) {
  const ConstraintSystem cs = ef_constraints(inst, scope);
  const LpOutcome lo = lp_optimize(cs, functional, Sense::Minimize, limits);
  const LpOutcome hi = lp_optimize(cs, functional, Sense::Maximize, limits);
  if (lo.status != LpStatus::Optimal || hi.status != LpStatus::Optimal) {
    throw InternalError("envy-free system is not a nonempty polytope");
  }
  return {lo.value, hi.value, lo.value == hi.value};
}

}  // namespace matchfair
