#pragma once

// Deciding whether an instance admits a Pareto-optimal, envy-free
// allocation, with certificates that can be re-checked from scratch.
//
// The decision scans the vertices of the envy-free polytope. The
// improvement value v(x) is the optimum of an LP whose right-hand side is
// linear in x, so v is concave on the polytope and attains its minimum at a
// vertex. Hence some envy-free allocation is Pareto optimal iff some vertex
// has v = 0.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "matchfair/fairness.hpp"

namespace matchfair {

inline constexpr std::size_t kMaxDecideSide = 4;
inline constexpr std::size_t kMaxDecideVertices = 6;
inline constexpr long kMaxGridDenominator = 6;
inline constexpr std::size_t kMaxGridSide = 3;

inline constexpr const char* kVertexScanSoundness =
    "v(x) is the optimal value of an LP whose right-hand side is linear in x, hence concave on the "
    "envy-free polytope; its minimum is attained at a vertex, and every vertex has v > 0, so no "
    "envy-free allocation is Pareto optimal";

enum class VerdictKind { Exists, NotExists, NotExistsDominated };

inline const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::Exists: return "exists";
    case VerdictKind::NotExists: return "not_exists";
    case VerdictKind::NotExistsDominated: return "not_exists_dominated";
  }
  return "?";
}

inline std::string to_string(EnvyScope s) {
  switch (s) {
    case EnvyScope::BothSides: return "both_sides";
    case EnvyScope::AgentsOnly: return "agents_only";
    case EnvyScope::JobsOnly: return "jobs_only";
  }
  return "?";
}

inline EnvyScope envy_scope_from_string(const std::string& s) {
  if (s == "both_sides") return EnvyScope::BothSides;
  if (s == "agents_only") return EnvyScope::AgentsOnly;
  if (s == "jobs_only") return EnvyScope::JobsOnly;
  throw ParseError("unknown envy scope \"" + s + "\"");
}

struct VertexRecord {
  RatVec point;
  Rat v;
  /// Dominating allocation and per-entity gains from the improvement LP.
  RatVec witness;
  RatVec gains;
};

struct DominationCertificate {
  RatVec y;
  /// Per entity: min over the EF polytope of u_e(y) - u_e(x).
  RatVec minima;
  std::size_t strict_entity = 0;
};

struct Verdict {
  VerdictKind kind = VerdictKind::NotExists;
  std::string method;
  EnvyScope scope = EnvyScope::BothSides;
  /// The envy-free system the claims refer to.
  ConstraintSystem ef_system;

  // Exists
  RatVec allocation;
  ImprovementResult improvement;

  // NotExists
  std::vector<VertexRecord> vertices;

  // NotExistsDominated
  std::optional<DominationCertificate> domination;
};

struct DecideOptions {
  EnvyScope scope = EnvyScope::BothSides;
  RunLimits limits;
};

inline void check_decide_caps(const MarketInstance& inst) {
  if (inst.two_sided() && inst.size() > kMaxDecideSide) {
    throw CapExceeded("decide is capped at n = " + std::to_string(kMaxDecideSide) + " per side (got " +
                      std::to_string(inst.size()) + ")");
  }
  if (!inst.two_sided() && inst.size() > kMaxDecideVertices) {
    throw CapExceeded("decide is capped at m = " + std::to_string(kMaxDecideVertices) + " vertices (got " +
                      std::to_string(inst.size()) + ")");
  }
}

/// Vertex scan of the envy-free polytope. Exists at the first vertex (in
/// lexicographic order) with v = 0, NotExists with every vertex annotated
/// otherwise.
inline Verdict decide_poef(const MarketInstance& inst, const DecideOptions& options = {}) {
  check_decide_caps(inst);
  RunLimits limits = options.limits;
  limits.override_caps = true;  // the instance caps above bound the system size
  Verdict verdict;
  verdict.method = "vertex-scan";
  verdict.scope = options.scope;
  verdict.ef_system = ef_constraints(inst, options.scope);
  const auto points = vertex_enumerate(verdict.ef_system, limits);
  if (points.empty()) throw InternalError("envy-free polytope has no vertices");

  std::vector<VertexRecord> records(points.size());
  parallel_for(points.size(), limits.threads, [&](std::size_t k) {
    auto r = improvement_value_of(inst, points[k], limits);
    records[k] = {points[k], std::move(r.value), std::move(r.witness), std::move(r.gains)};
  });
  for (auto& rec : records) {
    if (rec.v.is_zero()) {
      verdict.kind = VerdictKind::Exists;
      verdict.allocation = rec.point;
      verdict.improvement = {rec.v, rec.witness, rec.gains};
      return verdict;
    }
  }
  verdict.kind = VerdictKind::NotExists;
  verdict.vertices = std::move(records);
  return verdict;
}

/// Per-entity minima of u_e(y) - u_e(x) over envy-free x.
inline RatVec domination_minima(const MarketInstance& inst, std::span<const Rat> y, const ConstraintSystem& ef,
                                const RunLimits& limits) {
  RatVec minima(inst.entity_count());
  for (std::size_t e = 0; e < minima.size(); ++e) {
    const RatVec u = inst.utility_row(e);
    const auto lp = lp_optimize(ef, u, Sense::Maximize, limits);
    if (lp.status != LpStatus::Optimal) throw InternalError("envy-free system is not a nonempty polytope");
    minima[e] = dot(u, y) - lp.value;
  }
  return minima;
}

/// A single y that weakly dominates every envy-free allocation with one
/// entity strictly better off throughout, if y is such an allocation.
inline std::optional<Verdict> find_domination_certificate(const MarketInstance& inst, const Allocation& y,
                                                          const DecideOptions& options = {}) {
  const RatVec yv = allocation_variables(inst, y);
  Verdict verdict;
  verdict.kind = VerdictKind::NotExistsDominated;
  verdict.method = "uniform-domination";
  verdict.scope = options.scope;
  verdict.ef_system = ef_constraints(inst, options.scope);
  const RatVec minima = domination_minima(inst, yv, verdict.ef_system, options.limits);
  std::optional<std::size_t> strict;
  for (std::size_t e = 0; e < minima.size(); ++e) {
    if (minima[e].sign() < 0) return std::nullopt;
    if (!strict && minima[e].sign() > 0) strict = e;
  }
  if (!strict) return std::nullopt;
  verdict.domination = DominationCertificate{yv, minima, *strict};
  return verdict;
}

// --- grid oracle ------------------------------------------------------------

struct GridReport {
  long denominator = 0;
  std::size_t allocations = 0;
  std::size_t envy_free = 0;
  std::size_t pareto_optimal = 0;
  std::size_t both = 0;
  std::vector<RatVec> envy_free_points;
  std::vector<RatVec> both_points;
};

/// Classifies every allocation whose entries are multiples of 1/D.
inline GridReport grid_oracle(const MarketInstance& inst, long denominator, const RunLimits& limits = {}) {
  if (!inst.two_sided()) throw Error("grid oracle needs a two-sided market");
  if (inst.size() > kMaxGridSide) {
    throw CapExceeded("grid oracle is capped at n = " + std::to_string(kMaxGridSide) + " (got " +
                      std::to_string(inst.size()) + ")");
  }
  if (denominator < 1 || denominator > kMaxGridDenominator) {
    throw CapExceeded("grid denominator must lie in 1.." + std::to_string(kMaxGridDenominator) + " (got " +
                      std::to_string(denominator) + ")");
  }
  const std::size_t n = inst.size();
  std::vector<std::vector<long>> rows;
  {
    std::vector<long> part(n, 0);
    auto compose = [&](auto&& self, std::size_t k, long left) -> void {
      if (k + 1 == n) {
        part[k] = left;
        rows.push_back(part);
        return;
      }
      for (long v = 0; v <= left; ++v) {
        part[k] = v;
        self(self, k + 1, left - v);
      }
    };
    compose(compose, 0, denominator);
  }

  struct Classified {
    RatVec point;
    bool ef = false;
    bool po = false;
  };
  std::vector<std::vector<Classified>> per_first_row(rows.size());
  parallel_for(rows.size(), limits.threads, [&](std::size_t first) {
    std::vector<std::size_t> chosen{first};
    auto extend = [&](auto&& self) -> void {
      if (chosen.size() == n) {
        std::vector<long> col(n, 0);
        for (auto c : chosen) {
          for (std::size_t j = 0; j < n; ++j) col[j] += rows[c][j];
        }
        for (std::size_t j = 0; j < n; ++j) {
          if (col[j] != denominator) return;
        }
        limits.check();
        Classified item;
        item.point.resize(n * n);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) item.point[inst.var(i, j)] = Rat(rows[chosen[i]][j], denominator);
        }
        item.ef = envy_pairs_of(inst, item.point).empty();
        item.po = improvement_value_of(inst, item.point, limits).value.is_zero();
        per_first_row[first].push_back(std::move(item));
        return;
      }
      for (std::size_t c = 0; c < rows.size(); ++c) {
        chosen.push_back(c);
        self(self);
        chosen.pop_back();
      }
    };
    extend(extend);
  });

  GridReport report;
  report.denominator = denominator;
  for (auto& bucket : per_first_row) {
    for (auto& item : bucket) {
      ++report.allocations;
      if (item.ef) {
        ++report.envy_free;
        report.envy_free_points.push_back(item.point);
      }
      if (item.po) ++report.pareto_optimal;
      if (item.ef && item.po) {
        ++report.both;
        report.both_points.push_back(item.point);
      }
    }
  }
  return report;
}

// --- heuristic search -------------------------------------------------------

struct HeuristicReport {
  std::size_t samples = 0;
  /// An envy-free allocation with v = 0, if one was hit.
  std::optional<RatVec> found;
};

/// Non-certifying search past the decision caps: optimises random
/// objectives over the envy-free system and tests each optimum. A hit is a
/// genuine PO+EF allocation; a miss proves nothing.
inline HeuristicReport heuristic_search(const MarketInstance& inst, std::size_t samples, std::uint64_t seed,
                                        EnvyScope scope = EnvyScope::BothSides, const RunLimits& limits = {}) {
  const ConstraintSystem ef = ef_constraints(inst, scope);
  SplitMix64 rng(seed);
  HeuristicReport report;
  for (std::size_t s = 0; s < samples; ++s) {
    RatVec objective(ef.num_vars());
    for (auto& c : objective) c = Rat(static_cast<long>(rng.below(21)) - 10);
    const auto lp = lp_optimize(ef, objective, Sense::Maximize, limits);
    ++report.samples;
    if (lp.status != LpStatus::Optimal) continue;
    if (improvement_value_of(inst, lp.point, limits).value.is_zero()) {
      report.found = lp.point;
      break;
    }
  }
  return report;
}

// --- verification -----------------------------------------------------------

struct VerificationResult {
  bool ok = false;
  std::string reason;
};

/// Re-derives every claim of a verdict; only the stored points are trusted.
inline VerificationResult verify_certificate(const MarketInstance& inst, const Verdict& verdict,
                                             const RunLimits& limits = {}) {
  auto fail = [](std::string why) { return VerificationResult{false, std::move(why)}; };
  try {
    const ConstraintSystem fresh = ef_constraints(inst, verdict.scope);
    if (!(fresh == verdict.ef_system)) return fail("constraint system mismatch");
    switch (verdict.kind) {
      case VerdictKind::Exists: {
        if (verdict.allocation.size() != inst.num_vars()) return fail("allocation has the wrong length");
        if (!contains(allocation_polytope(inst), verdict.allocation).satisfied) {
          return fail("allocation is not a fractional perfect matching");
        }
        if (!envy_pairs_of(inst, verdict.allocation, verdict.scope).empty()) return fail("allocation has an envy pair");
        if (!verdict.improvement.value.is_zero()) return fail("improvement value mismatch");
        if (!improvement_value_of(inst, verdict.allocation, limits).value.is_zero()) {
          return fail("improvement value mismatch");
        }
        return {true, "ok"};
      }
      case VerdictKind::NotExists: {
        RunLimits lifted = limits;
        lifted.override_caps = true;
        const auto points = vertex_enumerate(fresh, lifted);
        if (points.size() != verdict.vertices.size()) return fail("vertex list mismatch");
        const ConstraintSystem polytope = allocation_polytope(inst);
        for (std::size_t k = 0; k < points.size(); ++k) {
          const VertexRecord& rec = verdict.vertices[k];
          if (rec.point != points[k]) return fail("vertex list mismatch");
          const Rat v = improvement_value_of(inst, rec.point, limits).value;
          if (v != rec.v) return fail("improvement value mismatch");
          if (v.sign() <= 0) return fail("vertex with zero improvement value");
          if (rec.witness.size() != inst.num_vars() || !contains(polytope, rec.witness).satisfied) {
            return fail("dominating witness is not an allocation");
          }
          if (!pareto_dominates_profiles(utility_profile_of(inst, rec.witness), utility_profile_of(inst, rec.point))
                   .dominates) {
            return fail("witness does not dominate its vertex");
          }
        }
        return {true, "ok"};
      }
      case VerdictKind::NotExistsDominated: {
        if (!verdict.domination) return fail("missing domination payload");
        const auto& d = *verdict.domination;
        if (d.y.size() != inst.num_vars() || !contains(allocation_polytope(inst), d.y).satisfied) {
          return fail("y is not a fractional perfect matching");
        }
        const RatVec minima = domination_minima(inst, d.y, fresh, limits);
        if (minima != d.minima) return fail("domination minima mismatch");
        for (const auto& m : minima) {
          if (m.sign() < 0) return fail("negative domination minimum");
        }
        if (d.strict_entity >= minima.size() || minima[d.strict_entity].sign() <= 0) {
          return fail("strict entity has no positive gap");
        }
        return {true, "ok"};
      }
    }
  } catch (const TimeLimitExceeded&) {
    throw;
  } catch (const Error& e) {
    return fail(e.what());
  }
  return fail("unknown verdict kind");
}

// --- certificates -----------------------------------------------------------

/// FNV-1a 64 over the compact instance JSON, as 16 hex digits.
inline std::string instance_hash(const MarketInstance& inst) {
  const std::string text = instance_to_json(inst).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline Json verdict_to_json(const MarketInstance& inst, const Verdict& verdict) {
  Json j{{"verdict", to_string(verdict.kind)},
         {"method", verdict.method},
         {"instance_hash", instance_hash(inst)},
         {"envy_scope", to_string(verdict.scope)},
         {"instance", instance_to_json(inst)},
         {"constraint_system", to_json(verdict.ef_system)}};
  switch (verdict.kind) {
    case VerdictKind::Exists:
      j["allocation"] = vec_to_json(verdict.allocation);
      j["improvement"] = {{"v", verdict.improvement.value.str()},
                          {"witness", vec_to_json(verdict.improvement.witness)},
                          {"gains", vec_to_json(verdict.improvement.gains)}};
      j["envy_pairs"] = Json::array();
      break;
    case VerdictKind::NotExists: {
      Json vs = Json::array();
      for (const auto& rec : verdict.vertices) {
        vs.push_back({{"point", vec_to_json(rec.point)},
                      {"v", rec.v.str()},
                      {"witness", vec_to_json(rec.witness)},
                      {"gains", vec_to_json(rec.gains)}});
      }
      j["vertices"] = std::move(vs);
      j["soundness"] = kVertexScanSoundness;
      break;
    }
    case VerdictKind::NotExistsDominated: {
      const auto& d = *verdict.domination;
      j["y"] = vec_to_json(d.y);
      Json minima = Json::array();
      for (std::size_t e = 0; e < d.minima.size(); ++e) {
        minima.push_back({{"entity", inst.label(e)}, {"min_gain", d.minima[e].str()}});
      }
      j["minima"] = std::move(minima);
      j["strict_entity"] = inst.label(d.strict_entity);
      j["gap"] = d.minima[d.strict_entity].str();
      break;
    }
  }
  return j;
}

inline Verdict verdict_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("verdict")) throw ParseError("certificate: missing \"verdict\"");
  Verdict v;
  const auto kind = j.at("verdict").get<std::string>();
  if (kind == "exists") {
    v.kind = VerdictKind::Exists;
  } else if (kind == "not_exists") {
    v.kind = VerdictKind::NotExists;
  } else if (kind == "not_exists_dominated") {
    v.kind = VerdictKind::NotExistsDominated;
  } else {
    throw ParseError("certificate: unknown verdict \"" + kind + "\"");
  }
  v.method = j.value("method", "");
  v.scope = envy_scope_from_string(j.value("envy_scope", "both_sides"));
  v.ef_system = constraint_system_from_json(j.at("constraint_system"));
  switch (v.kind) {
    case VerdictKind::Exists: {
      v.allocation = vec_from_json(j.at("allocation"), "allocation");
      const Json& imp = j.at("improvement");
      v.improvement = {rat_from_json(imp.at("v"), "improvement.v"), vec_from_json(imp.at("witness"), "witness"),
                       vec_from_json(imp.at("gains"), "gains")};
      break;
    }
    case VerdictKind::NotExists:
      for (const auto& rec : j.at("vertices")) {
        v.vertices.push_back({vec_from_json(rec.at("point"), "point"), rat_from_json(rec.at("v"), "v"),
                              vec_from_json(rec.at("witness"), "witness"), vec_from_json(rec.at("gains"), "gains")});
      }
      break;
    case VerdictKind::NotExistsDominated: {
      DominationCertificate d;
      d.y = vec_from_json(j.at("y"), "y");
      for (const auto& m : j.at("minima")) d.minima.push_back(rat_from_json(m.at("min_gain"), "min_gain"));
      const auto strict = j.at("strict_entity").get<std::size_t>();
      if (strict < 1) throw ParseError("certificate: strict_entity starts at 1");
      d.strict_entity = strict - 1;
      v.domination = std::move(d);
      break;
    }
  }
  return v;
}

}  // namespace matchfair
