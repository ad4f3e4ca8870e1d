#include <gtest/gtest.h>

#include <numeric>

#include "matchfair/existence.hpp"
#include "test_support.hpp"

using namespace matchfair;

namespace {

MarketInstance catalog_instance(const std::string& name) { return catalog(name).instance; }

Allocation catalog_y(const std::string& name) {
  const auto entry = catalog(name);
  return complete_allocation(entry.instance, entry.y_labels);
}

/// Relabels agents by sigma and jobs by tau.
MarketInstance relabel(const MarketInstance& inst, const std::vector<std::size_t>& sigma,
                       const std::vector<std::size_t>& tau) {
  const std::size_t n = inst.size();
  std::vector<RatVec> agents(n, RatVec(n)), jobs(n, RatVec(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      agents[sigma[i]][tau[j]] = inst.agent_utility(i, j);
      jobs[tau[j]][sigma[i]] = inst.job_utility(j, i);
    }
  }
  return MarketInstance::two_sided_asymmetric(std::move(agents), std::move(jobs));
}

MarketInstance one_sided(std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<RatVec> agents(3, RatVec(3)), jobs(3, RatVec(3));
  for (auto& row : agents) {
    for (auto& v : row) v = Rat(static_cast<long>(rng.below(2)));
  }
  return MarketInstance::two_sided_asymmetric(std::move(agents), std::move(jobs));
}

}  // namespace

TEST(Decide, CatalogInstancesHaveNoFairEfficientAllocation) {
  for (const char* name : {"thm1", "thm2", "cor1"}) {
    const auto inst = catalog_instance(name);
    const Verdict v = decide_poef(inst);
    EXPECT_EQ(v.kind, VerdictKind::NotExists) << name;
    EXPECT_EQ(v.method, "vertex-scan");
    ASSERT_FALSE(v.vertices.empty());
    for (const auto& rec : v.vertices) EXPECT_GT(rec.v, 0) << name;
    const auto check = verify_certificate(inst, v);
    EXPECT_TRUE(check.ok) << name << ": " << check.reason;
  }
}

TEST(Decide, CatalogVertexValues) {
  // thm1: two EF vertices with v = 1/3 each; thm2 and cor1: the uniform
  // allocation alone, with v = 2/3.
  const Verdict a = decide_poef(catalog_instance("thm1"));
  ASSERT_EQ(a.vertices.size(), 2U);
  for (const auto& rec : a.vertices) EXPECT_EQ(rec.v, Rat(1, 3));
  for (const char* name : {"thm2", "cor1"}) {
    const auto inst = catalog_instance(name);
    const Verdict b = decide_poef(inst);
    ASSERT_EQ(b.vertices.size(), 1U) << name;
    EXPECT_EQ(b.vertices[0].v, Rat(2, 3));
    EXPECT_EQ(b.vertices[0].point, RatVec(9, Rat(1, 3)));
  }
}

TEST(Decide, OneSidedControlExistsWithUniform) {
  // Every agent likes job 4 only; jobs are indifferent.
  const MarketInstance inst = MarketInstance::two_sided_asymmetric(
      {{1, 0, 0}, {1, 0, 0}, {1, 0, 0}}, {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}});
  const Verdict v = decide_poef(inst);
  ASSERT_EQ(v.kind, VerdictKind::Exists);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(v.allocation[inst.var(i, 0)], Rat(1, 3));
  EXPECT_TRUE(v.improvement.value.is_zero());
  EXPECT_TRUE(verify_certificate(inst, v).ok);
  const auto uniform = Allocation::uniform(3);
  EXPECT_TRUE(envy_pairs(inst, uniform).empty());
  EXPECT_TRUE(is_pareto_optimal(inst, uniform).optimal);
}

TEST(Decide, CapsAreEnforced) {
  const auto big = gen_random(MarketMode::TwoSidedSymmetric, 5, {0, 1}, 1);
  EXPECT_THROW(decide_poef(big), CapExceeded);
  const auto wide = gen_random(MarketMode::NonBipartite, 8, {0, 1}, 1);
  EXPECT_THROW(decide_poef(wide), CapExceeded);
}

TEST(Decide, DeadlineAborts) {
  RunLimits limits = RunLimits::with_seconds(0);
  EXPECT_THROW(decide_poef(catalog_instance("cor1"), {EnvyScope::BothSides, limits}), TimeLimitExceeded);
}

TEST(Decide, SmallRandomInstancesAreCertified) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const MarketMode mode = seed % 3 == 0   ? MarketMode::TwoSidedAsymmetric
                            : seed % 3 == 1 ? MarketMode::TwoSidedSymmetric
                                            : MarketMode::NonBipartite;
    const std::size_t n = mode == MarketMode::NonBipartite ? 4 : 3;
    const auto inst = gen_random(mode, n, {0, 1, 2}, seed);
    const Verdict v = decide_poef(inst);
    const auto check = verify_certificate(inst, v);
    EXPECT_TRUE(check.ok) << "seed " << seed << ": " << check.reason;
    const Json j = verdict_to_json(inst, v);
    const Verdict back = verdict_from_json(Json::parse(j.dump()));
    EXPECT_TRUE(verify_certificate(inst, back).ok) << "seed " << seed;
    EXPECT_EQ(verdict_to_json(inst, back), j);
  }
}

TEST(Decide, AgreesWithGridOracle) {
  // A grid point that is both EF and PO is a genuine witness, so the
  // decision must then be Exists; an Exists allocation on the grid must be
  // found by the grid.
  for (std::uint64_t seed = 100; seed < 125; ++seed) {
    const auto inst = gen_random(seed % 2 ? MarketMode::TwoSidedAsymmetric : MarketMode::TwoSidedSymmetric, 3,
                                 {0, 1, 2}, seed);
    const Verdict v = decide_poef(inst);
    const GridReport g = grid_oracle(inst, 2);
    EXPECT_EQ(g.allocations, 21U);
    if (g.both > 0) {
      EXPECT_EQ(v.kind, VerdictKind::Exists) << "seed " << seed;
    }
    if (v.kind == VerdictKind::Exists) {
      const bool on_grid = std::all_of(v.allocation.begin(), v.allocation.end(),
                                       [](const Rat& r) { return (r * 2).is_integer(); });
      if (on_grid) {
        EXPECT_NE(std::find(g.both_points.begin(), g.both_points.end(), v.allocation), g.both_points.end());
      }
    }
  }
}

TEST(Decide, VertexMinimumBoundsConvexCombinations) {
  // v is concave on the EF polytope: any convex combination of vertices
  // has v at least the smallest vertex value.
  std::mt19937_64 rng(7);
  std::vector<MarketInstance> instances{catalog_instance("thm1"), catalog_instance("thm2")};
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    instances.push_back(gen_random(MarketMode::TwoSidedAsymmetric, 3, {0, 1}, seed));
  }
  int trials = 0;
  for (const auto& inst : instances) {
    RunLimits limits;
    limits.override_caps = true;
    const auto points = vertex_enumerate(ef_constraints(inst), limits);
    Rat lowest;
    for (std::size_t k = 0; k < points.size(); ++k) {
      const Rat v = improvement_value_of(inst, points[k]).value;
      if (k == 0 || v < lowest) lowest = v;
    }
    for (int t = 0; t < 10; ++t, ++trials) {
      RatVec weights(points.size());
      Rat total;
      for (auto& w : weights) {
        w = Rat(static_cast<long>(rng() % 5));
        total += w;
      }
      if (total.is_zero()) {
        weights[0] = 1;
        total = 1;
      }
      RatVec mix(inst.num_vars());
      for (std::size_t k = 0; k < points.size(); ++k) {
        for (std::size_t c = 0; c < mix.size(); ++c) mix[c] += weights[k] / total * points[k][c];
      }
      ASSERT_TRUE(envy_pairs_of(inst, mix).empty());
      EXPECT_GE(improvement_value_of(inst, mix).value, lowest);
    }
  }
  EXPECT_EQ(trials, 100);
}

TEST(Decide, InvariantUnderRelabeling) {
  std::vector<std::size_t> sigma{2, 0, 1}, tau{1, 2, 0};
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const auto inst = gen_random(MarketMode::TwoSidedAsymmetric, 3, {0, 1, 2}, seed);
    const auto moved = relabel(inst, sigma, tau);
    EXPECT_EQ(decide_poef(inst).kind, decide_poef(moved).kind) << "seed " << seed;
    std::next_permutation(sigma.begin(), sigma.end());
  }
  const auto thm1 = catalog_instance("thm1");
  EXPECT_EQ(decide_poef(relabel(thm1, {1, 2, 0}, {2, 1, 0})).kind, VerdictKind::NotExists);
}

TEST(Decide, OneSidedDichotomousInstancesExist) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = one_sided(seed);
    const Verdict v = decide_poef(inst);
    EXPECT_EQ(v.kind, VerdictKind::Exists) << "seed " << seed;
    EXPECT_TRUE(verify_certificate(inst, v).ok);
  }
}

TEST(Decide, AgentsOnlyScopeIsCertified) {
  const auto inst = catalog_instance("thm1");
  const Verdict v = decide_poef(inst, {EnvyScope::AgentsOnly, {}});
  EXPECT_TRUE(verify_certificate(inst, v).ok);
  EXPECT_EQ(v.scope, EnvyScope::AgentsOnly);
}

TEST(Domination, CatalogCertificates) {
  for (const char* name : {"thm1", "thm2"}) {
    const auto inst = catalog_instance(name);
    const auto cert = find_domination_certificate(inst, catalog_y(name));
    ASSERT_TRUE(cert.has_value()) << name;
    EXPECT_EQ(cert->kind, VerdictKind::NotExistsDominated);
    EXPECT_EQ(cert->domination->strict_entity, 0U);
    EXPECT_EQ(cert->domination->minima[0], Rat(1, 3));
    EXPECT_TRUE(verify_certificate(inst, *cert).ok) << name;
    // A dominated verdict must agree with the vertex scan.
    EXPECT_EQ(decide_poef(inst).kind, VerdictKind::NotExists);
  }
  const auto cor1 = catalog("cor1");
  const auto cert = find_domination_certificate(cor1.instance, complete_allocation(cor1.instance, cor1.y_labels));
  ASSERT_TRUE(cert.has_value());
  EXPECT_EQ(cert->domination->minima[0], Rat(1, 3));
}

TEST(Domination, UniformDoesNotDominateThm1) {
  const auto inst = catalog_instance("thm1");
  EXPECT_FALSE(find_domination_certificate(inst, Allocation::uniform(3)).has_value());
}

TEST(Grid, Thm1AtDenominatorThree) {
  const auto inst = catalog_instance("thm1");
  const GridReport g = grid_oracle(inst, 3);
  EXPECT_EQ(g.allocations, 55U);
  EXPECT_EQ(g.both, 0U);
  EXPECT_GT(g.envy_free, 0U);
  const auto x24 = static_cast<std::ptrdiff_t>(inst.var(1, 0));
  for (const auto& p : g.envy_free_points) EXPECT_EQ(p[static_cast<std::size_t>(x24)], Rat(1, 3));
}

TEST(Grid, CountsAndCaps) {
  const MarketInstance zero = MarketInstance::two_sided_symmetric({{0, 0, 0}, {0, 0, 0}, {0, 0, 0}});
  const GridReport g = grid_oracle(zero, 1);
  EXPECT_EQ(g.allocations, 6U);
  EXPECT_EQ(g.both, 6U);
  EXPECT_EQ(grid_oracle(zero, 2).allocations, 21U);
  EXPECT_THROW(grid_oracle(zero, 7), CapExceeded);
  EXPECT_THROW(grid_oracle(zero, 0), CapExceeded);
  EXPECT_THROW(grid_oracle(gen_random(MarketMode::TwoSidedSymmetric, 4, {0}, 0), 2), CapExceeded);
  EXPECT_THROW(grid_oracle(catalog_instance("cor1"), 2), Error);
}

TEST(Grid, MatchesBruteForceEnumeration) {
  for (long d = 1; d <= 4; ++d) {
    EXPECT_EQ(grid_oracle(catalog_instance("thm2"), d).allocations, matchfair::testing::grid_allocations(3, d).size());
  }
}

TEST(Verify, RejectsTampering) {
  const auto thm1 = catalog_instance("thm1");
  const Verdict good = decide_poef(thm1);

  Verdict zeroed = good;
  zeroed.vertices[0].v = 0;
  EXPECT_EQ(verify_certificate(thm1, zeroed).reason, "improvement value mismatch");

  Verdict dropped = good;
  dropped.vertices.pop_back();
  EXPECT_EQ(verify_certificate(thm1, dropped).reason, "vertex list mismatch");

  Verdict envious = good;
  envious.kind = VerdictKind::Exists;
  envious.allocation = allocation_variables(thm1, catalog_y("thm1"));
  envious.improvement = {};
  EXPECT_EQ(verify_certificate(thm1, envious).reason, "allocation has an envy pair");

  Verdict edited = good;
  edited.ef_system = allocation_polytope(thm1);
  EXPECT_EQ(verify_certificate(thm1, edited).reason, "constraint system mismatch");

  auto dom = *find_domination_certificate(thm1, catalog_y("thm1"));
  dom.domination->minima[0] = Rat(1, 2);
  EXPECT_EQ(verify_certificate(thm1, dom).reason, "domination minima mismatch");

  // A certificate for a different instance does not carry over.
  EXPECT_FALSE(verify_certificate(catalog_instance("thm2"), good).ok);
}

TEST(Verify, TamperedJsonIsRejected) {
  const auto thm2 = catalog_instance("thm2");
  Json j = verdict_to_json(thm2, decide_poef(thm2));
  j["vertices"][0]["v"] = "0";
  EXPECT_FALSE(verify_certificate(thm2, verdict_from_json(j)).ok);
  j["verdict"] = "maybe";
  EXPECT_THROW(verdict_from_json(j), ParseError);
}

TEST(Certificate, HashIsStableAndSensitive) {
  const auto a = catalog_instance("thm1");
  EXPECT_EQ(instance_hash(a), instance_hash(catalog_instance("thm1")));
  EXPECT_EQ(instance_hash(a).size(), 16U);
  EXPECT_NE(instance_hash(a), instance_hash(catalog_instance("thm2")));
  const Json j = verdict_to_json(a, decide_poef(a));
  EXPECT_EQ(j.at("instance_hash"), instance_hash(a));
  EXPECT_EQ(j.dump(), verdict_to_json(a, decide_poef(a)).dump());
}

TEST(Heuristic, FindsControlAndMissesCatalog) {
  const MarketInstance control = MarketInstance::two_sided_asymmetric(
      {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}});
  const auto hit = heuristic_search(control, 20, 1);
  ASSERT_TRUE(hit.found.has_value());
  EXPECT_TRUE(envy_pairs_of(control, *hit.found).empty());
  EXPECT_FALSE(heuristic_search(catalog_instance("thm1"), 20, 1).found.has_value());
}

TEST(Decide, ThreadedScanMatchesSerial) {
  const auto inst = gen_random(MarketMode::TwoSidedAsymmetric, 3, {0, 1, 2}, 3);
  RunLimits threaded;
  threaded.threads = 4;
  const Json a = verdict_to_json(inst, decide_poef(inst));
  const Json b = verdict_to_json(inst, decide_poef(inst, {EnvyScope::BothSides, threaded}));
  EXPECT_EQ(a, b);
}
