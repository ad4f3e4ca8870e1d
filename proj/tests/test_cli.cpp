#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "matchfair/cli.hpp"

using namespace matchfair;
using cli::run;

namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("matchfair_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& file, const std::string& text) {
    const auto path = (dir_ / file).string();
    std::ofstream(path) << text;
    return path;
  }
  std::string write_instance(const std::string& name) {
    return write(name + ".json", instance_to_json(catalog(name).instance).dump());
  }
  std::string write_y(const std::string& name) {
    const auto entry = catalog(name);
    return write(name + "_y.json", allocation_to_json(complete_allocation(entry.instance, entry.y_labels)).dump());
  }

  fs::path dir_;
};

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_F(Cli, ReproduceCatalogInstances) {
  for (const char* name : {"thm1", "thm2", "cor1"}) {
    const auto r = run({"reproduce", name});
    EXPECT_EQ(r.exit_code, cli::kExitNegative) << name << r.err;
    EXPECT_TRUE(contains(r.out, "verdict: not_exists")) << r.out;
    EXPECT_TRUE(contains(r.out, "certificate check: verified"));
    EXPECT_TRUE(contains(r.out, "gains at least 1/3 (verified)"));
  }
  EXPECT_TRUE(contains(run({"reproduce", "cor1"}).out, "odd-set rows: 26 present, redundant"));
}

TEST_F(Cli, ReproduceJsonIsDeterministic) {
  const auto a = run({"--json", "reproduce", "thm2"});
  const auto b = run({"--json", "reproduce", "thm2"});
  EXPECT_EQ(a.out, b.out);
  const Json j = Json::parse(a.out);
  EXPECT_EQ(j.at("certificate").at("verdict"), "not_exists");
  EXPECT_EQ(j.at("verified"), true);
  EXPECT_EQ(j.at("domination").at("gap"), "1/3");
  EXPECT_EQ(j.at("domination").at("strict_entity"), 1);
  EXPECT_FALSE(contains(a.out, "timestamp"));
}

TEST_F(Cli, DecideAndVerifyRoundTrip) {
  const auto inst = write_instance("thm1");
  const auto r = run({"--json", "decide", "--instance", inst});
  ASSERT_EQ(r.exit_code, cli::kExitNegative) << r.err;
  const auto cert = write("cert.json", r.out);
  EXPECT_EQ(run({"verify", "--instance", inst, "--certificate", cert}).exit_code, cli::kExitOk);

  Json tampered = Json::parse(r.out);
  tampered["vertices"][0]["v"] = "0";
  const auto bad = write("bad.json", tampered.dump());
  const auto v = run({"verify", "--instance", inst, "--certificate", bad});
  EXPECT_EQ(v.exit_code, cli::kExitNegative);
  EXPECT_TRUE(contains(v.out, "REJECTED: improvement value mismatch"));

  // A reproduce document verifies too.
  const auto doc = write("doc.json", run({"--json", "reproduce", "thm1"}).out);
  EXPECT_EQ(run({"verify", "--instance", inst, "--certificate", doc}).exit_code, cli::kExitOk);
}

TEST_F(Cli, CheckEfNamesEnvyPairs) {
  const auto r = run({"check-ef", "--instance", write_instance("thm1"), "--allocation", write_y("thm1")});
  EXPECT_EQ(r.exit_code, cli::kExitNegative);
  EXPECT_TRUE(contains(r.out, "agent 2 envies agent 3: 1 > 2/3")) << r.out;
  const auto uniform = write("u.json", allocation_to_json(Allocation::uniform(3)).dump());
  EXPECT_EQ(run({"check-ef", "--instance", write_instance("thm2"), "--allocation", uniform}).exit_code, cli::kExitOk);
}

TEST_F(Cli, CheckPoOnCatalogAllocations) {
  for (const char* name : {"thm1", "thm2"}) {
    const auto r = run({"--json", "check-po", "--instance", write_instance(name), "--allocation", write_y(name)});
    EXPECT_EQ(r.exit_code, cli::kExitOk) << r.err;
    EXPECT_EQ(Json::parse(r.out).at("v"), "0");
  }
  const auto uniform = write("u.json", allocation_to_json(Allocation::uniform(3)).dump());
  const auto r = run({"check-po", "--instance", write_instance("thm2"), "--allocation", uniform});
  EXPECT_EQ(r.exit_code, cli::kExitNegative);
  EXPECT_TRUE(contains(r.out, "improvement value v = 2/3"));
}

TEST_F(Cli, ForcedValues) {
  const auto inst = write_instance("thm1");
  EXPECT_TRUE(contains(run({"forced", "--instance", inst, "--functional", "x_2_4"}).out, "x_2_4: forced to 1/3"));
  EXPECT_TRUE(contains(run({"forced", "--instance", inst, "--functional", "u_1"}).out, "u_1: forced to 1/3"));
  const auto all = run({"--json", "forced", "--instance", inst, "--all-coordinates"});
  EXPECT_EQ(Json::parse(all.out).size(), 9U);
  const auto bad = run({"forced", "--instance", inst, "--functional", "x_4_2"});
  EXPECT_EQ(bad.exit_code, cli::kExitUsage);
  EXPECT_TRUE(contains(bad.err, "x_4_2"));
  EXPECT_EQ(run({"forced", "--instance", inst}).exit_code, cli::kExitUsage);
}

TEST_F(Cli, OracleCounts) {
  const auto r = run({"oracle", "--instance", write_instance("thm1"), "--denominator", "3"});
  EXPECT_EQ(r.exit_code, cli::kExitOk);
  EXPECT_TRUE(contains(r.out, "55 allocations")) << r.out;
  EXPECT_TRUE(contains(r.out, " 0 both"));
  EXPECT_EQ(run({"oracle", "--instance", write_instance("thm1"), "--denominator", "9"}).exit_code, cli::kExitLimit);
}

TEST_F(Cli, GenIsReproducible) {
  const std::vector<std::string> args{"gen", "--mode", "two_sided_asymmetric", "--n", "3", "--values", "0,1,2",
                                      "--seed", "42"};
  const auto a = run(args);
  EXPECT_EQ(a.exit_code, cli::kExitOk);
  EXPECT_EQ(a.out, run(args).out);
  const Json j = Json::parse(a.out);
  EXPECT_EQ(j.at("generator").at("algorithm"), "splitmix64");
  EXPECT_EQ(j.at("generator").at("seed"), 42);
  EXPECT_EQ(instance_from_json(j), gen_random(MarketMode::TwoSidedAsymmetric, 3, {0, 1, 2}, 42));
  EXPECT_EQ(run({"gen", "--mode", "triangular", "--n", "3", "--values", "0", "--seed", "1"}).exit_code,
            cli::kExitUsage);
  EXPECT_EQ(run({"gen", "--mode", "non_bipartite", "--n", "4", "--values", "0,x", "--seed", "1"}).exit_code,
            cli::kExitUsage);
}

TEST_F(Cli, Decompose) {
  const auto r = run({"decompose", "--allocation", write("u.json", allocation_to_json(Allocation::uniform(3)).dump())});
  EXPECT_EQ(r.exit_code, cli::kExitOk);
  EXPECT_EQ(r.out, "1/3 * [1->4 2->5 3->6]\n1/3 * [1->5 2->6 3->4]\n1/3 * [1->6 2->4 3->5]\n");
}

TEST_F(Cli, UsageAndInputErrors) {
  EXPECT_EQ(run({}).exit_code, cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).exit_code, cli::kExitUsage);
  EXPECT_EQ(run({"decide"}).exit_code, cli::kExitUsage);
  EXPECT_EQ(run({"reproduce", "thm9"}).exit_code, cli::kExitUsage);
  EXPECT_EQ(run({"--help"}).exit_code, cli::kExitOk);

  const auto missing = run({"decide", "--instance", (dir_ / "nope.json").string()});
  EXPECT_EQ(missing.exit_code, cli::kExitUsage);
  EXPECT_TRUE(contains(missing.err, "nope.json"));

  const auto bad = write("bad.json", R"({"mode":"two_sided_symmetric","n":2,"weights":[["1","0.5"],["0","1"]]})");
  const auto r = run({"decide", "--instance", bad});
  EXPECT_EQ(r.exit_code, cli::kExitUsage);
  EXPECT_TRUE(contains(r.err, "bad.json")) << r.err;
  EXPECT_TRUE(contains(r.err, "0.5")) << r.err;

  const auto rows = write("rows.json", R"({"n":3,"x":[["1","0","0"],["0","1/3","1/3"],["0","2/3","2/3"]]})");
  const auto a = run({"check-ef", "--instance", write_instance("thm1"), "--allocation", rows});
  EXPECT_EQ(a.exit_code, cli::kExitUsage);
  EXPECT_TRUE(contains(a.err, "row 2")) << a.err;

  EXPECT_EQ(run({"--heuristic", "reproduce", "thm1"}).exit_code, cli::kExitUsage);
  EXPECT_EQ(run({"--scope", "everyone", "reproduce", "thm1"}).exit_code, cli::kExitUsage);
}

TEST_F(Cli, LimitsGiveExitFour) {
  const auto big = write("big.json", instance_to_json(gen_random(MarketMode::TwoSidedSymmetric, 5, {0, 1}, 3)).dump());
  const auto r = run({"decide", "--instance", big});
  EXPECT_EQ(r.exit_code, cli::kExitLimit);
  EXPECT_TRUE(contains(r.err, "cap exceeded"));
  EXPECT_EQ(run({"--max-seconds", "0.000001", "reproduce", "cor1"}).exit_code, cli::kExitLimit);
}

TEST_F(Cli, HeuristicIsNonCertifying) {
  const MarketInstance control = MarketInstance::two_sided_asymmetric(
      {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}});
  const auto ok = run({"--heuristic", "decide", "--instance", write("c.json", instance_to_json(control).dump())});
  EXPECT_EQ(ok.exit_code, cli::kExitOk);
  EXPECT_TRUE(contains(ok.out, "method random-search"));
  const auto miss = run({"--heuristic", "decide", "--instance", write_instance("thm1"), "--samples", "10"});
  EXPECT_EQ(miss.exit_code, cli::kExitLimit);
  EXPECT_TRUE(contains(miss.out, "inconclusive"));
}

TEST_F(Cli, ScopeFlagChangesTheSystem) {
  const auto inst = write_instance("thm1");
  const Json both = Json::parse(run({"--json", "decide", "--instance", inst}).out);
  const Json agents = Json::parse(run({"--json", "--scope", "agents_only", "decide", "--instance", inst}).out);
  EXPECT_EQ(agents.at("envy_scope"), "agents_only");
  EXPECT_LT(agents.at("constraint_system").at("inequalities").size(),
            both.at("constraint_system").at("inequalities").size());
}

TEST_F(Cli, ReproduceReportsPinnedCoordinates) {
  const auto r = run({"reproduce", "thm1", "--json"});
  EXPECT_EQ(r.exit_code, cli::kExitNegative);
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j.at("certificate").at("verdict"), "not_exists");
  const Json& first = j.at("forced").at(0);
  EXPECT_EQ(first.at("functional"), "x_2_4");
  EXPECT_EQ(first.at("min"), "1/3");
  EXPECT_EQ(first.at("forced"), true);
}

TEST_F(Cli, ZeroDenominatorIsAParseError) {
  const auto bad = write("zero.json", R"({"mode":"two_sided_symmetric","n":2,"weights":[["1","1/0"],["0","1"]]})");
  const auto r = run({"decide", "--instance", bad});
  EXPECT_EQ(r.exit_code, cli::kExitUsage);
  EXPECT_TRUE(contains(r.err, "zero.json"));
  EXPECT_TRUE(contains(r.err, "1/0"));
}

TEST_F(Cli, UniformIsEnvyFreeEverywhere) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = gen_random(MarketMode::TwoSidedAsymmetric, 3, {0, 1, 2}, seed);
    const auto f = write("i.json", instance_to_json(inst).dump());
    const auto u = write("u.json", allocation_to_json(Allocation::uniform(3)).dump());
    EXPECT_EQ(run({"check-ef", "--instance", f, "--allocation", u}).exit_code, cli::kExitOk);
  }
}
