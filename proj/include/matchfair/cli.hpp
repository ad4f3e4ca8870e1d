#pragma once

// Command-line front end. run() does all the work and returns the text it
// would print, so the CLI can be tested without spawning processes.
//
// Exit codes: 0 ok / exists, 2 usage or input error, 3 certified
// non-existence or a failed check, 4 cap or time limit exceeded (also an
// inconclusive heuristic search), 1 internal error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "matchfair/existence.hpp"

namespace matchfair::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNegative = 3;
inline constexpr int kExitLimit = 4;

struct CommandOutcome {
  int exit_code = kExitOk;
  /// What goes to stdout: the human report, or the JSON document under --json.
  std::string out;
  /// Diagnostics for stderr.
  std::string err;
};

namespace detail {

inline Json read_json_file(const std::string& path, const std::string& role) {
  std::ifstream in(path);
  if (!in) throw ParseError(role + " file '" + path + "': cannot open");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(role + " file '" + path + "': " + e.what());
  }
}

inline MarketInstance load_instance(const std::string& path) {
  const Json j = read_json_file(path, "instance");
  try {
    return instance_from_json(j);
  } catch (const Error& e) {
    throw ParseError("instance file '" + path + "': " + e.what());
  }
}

inline std::pair<Allocation, RatVec> load_allocation(const MarketInstance& inst, const std::string& path) {
  const Json j = read_json_file(path, "allocation");
  try {
    Allocation x = allocation_from_json(j);
    RatVec v = allocation_variables(inst, x);
    return {std::move(x), std::move(v)};
  } catch (const Error& e) {
    throw ParseError("allocation file '" + path + "': " + e.what());
  }
}

inline std::string vec_str(std::span<const Rat> v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += v[i].str();
  }
  return s + ")";
}

/// One "x_a_b = value" per nonzero variable.
inline std::string support_str(const MarketInstance& inst, std::span<const Rat> v) {
  const auto names = inst.variable_names();
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (v[k].is_zero()) continue;
    if (!s.empty()) s += ", ";
    s += names[k] + " = " + v[k].str();
  }
  return s.empty() ? "0" : s;
}

inline Json envy_json(const MarketInstance& inst, const std::vector<EnvyWitness>& pairs) {
  Json out = Json::array();
  for (const auto& p : pairs) {
    out.push_back({{"observer", inst.label(p.observer)},
                   {"envied", inst.label(p.envied)},
                   {"own_value", p.own_value.str()},
                   {"envied_value", p.envied_value.str()}});
  }
  return out;
}

inline void describe_verdict(std::ostream& os, const MarketInstance& inst, const Verdict& v) {
  os << "verdict: " << to_string(v.kind) << " (method " << v.method << ", envy scope " << to_string(v.scope)
     << ")\n";
  os << "instance hash: " << instance_hash(inst) << "\n";
  os << "envy-free system: " << v.ef_system.num_vars() << " variables, " << v.ef_system.row_count() << " rows\n";
  switch (v.kind) {
    case VerdictKind::Exists:
      os << "allocation: " << support_str(inst, v.allocation) << "\n";
      os << "envy pairs: none\n";
      os << "improvement value v = " << v.improvement.value << "\n";
      break;
    case VerdictKind::NotExists:
      os << "vertices of the envy-free polytope: " << v.vertices.size() << "\n";
      for (std::size_t k = 0; k < v.vertices.size(); ++k) {
        const auto& rec = v.vertices[k];
        os << "  [" << k + 1 << "] " << support_str(inst, rec.point) << "\n";
        os << "      v = " << rec.v << ", dominated by " << support_str(inst, rec.witness) << "\n";
      }
      os << "soundness: " << kVertexScanSoundness << "\n";
      break;
    case VerdictKind::NotExistsDominated: {
      const auto& d = *v.domination;
      os << "y: " << support_str(inst, d.y) << "\n";
      os << "min over envy-free x of u_e(y) - u_e(x):";
      for (std::size_t e = 0; e < d.minima.size(); ++e) os << " " << inst.entity_name(e) << "=" << d.minima[e];
      os << "\n";
      os << "strictly better for " << inst.entity_name(d.strict_entity) << " by at least "
         << d.minima[d.strict_entity] << "\n";
      break;
    }
  }
}

inline int verdict_exit(const Verdict& v) { return v.kind == VerdictKind::Exists ? kExitOk : kExitNegative; }

}  // namespace detail

struct GlobalOptions {
  bool json = false;
  double max_seconds = 0;
  bool heuristic = false;
  unsigned threads = 0;
  std::string scope = "both_sides";

  [[nodiscard]] RunLimits limits() const {
    RunLimits l = max_seconds > 0 ? RunLimits::with_seconds(max_seconds) : RunLimits{};
    l.threads = threads > 0 ? threads : threads_from_environment();
    return l;
  }
};

/// Runs one command line (without the program name).
inline CommandOutcome run(const std::vector<std::string>& args) {
  CLI::App app{"Envy-freeness and Pareto optimality of fractional matchings, in exact arithmetic", "matchfair"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  GlobalOptions g;
  app.add_flag("--json", g.json, "Print machine-readable JSON");
  app.add_option("--max-seconds", g.max_seconds, "Abort with exit code 4 after this many seconds")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--heuristic", g.heuristic, "decide: non-certifying random search instead of the vertex scan");
  app.add_option("--threads", g.threads, "Worker threads (default: MATCHFAIR_THREADS or 1)");
  app.add_option("--scope", g.scope, "Envy scope for two-sided markets")
      ->check(CLI::IsMember({"both_sides", "agents_only", "jobs_only"}));

  std::string instance_path, allocation_path, certificate_path, functional, name, mode, values;
  bool all_coordinates = false, complete_graph = false;
  long denominator = 0;
  std::size_t n = 0, samples = 200;
  std::uint64_t seed = 0;

  auto* check_ef = app.add_subcommand("check-ef", "Is the allocation envy-free?");
  check_ef->add_option("--instance", instance_path, "Instance JSON")->required();
  check_ef->add_option("--allocation", allocation_path, "Allocation JSON")->required();

  auto* check_po = app.add_subcommand("check-po", "Is the allocation Pareto optimal?");
  check_po->add_option("--instance", instance_path, "Instance JSON")->required();
  check_po->add_option("--allocation", allocation_path, "Allocation JSON")->required();

  auto* decide = app.add_subcommand("decide", "Decide whether a PO and EF allocation exists");
  decide->add_option("--instance", instance_path, "Instance JSON")->required();
  decide->add_option("--samples", samples, "Random objectives tried under --heuristic");
  decide->add_option("--seed", seed, "Seed for --heuristic");

  auto* verify = app.add_subcommand("verify", "Re-check a certificate produced by decide or reproduce");
  verify->add_option("--instance", instance_path, "Instance JSON")->required();
  verify->add_option("--certificate", certificate_path, "Certificate JSON")->required();

  auto* forced = app.add_subcommand("forced", "Range of a functional over the envy-free polytope");
  forced->add_option("--instance", instance_path, "Instance JSON")->required();
  auto* functional_opt = forced->add_option("--functional", functional, "x_i_j or u_i");
  auto* all_opt = forced->add_flag("--all-coordinates", all_coordinates, "Every allocation variable");
  functional_opt->excludes(all_opt);

  auto* reproduce = app.add_subcommand("reproduce", "Run a built-in instance end to end");
  reproduce->add_option("name", name, "thm1, thm2 or cor1")->required()->check(CLI::IsMember({"thm1", "thm2", "cor1"}));
  reproduce->add_flag("--complete-graph", complete_graph, "cor1 only: add zero-weight within-side edges");

  auto* oracle = app.add_subcommand("oracle", "Classify every allocation on the 1/D grid");
  oracle->add_option("--instance", instance_path, "Instance JSON")->required();
  oracle->add_option("--denominator", denominator, "Grid denominator D")->required();

  auto* gen = app.add_subcommand("gen", "Generate a random instance");
  gen->add_option("--mode", mode, "two_sided_asymmetric, two_sided_symmetric or non_bipartite")->required();
  gen->add_option("--n", n, "Side size (vertex count for non_bipartite)")->required();
  gen->add_option("--values", values, "Comma-separated value set, e.g. 0,1,2")->required();
  gen->add_option("--seed", seed, "Generator seed")->required();

  auto* decompose = app.add_subcommand("decompose", "Birkhoff decomposition of a bipartite allocation");
  decompose->add_option("--allocation", allocation_path, "Allocation JSON")->required();

  CommandOutcome outcome;
  std::ostringstream out, err;
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    outcome.exit_code = code == 0 ? kExitOk : kExitUsage;
    outcome.out = out.str();
    outcome.err = err.str();
    return outcome;
  }

  Json doc;
  int code = kExitOk;
  try {
    const RunLimits limits = g.limits();
    const EnvyScope scope = envy_scope_from_string(g.scope);
    if (g.heuristic && !decide->parsed()) throw ParseError("--heuristic applies to decide only");

    if (check_ef->parsed()) {
      const auto inst = detail::load_instance(instance_path);
      const auto [x, v] = detail::load_allocation(inst, allocation_path);
      const auto pairs = envy_pairs_of(inst, v, scope);
      code = pairs.empty() ? kExitOk : kExitNegative;
      doc = {{"envy_free", pairs.empty()}, {"envy_pairs", detail::envy_json(inst, pairs)}};
      out << (pairs.empty() ? "envy-free: yes\n" : "envy-free: no\n");
      for (const auto& p : pairs) {
        out << "  " << inst.entity_name(p.observer) << " envies " << inst.entity_name(p.envied) << ": "
            << p.envied_value << " > " << p.own_value << "\n";
      }
    } else if (check_po->parsed()) {
      const auto inst = detail::load_instance(instance_path);
      const auto [x, v] = detail::load_allocation(inst, allocation_path);
      const auto r = improvement_value_of(inst, v, limits);
      const bool po = r.value.is_zero();
      code = po ? kExitOk : kExitNegative;
      doc = {{"pareto_optimal", po},
             {"v", r.value.str()},
             {"witness", vec_to_json(r.witness)},
             {"gains", vec_to_json(r.gains)}};
      out << "pareto optimal: " << (po ? "yes" : "no") << "\n";
      out << "improvement value v = " << r.value << "\n";
      if (!po) {
        out << "dominated by: " << detail::support_str(inst, r.witness) << "\n";
        out << "utility before: " << detail::vec_str(utility_profile_of(inst, v)) << "\n";
        out << "utility after:  " << detail::vec_str(utility_profile_of(inst, r.witness)) << "\n";
      }
    } else if (decide->parsed()) {
      const auto inst = detail::load_instance(instance_path);
      if (g.heuristic) {
        const auto h = heuristic_search(inst, samples, seed, scope, limits);
        if (h.found) {
          Verdict v;
          v.kind = VerdictKind::Exists;
          v.method = "random-search";
          v.scope = scope;
          v.ef_system = ef_constraints(inst, scope);
          v.allocation = *h.found;
          v.improvement = improvement_value_of(inst, v.allocation, limits);
          doc = verdict_to_json(inst, v);
          detail::describe_verdict(out, inst, v);
        } else {
          code = kExitLimit;
          doc = {{"verdict", "inconclusive"}, {"method", "random-search"}, {"samples", h.samples}};
          out << "verdict: inconclusive (random search, " << h.samples
              << " samples, no PO and EF allocation hit; this proves nothing)\n";
        }
      } else {
        const Verdict v = decide_poef(inst, {scope, limits});
        code = detail::verdict_exit(v);
        doc = verdict_to_json(inst, v);
        detail::describe_verdict(out, inst, v);
      }
    } else if (verify->parsed()) {
      const auto inst = detail::load_instance(instance_path);
      Verdict v;
      try {
        Json cj = detail::read_json_file(certificate_path, "certificate");
        // Accept reproduce --json output, which nests the certificate.
        if (cj.is_object() && cj.contains("certificate")) cj = cj.at("certificate");
        v = verdict_from_json(cj);
      } catch (const Error& e) {
        throw ParseError("certificate file '" + certificate_path + "': " + e.what());
      }
      const auto r = verify_certificate(inst, v, limits);
      code = r.ok ? kExitOk : kExitNegative;
      doc = {{"verified", r.ok}, {"reason", r.reason}, {"verdict", to_string(v.kind)}};
      out << "certificate (" << to_string(v.kind) << "): " << (r.ok ? "verified" : "REJECTED: " + r.reason) << "\n";
    } else if (forced->parsed()) {
      const auto inst = detail::load_instance(instance_path);
      std::vector<Functional> fs;
      if (all_coordinates) {
        const auto names = inst.variable_names();
        for (const auto& nm : names) fs.push_back(parse_functional(inst, nm));
      } else if (!functional.empty()) {
        fs.push_back(parse_functional(inst, functional));
      } else {
        throw ParseError("forced needs --functional or --all-coordinates");
      }
      doc = Json::array();
      for (const auto& f : fs) {
        const auto r = forced_value(inst, f.coefficients, scope, limits);
        doc.push_back({{"functional", f.name}, {"min", r.min.str()}, {"max", r.max.str()}, {"forced", r.forced}});
        out << f.name << ": ";
        if (r.forced) {
          out << "forced to " << r.min << "\n";
        } else {
          out << "ranges over [" << r.min << ", " << r.max << "]\n";
        }
      }
    } else if (reproduce->parsed()) {
      const auto entry = catalog(name, complete_graph);
      const auto& inst = entry.instance;
      // The within-side edges of the complete-graph variant carry nothing in y.
      const auto base = complete_graph ? catalog(name) : entry;
      const Allocation y = complete_allocation(base.instance, base.y_labels);
      const RatVec yv = allocation_variables(inst, y);
      const ConstraintSystem polytope = allocation_polytope(inst);
      std::size_t odd_rows = 0;
      for (const auto& r : polytope.inequalities()) odd_rows += r.name.rfind("odd{", 0) == 0 ? 1 : 0;

      const Verdict v = decide_poef(inst, {scope, limits});
      const auto check = verify_certificate(inst, v, limits);
      code = check.ok ? detail::verdict_exit(v) : kExitInternal;

      doc = {{"instance", name}, {"complete_graph", complete_graph}};
      doc["certificate"] = verdict_to_json(inst, v);
      doc["verified"] = check.ok;
      doc["y"] = vec_to_json(yv);
      doc["y_utilities"] = vec_to_json(utility_profile_of(inst, yv));
      doc["y_improvement_value"] = improvement_value_of(inst, yv, limits).value.str();

      out << "instance " << name << (complete_graph ? " (complete graph)" : "") << "\n";
      detail::describe_verdict(out, inst, v);
      out << "certificate check: " << (check.ok ? "verified" : "REJECTED: " + check.reason) << "\n";
      out << "catalog allocation y: " << detail::support_str(inst, yv) << "\n";
      out << "  utilities " << detail::vec_str(utility_profile_of(inst, yv)) << ", improvement value "
          << doc["y_improvement_value"].get<std::string>() << "\n";

      if (const auto dom = find_domination_certificate(inst, y, {scope, limits})) {
        const auto dcheck = verify_certificate(inst, *dom, limits);
        doc["domination"] = verdict_to_json(inst, *dom);
        doc["domination_verified"] = dcheck.ok;
        const auto& d = *dom->domination;
        out << "y dominates every envy-free allocation: " << inst.entity_name(d.strict_entity)
            << " gains at least " << d.minima[d.strict_entity] << " ("
            << (dcheck.ok ? "verified" : "REJECTED: " + dcheck.reason) << ")\n";
        if (!dcheck.ok) code = kExitInternal;
      } else {
        doc["domination"] = nullptr;
        out << "y does not dominate the envy-free polytope\n";
      }
      // Coordinates the envy constraints pin down, and agent 1's best EF utility.
      std::vector<std::string> pinned{"x_2_4", "x_1_4"};
      if (name != "thm1") pinned.insert(pinned.end(), {"x_2_5", "x_2_6"});
      pinned.push_back("u_1");
      Json forced_doc = Json::array();
      for (const auto& spec : pinned) {
        const auto f = parse_functional(inst, spec);
        const auto r = forced_value(inst, f.coefficients, scope, limits);
        forced_doc.push_back({{"functional", spec}, {"min", r.min.str()}, {"max", r.max.str()}, {"forced", r.forced}});
        out << "over envy-free allocations " << spec << " ";
        if (r.forced) {
          out << "is forced to " << r.min << "\n";
        } else {
          out << "ranges over [" << r.min << ", " << r.max << "]\n";
        }
      }
      doc["forced"] = std::move(forced_doc);
      if (!inst.two_sided()) {
        RunLimits lifted = limits;
        lifted.override_caps = true;
        const bool redundant = polytopes_equal(polytope, degree_polytope(inst), lifted);
        doc["odd_set_rows"] = odd_rows;
        doc["odd_set_rows_redundant"] = redundant;
        out << "odd-set rows: " << odd_rows << " present, "
            << (redundant ? "redundant (same polytope without them)" : "not redundant") << "\n";
      }
    } else if (oracle->parsed()) {
      const auto inst = detail::load_instance(instance_path);
      const auto r = grid_oracle(inst, denominator, limits);
      Json both = Json::array();
      for (const auto& p : r.both_points) both.push_back(vec_to_json(p));
      doc = {{"denominator", r.denominator},
             {"allocations", r.allocations},
             {"envy_free", r.envy_free},
             {"pareto_optimal", r.pareto_optimal},
             {"pareto_optimal_and_envy_free", r.both},
             {"points", std::move(both)}};
      out << "grid 1/" << r.denominator << ": " << r.allocations << " allocations, " << r.envy_free
          << " envy-free, " << r.pareto_optimal << " Pareto optimal, " << r.both << " both\n";
      for (const auto& p : r.both_points) out << "  " << detail::support_str(inst, p) << "\n";
    } else if (gen->parsed()) {
      RatVec value_set;
      std::stringstream ss(values);
      std::string item;
      while (std::getline(ss, item, ',')) value_set.push_back(Rat::parse(item));
      if (value_set.empty()) throw ParseError("--values: empty value set");
      const auto inst = gen_random(market_mode_from_string(mode), n, value_set, seed);
      doc = instance_to_json(inst);
      out << doc.dump(2) << "\n";
    } else if (decompose->parsed()) {
      Allocation x;
      try {
        x = allocation_from_json(detail::read_json_file(allocation_path, "allocation"));
      } catch (const Error& e) {
        throw ParseError("allocation file '" + allocation_path + "': " + e.what());
      }
      if (!x.is_bipartite()) throw ParseError("allocation file '" + allocation_path + "': not a bipartite allocation");
      doc = Json::array();
      for (const auto& t : birkhoff_decompose(x)) {
        Json perm = Json::array();
        std::string text;
        for (std::size_t i = 0; i < t.permutation.size(); ++i) {
          perm.push_back(t.permutation[i] + 1);
          text += (i ? " " : "") + std::to_string(i + 1) + "->" + std::to_string(t.permutation.size() + t.permutation[i] + 1);
        }
        doc.push_back({{"coefficient", t.coefficient.str()}, {"permutation", std::move(perm)}});
        out << t.coefficient << " * [" << text << "]\n";
      }
    }
  } catch (const CapExceeded& e) {
    code = kExitLimit;
    err << "cap exceeded: " << e.what() << "\n";
    doc = {{"error", "cap_exceeded"}, {"message", e.what()}};
  } catch (const TimeLimitExceeded& e) {
    code = kExitLimit;
    err << "time limit exceeded (--max-seconds " << g.max_seconds << ")\n";
    doc = {{"error", "time_limit_exceeded"}, {"message", e.what()}};
  } catch (const InternalError& e) {
    code = kExitInternal;
    err << "internal error: " << e.what() << "\n";
    doc = {{"error", "internal"}, {"message", e.what()}};
  } catch (const Error& e) {
    code = kExitUsage;
    err << "error: " << e.what() << "\n";
    doc = {{"error", "input"}, {"message", e.what()}};
  }
  outcome.exit_code = code;
  if (g.json) {
    outcome.out = doc.dump(2) + "\n";
  } else {
    outcome.out = out.str();
  }
  outcome.err = err.str();
  return outcome;
}

}  // namespace matchfair::cli
