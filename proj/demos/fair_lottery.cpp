// Builds a small market in code, finds a Pareto-optimal envy-free lottery if
// there is one, and prints it as a mixture of matchings.

#include <iostream>

#include "matchfair/existence.hpp"

using namespace matchfair;

int main() {
  // Three agents, three jobs. Agents 1 and 2 both want job 4; jobs are
  // indifferent between agents.
  const auto market = MarketInstance::two_sided_asymmetric({{2, 1, 0}, {2, 0, 1}, {0, 1, 1}},
                                                           {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}});
  const Verdict verdict = decide_poef(market);
  std::cout << "verdict: " << to_string(verdict.kind) << "\n";
  if (verdict.kind != VerdictKind::Exists) return 0;

  const Allocation x = allocation_from_variables(market, verdict.allocation);
  for (const auto& term : birkhoff_decompose(x)) {
    std::cout << "  with probability " << term.coefficient << ":";
    for (std::size_t i = 0; i < term.permutation.size(); ++i) {
      std::cout << " " << market.entity_name(i) << "->" << market.entity_name(market.size() + term.permutation[i]);
    }
    std::cout << "\n";
  }
  std::cout << "certificate " << (verify_certificate(market, verdict).ok ? "verified" : "rejected") << "\n";

  // The same market with job 4 demanding agent 1 only.
  const auto picky = MarketInstance::two_sided_asymmetric({{2, 1, 0}, {2, 0, 1}, {0, 1, 1}},
                                                          {{1, 0, 0}, {0, 0, 0}, {0, 0, 0}});
  std::cout << "with a picky job: " << to_string(decide_poef(picky).kind) << "\n";
}
