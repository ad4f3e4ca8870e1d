#pragma once

// Generators and brute-force helpers shared by the test suites. Nothing in
// here calls the LP solver or the vertex enumerators.

#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "matchfair/market.hpp"

namespace matchfair::testing {

/// All n x n nonnegative integer matrices with every margin equal to D,
/// scaled by 1/D, as instance variable vectors (row-major).
inline std::vector<RatVec> grid_allocations(std::size_t n, long d) {
  std::vector<std::vector<long>> compositions;
  std::vector<long> part(n, 0);
  std::function<void(std::size_t, long)> compose = [&](std::size_t k, long left) {
    if (k + 1 == n) {
      part[k] = left;
      compositions.push_back(part);
      return;
    }
    for (long v = 0; v <= left; ++v) {
      part[k] = v;
      compose(k + 1, left - v);
    }
  };
  compose(0, d);
  std::vector<RatVec> out;
  std::vector<std::size_t> rows(n, 0);
  std::function<void(std::size_t)> choose = [&](std::size_t i) {
    if (i == n) {
      for (std::size_t j = 0; j < n; ++j) {
        long col = 0;
        for (std::size_t r = 0; r < n; ++r) col += compositions[rows[r]][j];
        if (col != d) return;
      }
      RatVec v(n * n);
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t j = 0; j < n; ++j) v[r * n + j] = Rat(compositions[rows[r]][j], d);
      }
      out.push_back(std::move(v));
      return;
    }
    for (std::size_t c = 0; c < compositions.size(); ++c) {
      rows[i] = c;
      choose(i + 1);
    }
  };
  choose(0);
  return out;
}

/// Perfect matchings of the instance graph, as 0/1 variable vectors.
inline std::vector<RatVec> perfect_matchings(const MarketInstance& inst) {
  std::vector<RatVec> out;
  if (inst.two_sided()) {
    const std::size_t n = inst.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      RatVec v(inst.num_vars());
      for (std::size_t i = 0; i < n; ++i) v[inst.var(i, perm[i])] = 1;
      out.push_back(std::move(v));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
  }
  RatVec current(inst.num_vars());
  std::vector<bool> covered(inst.size(), false);
  std::function<void()> extend = [&] {
    std::size_t first = 0;
    while (first < inst.size() && covered[first]) ++first;
    if (first == inst.size()) {
      out.push_back(current);
      return;
    }
    for (std::size_t k = 0; k < inst.edges().size(); ++k) {
      const auto& e = inst.edges()[k];
      if (e.a != first || covered[e.b]) continue;
      covered[e.a] = covered[e.b] = true;
      current[k] = 1;
      extend();
      current[k] = 0;
      covered[e.a] = covered[e.b] = false;
    }
  };
  extend();
  return out;
}

/// Random convex combination of a few perfect matchings, optionally pulled
/// towards the barycentre of all of them (which is envy-free whenever the
/// instance is vertex transitive; in general it just lands near the middle).
inline RatVec random_mixture(const std::vector<RatVec>& matchings, std::mt19937_64& rng, int terms = 4) {
  std::uniform_int_distribution<std::size_t> pick(0, matchings.size() - 1);
  std::uniform_int_distribution<long> weight(0, 6);
  RatVec v(matchings.front().size());
  std::vector<long> w(static_cast<std::size_t>(terms));
  long total = 0;
  for (auto& x : w) total += (x = weight(rng));
  if (total == 0) {
    w[0] = 1;
    total = 1;
  }
  for (std::size_t t = 0; t < w.size(); ++t) {
    const auto& m = matchings[pick(rng)];
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!m[i].is_zero()) v[i] += Rat(w[t], total);
    }
  }
  return v;
}

inline RatVec blend(const RatVec& a, const RatVec& b, const Rat& lambda) {
  RatVec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = lambda * a[i] + (Rat(1) - lambda) * b[i];
  return out;
}

inline RatVec uniform_vars(std::size_t n) { return RatVec(n * n, Rat(1, static_cast<long>(n))); }

}  // namespace matchfair::testing
