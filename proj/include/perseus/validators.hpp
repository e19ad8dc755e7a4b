#pragma once

#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "perseus/core.hpp"
#include "perseus/oracle.hpp"
#include "perseus/problem.hpp"
#include "perseus/sets.hpp"

namespace perseus {

// Draw a feasible point by projecting a diameter-scaled Gaussian around the
// set's projection of the origin. Not uniform, but spread out enough for the
// sampled regularity checks.
inline Vec sample_feasible(const FeasibleSet& set, std::mt19937_64& rng) {
  const Vec anchor = set.project(Vec::Zero(set.dim()));
  const double scale = set.diameter() / std::sqrt(static_cast<double>(set.dim()));
  return set.project(anchor + scale * gaussian_vector(rng, set.dim()));
}

inline std::vector<std::pair<Vec, Vec>> sample_pairs(const FeasibleSet& set, int count,
                                                     unsigned seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::pair<Vec, Vec>> pairs;
  pairs.reserve(count);
  while (static_cast<int>(pairs.size()) < count) {
    Vec a = sample_feasible(set, rng);
    Vec b = sample_feasible(set, rng);
    if ((a - b).norm() > 1e-9 * (1.0 + set.diameter())) pairs.emplace_back(a, b);
  }
  return pairs;
}

// Sampled estimate of the order-th smoothness constant,
//   max over pairs of ||∇^(k)F(x) - ∇^(k)F(x')||_est / ||x - x'||,
// where the operator-norm difference is probed along random unit directions.
// A lower estimate of the true constant; acceptance only asserts estimate <= L.
inline double estimate_smoothness(const OperatorOracle& oracle, int order,
                                  const std::vector<std::pair<Vec, Vec>>& pairs,
                                  int directions = 32, unsigned seed = 20240901u) {
  if (order > oracle.max_order) {
    throw OrderUnavailable("estimate_smoothness order " + std::to_string(order));
  }
  if (directions < 32) directions = 32;
  std::mt19937_64 rng(seed);
  double best = 0.0;
  for (const auto& [x, xp] : pairs) {
    if (static_cast<int>(x.size()) != oracle.dim) throw DimensionMismatch("smoothness pair");
    const double gap = (x - xp).norm();
    if (gap == 0.0) continue;
    double diff_norm = 0.0;
    if (order == 0) {
      diff_norm = (oracle(x) - oracle(xp)).norm();
    } else {
      for (int j = 0; j < directions; ++j) {
        const Vec h = unit_direction(rng, oracle.dim);
        const Vec d = oracle.deriv(x, order, h) - oracle.deriv(xp, order, h);
        diff_norm = std::max(diff_norm, d.norm());
      }
    }
    best = std::max(best, diff_norm / gap);
  }
  return best;
}

inline double estimate_smoothness(const OperatorOracle& oracle, const FeasibleSet& set,
                                  int order, int pair_count = 64, int directions = 32,
                                  unsigned seed = 20240901u) {
  return estimate_smoothness(oracle, order, sample_pairs(set, pair_count, seed), directions,
                             seed ^ 0x9e3779b9u);
}

struct MonotoneReport {
  double min_inner_product = 0.0;
  std::optional<std::pair<Vec, Vec>> violating_pair;
  bool monotone(double tol = 1e-12) const { return min_inner_product >= -tol; }
};

inline MonotoneReport check_monotone(const OperatorOracle& oracle,
                                     const std::vector<std::pair<Vec, Vec>>& pairs,
                                     double tol = 1e-12) {
  MonotoneReport rep;
  rep.min_inner_product = std::numeric_limits<double>::infinity();
  for (const auto& [x, xp] : pairs) {
    if (static_cast<int>(x.size()) != oracle.dim) throw DimensionMismatch("monotone pair");
    const double v = (oracle(x) - oracle(xp)).dot(x - xp);
    if (v < rep.min_inner_product) {
      rep.min_inner_product = v;
      if (v < -tol) rep.violating_pair = std::make_pair(x, xp);
    }
  }
  if (pairs.empty()) rep.min_inner_product = 0.0;
  if (rep.min_inner_product >= -tol) rep.violating_pair.reset();
  return rep;
}

inline MonotoneReport check_monotone(const OperatorOracle& oracle, const FeasibleSet& set,
                                     int pair_count = 64, unsigned seed = 20240902u,
                                     double tol = 1e-12) {
  return check_monotone(oracle, sample_pairs(set, pair_count, seed), tol);
}

// <F(x), x - x*>: nonnegative exactly when the known solution is a Minty
// (weak) solution; >= modulus * ||x - x*||^2 under the strong Minty condition.
inline double minty_margin(const VIProblem& problem, const Vec& x) {
  const Vec& xs = problem.solution();
  return problem.oracle(x).dot(x - xs);
}

}  // namespace perseus
