#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

#include "perseus/core.hpp"
#include "perseus/problem.hpp"

namespace perseus {

// res(x̂) = sup_{x in X} <F(x̂), x̂ - x>. Exact: the supremum of a linear
// functional is attained at lmo(-F(x̂)). Zero exactly at strong solutions.
inline double residue(const OperatorOracle& oracle, const FeasibleSet& set, const Vec& xhat,
                      double membership_tol = 1e-8) {
  if (!set.contains(xhat, membership_tol * (1.0 + set.diameter()))) {
    throw NotInSet("residue argument");
  }
  const Vec g = oracle(xhat);
  return compensated_dot(g, xhat - set.lmo(-g));
}

inline double residue(const VIProblem& problem, const Vec& xhat) {
  return residue(problem.oracle, *problem.set, xhat);
}

// Duality gap max_y f(ẑ, y) - min_z f(z, ŷ) through the problem's exact inner
// optimizers. Only saddle-structured problems carry these.
inline double gap_saddle(const VIProblem& problem, const Vec& zhat, const Vec& yhat) {
  if (!problem.saddle) throw NoSaddleStructure();
  return problem.saddle->max_over_y(zhat) - problem.saddle->min_over_z(yhat);
}

inline double gap_saddle(const VIProblem& problem, const Vec& xhat) {
  const auto [z, y] = problem.split_saddle(xhat);
  return gap_saddle(problem, z, y);
}

// Certified lower bound on gap(x̂): max over supplied points x of <F(x), x̂-x>.
inline double restricted_gap(const VIProblem& problem, const Vec& xhat,
                             const std::vector<Vec>& certificate_points) {
  if (certificate_points.empty()) throw EmptyCertificateSet();
  double best = -std::numeric_limits<double>::infinity();
  for (const Vec& x : certificate_points) {
    best = std::max(best, problem.oracle(x).dot(xhat - x));
  }
  return best;
}

// Default certificate set: extreme points of small boxes, the known solution,
// and whatever extra points the caller collected (for example trailing solver
// iterates).
inline std::vector<Vec> default_certificate_points(const VIProblem& problem,
                                                   const std::vector<Vec>& extra = {}) {
  std::vector<Vec> pts = extra;
  const int d = problem.set->dim();
  if (d <= 8) {
    // probe all sign patterns through the LMO; on boxes these are the vertices
    for (int mask = 0; mask < (1 << d); ++mask) {
      Vec c(d);
      for (int i = 0; i < d; ++i) c[i] = (mask >> i) & 1 ? 1.0 : -1.0;
      pts.push_back(problem.set->lmo(c));
    }
  }
  if (problem.known_solution) pts.push_back(*problem.known_solution);
  return pts;
}

struct MetricReport {
  double residue = 0.0;
  std::optional<double> gap;
  std::optional<double> restricted;
  std::optional<double> dist_to_solution;
};

inline MetricReport measure(const VIProblem& problem, const Vec& xhat) {
  MetricReport rep;
  rep.residue = residue(problem, xhat);
  if (problem.saddle) rep.gap = gap_saddle(problem, xhat);
  if (problem.known_solution) rep.dist_to_solution = (xhat - *problem.known_solution).norm();
  return rep;
}

}  // namespace perseus
