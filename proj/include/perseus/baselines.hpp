#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "perseus/core.hpp"
#include "perseus/problem.hpp"
#include "perseus/sets.hpp"
#include "perseus/solver.hpp"

namespace perseus {

// First-order reference methods sharing the solver's result format, so traces
// and summaries can be compared side by side. Residues are not evaluated per
// iteration (each one costs an extra oracle call plus an LMO); the residue
// field is NaN and downstream writers treat it as unavailable.

enum class BaselineMethod { Extragradient, DualExtrapolation };

inline const char* to_string(BaselineMethod m) {
  return m == BaselineMethod::Extragradient ? "eg" : "de";
}

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::Extragradient;
  double step = 0.1;  // primal step; for dual extrapolation this is 1/beta
  int iterations = 100;
  ToleranceSet tolerances;

  void validate() const {
    if (step <= 0) throw InvalidSpec("baseline step must be positive");
    if (iterations < 1) throw InvalidSpec("baseline needs at least one iteration");
  }
};

namespace baseline_detail {

inline Vec checked_start(const VIProblem& problem, const std::optional<Vec>& start,
                         const ToleranceSet& tol) {
  const Vec x0 = start ? *start : problem.start;
  const double D = problem.set->diameter();
  if (!problem.set->contains(x0, tol.membership_tol * (1.0 + D))) {
    throw NotInSet("start point");
  }
  return x0;
}

}  // namespace baseline_detail

// x_{k+1/2} = P(x_k - eta F(x_k)), x_{k+1} = P(x_k - eta F(x_{k+1/2})).
// Output is the plain average of the half points (the points whose operator
// values drive the updates); trace rows carry x = half point, v = base point.
inline SolveResult extragradient_run(const VIProblem& problem, const BaselineConfig& config,
                                     std::optional<Vec> start = std::nullopt) {
  config.validate();
  const FeasibleSet& X = *problem.set;
  const OperatorOracle& F = problem.oracle;
  const ToleranceSet& tol = config.tolerances;
  const bool keep_vectors = F.dim <= tol.trace_vector_dim_cap;

  Vec x = baseline_detail::checked_start(problem, start, tol);

  SolveResult result;
  result.x0 = x;
  Vec mean = Vec::Zero(F.dim);

  for (int k = 0; k < config.iterations; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    const Vec xh = X.project(x - config.step * F(x));
    const Vec xn = X.project(x - config.step * F(xh));

    IterationRecord rec;
    rec.k = k + 1;
    rec.lambda = 1.0;
    rec.r = (xh - x).norm();
    rec.residue = std::numeric_limits<double>::quiet_NaN();
    if (keep_vectors) {
      rec.x = xh;
      rec.v = x;
    }
    rec.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    result.trace.push_back(std::move(rec));

    mean += (xh - mean) / (k + 1.0);
    x = xn;
  }

  result.status = SolveStatus::IterationsExhausted;
  result.output = mean;
  result.sum_lambda = config.iterations;
  result.s_final = Vec::Zero(F.dim);
  return result;
}

// v_k = P(x0 + beta^{-1} s_{k-1}), x_k = P(v_k - beta^{-1} F(v_k)),
// s_k = s_{k-1} - F(x_k), with beta = 1/step. Output averages the x_k.
inline SolveResult dual_extrapolation_run(const VIProblem& problem,
                                          const BaselineConfig& config,
                                          std::optional<Vec> start = std::nullopt) {
  config.validate();
  const FeasibleSet& X = *problem.set;
  const OperatorOracle& F = problem.oracle;
  const ToleranceSet& tol = config.tolerances;
  const bool keep_vectors = F.dim <= tol.trace_vector_dim_cap;

  const Vec x0 = baseline_detail::checked_start(problem, start, tol);

  SolveResult result;
  result.x0 = x0;
  Vec s = Vec::Zero(F.dim);
  Vec mean = Vec::Zero(F.dim);

  for (int k = 0; k < config.iterations; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    const Vec v = X.project(x0 + config.step * s);
    const Vec x = X.project(v - config.step * F(v));
    s -= F(x);

    IterationRecord rec;
    rec.k = k + 1;
    rec.lambda = 1.0;
    rec.r = (x - v).norm();
    rec.residue = std::numeric_limits<double>::quiet_NaN();
    if (keep_vectors) {
      rec.x = x;
      rec.v = v;
      rec.s = s;
    }
    rec.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    result.trace.push_back(std::move(rec));

    mean += (x - mean) / (k + 1.0);
  }

  result.status = SolveStatus::IterationsExhausted;
  result.output = mean;
  result.sum_lambda = config.iterations;
  result.s_final = s;
  return result;
}

inline SolveResult baseline_run(const VIProblem& problem, const BaselineConfig& config,
                                std::optional<Vec> start = std::nullopt) {
  return config.method == BaselineMethod::Extragradient
             ? extragradient_run(problem, config, std::move(start))
             : dual_extrapolation_run(problem, config, std::move(start));
}

}  // namespace perseus
