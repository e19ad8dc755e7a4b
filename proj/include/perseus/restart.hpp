#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "perseus/core.hpp"
#include "perseus/solver.hpp"

namespace perseus {

// Inner iteration count per restart epoch. opt selects the output rule the
// epochs run with: 0 weighted average (strongly monotone), 1 best iterate
// (strong Minty), 2 last iterate (local superlinear regime).
inline int t_inner(int p, double L, double sigma, double D, int opt) {
  if (sigma <= 0) throw InvalidSpec("t_inner needs sigma > 0");
  if (D <= 0) throw InvalidSpec("t_inner needs D > 0");
  const double ratio = L * pow_int(D, p - 1) / sigma;
  const double pf = factorial(p);
  double value = 0.0;
  switch (opt) {
    case 0:
      value = std::pow(std::pow(2.0, p + 1) * (5.0 * p - 2.0) / pf * ratio, 2.0 / (p + 1));
      break;
    case 1:
      value = std::pow(std::pow(2.0, p + 2) * (5.0 * p + 1.0) / pf * ratio, 2.0 / p) +
              std::pow(std::pow(2.0, p + 5) / pf * ratio, 2.0 / (p + 1));
      break;
    case 2:
      return 1;
    default:
      throw InvalidOpt(opt);
  }
  return static_cast<int>(std::ceil(value - 1e-12));
}

struct EpochRecord {
  int epoch = 0;
  Vec x_start;
  Vec x_end;
  std::optional<double> dist_start;  // to known solution, when available
  std::optional<double> dist_end;
  SolveStatus inner_status = SolveStatus::IterationsExhausted;
  double sum_lambda = 0.0;
  int inner_iterations = 0;
};

struct RestartResult {
  SolveStatus status = SolveStatus::IterationsExhausted;
  Vec output;
  std::vector<EpochRecord> epochs;
  // inner run traces in epoch order, for invariant recheck
  std::vector<SolveResult> inner_runs;
};

// Restarted scheme: each epoch reruns the base solver from the previous
// epoch's output with a fixed inner budget T_inner(p, L, sigma, D, opt).
// Early Converged / DegenerateStop epochs end the outer loop (the iterate is
// already at the stop tolerance). D <= 0 means "use the set diameter".
inline RestartResult perseus_restart_run(const VIProblem& problem, int p, double L,
                                         double sigma, double D, int outer_epochs, int opt,
                                         std::optional<Vec> start = std::nullopt,
                                         ToleranceSet tol = {},
                                         std::optional<int> t_inner_override = std::nullopt) {
  if (D <= 0) D = problem.set->diameter();
  const int inner_T = t_inner_override ? *t_inner_override : t_inner(p, L, sigma, D, opt);

  SolverConfig config;
  config.order_p = p;
  config.lipschitz_L = L;
  config.iterations_T = inner_T;
  config.opt = opt;
  config.tolerances = tol;

  RestartResult out;
  Vec x = start ? *start : problem.start;

  for (int e = 0; e < outer_epochs; ++e) {
    EpochRecord epoch;
    epoch.epoch = e + 1;
    epoch.x_start = x;
    if (problem.known_solution) {
      epoch.dist_start = (x - *problem.known_solution).norm();
    }

    SolveResult inner = perseus_run(problem, config, x);

    x = inner.output;
    epoch.x_end = x;
    if (problem.known_solution) {
      epoch.dist_end = (x - *problem.known_solution).norm();
    }
    epoch.inner_status = inner.status;
    epoch.sum_lambda = inner.sum_lambda;
    epoch.inner_iterations = static_cast<int>(inner.trace.size());
    out.epochs.push_back(epoch);
    out.inner_runs.push_back(std::move(inner));

    const SolveStatus st = out.inner_runs.back().status;
    if (st == SolveStatus::Converged || st == SolveStatus::DegenerateStop ||
        st == SolveStatus::SubsolverFailure) {
      out.status = st;
      out.output = x;
      return out;
    }
  }

  out.status = SolveStatus::IterationsExhausted;
  out.output = x;
  return out;
}

}  // namespace perseus
