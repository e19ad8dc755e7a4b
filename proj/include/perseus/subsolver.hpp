#pragma once

#include <algorithm>
#include <array>
#include <limits>
#include <vector>

#include "perseus/core.hpp"
#include "perseus/sets.hpp"
#include "perseus/taylor.hpp"

namespace perseus {

struct SubSolveCertificate {
  Vec candidate;
  double residue = 0.0;      // sup_{x in X} <F_v(x̂), x̂ - x>, exact via LMO
  double threshold = 0.0;    // (L/p!) ||x̂ - v||^{p+1}
  int inner_iterations = 0;
  bool degenerate = false;   // ||x̂ - v|| < r_min; step size update must not run

  bool certified(double slack = 0.0) const { return residue <= threshold * (1.0 + slack); }
};

// sup_{x in X} <F_v(x̂), x̂ - x> computed exactly: the supremum of a linear
// functional over X is attained at lmo(-F_v(x̂)). Always >= 0 up to rounding
// since x = x̂ is feasible.
inline double model_residue(const TaylorModel& model, const Vec& xhat, const FeasibleSet& set,
                            double membership_tol = 1e-8) {
  if (!set.contains(xhat, membership_tol * (1.0 + set.diameter()))) {
    throw NotInSet("model residue candidate");
  }
  const Vec g = model.eval(xhat);
  const Vec worst = set.lmo(-g);
  return compensated_dot(g, xhat - worst);
}

struct SubSolverOptions {
  int budget = 5000;
  double r_min = 0.0;          // degeneracy guard; caller scales by diameter
  double backtrack_ratio = 0.9;
  unsigned seed = 20240903u;
};

namespace detail {

inline double threshold_at(const TaylorModel& model, double r) {
  return model.lipschitz_L / factorial(model.order_p) * pow_int(r, model.order_p + 1);
}

// Initial extragradient step: 1 / (5 L D^{p-2} + ||∇F(v)||_est), the local
// Lipschitz scale of the model operator near v.
inline double initial_step(const TaylorModel& model, const FeasibleSet& set,
                           unsigned seed) {
  std::mt19937_64 rng(seed);
  double jac_norm = 0.0;
  if (model.order_p >= 2) {
    for (int t = 0; t < 8; ++t) {
      const Vec h = unit_direction(rng, model.source.dim);
      jac_norm = std::max(jac_norm, (model.jacobian * h).norm());
    }
  }
  const double reg_scale =
      5.0 * model.lipschitz_L * pow_int(set.diameter(), std::max(model.order_p - 2, 0));
  const double denom = reg_scale + jac_norm;
  return denom > 0.0 ? 1.0 / denom : 1.0;
}

}  // namespace detail

// Find x̂ in X with sup_x <F_v(x̂), x̂-x> <= (L/p!)||x̂-v||^{p+1}.
//
// p = 1: the model VI is solved exactly by one projection,
//        x̂ = P(v - F(v)/(5L)).
// p >= 2: projected extragradient on F_v with halving backtracking; every
//        half/full step is tested against the certificate and the first
//        certified iterate is returned. A candidate within r_min of v after
//        the inner iteration has stalled is accepted with the degenerate flag
//        (the model solution coincides with v; thresholds of order r^{p+1}
//        cannot be met and the caller stops instead).
inline SubSolveCertificate solve_subproblem(const TaylorModel& model, const FeasibleSet& set,
                                            const SubSolverOptions& opts = {}) {
  const Vec& v = model.center_v;
  const int p = model.order_p;

  const auto make_cert = [&](const Vec& cand, double res, int iters,
                             bool degenerate) {
    SubSolveCertificate c;
    c.candidate = cand;
    c.residue = res;
    c.threshold = detail::threshold_at(model, (cand - v).norm());
    c.inner_iterations = iters;
    c.degenerate = degenerate;
    return c;
  };

  if (p == 1) {
    const Vec xhat = set.project(v - model.f_center / model.reg_coefficient);
    const double res = model_residue(model, xhat, set);
    const double r = (xhat - v).norm();
    if (r < opts.r_min) return make_cert(xhat, res, 0, true);
    const double thr = detail::threshold_at(model, r);
    if (res > thr) throw BudgetExhausted(res, thr, 0);
    return make_cert(xhat, res, 0, false);
  }

  // scalar models get a deterministic treatment: every interval VI solution
  // is either an endpoint or a sign change of F_v, so isolate sign changes on
  // a grid, polish by bisection, and certify the best candidate. Extragradient
  // can cycle when the scalar model is nonmonotone; this path cannot.
  if (model.source.dim == 1) {
    const double hi = set.lmo(Vec::Ones(1))[0];
    const double lo = set.lmo(-Vec::Ones(1))[0];
    int evals = 0;
    auto gfun = [&](double t) {
      Vec xt(1);
      xt[0] = t;
      ++evals;
      return model.eval(xt)[0];
    };

    std::vector<double> cands{lo, hi, set.project(v)[0]};
    const int cells = 512;
    double prev_t = lo, prev_g = gfun(lo);
    for (int i = 1; i <= cells; ++i) {
      const double t = lo + (hi - lo) * i / cells;
      const double gt = gfun(t);
      if (prev_g == 0.0) cands.push_back(prev_t);
      if ((prev_g < 0.0 && gt > 0.0) || (prev_g > 0.0 && gt < 0.0)) {
        double a = prev_t, b = t, ga = prev_g;
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (a + b);
          if (mid <= a || mid >= b) break;  // interval collapsed to one ulp
          const double gm = gfun(mid);
          if (gm == 0.0) {
            a = b = mid;
            break;
          }
          if ((ga < 0.0) == (gm < 0.0)) {
            a = mid;
            ga = gm;
          } else {
            b = mid;
          }
        }
        cands.push_back(0.5 * (a + b));
      }
      prev_t = t;
      prev_g = gt;
    }

    double best_res = std::numeric_limits<double>::infinity();
    double best_thr = 0.0;
    double best_cand = cands.front();
    bool have_cert = false;
    double cert_res = 0.0, cert_cand = 0.0;
    for (double c : cands) {
      Vec xc(1);
      xc[0] = c;
      const double res = model_residue(model, xc, set);
      const double thr = detail::threshold_at(model, std::abs(c - v[0]));
      if (res <= thr && (!have_cert || res < cert_res)) {
        have_cert = true;
        cert_res = res;
        cert_cand = c;
      }
      if (res < best_res) {
        best_res = res;
        best_thr = thr;
        best_cand = c;
      }
    }

    Vec out(1);
    if (have_cert) {
      out[0] = cert_cand;
      return make_cert(out, cert_res, evals, std::abs(cert_cand - v[0]) < opts.r_min);
    }
    if (std::abs(best_cand - v[0]) < opts.r_min) {
      out[0] = best_cand;
      return make_cert(out, best_res, evals, true);
    }
    throw BudgetExhausted(best_res, best_thr, evals);
  }

  // seed at v; an exact stationary seed short-circuits as degenerate
  Vec x = set.project(v);
  {
    const double res = model_residue(model, x, set);
    if (res <= detail::threshold_at(model, (x - v).norm())) {
      return make_cert(x, res, 0, (x - v).norm() < opts.r_min);
    }
  }

  const double eta0 = detail::initial_step(model, set, opts.seed);
  double eta = eta0;
  const double eta_floor = eta0 * 1e-12;
  const double eta_cap = eta0 * 100.0;
  double best_res = std::numeric_limits<double>::infinity();
  double best_thr = 0.0;

  Vec g(model.source.dim), xh(model.source.dim), gh(model.source.dim);
  for (int iter = 1; iter <= opts.budget; ++iter) {
    g = model.eval(x);
    xh = set.project(x - eta * g);
    gh = model.eval(xh);
    // halving backtask: keep eta * ||F_v(x_h) - F_v(x)|| within a fraction of
    // the actual displacement so the extragradient contraction applies
    while (eta > eta_floor &&
           eta * (gh - g).norm() > opts.backtrack_ratio * (xh - x).norm() &&
           (xh - x).norm() > 0.0) {
      eta *= 0.5;
      xh = set.project(x - eta * g);
      gh = model.eval(xh);
    }
    const Vec xn = set.project(x - eta * gh);

    const std::array<const Vec*, 2> step_cands{&xh, &xn};
    for (const Vec* cand : step_cands) {
      const double r = (*cand - v).norm();
      const double res = model_residue(model, *cand, set);
      const double thr = detail::threshold_at(model, r);
      if (res <= thr) return make_cert(*cand, res, iter, false);
      if (res < best_res) {
        best_res = res;
        best_thr = thr;
      }
    }

    // stalled next to v: the model solution is v itself for all we can tell
    if ((xn - v).norm() < opts.r_min && (xn - x).norm() < 0.1 * opts.r_min) {
      return make_cert(xn, model_residue(model, xn, set), iter, true);
    }

    x = xn;
    eta = std::min(eta * 1.05, eta_cap);
  }
  throw BudgetExhausted(best_res, best_thr, opts.budget);
}

}  // namespace perseus
