#pragma once

#include <utility>
#include <vector>

#include "perseus/core.hpp"
#include "perseus/oracle.hpp"

namespace perseus {

// Regularized Taylor surrogate of F around v:
//   F_v(x) = F(v) + sum_{k=1}^{p-1} (1/k!) ∇^(k)F(v)[x-v]^k
//            + (5L/(p-1)!) ||x-v||^{p-1} (x-v).
// For p = 1 the sum is empty and the regularizer is plain 5L(x-v).
//
// Evaluation detail that matters: the subproblem certificate compares
// sup_x <F_v(x̂), x̂-x> against (L/p!)||x̂-v||^{p+1}, which near restart fixed
// points sits many orders of magnitude below eps*||F(v)||. F(v) and the
// first-order term cancel there, so the first-order term is materialized once
// as a matrix (the action is linear in h, so d basis probes reconstruct it
// exactly) and every entry of F_v is accumulated with compensated products.
// That makes eval() exact for the model it represents; oracle rounding inside
// F(v) and the probed columns only perturbs which model we solve, not whether
// its certificate is trustworthy.
struct TaylorModel {
  OperatorOracle source;
  Vec center_v;
  int order_p = 1;
  double lipschitz_L = 0.0;
  double reg_coefficient = 0.0;  // 5L/(p-1)! unless deliberately overridden
  Vec f_center;                  // cached F(v)
  Mat jacobian;                  // cached ∇F(v), materialized when p >= 2

  // Pure Taylor part, no regularizer.
  Vec taylor_part(const Vec& x) const { return assemble(x, false); }

  Vec regularizer(const Vec& x) const {
    const Vec d = x - center_v;
    const double r = d.norm();
    if (r == 0.0) return Vec::Zero(x.size());
    return reg_coefficient * pow_int(r, order_p - 1) * d;
  }

  Vec eval(const Vec& x) const { return assemble(x, true); }

 private:
  Vec assemble(const Vec& x, bool with_reg) const {
    if (x.size() != center_v.size()) throw DimensionMismatch("model evaluation point");
    const Vec d = x - center_v;
    const double r = d.norm();
    // higher-order terms straight from the oracle; their magnitude is O(r^2)
    // so their rounding never competes with the first-order cancellation
    std::vector<Vec> high;
    high.reserve(std::max(order_p - 2, 0));
    for (int k = 2; k <= order_p - 1; ++k) {
      high.push_back(source.deriv(center_v, k, d) / factorial(k));
    }
    const double reg_scale =
        (!with_reg || r == 0.0) ? 0.0 : reg_coefficient * pow_int(r, order_p - 1);
    const Eigen::Index n = x.size();
    Vec out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      CompensatedSum s;
      s.add(f_center[i]);
      if (order_p >= 2) {
        for (Eigen::Index j = 0; j < n; ++j) {
          const double p = jacobian(i, j) * d[j];
          s.add(p);
          s.add(std::fma(jacobian(i, j), d[j], -p));
        }
      }
      for (const Vec& t : high) s.add(t[i]);
      if (reg_scale != 0.0) {
        const double p = reg_scale * d[i];
        s.add(p);
        s.add(std::fma(reg_scale, d[i], -p));
      }
      out[i] = s.value();
    }
    return out;
  }
};

inline TaylorModel build_model(const OperatorOracle& oracle, const Vec& v, int p, double L) {
  if (p < 1) throw InvalidSpec("model order must be >= 1");
  if (p > oracle.max_order + 1) {
    throw OrderUnavailable("model of order " + std::to_string(p) + " needs derivatives up to " +
                           std::to_string(p - 1) + ", oracle has " +
                           std::to_string(oracle.max_order));
  }
  if (!all_finite(v)) throw InvalidSpec("model center is not finite");
  TaylorModel m;
  m.source = oracle;
  m.center_v = v;
  m.order_p = p;
  m.lipschitz_L = L;
  m.reg_coefficient = 5.0 * L / factorial(p - 1);
  m.f_center = oracle(v);
  if (p >= 2) {
    m.jacobian.resize(oracle.dim, oracle.dim);
    Vec e = Vec::Zero(oracle.dim);
    for (int j = 0; j < oracle.dim; ++j) {
      e[j] = 1.0;
      m.jacobian.col(j) = oracle.deriv(v, 1, e);
      e[j] = 0.0;
    }
  }
  return m;
}

struct RemainderReport {
  double lhs = 0.0;  // || F(x) - Taylor_v(x) ||
  double rhs = 0.0;  // (L/p!) ||x-v||^p
  bool holds = false;
};

// Smoothness consequence used throughout the analysis: the pure Taylor part
// tracks F to within (L/p!)||x-v||^p.
inline RemainderReport remainder_check(const TaylorModel& model, const Vec& x,
                                       double slack = 1e-9) {
  RemainderReport rep;
  rep.lhs = (model.source(x) - model.taylor_part(x)).norm();
  rep.rhs = model.lipschitz_L / factorial(model.order_p) *
            pow_int((x - model.center_v).norm(), model.order_p);
  rep.holds = rep.lhs <= rep.rhs * (1.0 + slack) + 1e-300;
  return rep;
}

}  // namespace perseus
