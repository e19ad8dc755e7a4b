#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "perseus/core.hpp"
#include "perseus/oracle.hpp"
#include "perseus/problem.hpp"
#include "perseus/sets.hpp"
#include "perseus/validators.hpp"

namespace perseus {

// Chain-structured convex-concave instance whose saddle VI forces any
// span-respecting method of order p to activate at most one new coordinate
// per oracle call. Scaled so the operator is (p-1)th-order L-smooth and the
// optimum has F(x*) = 0 exactly.
//
//   f(z, y) = C * ( (1/p) sum_i (Az)_i^p y_i
//                   - (1/(p(p+1))) sum_{i=2}^{2T} y_i^{p+1}
//                   - (z_1 - 2T + 1/p) y_1 ),      C = L / (2^{p+1} p!),
//
// with A = blockdiag(U, I), U the upper bidiagonal (1, -1) chain matrix.
// Two coordinate systems for the z block:
//   native_z: the chain polytope 0 <= z_i - z_{i+1} <= 1 (Dykstra projection);
//   box_w:    w = Az maps it to [0,1]^{2T} (exact projection; the operator is
//             the pulled-back field, with an adjusted smoothness constant).

enum class HardCoordinates { native_z, box_w };

struct HardInstanceSpec {
  int p = 2;
  int T_hard = 1;
  double L = 1.0;
  int d = 0;  // per-block dimension in native coordinates; 0 picks 2*T_hard+1
  HardCoordinates coordinates = HardCoordinates::native_z;

  int block_dim() const { return d > 0 ? d : 2 * T_hard + 1; }
  int chain_len() const { return 2 * T_hard; }

  void validate() const {
    if (p < 2) throw InvalidSpec("hard instance needs p >= 2");
    if (T_hard < 1) throw InvalidSpec("hard instance needs T_hard >= 1");
    if (L <= 0) throw InvalidSpec("hard instance needs L > 0");
    if (block_dim() < 2 * T_hard + 1) {
      throw InvalidSpec("hard instance needs d >= 2*T_hard + 1, got d = " +
                        std::to_string(block_dim()));
    }
  }

  double scale() const { return L / (pow_int(2.0, p + 1) * factorial(p)); }

  // f(z*, y*) = L (2T-1) / (2^{p+1} (p+1)!)
  double optimal_value() const { return scale() * (2.0 * T_hard - 1.0) / (p + 1.0); }

  // diameter values used by the lower-bound statement (upper bounds on the
  // exact set diameters)
  double bound_DZ() const { return 4.0 * std::pow(static_cast<double>(T_hard), 1.5); }
  double bound_DY() const { return 2.0 * std::sqrt(static_cast<double>(T_hard)); }
};

namespace hard_detail {

// falling factorial a (a-1) ... (a-k+1); 0 once the chain crosses zero
inline double falling(int a, int k) {
  double r = 1.0;
  for (int j = 0; j < k; ++j) r *= (a - j);
  return r;
}

// actions of U (m x m upper bidiagonal), its transpose and inverses, applied
// to the leading m coordinates; the rest pass through (the identity block)
inline Vec apply_A(const Vec& z, int m) {
  Vec w = z;
  for (int i = 0; i + 1 < m; ++i) w[i] = z[i] - z[i + 1];
  return w;
}

inline Vec apply_AT(const Vec& q, int m) {
  Vec g = q;
  for (int i = m - 1; i >= 1; --i) g[i] = q[i] - q[i - 1];
  return g;
}

inline Vec apply_Ainv(const Vec& w, int m) {
  Vec z = w;
  for (int i = m - 2; i >= 0; --i) z[i] = w[i] + z[i + 1];
  return z;
}

inline Vec apply_AinvT(const Vec& c, int m) {
  Vec b = c;
  for (int i = 1; i < m; ++i) b[i] = b[i - 1] + c[i];
  return b;
}

inline double spectral_norm_Uinv(int m) {
  Mat Uinv = Mat::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) Uinv(i, j) = 1.0;
  }
  Eigen::JacobiSVD<Mat> svd(Uinv);
  return svd.singularValues()(0);
}

// shared algebra on (w, y) blocks; z1 = z_1 in native coordinates and
// sum_i w_i after the change of variables (telescoping sum)
struct Core {
  int p;
  int m;       // chain length 2T
  double C;    // L / (2^{p+1} p!)
  double twoT;

  double inv_p() const { return 1.0 / p; }

  double value(const Vec& w, const Vec& y, double z1) const {
    CompensatedSum s;
    for (int i = 0; i < static_cast<int>(w.size()); ++i) {
      s.add(inv_p() * pow_int(w[i], p) * y[i]);
    }
    for (int i = 1; i < m; ++i) {
      s.add(-pow_int(y[i], p + 1) / (p * (p + 1.0)));
    }
    s.add(-(z1 - twoT + inv_p()) * y[0]);
    return C * s.value();
  }

  // gradient blocks before the A^T pullback: top_i = w_i^{p-1} y_i,
  // bottom as displayed (the -y_1 e_1 / +z_1 e_1 couplings handled by callers)
  Vec grad_top(const Vec& w, const Vec& y) const {
    Vec q(w.size());
    for (int i = 0; i < static_cast<int>(w.size()); ++i) {
      q[i] = pow_int(w[i], p - 1) * y[i];
    }
    return q;
  }

  Vec grad_bottom(const Vec& w, const Vec& y, double z1) const {
    Vec g(w.size());
    for (int i = 0; i < static_cast<int>(w.size()); ++i) {
      double t = -inv_p() * pow_int(w[i], p);
      if (i >= 1 && i < m) t += inv_p() * pow_int(y[i], p);
      if (i == 0) t += z1 - twoT + inv_p();
      g[i] = t;
    }
    return g;
  }

  // k-th derivative action of grad_top along (u, hy): product rule on
  // w^{p-1} y with linear y part
  Vec deriv_top(const Vec& w, const Vec& y, const Vec& u, const Vec& hy, int k) const {
    const double a = falling(p - 1, k);
    const double b = k * falling(p - 1, k - 1);
    Vec out(w.size());
    for (int i = 0; i < static_cast<int>(w.size()); ++i) {
      double t = 0.0;
      if (a != 0.0) t += a * pow_int(w[i], p - 1 - k) * pow_int(u[i], k) * y[i];
      t += b * pow_int(w[i], p - k) * pow_int(u[i], k - 1) * hy[i];
      out[i] = t;
    }
    return out;
  }

  Vec deriv_bottom(const Vec& w, const Vec& y, const Vec& u, const Vec& hy, int k) const {
    const double b = falling(p - 1, k - 1);  // (p-1)!/(p-k)!
    Vec out(w.size());
    for (int i = 0; i < static_cast<int>(w.size()); ++i) {
      double t = -b * pow_int(w[i], p - k) * pow_int(u[i], k);
      if (i >= 1 && i < m) t += b * pow_int(y[i], p - k) * pow_int(hy[i], k);
      out[i] = t;
    }
    return out;
  }

  // separable exact inner optimizers over [0,1] blocks (proof-style reduction)
  double max_over_y(const Vec& w, double z1) const {
    const double c1 = inv_p() * pow_int(w[0], p) - (z1 - twoT + inv_p());
    double total = std::max(c1, 0.0);
    for (int i = 1; i < m; ++i) {
      const double ai = inv_p() * pow_int(w[i], p);
      double best = 0.0;  // y = 0
      for (double y : {1.0, std::clamp(w[i], 0.0, 1.0)}) {
        best = std::max(best, ai * y - pow_int(y, p + 1) / (p * (p + 1.0)));
      }
      total += best;
    }
    return C * total;
  }

  double min_over_w(const Vec& yhat) const {
    double constant = (twoT - inv_p()) * yhat[0];
    for (int i = 1; i < m; ++i) constant -= pow_int(yhat[i], p + 1) / (p * (p + 1.0));
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
      const double yi = std::max(yhat[i], 0.0);
      const double y1 = yhat[0];
      double best = std::min(0.0, inv_p() * yi - y1);  // w = 0 and w = 1
      if (yi > 0.0 && p >= 2) {
        const double ws = std::clamp(std::pow(y1 / yi, 1.0 / (p - 1.0)), 0.0, 1.0);
        best = std::min(best, inv_p() * yi * pow_int(ws, p) - y1 * ws);
      }
      total += best;
    }
    return C * (total + constant);
  }
};

}  // namespace hard_detail

inline VIProblem make_hard_instance(const HardInstanceSpec& spec) {
  spec.validate();
  const int p = spec.p;
  const int m = spec.chain_len();
  const hard_detail::Core core{p, m, spec.scale(), 2.0 * spec.T_hard};

  VIProblem prob;
  prob.regularity = Regularity::Monotone;
  prob.modulus = 0.0;

  if (spec.coordinates == HardCoordinates::box_w) {
    const int dim = 2 * m;
    prob.name = "hard-box";

    OperatorOracle o;
    o.dim = dim;
    o.max_order = p - 1;
    const double norm_uinv = hard_detail::spectral_norm_Uinv(m);
    const double L_box = spec.L * std::pow(norm_uinv, p + 1);
    o.lipschitz_L = L_box;
    o.eval = [core, m](const Vec& x) {
      const Vec w = x.head(m), y = x.tail(m);
      const double z1 = w.sum();
      Vec out(2 * m);
      // U^{-T}(U^T q - y_1 e_1) = q - y_1 * ones
      out.head(m) = core.C * (core.grad_top(w, y).array() - y[0]).matrix();
      out.tail(m) = core.C * core.grad_bottom(w, y, z1);
      return out;
    };
    o.deriv_apply = [core, m](const Vec& x, int k, const Vec& h) {
      const Vec w = x.head(m), y = x.tail(m);
      const Vec hw = h.head(m), hy = h.tail(m);
      Vec out(2 * m);
      Vec top = core.deriv_top(w, y, hw, hy, k);
      if (k == 1) top.array() -= hy[0];
      Vec bot = core.deriv_bottom(w, y, hw, hy, k);
      if (k == 1) bot[0] += hw.sum();
      out.head(m) = core.C * top;
      out.tail(m) = core.C * bot;
      return out;
    };
    prob.oracle = std::move(o);

    prob.set = std::make_shared<Box>(dim, 0.0, 1.0);
    prob.smoothness[p] = L_box;

    Vec sol = Vec::Ones(dim);
    prob.known_solution = sol;
    prob.start = Vec::Zero(dim);

    SaddleStructure s;
    s.dim_z = m;
    s.dim_y = m;
    s.value = [core](const Vec& w, const Vec& y) { return core.value(w, y, w.sum()); };
    s.max_over_y = [core](const Vec& w) { return core.max_over_y(w, w.sum()); };
    s.min_over_z = [core](const Vec& y) { return core.min_over_w(y); };
    prob.saddle = std::move(s);
    return prob;
  }

  const int n = spec.block_dim();
  const int dim = 2 * n;
  prob.name = "hard-native";

  OperatorOracle o;
  o.dim = dim;
  o.max_order = p - 1;
  o.lipschitz_L = spec.L;
  o.eval = [core, n, m](const Vec& x) {
    const Vec z = x.head(n), y = x.tail(n);
    const Vec w = hard_detail::apply_A(z, m);
    Vec out(2 * n);
    Vec top = hard_detail::apply_AT(core.grad_top(w, y), m);
    top[0] -= y[0];
    out.head(n) = core.C * top;
    out.tail(n) = core.C * core.grad_bottom(w, y, z[0]);
    return out;
  };
  o.deriv_apply = [core, n, m](const Vec& x, int k, const Vec& h) {
    const Vec z = x.head(n), y = x.tail(n);
    const Vec h1 = h.head(n), h2 = h.tail(n);
    const Vec w = hard_detail::apply_A(z, m);
    const Vec u = hard_detail::apply_A(h1, m);
    Vec out(2 * n);
    Vec top = hard_detail::apply_AT(core.deriv_top(w, y, u, h2, k), m);
    if (k == 1) top[0] -= h2[0];
    Vec bot = core.deriv_bottom(w, y, u, h2, k);
    if (k == 1) bot[0] += h1[0];
    out.head(n) = core.C * top;
    out.tail(n) = core.C * bot;
    return out;
  };
  prob.oracle = std::move(o);

  // Z: chain slabs 0 <= z_i - z_{i+1} <= 1, 0 <= z_m <= 1, tail pinned to 0
  std::vector<Slab> slabs;
  for (int i = 0; i + 1 < m; ++i) {
    Vec a = Vec::Zero(n);
    a[i] = 1.0;
    a[i + 1] = -1.0;
    slabs.push_back({a, 0.0, 1.0});
  }
  {
    Vec a = Vec::Zero(n);
    a[m - 1] = 1.0;
    slabs.push_back({a, 0.0, 1.0});
  }
  for (int i = m; i < n; ++i) {
    Vec a = Vec::Zero(n);
    a[i] = 1.0;
    slabs.push_back({a, 0.0, 0.0});
  }
  double diam_sq = 0.0;
  for (int kk = 1; kk <= m; ++kk) diam_sq += static_cast<double>(kk) * kk;
  auto z_lmo = [n, m](const Vec& c) {
    // Z is the A^{-1} image of the unit box: maximize <A^{-T}c, w> over the box
    const Vec b = hard_detail::apply_AinvT(c, m);
    Vec w = Vec::Zero(n);
    for (int i = 0; i < m; ++i) w[i] = b[i] > 0.0 ? 1.0 : 0.0;
    Vec z = hard_detail::apply_Ainv(w, m);
    for (int i = m; i < n; ++i) z[i] = 0.0;
    return z;
  };
  auto Z = std::make_shared<SlabIntersection>(n, std::move(slabs), z_lmo, std::sqrt(diam_sq));

  Vec y_hi = Vec::Zero(n);
  for (int i = 0; i < m; ++i) y_hi[i] = 1.0;
  auto Y = std::make_shared<Box>(Vec::Zero(n), y_hi);

  prob.set = std::make_shared<ProductSet>(std::vector<SetPtr>{Z, Y});
  prob.smoothness[p] = spec.L;

  Vec sol = Vec::Zero(dim);
  for (int i = 0; i < m; ++i) {
    sol[i] = static_cast<double>(m - i);  // z*_i = 2T - i + 1 (1-based)
    sol[n + i] = 1.0;
  }
  prob.known_solution = sol;
  prob.start = Vec::Zero(dim);

  SaddleStructure s;
  s.dim_z = n;
  s.dim_y = n;
  s.value = [core, m](const Vec& z, const Vec& y) {
    return core.value(hard_detail::apply_A(z, m), y, z[0]);
  };
  s.max_over_y = [core, m](const Vec& z) {
    return core.max_over_y(hard_detail::apply_A(z, m), z[0]);
  };
  s.min_over_z = [core, n](const Vec& y) { return core.min_over_w(y.head(std::min<int>(n, y.size()))); };
  prob.saddle = std::move(s);
  return prob;
}

// Closed-form restricted min-max value L/(2^{p+1}p!) (T + (T-1)/(p+1)),
// cross-checked against the separable grid reduction: coordinate 1 minimizes
// (1/p)w^p - w and coordinates 2..T minimize (1/(p+1))w^{p+1} - w over [0,1].
inline double restricted_minmax_value(const HardInstanceSpec& spec, double grid_step = 1e-4,
                                      double tol = 1e-6) {
  spec.validate();
  const int p = spec.p;
  const double T = spec.T_hard;
  const double C = spec.scale();
  const double closed = C * (T + (T - 1.0) / (p + 1.0));

  double min1 = std::numeric_limits<double>::infinity();
  double min2 = std::numeric_limits<double>::infinity();
  const int steps = static_cast<int>(std::round(1.0 / grid_step));
  for (int i = 0; i <= steps; ++i) {
    const double w = std::min(1.0, i * grid_step);
    min1 = std::min(min1, pow_int(w, p) / p - w);
    min2 = std::min(min2, pow_int(w, p + 1) / (p + 1.0) - w);
  }
  const double brute = C * (2.0 * T - 1.0 / p + min1 + (T - 1.0) * min2);
  if (std::abs(closed - brute) > tol) throw BruteForceMismatch(closed, brute);
  return closed;
}

struct HardValidationReport {
  double grad_at_solution_inf = 0.0;  // ||F(x*)||_inf, must be ~0
  double value_error = 0.0;           // |f(z*,y*) - closed form|
  double smoothness_estimate = 0.0;   // sampled order-(p-1) constant
  double smoothness_bound = 0.0;      // recorded constant for this instance
  MonotoneReport monotone;            // convex-concave => no violations
};

inline HardValidationReport validate_hard_instance(const HardInstanceSpec& spec,
                                                   int pair_count = 48,
                                                   unsigned seed = 20240906u) {
  const VIProblem prob = make_hard_instance(spec);
  HardValidationReport rep;
  const Vec& xs = prob.solution();
  rep.grad_at_solution_inf = prob.oracle(xs).lpNorm<Eigen::Infinity>();
  const auto [zs, ys] = prob.split_saddle(xs);
  rep.value_error = std::abs(prob.saddle->value(zs, ys) - spec.optimal_value());
  rep.smoothness_bound = prob.lipschitz(spec.p);
  rep.smoothness_estimate =
      estimate_smoothness(prob.oracle, *prob.set, spec.p - 1, pair_count, 32, seed);
  rep.monotone = check_monotone(prob.oracle, *prob.set, 64, seed ^ 0x5bd1e995u);
  return rep;
}

}  // namespace perseus
