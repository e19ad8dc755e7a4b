#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "perseus/core.hpp"
#include "perseus/hard_instance.hpp"
#include "perseus/oracle.hpp"
#include "perseus/problem.hpp"
#include "perseus/sets.hpp"

namespace perseus {

struct UnknownProblem : std::invalid_argument {
  explicit UnknownProblem(const std::string& name)
      : std::invalid_argument("unknown problem '" + name + "'") {}
};

namespace zoo_detail {

// block-rotation skew matrix: pairs (0,1), (2,3), ...; odd trailing coordinate
// maps to zero
inline Mat pair_rotation(int dim) {
  Mat J = Mat::Zero(dim, dim);
  for (int i = 0; i + 1 < dim; i += 2) {
    J(i, i + 1) = -1.0;
    J(i + 1, i) = 1.0;
  }
  return J;
}

inline double spectral_norm(const Mat& M) {
  Eigen::JacobiSVD<Mat> svd(M);
  return svd.rows() == 0 ? 0.0 : svd.singularValues()(0);
}

// linear VI field x -> M x on a box, with known solution at the origin
inline OperatorOracle linear_oracle(Mat M) {
  auto Mp = std::make_shared<Mat>(std::move(M));
  OperatorOracle o;
  o.dim = static_cast<int>(Mp->rows());
  o.max_order = 8;
  o.lipschitz_L = spectral_norm(*Mp);
  o.eval = [Mp](const Vec& x) { return Vec(*Mp * x); };
  o.deriv_apply = [Mp](const Vec&, int k, const Vec& h) {
    if (k == 1) return Vec(*Mp * h);
    return Vec(Vec::Zero(Mp->rows()));
  };
  return o;
}

}  // namespace zoo_detail

// min-max coupling f(z, y) = z^T B y over a pair of boxes [-rho, rho]; the
// canonical monotone-but-not-strongly-monotone test field F = (By, -B^T z)
inline VIProblem make_bilinear_saddle(const Mat& B, double rho = 1.0) {
  if (rho <= 0) throw InvalidSpec("bilinear saddle needs rho > 0");
  const int dz = static_cast<int>(B.rows());
  const int dy = static_cast<int>(B.cols());
  if (dz < 1 || dy < 1) throw InvalidSpec("bilinear saddle needs a nonempty matrix");
  const int dim = dz + dy;
  auto Bp = std::make_shared<Mat>(B);

  VIProblem prob;
  prob.name = "bilinear";
  prob.regularity = Regularity::Monotone;
  prob.modulus = 0.0;

  OperatorOracle o;
  o.dim = dim;
  o.max_order = 8;
  o.lipschitz_L = zoo_detail::spectral_norm(B);
  o.eval = [Bp, dz, dy](const Vec& x) {
    Vec out(dz + dy);
    out.head(dz) = *Bp * x.tail(dy);
    out.tail(dy) = -Bp->transpose() * x.head(dz);
    return out;
  };
  o.deriv_apply = [Bp, dz, dy](const Vec&, int k, const Vec& h) {
    if (k != 1) return Vec(Vec::Zero(dz + dy));
    Vec out(dz + dy);
    out.head(dz) = *Bp * h.tail(dy);
    out.tail(dy) = -Bp->transpose() * h.head(dz);
    return out;
  };
  prob.oracle = std::move(o);

  prob.set = std::make_shared<Box>(dim, -rho, rho);
  prob.smoothness[1] = zoo_detail::spectral_norm(B);
  prob.known_solution = Vec::Zero(dim);
  prob.start = Vec::Constant(dim, rho);

  SaddleStructure s;
  s.dim_z = dz;
  s.dim_y = dy;
  s.value = [Bp](const Vec& z, const Vec& y) { return z.dot(*Bp * y); };
  s.max_over_y = [Bp, rho](const Vec& z) {
    return rho * (Bp->transpose() * z).lpNorm<1>();
  };
  s.min_over_z = [Bp, rho](const Vec& y) { return -rho * (*Bp * y).lpNorm<1>(); };
  prob.saddle = std::move(s);
  return prob;
}

// F(x) = mu x + a J x on [-rho, rho]^dim: strongly monotone with modulus mu,
// rotation part makes it genuinely non-symmetric
inline VIProblem make_strongly_monotone(double mu, double a, int dim = 2, double rho = 1.0) {
  if (mu <= 0) throw InvalidSpec("strongly monotone field needs mu > 0");
  if (dim < 1 || rho <= 0) throw InvalidSpec("bad strongly monotone geometry");

  Mat M = mu * Mat::Identity(dim, dim) + a * zoo_detail::pair_rotation(dim);
  VIProblem prob;
  prob.name = "strongly-monotone";
  prob.regularity = Regularity::StronglyMonotone;
  prob.modulus = mu;
  prob.oracle = zoo_detail::linear_oracle(std::move(M));
  prob.set = std::make_shared<Box>(dim, -rho, rho);
  prob.smoothness[1] = dim >= 2 ? std::hypot(mu, a) : mu;
  prob.known_solution = Vec::Zero(dim);
  prob.start = Vec::Constant(dim, 0.9 * rho);
  return prob;
}

// strongly monotone with a genuinely nonlinear (quadratic) field, so that
// second-order smoothness is exact: F(x) = mu x + a J x + gamma x .* x,
// sigma = mu - 2 gamma rho and L_2 = 2 gamma
inline VIProblem make_sm_quadratic(double mu = 1.0, double a = 0.5, double gamma = 0.25,
                                   int dim = 2, double rho = 1.0) {
  if (mu <= 0 || gamma < 0 || rho <= 0 || dim < 1) {
    throw InvalidSpec("bad quadratic field parameters");
  }
  const double sigma = mu - 2.0 * gamma * rho;
  if (sigma <= 0) throw InvalidSpec("quadratic field not strongly monotone: mu <= 2*gamma*rho");

  auto Mp = std::make_shared<Mat>(mu * Mat::Identity(dim, dim) +
                                  a * zoo_detail::pair_rotation(dim));
  VIProblem prob;
  prob.name = "sm-quadratic";
  prob.regularity = Regularity::StronglyMonotone;
  prob.modulus = sigma;

  OperatorOracle o;
  o.dim = dim;
  o.max_order = 8;
  o.lipschitz_L = 2.0 * gamma;
  o.eval = [Mp, gamma](const Vec& x) {
    return Vec(*Mp * x + gamma * x.cwiseProduct(x));
  };
  o.deriv_apply = [Mp, gamma, dim](const Vec& x, int k, const Vec& h) {
    if (k == 1) return Vec(*Mp * h + 2.0 * gamma * x.cwiseProduct(h));
    if (k == 2) return Vec(2.0 * gamma * h.cwiseProduct(h));
    return Vec(Vec::Zero(dim));
  };
  prob.oracle = std::move(o);

  prob.set = std::make_shared<Box>(dim, -rho, rho);
  prob.smoothness[1] = zoo_detail::spectral_norm(*Mp) + 2.0 * gamma * rho;
  prob.smoothness[2] = 2.0 * gamma;
  prob.known_solution = Vec::Zero(dim);
  prob.start = Vec::Constant(dim, 0.5 * rho);
  return prob;
}

// scalar F(x) = x (x-1)^2 on [0, 2]: x* = 0 is a weak (Minty) solution while
// the field is not monotone (F' < 0 on (1/3, 1)); polynomial derivatives give
// exact smoothness constants per order
inline VIProblem make_minty_scalar() {
  VIProblem prob;
  prob.name = "minty-scalar";
  prob.regularity = Regularity::Minty;
  prob.modulus = 0.0;

  OperatorOracle o;
  o.dim = 1;
  o.max_order = 8;
  o.lipschitz_L = 5.0;  // max |3x^2 - 4x + 1| on [0, 2], attained at x = 2
  o.eval = [](const Vec& x) {
    Vec out(1);
    out[0] = x[0] * (x[0] - 1.0) * (x[0] - 1.0);
    return out;
  };
  o.deriv_apply = [](const Vec& x, int k, const Vec& h) {
    Vec out(1);
    const double t = x[0];
    if (k == 1) out[0] = (3.0 * t * t - 4.0 * t + 1.0) * h[0];
    else if (k == 2) out[0] = (6.0 * t - 4.0) * h[0] * h[0];
    else if (k == 3) out[0] = 6.0 * h[0] * h[0] * h[0];
    else out[0] = 0.0;
    return out;
  };
  prob.oracle = std::move(o);

  prob.set = std::make_shared<Box>(1, 0.0, 2.0);
  prob.smoothness[1] = 5.0;
  prob.smoothness[2] = 8.0;  // max |6x - 4| at x = 2
  prob.smoothness[3] = 6.0;  // constant third derivative
  prob.known_solution = Vec::Zero(1);
  prob.start = Vec::Constant(1, 2.0);
  return prob;
}

// scalar F(x) = mu_m x (2 + sin(omega x)) on [-1, 1]: <F(x), x> >= mu_m x^2
// everywhere (strong Minty at 0) but F' changes sign for omega large enough.
// Smoothness constants come from a dense grid scan, padded slightly.
inline VIProblem make_strong_minty(double mu_m = 1.0, double omega = 6.0) {
  if (mu_m <= 0) throw InvalidSpec("strong Minty field needs mu_m > 0");

  VIProblem prob;
  prob.name = "strong-minty";
  prob.regularity = Regularity::StrongMinty;
  prob.modulus = mu_m;

  auto f1 = [mu_m, omega](double t) {
    return mu_m * (2.0 + std::sin(omega * t) + omega * t * std::cos(omega * t));
  };
  auto f2 = [mu_m, omega](double t) {
    return mu_m * (2.0 * omega * std::cos(omega * t) - omega * omega * t * std::sin(omega * t));
  };

  OperatorOracle o;
  o.dim = 1;
  o.max_order = 2;
  o.eval = [mu_m, omega](const Vec& x) {
    Vec out(1);
    out[0] = mu_m * x[0] * (2.0 + std::sin(omega * x[0]));
    return out;
  };
  o.deriv_apply = [f1, f2](const Vec& x, int k, const Vec& h) {
    Vec out(1);
    if (k == 1) out[0] = f1(x[0]) * h[0];
    else out[0] = f2(x[0]) * h[0] * h[0];
    return out;
  };

  double l1 = 0.0, l2 = 0.0;
  for (int i = -10000; i <= 10000; ++i) {
    const double t = i * 1e-4;
    l1 = std::max(l1, std::abs(f1(t)));
    l2 = std::max(l2, std::abs(f2(t)));
  }
  o.lipschitz_L = l1 * (1.0 + 1e-3);
  prob.smoothness[1] = l1 * (1.0 + 1e-3);
  prob.smoothness[2] = l2 * (1.0 + 1e-3);
  prob.oracle = std::move(o);

  prob.set = std::make_shared<Box>(1, -1.0, 1.0);
  prob.known_solution = Vec::Zero(1);
  prob.start = Vec::Constant(1, 1.0);
  return prob;
}

// bilinear coupling with a separable quartic regularizer on each side:
// f(z, y) = z^T B y + (c/4)||z||_4^4 - (c/4)||y||_4^4. Monotone, smooth at
// second order with L_2 = 6 c rho, and the inner max/min stay closed-form.
inline VIProblem make_cubic_bilinear(const Mat& B, double rho = 1.0, double c = 0.5) {
  if (rho <= 0 || c <= 0) throw InvalidSpec("cubic bilinear needs rho > 0 and c > 0");
  const int dz = static_cast<int>(B.rows());
  const int dy = static_cast<int>(B.cols());
  if (dz < 1 || dy < 1) throw InvalidSpec("cubic bilinear needs a nonempty matrix");
  const int dim = dz + dy;
  auto Bp = std::make_shared<Mat>(B);

  VIProblem prob;
  prob.name = "cubic-bilinear";
  prob.regularity = Regularity::Monotone;
  prob.modulus = 0.0;

  OperatorOracle o;
  o.dim = dim;
  o.max_order = 8;
  o.lipschitz_L = zoo_detail::spectral_norm(B) + 3.0 * c * rho * rho;
  o.eval = [Bp, c, dz, dy](const Vec& x) {
    const Vec z = x.head(dz), y = x.tail(dy);
    Vec out(dz + dy);
    out.head(dz) = *Bp * y + c * z.array().cube().matrix();
    out.tail(dy) = -Bp->transpose() * z + c * y.array().cube().matrix();
    return out;
  };
  o.deriv_apply = [Bp, c, dz, dy](const Vec& x, int k, const Vec& h) {
    const Vec z = x.head(dz), y = x.tail(dy);
    const Vec hz = h.head(dz), hy = h.tail(dy);
    Vec out = Vec::Zero(dz + dy);
    if (k == 1) {
      out.head(dz) = *Bp * hy + 3.0 * c * z.array().square().matrix().cwiseProduct(hz);
      out.tail(dy) = -Bp->transpose() * hz + 3.0 * c * y.array().square().matrix().cwiseProduct(hy);
    } else if (k == 2) {
      out.head(dz) = 6.0 * c * z.cwiseProduct(hz.cwiseProduct(hz));
      out.tail(dy) = 6.0 * c * y.cwiseProduct(hy.cwiseProduct(hy));
    } else if (k == 3) {
      out.head(dz) = 6.0 * c * hz.array().cube().matrix();
      out.tail(dy) = 6.0 * c * hy.array().cube().matrix();
    }
    return out;
  };
  prob.oracle = std::move(o);

  prob.set = std::make_shared<Box>(dim, -rho, rho);
  prob.smoothness[1] = zoo_detail::spectral_norm(B) + 3.0 * c * rho * rho;
  prob.smoothness[2] = 6.0 * c * rho;
  prob.known_solution = Vec::Zero(dim);
  prob.start = Vec::Constant(dim, rho);

  SaddleStructure s;
  s.dim_z = dz;
  s.dim_y = dy;
  s.value = [Bp, c](const Vec& z, const Vec& y) {
    return z.dot(*Bp * y) + 0.25 * c * (z.array().pow(4).sum() - y.array().pow(4).sum());
  };
  s.max_over_y = [Bp, c, rho](const Vec& z) {
    // concave per coordinate: b y - (c/4) y^4, max at clamp(cbrt(b/c))
    const Vec b = Bp->transpose() * z;
    double total = 0.25 * c * z.array().pow(4).sum();
    for (int j = 0; j < b.size(); ++j) {
      double best = -std::numeric_limits<double>::infinity();
      for (double y : {std::clamp(std::cbrt(b[j] / c), -rho, rho), -rho, rho}) {
        best = std::max(best, b[j] * y - 0.25 * c * pow_int(y, 4));
      }
      total += best;
    }
    return total;
  };
  s.min_over_z = [Bp, c, rho](const Vec& y) {
    const Vec b = *Bp * y;
    double total = -0.25 * c * y.array().pow(4).sum();
    for (int i = 0; i < b.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double z : {std::clamp(std::cbrt(-b[i] / c), -rho, rho), -rho, rho}) {
        best = std::min(best, b[i] * z + 0.25 * c * pow_int(z, 4));
      }
      total += best;
    }
    return total;
  };
  prob.saddle = std::move(s);
  return prob;
}

namespace zoo_detail {

// flat key -> value parameter reader; every key must be consumed
class ParamReader {
 public:
  explicit ParamReader(std::map<std::string, double> params) : params_(std::move(params)) {}

  double take(const std::string& key, double fallback) {
    auto it = params_.find(key);
    if (it == params_.end()) return fallback;
    const double v = it->second;
    params_.erase(it);
    return v;
  }

  int take_int(const std::string& key, int fallback) {
    const double v = take(key, static_cast<double>(fallback));
    const double r = std::round(v);
    if (std::abs(v - r) > 1e-9) {
      throw InvalidSpec("parameter '" + key + "' must be an integer, got " + std::to_string(v));
    }
    return static_cast<int>(r);
  }

  void finish(const std::string& problem) const {
    if (!params_.empty()) {
      throw InvalidSpec("unknown parameter '" + params_.begin()->first + "' for problem '" +
                        problem + "'");
    }
  }

 private:
  std::map<std::string, double> params_;
};

inline Mat scaled_identity(int rows, int cols, double scale) {
  Mat B = Mat::Zero(rows, cols);
  for (int i = 0; i < std::min(rows, cols); ++i) B(i, i) = scale;
  return B;
}

}  // namespace zoo_detail

// string-keyed factory used by the CLI and config files; rejects unknown
// names and unknown parameter keys
inline VIProblem make_problem(const std::string& name,
                              const std::map<std::string, double>& params = {}) {
  zoo_detail::ParamReader r(params);
  if (name == "bilinear") {
    const int dz = r.take_int("dz", 1), dy = r.take_int("dy", 1);
    const double rho = r.take("rho", 1.0), scale = r.take("scale", 1.0);
    r.finish(name);
    return make_bilinear_saddle(zoo_detail::scaled_identity(dz, dy, scale), rho);
  }
  if (name == "strongly-monotone") {
    const double mu = r.take("mu", 1.0), a = r.take("a", 2.0);
    const int dim = r.take_int("dim", 2);
    const double rho = r.take("rho", 1.0);
    r.finish(name);
    return make_strongly_monotone(mu, a, dim, rho);
  }
  if (name == "sm-quadratic") {
    const double mu = r.take("mu", 1.0), a = r.take("a", 0.5), gamma = r.take("gamma", 0.25);
    const int dim = r.take_int("dim", 2);
    const double rho = r.take("rho", 1.0);
    r.finish(name);
    return make_sm_quadratic(mu, a, gamma, dim, rho);
  }
  if (name == "minty-scalar") {
    r.finish(name);
    return make_minty_scalar();
  }
  if (name == "strong-minty") {
    const double mu_m = r.take("mu_m", 1.0), omega = r.take("omega", 6.0);
    r.finish(name);
    return make_strong_minty(mu_m, omega);
  }
  if (name == "cubic-bilinear") {
    const int dz = r.take_int("dz", 2), dy = r.take_int("dy", 2);
    const double rho = r.take("rho", 1.0), scale = r.take("scale", 1.0), c = r.take("c", 0.5);
    r.finish(name);
    return make_cubic_bilinear(zoo_detail::scaled_identity(dz, dy, scale), rho, c);
  }
  if (name == "hard-native" || name == "hard-box") {
    HardInstanceSpec spec;
    spec.p = r.take_int("p", 2);
    spec.T_hard = r.take_int("t", 1);
    spec.L = r.take("L", 1.0);
    spec.coordinates =
        name == "hard-box" ? HardCoordinates::box_w : HardCoordinates::native_z;
    if (name == "hard-native") spec.d = r.take_int("d", 0);
    r.finish(name);
    return make_hard_instance(spec);
  }
  throw UnknownProblem(name);
}

}  // namespace perseus
