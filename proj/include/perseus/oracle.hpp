#pragma once

#include <functional>
#include <string>
#include <utility>

#include "perseus/core.hpp"

namespace perseus {

// Operator oracle: F itself plus the actions of its derivative tensors,
// deriv_apply(x, k, h) = ∇^(k)F(x)[h]^k for 1 <= k <= max_order.
// lipschitz_L is the claimed Lipschitz constant of the order-max_order
// derivative, i.e. the L of a method of order p = max_order + 1.
struct OperatorOracle {
  int dim = 0;
  int max_order = 0;
  double lipschitz_L = 0.0;
  std::function<Vec(const Vec&)> eval;
  std::function<Vec(const Vec&, int, const Vec&)> deriv_apply;

  Vec operator()(const Vec& x) const {
    check_dim(x, "eval");
    return eval(x);
  }

  Vec deriv(const Vec& x, int k, const Vec& h) const {
    check_dim(x, "deriv point");
    check_dim(h, "deriv direction");
    if (k < 1 || k > max_order) {
      throw OrderUnavailable("k = " + std::to_string(k) + ", max_order = " +
                             std::to_string(max_order));
    }
    return deriv_apply(x, k, h);
  }

 private:
  void check_dim(const Vec& v, const char* where) const {
    if (static_cast<int>(v.size()) != dim) {
      throw DimensionMismatch(std::string(where) + ": got " + std::to_string(v.size()) +
                              ", oracle dim " + std::to_string(dim));
    }
  }
};

// Convenience constructor for operators with no derivative information.
inline OperatorOracle make_oracle(int dim, std::function<Vec(const Vec&)> f, double L = 0.0) {
  OperatorOracle o;
  o.dim = dim;
  o.max_order = 0;
  o.lipschitz_L = L;
  o.eval = std::move(f);
  o.deriv_apply = [](const Vec&, int, const Vec&) -> Vec {
    throw OrderUnavailable("oracle carries no derivatives");
  };
  return o;
}

}  // namespace perseus
