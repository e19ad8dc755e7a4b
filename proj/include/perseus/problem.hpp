#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "perseus/core.hpp"
#include "perseus/oracle.hpp"
#include "perseus/sets.hpp"

namespace perseus {

enum class Regularity {
  Monotone,
  StronglyMonotone,
  Minty,
  StrongMinty,
  Unknown,
};

inline const char* to_string(Regularity r) {
  switch (r) {
    case Regularity::Monotone: return "monotone";
    case Regularity::StronglyMonotone: return "strongly_monotone";
    case Regularity::Minty: return "minty";
    case Regularity::StrongMinty: return "strong_minty";
    default: return "unknown";
  }
}

// Saddle descriptor for problems of the form F = (grad_z f, -grad_y f):
// exact inner optimizers give the duality gap
//   gap(z,y) = max_{y'} f(z,y') - min_{z'} f(z',y).
struct SaddleStructure {
  int dim_z = 0;
  int dim_y = 0;
  std::function<double(const Vec&, const Vec&)> value;       // f(z, y)
  std::function<double(const Vec&)> max_over_y;              // sup_y f(z, .)
  std::function<double(const Vec&)> min_over_z;              // inf_z f(., y)
};

struct VIProblem {
  std::string name;
  OperatorOracle oracle;
  SetPtr set;
  Regularity regularity = Regularity::Unknown;
  double modulus = 0.0;  // mu for strongly monotone, mu_Minty for strong Minty
  std::optional<Vec> known_solution;
  std::optional<SaddleStructure> saddle;
  // Upper bounds on the Lipschitz constant of the (p-1)-th derivative, keyed
  // by method order p. Missing orders mean the caller must supply L.
  std::map<int, double> smoothness;
  Vec start;  // default initial point, always feasible

  double lipschitz(int p) const {
    auto it = smoothness.find(p);
    if (it == smoothness.end()) {
      throw InvalidSpec("problem '" + name + "' records no smoothness constant for p = " +
                        std::to_string(p));
    }
    return it->second;
  }

  const Vec& solution() const {
    if (!known_solution) throw NoKnownSolution();
    return *known_solution;
  }

  std::pair<Vec, Vec> split_saddle(const Vec& x) const {
    if (!saddle) throw NoSaddleStructure();
    if (static_cast<int>(x.size()) != saddle->dim_z + saddle->dim_y) {
      throw DimensionMismatch("saddle split");
    }
    return {x.head(saddle->dim_z), x.tail(saddle->dim_y)};
  }
};

}  // namespace perseus
