#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "perseus/core.hpp"

namespace perseus {

struct InsufficientPoints : std::invalid_argument {
  explicit InsufficientPoints(int n)
      : std::invalid_argument("rate fit needs at least 4 points, got " + std::to_string(n)) {}
};

struct NonpositiveValue : std::invalid_argument {
  explicit NonpositiveValue(double v)
      : std::invalid_argument("rate fit needs positive budgets and values, got " +
                              std::to_string(v)) {}
};

struct RateFit {
  double slope = 0.0;      // exponent alpha in value ~ T^alpha
  double intercept = 0.0;  // log of the leading constant
  double r_squared = 1.0;
  int window = 0;  // number of points in the fit
};

// least squares of log(value) against log(T); slope estimates the decay
// exponent of an error-vs-budget series. min_points can be lowered to 2 for
// quick-look fits on short grids (the CLI does this); the default keeps
// slope estimates honest.
inline RateFit rate_fit(const std::vector<double>& budgets, const std::vector<double>& values,
                        int min_points = 4) {
  const int n = static_cast<int>(budgets.size());
  if (static_cast<int>(values.size()) != n) throw DimensionMismatch("rate fit series");
  if (n < std::max(min_points, 2)) throw InsufficientPoints(n);

  std::vector<double> lx(n), ly(n);
  for (int i = 0; i < n; ++i) {
    if (budgets[i] <= 0) throw NonpositiveValue(budgets[i]);
    if (values[i] <= 0) throw NonpositiveValue(values[i]);
    lx[i] = std::log(budgets[i]);
    ly[i] = std::log(values[i]);
  }

  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;

  double sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0) throw InvalidSpec("rate fit needs at least two distinct budgets");

  RateFit fit;
  fit.window = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0;
  for (int i = 0; i < n; ++i) {
    const double pred = fit.intercept + fit.slope * lx[i];
    ss_res += (ly[i] - pred) * (ly[i] - pred);
  }
  fit.r_squared = syy == 0 ? 1.0 : 1.0 - ss_res / syy;
  return fit;
}

}  // namespace perseus
