#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "perseus/core.hpp"
#include "perseus/oracle.hpp"
#include "perseus/problems.hpp"
#include "perseus/sets.hpp"
#include "perseus/validators.hpp"

using namespace perseus;

namespace {

Vec vec1(double a) {
  Vec v(1);
  v << a;
  return v;
}

}  // namespace

TEST_CASE("make_oracle wraps a plain callable") {
  auto oracle = make_oracle(2, [](const Vec& x) { return Vec(2.0 * x); }, 2.0);
  CHECK(oracle.dim == 2);
  CHECK(oracle.max_order == 0);
  Vec x(2);
  x << 1.0, -0.5;
  CHECK((oracle(x) - 2.0 * x).norm() == 0.0);
  CHECK_THROWS_AS(oracle(Vec::Zero(3)), DimensionMismatch);
  CHECK_THROWS_AS(oracle.deriv(x, 1, x), OrderUnavailable);
}

TEST_CASE("derivative orders outside the declared range throw") {
  Mat M(2, 2);
  M << 0.0, -1.0, 1.0, 0.0;
  auto oracle = zoo_detail::linear_oracle(M);
  Vec x = Vec::Ones(2);
  CHECK_THROWS_AS(oracle.deriv(x, 0, x), OrderUnavailable);
  CHECK_THROWS_AS(oracle.deriv(x, 9, x), OrderUnavailable);
  CHECK((oracle.deriv(x, 1, x) - M * x).norm() == 0.0);
  // linear field: higher derivatives vanish
  CHECK(oracle.deriv(x, 2, x).norm() == 0.0);
}

TEST_CASE("smoothness estimate is exact for a scaled identity field") {
  const double mu = 1.7;
  auto oracle = make_oracle(3, [mu](const Vec& x) { return Vec(mu * x); }, mu);
  const Box box(3, -1.0, 1.0);
  const double est = estimate_smoothness(oracle, box, 0, 24, 32, 99);
  CHECK(est == Catch::Approx(mu).epsilon(1e-10));
}

TEST_CASE("smoothness estimate never exceeds the recorded bound") {
  // quadratic-perturbed field: first derivative has Lipschitz constant 2*gamma
  const VIProblem prob = make_sm_quadratic();
  const double est = estimate_smoothness(prob.oracle, *prob.set, 1, 48, 32, 7);
  CHECK(est <= prob.lipschitz(2) * (1.0 + 1e-9));
  CHECK(est > 0.0);
}

TEST_CASE("monotonicity check on an explicit pair list") {
  // strongly monotone field, mu = 1, no skew part, scalar
  const VIProblem prob = make_strongly_monotone(1.0, 0.0, 1, 2.0);
  std::vector<std::pair<Vec, Vec>> pairs;
  pairs.emplace_back(vec1(2.0), vec1(0.0));
  const MonotoneReport rep = check_monotone(prob.oracle, pairs);
  CHECK(rep.min_inner_product == Catch::Approx(4.0).epsilon(1e-15));
  CHECK(rep.monotone());
  CHECK_FALSE(rep.violating_pair.has_value());
}

TEST_CASE("monotonicity check flags a descent pair on the scalar cubic field") {
  const VIProblem prob = make_minty_scalar();
  std::vector<std::pair<Vec, Vec>> pairs;
  pairs.emplace_back(vec1(0.4), vec1(0.8));
  const MonotoneReport rep = check_monotone(prob.oracle, pairs);
  // F(x) = x(1-x)^2 on [0,2]: (F(0.4)-F(0.8))*(0.4-0.8) = -0.0448
  CHECK(rep.min_inner_product == Catch::Approx(-0.0448).epsilon(1e-12));
  CHECK_FALSE(rep.monotone());
  REQUIRE(rep.violating_pair.has_value());
  CHECK(rep.violating_pair->first[0] == 0.4);
}

TEST_CASE("weak-solution margin for the scalar cubic field") {
  const VIProblem prob = make_minty_scalar();
  CHECK(minty_margin(prob, vec1(0.5)) == Catch::Approx(0.0625).epsilon(1e-15));
  CHECK(minty_margin(prob, vec1(0.0)) == 0.0);
  // the margin stays nonnegative across the whole interval
  for (double x = 0.0; x <= 2.0; x += 1e-3) {
    REQUIRE(minty_margin(prob, vec1(x)) >= 0.0);
  }
}

TEST_CASE("pair sampling is deterministic and feasible") {
  const Box box(3, -2.0, 2.0);
  const auto pairs = sample_pairs(box, 16, 12345u);
  const auto again = sample_pairs(box, 16, 12345u);
  REQUIRE(pairs.size() == 16);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CHECK(box.contains(pairs[i].first, 1e-12));
    CHECK(box.contains(pairs[i].second, 1e-12));
    CHECK((pairs[i].first - again[i].first).norm() == 0.0);
    CHECK((pairs[i].first - pairs[i].second).norm() > 0.0);
  }
}

TEST_CASE("smoothness estimate rejects unavailable derivative orders") {
  auto oracle = make_oracle(2, [](const Vec& x) { return x; }, 1.0);
  const Box box(2, -1.0, 1.0);
  CHECK_THROWS_AS(estimate_smoothness(oracle, box, 1, 8, 32, 3), OrderUnavailable);
}
