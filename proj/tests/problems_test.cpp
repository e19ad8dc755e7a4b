#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "perseus/core.hpp"
#include "perseus/metrics.hpp"
#include "perseus/problems.hpp"
#include "perseus/validators.hpp"

using namespace perseus;

namespace {

Vec vec1(double a) {
  Vec v(1);
  v << a;
  return v;
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// central difference of the (k-1)-th derivative along h approximates the k-th
void check_derivative_consistency(const OperatorOracle& oracle, const Vec& x, int k,
                                  double scale) {
  std::mt19937_64 rng(77 + k);
  const Vec h = unit_direction(rng, oracle.dim);
  const double eps = 1e-5 * scale;
  Vec lo, hi;
  if (k == 1) {
    hi = oracle(x + eps * h);
    lo = oracle(x - eps * h);
  } else {
    hi = oracle.deriv(x + eps * h, k - 1, h);
    lo = oracle.deriv(x - eps * h, k - 1, h);
  }
  const Vec fd = (hi - lo) / (2.0 * eps);
  const Vec an = oracle.deriv(x, k, h);
  CHECK((fd - an).norm() <= 1e-5 * (1.0 + an.norm()));
}

}  // namespace

TEST_CASE("registry rejects unknown names and parameters") {
  CHECK_THROWS_AS(make_problem("no-such-problem"), UnknownProblem);
  CHECK_THROWS_AS(make_problem("bilinear", {{"bogus", 1.0}}), InvalidSpec);
  CHECK_THROWS_AS(make_problem("bilinear", {{"dz", 1.5}}), InvalidSpec);
  CHECK_THROWS_AS(make_problem("minty-scalar", {{"rho", 1.0}}), InvalidSpec);
}

TEST_CASE("every registry entry is internally consistent") {
  const std::vector<std::pair<std::string, std::map<std::string, double>>> entries = {
      {"bilinear", {}},
      {"strongly-monotone", {}},
      {"sm-quadratic", {}},
      {"minty-scalar", {}},
      {"strong-minty", {}},
      {"cubic-bilinear", {}},
      {"hard-native", {{"p", 2}, {"t", 1}}},
      {"hard-box", {{"p", 2}, {"t", 1}}},
  };
  for (const auto& [name, params] : entries) {
    INFO("problem " << name);
    const VIProblem prob = make_problem(name, params);
    CHECK(prob.oracle.dim == prob.set->dim());
    CHECK(prob.set->contains(prob.start, 1e-9 * (1.0 + prob.set->diameter())));
    CHECK_FALSE(prob.smoothness.empty());
    CHECK(all_finite(prob.oracle(prob.start)));
    if (prob.known_solution) {
      CHECK(prob.set->contains(*prob.known_solution, 1e-9));
    }
  }
}

TEST_CASE("bilinear saddle gaps at reference points") {
  const VIProblem prob = make_problem("bilinear");
  CHECK(gap_saddle(prob, vec2(0.0, 0.0)) == 0.0);
  // z=1 exposes max_y z*y = 1; y=0 gives min_z 0
  CHECK(gap_saddle(prob, vec2(1.0, 0.0)) == Catch::Approx(1.0).epsilon(1e-15));
  CHECK(residue(prob, vec2(1.0, 0.0)) == Catch::Approx(1.0).epsilon(1e-15));
  // sampled smoothness of a linear field equals the recorded constant
  const double est = estimate_smoothness(prob.oracle, *prob.set, 0, 32, 32, 4);
  CHECK(est == Catch::Approx(prob.lipschitz(1)).epsilon(1e-9));
}

TEST_CASE("strongly monotone field has exact modulus and skew part") {
  const VIProblem prob = make_strongly_monotone(1.0, 2.0, 2, 1.0);
  CHECK(prob.modulus == 1.0);
  CHECK(prob.lipschitz(1) == Catch::Approx(std::sqrt(5.0)).epsilon(1e-15));

  // <F(x)-F(y), x-y> = mu ||x-y||^2 exactly: the rotation contributes nothing
  std::mt19937_64 rng(31);
  for (int i = 0; i < 20; ++i) {
    const Vec a = prob.set->project(gaussian_vector(rng, 2));
    const Vec b = prob.set->project(gaussian_vector(rng, 2));
    const double ip = (prob.oracle(a) - prob.oracle(b)).dot(a - b);
    CHECK(ip == Catch::Approx((a - b).squaredNorm()).margin(1e-12));
  }
  // scalar variant drops the rotation
  const VIProblem flat = make_strongly_monotone(1.0, 2.0, 1, 2.0);
  CHECK(flat.lipschitz(1) == 1.0);
  CHECK(flat.oracle(vec1(2.0))[0] == 2.0);
}

TEST_CASE("quadratic strongly monotone field keeps its certified modulus") {
  const VIProblem prob = make_sm_quadratic();
  CHECK(prob.modulus == Catch::Approx(0.5).epsilon(1e-15));  // mu - 2 gamma rho
  CHECK(prob.lipschitz(2) == Catch::Approx(0.5).epsilon(1e-15));  // 2 gamma

  // second-order smoothness estimate stays below the recorded bound
  const double est = estimate_smoothness(prob.oracle, *prob.set, 1, 48, 32, 6);
  CHECK(est <= prob.lipschitz(2) * (1.0 + 1e-9));

  // derivative oracle is consistent with finite differences
  const Vec x = vec2(0.3, -0.4);
  check_derivative_consistency(prob.oracle, x, 1, 1.0);
  check_derivative_consistency(prob.oracle, x, 2, 1.0);

  // losing strong monotonicity is rejected at construction
  CHECK_THROWS_AS(make_sm_quadratic(0.5, 0.5, 0.25, 2, 1.0), InvalidSpec);
}

TEST_CASE("scalar weak-solution field matches its frozen profile") {
  const VIProblem prob = make_minty_scalar();
  CHECK(prob.regularity == Regularity::Minty);
  CHECK(prob.lipschitz(1) == 5.0);
  CHECK(prob.lipschitz(2) == 8.0);
  CHECK(prob.lipschitz(3) == 6.0);
  CHECK(residue(prob, vec1(0.0)) == 0.0);
  CHECK(minty_margin(prob, vec1(0.5)) == Catch::Approx(0.0625).epsilon(1e-15));

  // not monotone: the reference descent pair
  std::vector<std::pair<Vec, Vec>> pairs;
  pairs.emplace_back(vec1(0.4), vec1(0.8));
  CHECK(check_monotone(prob.oracle, pairs).min_inner_product ==
        Catch::Approx(-0.0448).epsilon(1e-12));

  // weak-solution margin is nonnegative on a fine grid
  for (int i = 0; i <= 2000; ++i) {
    REQUIRE(minty_margin(prob, vec1(i * 1e-3)) >= 0.0);
  }
  check_derivative_consistency(prob.oracle, vec1(1.3), 1, 1.0);
  check_derivative_consistency(prob.oracle, vec1(1.3), 2, 1.0);
  check_derivative_consistency(prob.oracle, vec1(1.3), 3, 1.0);
}

TEST_CASE("oscillating field keeps the strong weak-solution margin") {
  const VIProblem prob = make_strong_minty(1.0, 50.0);
  CHECK(prob.oracle(vec1(0.0))[0] == 0.0);
  CHECK(prob.modulus == 1.0);

  // <F(x), x> >= mu x^2 across the interval
  for (int i = -1000; i <= 1000; ++i) {
    const double x = i * 1e-3;
    REQUIRE(minty_margin(prob, vec1(x)) >= 1.0 * x * x - 1e-12);
  }

  // omega = 50 makes the field locally decreasing somewhere
  const MonotoneReport rep = check_monotone(prob.oracle, *prob.set, 256, 11);
  CHECK(rep.min_inner_product < 0.0);
  CHECK(rep.violating_pair.has_value());

  // the default profile is gentler but still nonmonotone-capable
  const VIProblem def = make_strong_minty();
  CHECK(def.lipschitz(1) > 0.0);
  check_derivative_consistency(def.oracle, vec1(0.3), 1, 1.0);
}

TEST_CASE("cubic perturbed bilinear field stays monotone with cubic smoothness") {
  const VIProblem prob = make_cubic_bilinear(zoo_detail::scaled_identity(2, 2, 1.0), 1.0, 0.5);
  CHECK(prob.lipschitz(2) == Catch::Approx(3.0).epsilon(1e-15));  // 6 c rho

  const MonotoneReport rep = check_monotone(prob.oracle, *prob.set, 64, 9);
  CHECK(rep.monotone(1e-12));

  CHECK(gap_saddle(prob, Vec::Zero(4)) == 0.0);
  CHECK(gap_saddle(prob, prob.start) > 0.0);
  CHECK((prob.oracle(Vec::Zero(4))).norm() == 0.0);

  Vec x(4);
  x << 0.3, -0.2, 0.6, -0.5;
  check_derivative_consistency(prob.oracle, x, 1, 1.0);
  check_derivative_consistency(prob.oracle, x, 2, 1.0);
  check_derivative_consistency(prob.oracle, x, 3, 1.0);

  // saddle closures agree with a grid scan at a reference point
  const auto [z, y] = prob.split_saddle(x);
  double grid_max = -1e300;
  for (double y1 = -1.0; y1 <= 1.0 + 1e-12; y1 += 1e-3) {
    for (double y2 = -1.0; y2 <= 1.0 + 1e-12; y2 += 1e-3) {
      grid_max = std::max(grid_max, prob.saddle->value(z, vec2(y1, y2)));
    }
  }
  CHECK(prob.saddle->max_over_y(z) >= grid_max - 1e-9);
  CHECK(prob.saddle->max_over_y(z) <= grid_max + 1e-5);
}

TEST_CASE("registry forwards hard instance parameters") {
  const VIProblem native = make_problem("hard-native", {{"p", 2}, {"t", 1}, {"d", 5}});
  CHECK(native.oracle.dim == 10);  // two blocks of d = 5
  const VIProblem box = make_problem("hard-box", {{"p", 2}, {"t", 2}});
  CHECK(box.oracle.dim == 8);  // two blocks of 2T = 4
  CHECK_THROWS_AS(make_problem("hard-box", {{"p", 1}}), InvalidSpec);
  // d is only meaningful in native coordinates
  CHECK_THROWS_AS(make_problem("hard-box", {{"d", 5}}), InvalidSpec);
}

TEST_CASE("registry defaults mirror the direct constructors") {
  const VIProblem a = make_problem("bilinear");
  const VIProblem b = make_bilinear_saddle(zoo_detail::scaled_identity(1, 1, 1.0), 1.0);
  CHECK(a.oracle.dim == b.oracle.dim);
  CHECK(a.lipschitz(1) == b.lipschitz(1));
  CHECK((a.start - b.start).norm() == 0.0);
  CHECK((a.oracle(a.start) - b.oracle(b.start)).norm() == 0.0);
}
