/*
 * Copyright 2026 The acmenet Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "acme/design.hpp"
#include "acme/errors.hpp"
#include "acme/penalty.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace acme;

namespace {

struct Tuple {
  double z, v, l1, l2, d1, d2, omega, gamma;
};

double surrogate(const Tuple& t, double b) {
  return 0.5 * t.v * b * b - t.z * b +
         t.omega * (t.d1 * mcp(b, t.l1, t.gamma) + t.d2 * mcp(b, t.l2, t.gamma));
}

double curvature(const Tuple& t) {
  double c = t.v;
  if (t.l1 > 0) c -= t.omega * t.d1 / (t.l1 * t.gamma);
  if (t.l2 > 0) c -= t.omega * t.d2 / (t.l2 * t.gamma);
  return c;
}

// Random tuple whose one-dimensional problem is convex with some margin.
Tuple random_tuple(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    Tuple t;
    t.v = 0.05 + 2.0 * u(rng);
    t.gamma = 1.01 + 20.0 * u(rng);
    t.omega = 0.05 + 3.0 * u(rng);
    const double pick = u(rng);
    t.l1 = 2.0 * u(rng);
    t.l2 = pick < 0.1 ? 0.0 : (pick < 0.2 ? t.l1 : 2.0 * u(rng));
    t.d1 = t.l1 * (0.01 + 0.99 * u(rng));
    t.d2 = t.l2 * (0.01 + 0.99 * u(rng));
    if (curvature(t) < 0.05 * t.v) continue;
    const double reach = 1.3 * t.v * t.gamma * std::max(t.l1, t.l2) + 0.1;
    t.z = (2.0 * u(rng) - 1.0) * reach;
    return t;
  }
}

double apply(const Tuple& t) {
  return threshold(t.z, t.v, t.l1, t.l2, t.d1, t.d2, t.omega, t.gamma);
}

}  // namespace

TEST_CASE("mcp") {
  CHECK(mcp(0.0, 1.0, 3.0) == 0.0);
  CHECK(mcp(3.0, 1.0, 3.0) == 1.5);
  CHECK(mcp(-7.0, 0.5, 4.0) == 1.0);
  const double quad = oracle::simpson([](double x) { return 1.0 - x / 3.0; }, 0, 1);
  CHECK(mcp(1.0, 1.0, 3.0) == doctest::Approx(quad).epsilon(1e-14));
  CHECK(mcp(1.0, 1.0, 3.0) == doctest::Approx(0.83333333333333333).epsilon(1e-15));
  CHECK(mcp(-1.0, 1.0, 3.0) == mcp(1.0, 1.0, 3.0));
  CHECK(mcp(1.0, 0.0, 3.0) == 0.0);
}

TEST_CASE("mcp derivative") {
  CHECK(mcp_derivative(3.0, 1.0, 3.0) == 0.0);
  CHECK(mcp_derivative(1e-12, 1.0, 3.0) == doctest::Approx(1.0));
  CHECK(mcp_derivative(1.5, 1.0, 3.0) == doctest::Approx(0.5));
  CHECK(mcp_derivative(-1.5, 1.0, 3.0) == doctest::Approx(-0.5));
  const double h = 1e-6;
  for (double b : {0.3, 0.9, -1.2, 2.5}) {
    const double fd = (mcp(b + h, 0.8, 3.5) - mcp(b - h, 0.8, 3.5)) / (2 * h);
    CHECK(mcp_derivative(b, 0.8, 3.5) == doctest::Approx(fd).epsilon(1e-8));
  }
}

TEST_CASE("exponential outer penalty") {
  CHECK(exp_outer(0.0, 1.0, 0.25) == 0.0);
  CHECK(exp_outer(1e9, 2.0, 0.5) == doctest::Approx(8.0));
  // 4 (1 - e^{-1/4}) evaluated at 40 digits.
  CHECK(exp_outer(1.0, 1.0, 0.25) ==
        doctest::Approx(0.88479686771438052702).epsilon(1e-15));
  const double h = 1e-2;
  for (double th = h; th < 10.0; th += 0.37) {
    const double second =
        exp_outer(th + h, 1.3, 0.4) - 2 * exp_outer(th, 1.3, 0.4) +
        exp_outer(th - h, 1.3, 0.4);
    CHECK(second <= 1e-15);
    CHECK(exp_outer(th + h, 1.3, 0.4) > exp_outer(th, 1.3, 0.4));
  }
}

TEST_CASE("weighted group norm") {
  const std::vector<double> zero(4, 0.0), w = {1.0, 2.0, 0.5, 3.0};
  CHECK(weighted_group_norm(zero, w, 1.0, 3.0) == 0.0);
  const std::vector<double> big = {5.0, -4.0, 3.5, 10.0};
  CHECK(weighted_group_norm(big, w, 1.0, 3.0) == doctest::Approx(1.5 * 6.5));
  const std::vector<double> mixed = {0.2, -1.0, 4.0, 0.0};
  double expect = 0.0;
  for (std::size_t l = 0; l < 4; ++l) expect += w[l] * mcp(mixed[l], 1.0, 3.0);
  CHECK(weighted_group_norm(mixed, w, 1.0, 3.0) == doctest::Approx(expect));
  CHECK_THROWS_AS(weighted_group_norm(mixed, std::vector<double>(3, 1.0), 1, 3),
                  DimensionError);
}

TEST_CASE("slope") {
  CHECK(slope(0.0, 1.7, 0.3) == 1.7);
  CHECK(slope(2.0, 1.0, 0.25) ==
        doctest::Approx(0.60653065971263342360).epsilon(1e-15));
  CHECK(slope(1e6, 1.0, 0.25) >= 0.0);
  CHECK(slope(1e6, 1.0, 0.25) < 1e-100);
  double prev = slope(0.0, 1.0, 0.25);
  for (double norm = 0.1; norm < 20; norm += 0.1) {
    const double s = slope(norm, 1.0, 0.25);
    CHECK(s < prev);
    CHECK(s > 0.0);
    prev = s;
  }
}

TEST_CASE("threshold regions") {
  // Inside the dead zone.
  CHECK(threshold(0.5, 1.0, 1.0, 0.5, 0.4, 0.3, 1.0, 3.0) == 0.0);
  CHECK(threshold(-0.69, 1.0, 1.0, 0.5, 0.4, 0.3, 1.0, 3.0) == 0.0);
  // Beyond v*gamma*max(lambda): unpenalized.
  CHECK(threshold(3.5, 1.0, 1.0, 0.5, 0.4, 0.3, 1.0, 3.0) == 3.5);
  CHECK(threshold(-7.0, 2.0, 1.0, 0.5, 0.4, 0.3, 1.0, 3.0) == -3.5);
  // No penalty at all.
  CHECK(threshold(0.3, 2.0, 0.0, 0.0, 0.0, 0.0, 1.0, 3.0) == 0.15);
  // Non-positive curvature.
  CHECK_THROWS_AS(threshold(0.9, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 3.0), StabilityError);
  CHECK_THROWS_AS(threshold(0.9, -1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 3.0), StabilityError);
}

TEST_CASE("threshold matches brute-force minimization") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 2000; ++trial) {
    const Tuple t = random_tuple(rng);
    const double got = apply(t);
    const double span = std::fabs(t.z) / t.v + 1.0;
    const double want = oracle::brute_min(
        [&](double b) { return surrogate(t, b); }, -span, span);
    CAPTURE(t.z);
    CAPTURE(t.v);
    CHECK(std::fabs(got - want) <= 1e-6);
  }
}

TEST_CASE("threshold properties") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 2000; ++trial) {
    Tuple t = random_tuple(rng);
    const double s = apply(t);
    Tuple neg = t;
    neg.z = -t.z;
    CHECK(apply(neg) == -s);
    CHECK(std::fabs(s) <= std::fabs(t.z) / t.v * (1 + 1e-15));
    CHECK(s * t.z >= 0.0);
  }
}

TEST_CASE("threshold is continuous at region boundaries") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    Tuple t = random_tuple(rng);
    const double hi = std::max(t.l1, t.l2), lo = std::min(t.l1, t.l2);
    const double dhi = t.l1 >= t.l2 ? t.d1 : t.d2;
    const double dlo = t.l1 >= t.l2 ? t.d2 : t.d1;
    std::vector<double> knots = {t.v * t.gamma * hi,
                                 t.omega * (dhi + (lo > 0 ? dlo : 0.0))};
    if (hi > 0 && lo < hi)
      knots.push_back(t.v * t.gamma * lo + dhi * t.omega * (1 - lo / hi));
    for (double k : knots) {
      // The operator is Lipschitz with constant 1/curvature, so a jump
      // larger than that across the knot would be a discontinuity.
      const double eps = 1e-12 * std::max(1.0, k);
      Tuple a = t, b = t;
      a.z = k - eps;
      b.z = k + eps;
      CHECK(std::fabs(apply(a) - apply(b)) <= 1e-9 + 2 * eps / curvature(t));
    }
  }
}

TEST_CASE("unit weights reduce to the plain operator") {
  // With omega = 1 the operator must be the minimizer of the plain
  // cmenet coordinate problem v/2 b^2 - z b + D1 g1(b) + D2 g2(b).
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    Tuple t = random_tuple(rng);
    t.omega = 1.0;
    if (curvature(t) < 0.05 * t.v) continue;
    const double span = std::fabs(t.z) / t.v + 1.0;
    const double want = oracle::brute_min(
        [&](double b) {
          return 0.5 * t.v * b * b - t.z * b + t.d1 * mcp(b, t.l1, t.gamma) +
                 t.d2 * mcp(b, t.l2, t.gamma);
        },
        -span, span);
    CHECK(std::fabs(apply(t) - want) <= 1e-6);
  }
}

TEST_CASE("selection threshold") {
  const CmeDesign d = build_cme_matrix(oracle::random_me(4, 5, 1));
  PenaltyParams params = PenaltyParams::unit(5, d.width(), 1.0, 0.5, 3.0, 0.25);
  std::vector<double> beta(d.width(), 0.0);
  for (std::size_t c = 0; c < d.width(); ++c)
    CHECK(selection_threshold(d, beta, params, c) == doctest::Approx(1.5));
  CHECK_THROWS_AS(selection_threshold(d, beta, params, d.width()), IndexError);

  std::fill(beta.begin(), beta.end(), 1e6);
  params.tau = 1e3;
  const std::size_t target = d.cme_index(0, 2, Level::kPlus);
  CHECK(selection_threshold(d, beta, params, target) < 1e-12);

  // Growing a sibling coefficient never raises the threshold.
  params.tau = 0.25;
  std::fill(beta.begin(), beta.end(), 0.0);
  const std::size_t sib = d.cme_index(0, 3, Level::kPlus);
  beta[sib] = 0.5;
  double prev = 1e300;
  for (double b = 0.0; b <= 5.0; b += 0.05) {
    beta[d.cme_index(0, 1, Level::kPlus)] = b;
    const double t = selection_threshold(d, beta, params, target);
    CHECK(t <= prev + 1e-15);
    prev = t;
  }
}

TEST_CASE("penalty value and slopes") {
  const CmeDesign d = build_cme_matrix(oracle::random_me(6, 3, 2));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.2, 2.0);
  PenaltyParams params = PenaltyParams::unit(3, d.width(), 0.7, 0.4, 2.5, 0.3);
  for (double& w : params.group_weight_sib) w = u(rng);
  for (double& w : params.group_weight_cou) w = u(rng);
  for (double& w : params.indiv_weight) w = u(rng);
  std::vector<double> beta(d.width());
  for (double& b : beta) b = u(rng) - 1.1;

  double expect = 0.0;
  for (std::size_t j = 0; j < 3; ++j) {
    double ns = 0.0, nc = 0.0;
    const double ls = 0.7 * params.group_weight_sib[j];
    const double lc = 0.4 * params.group_weight_cou[j];
    for (std::size_t c = 0; c < d.width(); ++c) {
      if (d.column_id(c).parent == j) ns += params.indiv_weight[c] * mcp(beta[c], ls, 2.5);
      if (d.column_id(c).child == j) nc += params.indiv_weight[c] * mcp(beta[c], lc, 2.5);
    }
    expect += ls * ls / 0.3 * (1 - std::exp(-0.3 * ns / ls));
    expect += lc * lc / 0.3 * (1 - std::exp(-0.3 * nc / lc));
    const GroupSlopes s = compute_slopes(d, beta, params);
    CHECK(s.delta_sib[j] == doctest::Approx(ls * std::exp(-0.3 * ns / ls)));
    CHECK(s.delta_cou[j] == doctest::Approx(lc * std::exp(-0.3 * nc / lc)));
    CHECK(s.delta_sib[j] <= ls);
    CHECK(s.delta_sib[j] > 0.0);
  }
  CHECK(penalty_value(d, beta, params) == doctest::Approx(expect).epsilon(1e-13));
  std::fill(beta.begin(), beta.end(), 0.0);
  CHECK(penalty_value(d, beta, params) == 0.0);
}

TEST_CASE("parameter validation") {
  PenaltyParams params = PenaltyParams::unit(2, 6, 1.0, 1.0, 3.0, 0.1);
  CHECK_NOTHROW(params.validate(2, 6));
  CHECK_THROWS_AS(params.validate(3, 6), DimensionError);
  params.gamma = 1.0;
  CHECK_THROWS_AS(params.validate(2, 6), StabilityError);
  params.gamma = 3.0;
  params.tau = 0.0;
  CHECK_THROWS_AS(params.validate(2, 6), StabilityError);
  params.tau = 0.1;
  params.indiv_weight[2] = 0.0;
  CHECK_THROWS_AS(params.validate(2, 6), StabilityError);
}
