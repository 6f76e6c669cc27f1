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

#include "acme/penalty.hpp"

#include <cmath>
#include <utility>

#include "acme/design.hpp"
#include "acme/errors.hpp"

namespace acme {

PenaltyParams PenaltyParams::unit(std::size_t p, std::size_t width,
                                  double lambda_s, double lambda_c,
                                  double gamma, double tau) {
  PenaltyParams params;
  params.lambda_s = lambda_s;
  params.lambda_c = lambda_c;
  params.gamma = gamma;
  params.tau = tau;
  params.group_weight_sib.assign(p, 1.0);
  params.group_weight_cou.assign(p, 1.0);
  params.indiv_weight.assign(width, 1.0);
  return params;
}

void PenaltyParams::validate(std::size_t p, std::size_t width) const {
  if (group_weight_sib.size() != p || group_weight_cou.size() != p)
    throw DimensionError("group weight length does not match p");
  if (indiv_weight.size() != width)
    throw DimensionError("individual weight length does not match width");
  if (!(gamma > 1.0) || !std::isfinite(gamma))
    throw StabilityError("gamma must be finite and greater than 1");
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw StabilityError("tau must be finite and positive");
  if (!(lambda_s >= 0.0) || !(lambda_c >= 0.0) || !std::isfinite(lambda_s) ||
      !std::isfinite(lambda_c))
    throw StabilityError("lambda_s and lambda_c must be finite and >= 0");
  auto positive = [](const std::vector<double>& w) {
    for (double x : w) {
      if (!(x > 0.0) || !std::isfinite(x)) return false;
    }
    return true;
  };
  if (!positive(group_weight_sib) || !positive(group_weight_cou) ||
      !positive(indiv_weight))
    throw StabilityError("weights must be positive and finite");
}

double mcp(double beta, double lambda, double gamma) {
  if (lambda <= 0.0) return 0.0;
  const double a = std::fabs(beta);
  const double knot = lambda * gamma;
  if (a >= knot) return 0.5 * knot;
  return a - a * a / (2.0 * knot);
}

double mcp_derivative(double beta, double lambda, double gamma) {
  if (beta == 0.0 || lambda <= 0.0) return 0.0;
  const double a = std::fabs(beta);
  const double knot = lambda * gamma;
  if (a >= knot) return 0.0;
  return std::copysign(1.0 - a / knot, beta);
}

double exp_outer(double theta, double lambda, double tau) {
  if (lambda <= 0.0) return 0.0;
  return lambda * lambda / tau * -std::expm1(-tau * theta / lambda);
}

double weighted_group_norm(std::span<const double> beta,
                           std::span<const double> omega, double lambda,
                           double gamma) {
  if (beta.size() != omega.size())
    throw DimensionError("group coefficient and weight lengths differ");
  double total = 0.0;
  for (std::size_t l = 0; l < beta.size(); ++l) {
    total += omega[l] * mcp(beta[l], lambda, gamma);
  }
  return total;
}

double slope(double norm, double lambda, double tau) {
  if (lambda <= 0.0) return 0.0;
  return lambda * std::exp(-tau * norm / lambda);
}

double threshold(double z, double v, double lambda1, double lambda2,
                 double delta1, double delta2, double omega, double gamma) {
  if (!(v > 0.0)) throw StabilityError("coordinate curvature is not positive");
  if (lambda1 < lambda2) {
    std::swap(lambda1, lambda2);
    std::swap(delta1, delta2);
  }
  const double a = std::fabs(z);
  if (a >= v * gamma * lambda1) return z / v;

  const double t1 = delta1 * omega;
  const double t2 = lambda2 > 0.0 ? delta2 * omega : 0.0;
  const double c1 = t1 / (lambda1 * gamma);
  const double c2 = lambda2 > 0.0 ? t2 / (lambda2 * gamma) : 0.0;

  if (lambda2 < lambda1 &&
      a >= v * gamma * lambda2 + t1 * (1.0 - lambda2 / lambda1)) {
    const double den = v - c1;
    if (!(den > 0.0))
      throw StabilityError("threshold denominator is not positive");
    return std::copysign((a - t1) / den, z);
  }
  if (a >= t1 + t2) {
    const double den = v - c1 - c2;
    if (!(den > 0.0))
      throw StabilityError("threshold denominator is not positive");
    return std::copysign((a - t1 - t2) / den, z);
  }
  return 0.0;
}

double group_norm(const CmeDesign& design, std::span<const double> beta,
                  const PenaltyParams& params, std::size_t j, bool sibling) {
  const double lambda = sibling ? params.lambda_sib(j) : params.lambda_cou(j);
  auto members = sibling ? design.sibling_group(j) : design.cousin_group(j);
  double total = 0.0;
  for (std::size_t c : members) {
    total += params.indiv_weight[c] * mcp(beta[c], lambda, params.gamma);
  }
  return total;
}

GroupSlopes compute_slopes(const CmeDesign& design,
                           std::span<const double> beta,
                           const PenaltyParams& params) {
  GroupSlopes s;
  const std::size_t p = design.p();
  s.delta_sib.resize(p);
  s.delta_cou.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    s.delta_sib[j] = slope(group_norm(design, beta, params, j, true),
                           params.lambda_sib(j), params.tau);
    s.delta_cou[j] = slope(group_norm(design, beta, params, j, false),
                           params.lambda_cou(j), params.tau);
  }
  return s;
}

double selection_threshold(const CmeDesign& design,
                           std::span<const double> beta,
                           const PenaltyParams& params, std::size_t column) {
  if (column >= design.width()) throw IndexError("unknown column");
  if (beta.size() != design.width())
    throw DimensionError("coefficient length does not match design width");
  const ColumnId& id = design.column_id(column);
  const double sib = slope(group_norm(design, beta, params, id.parent, true),
                           params.lambda_sib(id.parent), params.tau);
  const double cou = slope(group_norm(design, beta, params, id.child, false),
                           params.lambda_cou(id.child), params.tau);
  return sib + cou;
}

double penalty_value(const CmeDesign& design, std::span<const double> beta,
                     const PenaltyParams& params) {
  double total = 0.0;
  for (std::size_t j = 0; j < design.p(); ++j) {
    total += exp_outer(group_norm(design, beta, params, j, true),
                       params.lambda_sib(j), params.tau);
    total += exp_outer(group_norm(design, beta, params, j, false),
                       params.lambda_cou(j), params.tau);
  }
  return total;
}

}  // namespace acme
