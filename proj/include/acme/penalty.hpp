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

#pragma once

// Composite exponential / MC+ penalty on sibling and cousin groups.
//
// Each group G(j) gets an effective parameter lambda_G(j) = lambda_G * Omega,
// an inner MC+ penalty g_{lambda_G(j),gamma} applied per member and weighted
// by the member's individual weight omega_k, and an outer exponential
// penalty on the resulting group norm. The derivative of the outer penalty
// at the current norm is the group slope Delta.

#include <cstddef>
#include <span>
#include <vector>

namespace acme {

class CmeDesign;

struct PenaltyParams {
  double lambda_s = 0.0;
  double lambda_c = 0.0;
  double gamma = 3.0;
  double tau = 0.01;
  std::vector<double> group_weight_sib;  // length p
  std::vector<double> group_weight_cou;  // length p
  std::vector<double> indiv_weight;      // length p'

  /// All weights set to 1.
  static PenaltyParams unit(std::size_t p, std::size_t width, double lambda_s,
                            double lambda_c, double gamma, double tau);

  double lambda_sib(std::size_t j) const {
    return lambda_s * group_weight_sib[j];
  }
  double lambda_cou(std::size_t j) const {
    return lambda_c * group_weight_cou[j];
  }

  /// Throws DimensionError on size mismatch and StabilityError when
  /// gamma <= 1, tau <= 0, a lambda is negative, or a weight is not a
  /// positive finite number.
  void validate(std::size_t p, std::size_t width) const;
};

struct GroupSlopes {
  std::vector<double> delta_sib;
  std::vector<double> delta_cou;
};

/// MC+ penalty: |b| - b^2/(2 lambda gamma) up to |b| = lambda gamma, then
/// flat at lambda gamma / 2. Zero for lambda <= 0.
double mcp(double beta, double lambda, double gamma);

/// Derivative of mcp for beta != 0; returns 0 at beta == 0.
double mcp_derivative(double beta, double lambda, double gamma);

/// (lambda^2/tau) * (1 - exp(-tau*theta/lambda)). Zero for lambda <= 0.
double exp_outer(double theta, double lambda, double tau);

/// sum_l omega_l * mcp(beta_l, lambda, gamma). Throws DimensionError when
/// the spans differ in length.
double weighted_group_norm(std::span<const double> beta,
                           std::span<const double> omega, double lambda,
                           double gamma);

/// lambda * exp(-tau*norm/lambda); zero for lambda <= 0.
double slope(double norm, double lambda, double tau);

/// Minimizer over b of
///   v/2 b^2 - z b + omega*(delta1 g_{lambda1,gamma}(b) + delta2 g_{lambda2,gamma}(b)).
/// Throws StabilityError when the piece that applies has a non-positive
/// curvature.
double threshold(double z, double v, double lambda1, double lambda2,
                 double delta1, double delta2, double omega, double gamma);

/// Group norm of S(j) (sibling == true) or C(j) under params.
double group_norm(const CmeDesign& design, std::span<const double> beta,
                  const PenaltyParams& params, std::size_t j, bool sibling);

/// Slopes recomputed from scratch for every group.
GroupSlopes compute_slopes(const CmeDesign& design,
                           std::span<const double> beta,
                           const PenaltyParams& params);

/// Selection threshold of a column: slope of its parent's sibling group
/// plus slope of its child's cousin group at the given coefficients.
/// For an ME both groups belong to the ME itself. Throws IndexError for an
/// unknown column.
double selection_threshold(const CmeDesign& design,
                           std::span<const double> beta,
                           const PenaltyParams& params, std::size_t column);

/// Sum of the outer penalties over all sibling and cousin groups.
double penalty_value(const CmeDesign& design, std::span<const double> beta,
                     const PenaltyParams& params);

}  // namespace acme
