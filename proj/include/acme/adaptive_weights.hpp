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

// Ridge pilot estimates and the adaptive group / individual weights built
// from them.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "acme/family.hpp"

namespace acme {

class CmeDesign;
struct PenaltyParams;

struct RidgePilot {
  std::vector<double> beta;
  double intercept = 0.0;
  double lambda_ridge = 0.0;
  int iterations = 0;
};

struct AdaptiveWeights {
  std::vector<double> group_weight_sib;
  std::vector<double> group_weight_cou;
  std::vector<double> indiv_weight;
  /// Common factor applied to indiv_weight by stabilize_weights.
  double indiv_scale = 1.0;

  double indiv_max() const;
  /// Copies the weights into params (lambdas, gamma and tau untouched).
  void apply_to(PenaltyParams& params) const;
};

/// Minimizer of mean loss + (lambda_ridge/2)*||beta||^2 on design.values(),
/// intercept unpenalized. Gaussian is solved directly; Binomial by damped
/// Newton to a gradient norm of 1e-8. Throws ConvergenceError when Newton
/// stalls or runs out of iterations, std::invalid_argument when
/// lambda_ridge <= 0.
RidgePilot ridge_fit(const CmeDesign& design, std::span<const double> y,
                     const Family& family, double lambda_ridge);

/// Ridge parameter picked by k-fold CV over a 20-point log grid spanning
/// [1e-4, 1e2] * (p'/n). Returns the grid value with the lowest mean
/// held-out deviance.
double select_ridge_lambda(const CmeDesign& design, std::span<const double> y,
                           const Family& family, std::uint64_t seed,
                           int folds = 5);

/// Omega_G(j) = 1/(||pilot_G(j)||_1 + 1/n), omega_k = 1/(|pilot_k| + 1/n).
AdaptiveWeights compute_weights(const RidgePilot& pilot,
                                const CmeDesign& design, std::size_t n);

/// Every weight equal to 1.
AdaptiveWeights unit_weights(std::size_t p, std::size_t width);

/// CV-selected ridge pilot followed by compute_weights.
AdaptiveWeights pilot_weights(const CmeDesign& design,
                              std::span<const double> y, const Family& family,
                              std::uint64_t seed);

/// True when tau + 1/(gamma*omega_max) <= c/omega_max^2 with c = 1/8 for
/// Binomial and 1/2 for Gaussian.
bool coordinate_condition(double omega_max, double gamma, double tau,
                          const Family& family);

/// Largest omega_max satisfying coordinate_condition (before rounding).
double max_feasible_weight(double gamma, double tau, const Family& family);

/// Rescales the individual weights by one positive factor so the
/// coordinate condition holds; already-feasible weights are returned with
/// scale 1. Throws StabilityError for invalid (gamma, tau) or when the
/// required factor falls below min_scale.
AdaptiveWeights stabilize_weights(const AdaptiveWeights& weights, double gamma,
                                  double tau,
                                  const Family& family = Family::binomial(),
                                  double min_scale = 1e-9);

}  // namespace acme
