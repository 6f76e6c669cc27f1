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

// Coordinate-descent fitting of the adaptive CME model.
//
// Gaussian responses are fitted by cyclic coordinate descent on the
// penalized least-squares objective. Binomial responses wrap the same
// coordinate pass in IRLS: each iteration refreshes the working weights and
// residuals, updates the intercept, then sweeps MEs and CMEs. The group
// slopes are maintained multiplicatively after every coordinate update.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "acme/family.hpp"
#include "acme/penalty.hpp"

namespace acme {

class CmeDesign;

struct FitOptions {
  double tol = 1e-7;
  int max_iter = 1000;
  /// Cycle over nonzero coordinates between full passes.
  bool active_set = true;
  /// Optional mask (length p'); nonzero entries are held at 0.
  std::vector<char> exclude;
  /// Warm start; slopes are recomputed from these coefficients.
  std::optional<std::vector<double>> warm_beta;
  std::optional<double> warm_intercept;
  /// Absolute slack (scaled by max(1, |objective|)) for the descent check.
  double descent_slack = 1e-10;
  /// Throw StabilityError up front when the coordinate condition fails.
  bool require_stable = false;
};

struct FitState {
  std::vector<double> beta;  // standardized scale, length p'
  double intercept = 0.0;
  std::vector<double> eta;     // linear predictor
  std::vector<double> resid;   // working residual
  std::vector<double> weight;  // working weights of the last pass
  GroupSlopes delta;
  std::vector<std::size_t> active;  // nonzero columns at exit
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
  /// Binomial iterations redone with the 1/4 majorizing weights.
  int mm_steps = 0;
  /// Coordinate updates whose curvature had to be raised to stay convex.
  long inflated_updates = 0;
  bool separation_warning = false;

  std::size_t nonzero_count() const;
};

double objective(const CmeDesign& design, std::span<const double> y,
                 const Family& family, const PenaltyParams& params,
                 std::span<const double> beta, double intercept);

/// Exact objective from a precomputed linear predictor.
double objective_from_eta(const CmeDesign& design, std::span<const double> y,
                          const Family& family, const PenaltyParams& params,
                          std::span<const double> beta,
                          std::span<const double> eta);

/// One sweep over the given columns using the state's working weights and
/// residuals; updates beta, eta, resid and slopes. Returns the largest
/// absolute coefficient change.
double coordinate_pass(FitState& state, const CmeDesign& design,
                       const PenaltyParams& params,
                       std::span<const std::size_t> columns);

/// Coordinate map applied by the solver: threshold of (z, v), with the
/// curvature raised to keep the one-dimensional problem convex when needed.
/// beta_old enters only in that case. Sets *inflated when it happens.
double coordinate_update(double z, double v, double beta_old, double lambda1,
                         double lambda2, double delta1, double delta2,
                         double omega, double gamma, bool* inflated = nullptr);

FitState fit_gaussian(const CmeDesign& design, std::span<const double> y,
                      const PenaltyParams& params,
                      const FitOptions& options = {});

FitState fit_glm(const CmeDesign& design, std::span<const double> y,
                 const Family& family, const PenaltyParams& params,
                 const FitOptions& options = {});

/// Dispatches on the family.
FitState fit(const CmeDesign& design, std::span<const double> y,
             const Family& family, const PenaltyParams& params,
             const FitOptions& options = {});

struct StabilityReport {
  double omega_max = 0.0;
  double lhs = 0.0;             // tau + 1/(gamma*omega_max)
  double coordinate_bound = 0;  // c/omega_max^2, c = 1/8 or 1/2
  bool coordinate_ok = false;
  std::optional<double> global_bound;  // zeta_min(X'WX)/(2n omega_max^2)
  std::optional<bool> global_ok;
};

/// Evaluates the coordinate-wise convexity condition and, when n >= p',
/// the eigenvalue bound with W = weight bound * I.
StabilityReport check_stability(const PenaltyParams& params,
                                const Family& family,
                                const CmeDesign& design);

struct Prediction {
  std::vector<double> eta;
  std::vector<double> mean;
  std::vector<int> label;  // Binomial only, cutoff 0.5
};

/// Predictions for a design standardized with the training statistics.
/// Throws DimensionError when the widths differ.
Prediction predict(const FitState& fit, const CmeDesign& design_new,
                   const Family& family);

/// Largest |beta_j - map(z_j)| over the fitting set, with z_j and v_j
/// rebuilt from the final linear predictor.
double stationarity_gap(const FitState& fit, const CmeDesign& design,
                        std::span<const double> y, const Family& family,
                        const PenaltyParams& params,
                        const FitOptions& options = {});

/// Largest |Delta maintained - Delta recomputed| over all groups.
double slope_gap(const FitState& fit, const CmeDesign& design,
                 const PenaltyParams& params);

/// Largest |eta - (intercept + X beta)|.
double eta_gap(const FitState& fit, const CmeDesign& design);

}  // namespace acme
