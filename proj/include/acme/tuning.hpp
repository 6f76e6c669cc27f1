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

// Two-stage K-fold cross-validation: first over (gamma, tau) with a short
// lambda path at equal sibling/cousin balance, then over the balance rho and
// a full lambda path at the chosen (gamma, tau).
//
// Paths are expressed as fractions of the weighted lambda_max. Each
// training fold is restandardized and gets its own weights, so the absolute
// lambda_max differs between folds while the fractions stay aligned.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "acme/adaptive_weights.hpp"
#include "acme/family.hpp"
#include "acme/penalty.hpp"
#include "acme/solver.hpp"

namespace acme {

class CmeDesign;

struct TuningGrid {
  std::vector<double> gamma_grid;
  std::vector<double> tau_grid;
  std::vector<double> rho_grid;
  int nlambda = 25;
  int stage1_nlambda = 10;
  double lambda_min_ratio = 0.01;
  int folds = 5;
  std::uint64_t seed = 1;

  /// gamma {2,3,5,10,30}, tau 8 log points in [1e-3,1],
  /// rho {0.2,0.35,0.5,0.65,0.8}.
  static TuningGrid defaults();
  /// Throws std::invalid_argument for empty grids or out-of-range values.
  void validate() const;
  /// Path fractions lambda_min_ratio^(l/(count-1)), l = 0..count-1.
  std::vector<double> path_ratios(int count) const;
};

enum class WeightScheme { kAdaptive, kUnit };

struct TuneConfig {
  TuningGrid grid = TuningGrid::defaults();
  WeightScheme weights = WeightScheme::kAdaptive;
  FitOptions fit;
  int threads = 1;
};

struct CellResult {
  int stage = 1;
  double gamma = 0.0;
  double tau = 0.0;
  double rho = 0.0;
  int lambda_index = 0;
  double lambda_ratio = 0.0;
  double mean_loss = 0.0;
  double se_loss = 0.0;
  bool feasible = true;
};

struct CvReport {
  TuningGrid grid;
  std::vector<int> fold_of_row;
  std::vector<CellResult> surface;
  double gamma = 0.0;
  double tau = 0.0;
  double rho = 0.0;
  int lambda_index = 0;
  double lambda_ratio = 0.0;
  double lambda_max = 0.0;  // full data, at the selected rho
  double lambda_s = 0.0;
  double lambda_c = 0.0;
  double best_loss = 0.0;
  AdaptiveWeights weights;  // full data, stabilized
  PenaltyParams params;     // final refit parameters
  FitState fit;             // final refit on the standardized full design
};

/// Smallest lambda_s + lambda_c at which the all-zero coefficient vector is
/// a fixed point of every coordinate update, for lambda_s = rho*total.
/// Uses the null-model residual y - mean. Columns excluded from fitting
/// are ignored. Returns 0 when no column correlates with the residual.
double lambda_max_weighted(const CmeDesign& design, std::span<const double> y,
                           const Family& family, double rho,
                           const PenaltyParams& weights);

/// Mean squared error (Gaussian) or mean deviance (Binomial).
double cv_loss(std::span<const double> y_held,
               std::span<const double> eta_held, const Family& family);

/// Runs both stages and refits on the full data. `design` may be raw or
/// standardized; every fold and the refit are standardized from raw
/// values. Throws StabilityError when no (gamma, tau) cell is feasible.
CvReport cv_tune(const CmeDesign& design, std::span<const double> y,
                 const Family& family, const TuneConfig& config);

}  // namespace acme
