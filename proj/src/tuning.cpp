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

#include "acme/tuning.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "acme/design.hpp"
#include "acme/errors.hpp"
#include "acme/folds.hpp"
#include "acme/kernels.hpp"
#include "acme/parallel.hpp"

namespace acme {
namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct FoldData {
  CmeDesign train;
  CmeDesign held;
  std::vector<double> y_train;
  std::vector<double> y_held;
  AdaptiveWeights raw;
};

AdaptiveWeights raw_weights(const CmeDesign& design, std::span<const double> y,
                            const Family& family, WeightScheme scheme,
                            std::uint64_t seed) {
  if (scheme == WeightScheme::kUnit)
    return unit_weights(design.p(), design.width());
  return pilot_weights(design, y, family, seed);
}

PenaltyParams params_for(const AdaptiveWeights& w, double gamma, double tau) {
  PenaltyParams params;
  params.gamma = gamma;
  params.tau = tau;
  w.apply_to(params);
  return params;
}

// Held-out loss along a warm-started path. Throws StabilityError when the
// weights cannot be stabilized for (gamma, tau).
std::vector<double> fold_path(const FoldData& f, const Family& family,
                              double gamma, double tau, double rho,
                              const std::vector<double>& ratios,
                              const FitOptions& base) {
  const AdaptiveWeights w = stabilize_weights(f.raw, gamma, tau, family);
  PenaltyParams params = params_for(w, gamma, tau);
  const double lmax =
      lambda_max_weighted(f.train, f.y_train, family, rho, params);
  FitOptions opt = base;
  opt.warm_beta.reset();
  opt.warm_intercept.reset();
  std::vector<double> loss(ratios.size(), kInf);
  for (std::size_t l = 0; l < ratios.size(); ++l) {
    params.lambda_s = rho * lmax * ratios[l];
    params.lambda_c = (1.0 - rho) * lmax * ratios[l];
    try {
      FitState s = fit(f.train, f.y_train, family, params, opt);
      const Prediction pred = predict(s, f.held, family);
      loss[l] = cv_loss(f.y_held, pred.eta, family);
      opt.warm_beta = std::move(s.beta);
      opt.warm_intercept = s.intercept;
    } catch (const ConvergenceError&) {
      opt.warm_beta.reset();
      opt.warm_intercept.reset();
    }
  }
  return loss;
}

void summarize(const std::vector<std::vector<double>>& per_fold,
               std::size_t l, double* mean, double* se) {
  const double k = static_cast<double>(per_fold.size());
  double m = 0.0;
  for (const auto& f : per_fold) m += f[l];
  m /= k;
  double ss = 0.0;
  for (const auto& f : per_fold) ss += (f[l] - m) * (f[l] - m);
  *mean = m;
  *se = per_fold.size() > 1 ? std::sqrt(ss / (k - 1.0) / k) : 0.0;
  if (!std::isfinite(m)) *se = kNan;
}

}  // namespace

TuningGrid TuningGrid::defaults() {
  TuningGrid g;
  g.gamma_grid = {2.0, 3.0, 5.0, 10.0, 30.0};
  for (int t = 0; t < 8; ++t) g.tau_grid.push_back(std::pow(10.0, -3.0 + 3.0 * t / 7.0));
  g.rho_grid = {0.2, 0.35, 0.5, 0.65, 0.8};
  return g;
}

void TuningGrid::validate() const {
  if (gamma_grid.empty() || tau_grid.empty() || rho_grid.empty())
    throw std::invalid_argument("tuning grids must be non-empty");
  for (double g : gamma_grid)
    if (!(g > 1.0) || !std::isfinite(g))
      throw std::invalid_argument("gamma grid values must exceed 1");
  for (double t : tau_grid)
    if (!(t > 0.0) || !std::isfinite(t))
      throw std::invalid_argument("tau grid values must be positive");
  for (double r : rho_grid)
    if (!(r > 0.0 && r < 1.0))
      throw std::invalid_argument("rho grid values must lie in (0,1)");
  if (nlambda < 1 || stage1_nlambda < 1)
    throw std::invalid_argument("path lengths must be positive");
  if (!(lambda_min_ratio > 0.0 && lambda_min_ratio < 1.0))
    throw std::invalid_argument("lambda_min_ratio must lie in (0,1)");
  if (folds < 2) throw std::invalid_argument("fold count must be at least 2");
}

std::vector<double> TuningGrid::path_ratios(int count) const {
  std::vector<double> r(static_cast<std::size_t>(count), 1.0);
  for (int l = 1; l < count; ++l) {
    r[l] = std::pow(lambda_min_ratio, static_cast<double>(l) / (count - 1));
  }
  return r;
}

double lambda_max_weighted(const CmeDesign& design, std::span<const double> y,
                           const Family& family, double rho,
                           const PenaltyParams& weights) {
  if (y.size() != design.n())
    throw DimensionError("response length does not match design rows");
  if (!(rho >= 0.0 && rho <= 1.0))
    throw std::invalid_argument("rho must lie in [0,1]");
  weights.validate(design.p(), design.width());
  const double mu = family.mean(family.null_intercept(y));
  std::vector<double> u(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) u[i] = y[i] - mu;
  const double nd = static_cast<double>(design.n());
  double best = 0.0;
  for (std::size_t c = 0; c < design.width(); ++c) {
    if (design.excluded(c)) continue;
    const ColumnId& id = design.column_id(c);
    const double denom = (rho * weights.group_weight_sib[id.parent] +
                          (1.0 - rho) * weights.group_weight_cou[id.child]) *
                         weights.indiv_weight[c];
    const double score = std::fabs(kernels::dot(design.column(c), u)) / nd;
    best = std::max(best, score / denom);
  }
  // Small upward margin so rounding in the solver's own inner products
  // cannot push a coordinate across the threshold at exactly lambda_max.
  return best * (1.0 + 1e-10);
}

double cv_loss(std::span<const double> y_held,
               std::span<const double> eta_held, const Family& family) {
  if (y_held.size() != eta_held.size())
    throw DimensionError("held-out response and predictor lengths differ");
  return 2.0 * family.mean_loss(y_held, eta_held);
}

CvReport cv_tune(const CmeDesign& design, std::span<const double> y,
                 const Family& family, const TuneConfig& config) {
  const TuningGrid& grid = config.grid;
  grid.validate();
  if (y.size() != design.n())
    throw DimensionError("response length does not match design rows");
  family.validate_response(y);
  if (design.n() < 2 * static_cast<std::size_t>(grid.folds) &&
      static_cast<std::size_t>(grid.folds) != design.n())
    throw std::invalid_argument("cross-validation needs n >= 2K or K = n");

  CvReport rep;
  rep.grid = grid;
  rep.fold_of_row = make_folds(y, family, grid.folds, grid.seed);
  const int k = grid.folds;

  std::vector<FoldData> folds(static_cast<std::size_t>(k));
  parallel_for(folds.size(), config.threads, [&](std::size_t f) {
    const auto train = fold_rows(rep.fold_of_row, static_cast<int>(f), false);
    const auto held = fold_rows(rep.fold_of_row, static_cast<int>(f), true);
    FoldData& d = folds[f];
    d.train = standardize(design.subset_rows(train));
    d.held = design.subset_rows(held).standardized_like(d.train);
    for (std::size_t r : train) d.y_train.push_back(y[r]);
    for (std::size_t r : held) d.y_held.push_back(y[r]);
    d.raw = raw_weights(d.train, d.y_train, family, config.weights,
                        mix_seed(grid.seed, f + 1));
  });

  const CmeDesign full = standardize(design);
  const AdaptiveWeights full_raw =
      raw_weights(full, y, family, config.weights, mix_seed(grid.seed, 0));

  // Stage 1: (gamma, tau) at rho = 0.5 on a short path.
  const double rho1 = 0.5;
  const std::vector<double> ratios1 = grid.path_ratios(grid.stage1_nlambda);
  const std::size_t ncell = grid.gamma_grid.size() * grid.tau_grid.size();
  std::vector<std::vector<double>> stage1(ncell * k);
  std::vector<char> infeasible(ncell * k, 0);
  parallel_for(ncell * k, config.threads, [&](std::size_t task) {
    const std::size_t cell = task / k;
    const double gamma = grid.gamma_grid[cell / grid.tau_grid.size()];
    const double tau = grid.tau_grid[cell % grid.tau_grid.size()];
    try {
      stage1[task] = fold_path(folds[task % k], family, gamma, tau, rho1,
                               ratios1, config.fit);
    } catch (const StabilityError&) {
      infeasible[task] = 1;
    }
  });

  double best1 = kInf;
  std::size_t best_cell = ncell;
  for (std::size_t cell = 0; cell < ncell; ++cell) {
    const double gamma = grid.gamma_grid[cell / grid.tau_grid.size()];
    const double tau = grid.tau_grid[cell % grid.tau_grid.size()];
    bool feasible = true;
    for (int f = 0; f < k; ++f) feasible = feasible && !infeasible[cell * k + f];
    if (feasible) {
      try {
        stabilize_weights(full_raw, gamma, tau, family);
      } catch (const StabilityError&) {
        feasible = false;
      }
    }
    std::vector<std::vector<double>> per_fold;
    if (feasible) {
      for (int f = 0; f < k; ++f) per_fold.push_back(stage1[cell * k + f]);
    }
    for (std::size_t l = 0; l < ratios1.size(); ++l) {
      CellResult row{1, gamma, tau, rho1, static_cast<int>(l), ratios1[l],
                     kNan, kNan, feasible};
      if (feasible) {
        summarize(per_fold, l, &row.mean_loss, &row.se_loss);
        if (row.mean_loss < best1) {
          best1 = row.mean_loss;
          best_cell = cell;
        }
      }
      rep.surface.push_back(row);
    }
  }
  if (best_cell == ncell)
    throw StabilityError(
        "no feasible (gamma, tau) cell: every candidate failed the "
        "coordinate convexity condition or produced no finite CV loss");
  rep.gamma = grid.gamma_grid[best_cell / grid.tau_grid.size()];
  rep.tau = grid.tau_grid[best_cell % grid.tau_grid.size()];

  // Stage 2: (rho, lambda) at the selected (gamma, tau).
  const std::vector<double> ratios2 = grid.path_ratios(grid.nlambda);
  const std::size_t nrho = grid.rho_grid.size();
  std::vector<std::vector<double>> stage2(nrho * k);
  parallel_for(nrho * k, config.threads, [&](std::size_t task) {
    stage2[task] = fold_path(folds[task % k], family, rep.gamma, rep.tau,
                             grid.rho_grid[task / k], ratios2, config.fit);
  });
  double best2 = kInf;
  for (std::size_t r = 0; r < nrho; ++r) {
    std::vector<std::vector<double>> per_fold(
        stage2.begin() + static_cast<std::ptrdiff_t>(r * k),
        stage2.begin() + static_cast<std::ptrdiff_t>((r + 1) * k));
    for (std::size_t l = 0; l < ratios2.size(); ++l) {
      CellResult row{2, rep.gamma, rep.tau, grid.rho_grid[r],
                     static_cast<int>(l), ratios2[l], kNan, kNan, true};
      summarize(per_fold, l, &row.mean_loss, &row.se_loss);
      if (row.mean_loss < best2) {
        best2 = row.mean_loss;
        rep.rho = grid.rho_grid[r];
        rep.lambda_index = static_cast<int>(l);
        rep.lambda_ratio = ratios2[l];
      }
      rep.surface.push_back(row);
    }
  }
  if (!std::isfinite(best2))
    throw ConvergenceError("no finite cross-validation loss in stage 2");
  rep.best_loss = best2;

  // Refit on the full data along the same path fractions.
  rep.weights = stabilize_weights(full_raw, rep.gamma, rep.tau, family);
  rep.params = params_for(rep.weights, rep.gamma, rep.tau);
  rep.lambda_max = lambda_max_weighted(full, y, family, rep.rho, rep.params);
  FitOptions opt = config.fit;
  opt.warm_beta.reset();
  opt.warm_intercept.reset();
  for (int l = 0; l <= rep.lambda_index; ++l) {
    rep.params.lambda_s = rep.rho * rep.lambda_max * ratios2[l];
    rep.params.lambda_c = (1.0 - rep.rho) * rep.lambda_max * ratios2[l];
    rep.fit = fit(full, y, family, rep.params, opt);
    opt.warm_beta = rep.fit.beta;
    opt.warm_intercept = rep.fit.intercept;
  }
  rep.lambda_s = rep.params.lambda_s;
  rep.lambda_c = rep.params.lambda_c;
  return rep;
}

}  // namespace acme
