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

#include "acme/adaptive_weights.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "acme/design.hpp"
#include "acme/errors.hpp"
#include "acme/folds.hpp"
#include "acme/penalty.hpp"

namespace acme {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kGradTol = 1e-8;
constexpr int kMaxNewton = 100;

// Ridge solver over a fixed dense matrix. When the matrix is wider than
// tall, Newton steps go through the n x n Woodbury form built from the
// cached Gram matrix X X'.
class RidgeSolver {
 public:
  RidgeSolver(MatrixXd x, const Family& family)
      : x_(std::move(x)), family_(family) {
    wide_ = x_.cols() > x_.rows();
    if (wide_) gram_ = x_ * x_.transpose();
  }

  RidgePilot fit(const VectorXd& y, double lambda, const RidgePilot* warm) {
    const Eigen::Index n = x_.rows();
    const Eigen::Index m = x_.cols();
    const double nd = static_cast<double>(n);
    RidgePilot out;
    out.lambda_ridge = lambda;
    VectorXd beta = VectorXd::Zero(m);
    double b0 = family_.null_intercept(std::span<const double>(y.data(), n));
    if (warm != nullptr && static_cast<Eigen::Index>(warm->beta.size()) == m) {
      beta = Eigen::Map<const VectorXd>(warm->beta.data(), m);
      b0 = warm->intercept;
    }
    VectorXd eta = (x_ * beta).array() + b0;
    double obj = objective(y, eta, beta, lambda);

    int it = 0;
    for (; it < kMaxNewton; ++it) {
      VectorXd mu(n), w(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        mu[i] = family_.mean(eta[i]);
        w[i] = family_.is_binomial()
                   ? std::max(mu[i] * (1.0 - mu[i]), 1e-12)
                   : 1.0;
      }
      const VectorXd resid = mu - y;
      const double g0 = resid.sum() / nd;
      const VectorXd g = x_.transpose() * resid / nd + lambda * beta;
      if (std::sqrt(g0 * g0 + g.squaredNorm()) < kGradTol) break;

      const double wsum = w.sum();
      const double a = wsum / nd;
      const VectorXd u = w / wsum;
      const VectorXd xbar = x_.transpose() * u;
      const VectorXd r = g - xbar * g0;
      const VectorXd d = direction(w, u, xbar, r, lambda);
      const double d0 = g0 / a - xbar.dot(d);

      double t = 1.0;
      bool moved = false;
      for (int h = 0; h < 60; ++h, t *= 0.5) {
        const VectorXd nb = beta - t * d;
        const double nb0 = b0 - t * d0;
        const VectorXd ne = (x_ * nb).array() + nb0;
        const double nobj = objective(y, ne, nb, lambda);
        if (nobj < obj) {
          beta = nb;
          b0 = nb0;
          eta = ne;
          obj = nobj;
          moved = true;
          break;
        }
      }
      if (!moved) {
        // Rounding floor: the gradient is as small as the objective allows.
        if (std::sqrt(g0 * g0 + g.squaredNorm()) < 1e-6) break;
        throw ConvergenceError("ridge Newton step failed to decrease");
      }
    }
    if (it == kMaxNewton)
      throw ConvergenceError("ridge Newton did not converge");
    out.beta.assign(beta.data(), beta.data() + m);
    out.intercept = b0;
    out.iterations = it;
    return out;
  }

  const MatrixXd& x() const { return x_; }

 private:
  double objective(const VectorXd& y, const VectorXd& eta,
                   const VectorXd& beta, double lambda) const {
    double total = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) total += family_.loss(y[i], eta[i]);
    return total / static_cast<double>(y.size()) +
           0.5 * lambda * beta.squaredNorm();
  }

  // Solves (A'A/n + lambda I) d = r with A = W^{1/2}(X - 1 xbar').
  VectorXd direction(const VectorXd& w, const VectorXd& u,
                     const VectorXd& xbar, const VectorXd& r,
                     double lambda) const {
    const Eigen::Index n = x_.rows();
    const double nd = static_cast<double>(n);
    const VectorXd sw = w.array().sqrt();
    if (!wide_) {
      MatrixXd a = x_.rowwise() - xbar.transpose();
      a = sw.asDiagonal() * a;
      MatrixXd h = a.transpose() * a / nd;
      h.diagonal().array() += lambda;
      return h.ldlt().solve(r);
    }
    const VectorXd gu = gram_ * u;
    const double ugu = u.dot(gu);
    MatrixXd k = gram_;
    k.colwise() -= gu;
    k.rowwise() -= gu.transpose();
    k.array() += ugu;
    k = sw.asDiagonal() * k * sw.asDiagonal();
    k /= nd;
    k.diagonal().array() += lambda;
    const VectorXd xr = x_ * r;
    VectorXd ar = xr.array() - u.dot(xr);
    ar = ar.cwiseProduct(sw);
    const VectorXd s = k.ldlt().solve(ar);
    const VectorXd ds = sw.cwiseProduct(s);
    const VectorXd ats = x_.transpose() * ds - xbar * ds.sum();
    return (r - ats / nd) / lambda;
  }

  MatrixXd x_;
  MatrixXd gram_;
  Family family_;
  bool wide_ = false;
};

MatrixXd design_matrix(const CmeDesign& design) {
  return Eigen::Map<const MatrixXd>(design.values().data(),
                                    static_cast<Eigen::Index>(design.n()),
                                    static_cast<Eigen::Index>(design.width()));
}

}  // namespace

double AdaptiveWeights::indiv_max() const {
  double m = 0.0;
  for (double w : indiv_weight) m = std::max(m, w);
  return m;
}

void AdaptiveWeights::apply_to(PenaltyParams& params) const {
  params.group_weight_sib = group_weight_sib;
  params.group_weight_cou = group_weight_cou;
  params.indiv_weight = indiv_weight;
}

RidgePilot ridge_fit(const CmeDesign& design, std::span<const double> y,
                     const Family& family, double lambda_ridge) {
  if (!(lambda_ridge > 0.0) || !std::isfinite(lambda_ridge))
    throw std::invalid_argument("ridge parameter must be positive");
  if (y.size() != design.n())
    throw DimensionError("response length does not match design rows");
  if (design.n() < 2) throw DimensionError("ridge fit needs n >= 2");
  family.validate_response(y);
  RidgeSolver solver(design_matrix(design), family);
  const VectorXd yv = Eigen::Map<const VectorXd>(
      y.data(), static_cast<Eigen::Index>(y.size()));
  return solver.fit(yv, lambda_ridge, nullptr);
}

double select_ridge_lambda(const CmeDesign& design, std::span<const double> y,
                           const Family& family, std::uint64_t seed,
                           int folds) {
  if (y.size() != design.n())
    throw DimensionError("response length does not match design rows");
  family.validate_response(y);
  constexpr int kGrid = 20;
  const double base = static_cast<double>(design.width()) /
                      static_cast<double>(design.n());
  std::vector<double> grid(kGrid);
  for (int g = 0; g < kGrid; ++g) {
    grid[g] = base * std::pow(10.0, -4.0 + 6.0 * g / (kGrid - 1));
  }

  const MatrixXd x = design_matrix(design);
  const std::vector<int> fold_id = make_folds(y, family, folds, seed);
  std::vector<double> loss(kGrid, 0.0);
  for (int f = 0; f < folds; ++f) {
    const auto train = fold_rows(fold_id, f, false);
    const auto held = fold_rows(fold_id, f, true);
    std::vector<Eigen::Index> tr(train.begin(), train.end());
    std::vector<Eigen::Index> he(held.begin(), held.end());
    RidgeSolver solver(x(tr, Eigen::all), family);
    const MatrixXd xh = x(he, Eigen::all);
    VectorXd ytr(static_cast<Eigen::Index>(tr.size()));
    for (std::size_t r = 0; r < tr.size(); ++r) ytr[r] = y[train[r]];
    std::vector<double> yh(held.size());
    for (std::size_t r = 0; r < held.size(); ++r) yh[r] = y[held[r]];

    RidgePilot prev;
    bool have_prev = false;
    for (int g = kGrid - 1; g >= 0; --g) {
      RidgePilot pilot = solver.fit(ytr, grid[g], have_prev ? &prev : nullptr);
      const VectorXd eta =
          (xh * Eigen::Map<const VectorXd>(pilot.beta.data(), x.cols()))
              .array() +
          pilot.intercept;
      loss[g] += 2.0 * family.mean_loss(
                           yh, std::span<const double>(eta.data(), yh.size()));
      prev = std::move(pilot);
      have_prev = true;
    }
  }
  std::size_t best = 0;
  for (std::size_t g = 1; g < loss.size(); ++g) {
    if (loss[g] < loss[best]) best = g;
  }
  return grid[best];
}

AdaptiveWeights compute_weights(const RidgePilot& pilot,
                                const CmeDesign& design, std::size_t n) {
  if (pilot.beta.size() != design.width())
    throw DimensionError("pilot length does not match design width");
  if (n == 0) throw DimensionError("sample count must be positive");
  const double guard = 1.0 / static_cast<double>(n);
  AdaptiveWeights out;
  const std::size_t p = design.p();
  out.group_weight_sib.resize(p);
  out.group_weight_cou.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    double sib = 0.0;
    double cou = 0.0;
    for (std::size_t c : design.sibling_group(j)) sib += std::fabs(pilot.beta[c]);
    for (std::size_t c : design.cousin_group(j)) cou += std::fabs(pilot.beta[c]);
    out.group_weight_sib[j] = 1.0 / (sib + guard);
    out.group_weight_cou[j] = 1.0 / (cou + guard);
  }
  out.indiv_weight.resize(design.width());
  for (std::size_t c = 0; c < design.width(); ++c) {
    out.indiv_weight[c] = 1.0 / (std::fabs(pilot.beta[c]) + guard);
  }
  return out;
}

AdaptiveWeights unit_weights(std::size_t p, std::size_t width) {
  AdaptiveWeights out;
  out.group_weight_sib.assign(p, 1.0);
  out.group_weight_cou.assign(p, 1.0);
  out.indiv_weight.assign(width, 1.0);
  return out;
}

AdaptiveWeights pilot_weights(const CmeDesign& design,
                              std::span<const double> y, const Family& family,
                              std::uint64_t seed) {
  const int folds = static_cast<int>(std::min<std::size_t>(5, design.n()));
  const double lambda = select_ridge_lambda(design, y, family, seed, folds);
  return compute_weights(ridge_fit(design, y, family, lambda), design,
                         design.n());
}

bool coordinate_condition(double omega_max, double gamma, double tau,
                          const Family& family) {
  const double c = family.is_binomial() ? 1.0 / 8.0 : 1.0 / 2.0;
  return tau + 1.0 / (gamma * omega_max) <= c / (omega_max * omega_max);
}

double max_feasible_weight(double gamma, double tau, const Family& family) {
  const double c = family.is_binomial() ? 1.0 / 8.0 : 1.0 / 2.0;
  const double ig = 1.0 / gamma;
  // Positive root of tau*w^2 + w/gamma - c = 0, written without cancellation.
  return 2.0 * c / (ig + std::sqrt(ig * ig + 4.0 * tau * c));
}

AdaptiveWeights stabilize_weights(const AdaptiveWeights& weights, double gamma,
                                  double tau, const Family& family,
                                  double min_scale) {
  if (!(gamma > 1.0) || !std::isfinite(gamma) || !(tau > 0.0) ||
      !std::isfinite(tau))
    throw StabilityError("stabilization needs finite gamma > 1 and tau > 0");
  const double wmax = weights.indiv_max();
  if (!(wmax > 0.0) || !std::isfinite(wmax))
    throw StabilityError("individual weights must be positive and finite");
  AdaptiveWeights out = weights;
  if (coordinate_condition(wmax, gamma, tau, family)) return out;

  double scale = max_feasible_weight(gamma, tau, family) / wmax;
  while (scale > 0.0 && !coordinate_condition(wmax * scale, gamma, tau, family)) {
    scale = std::nextafter(scale, 0.0);
  }
  if (!(scale >= min_scale))
    throw StabilityError("no admissible weight scale for this (gamma, tau)");
  for (double& w : out.indiv_weight) w *= scale;
  // Re-check the scaled maximum itself, which may round differently.
  while (!coordinate_condition(out.indiv_max(), gamma, tau, family)) {
    scale = std::nextafter(scale, 0.0);
    for (std::size_t c = 0; c < out.indiv_weight.size(); ++c) {
      out.indiv_weight[c] = weights.indiv_weight[c] * scale;
    }
  }
  out.indiv_scale = weights.indiv_scale * scale;
  return out;
}

}  // namespace acme
