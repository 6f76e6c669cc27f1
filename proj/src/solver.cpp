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

#include "acme/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "acme/adaptive_weights.hpp"
#include "acme/design.hpp"
#include "acme/errors.hpp"
#include "acme/kernels.hpp"

namespace acme {
namespace {

constexpr double kSeparationEta = 30.0;
constexpr double kInflation = 1e-3;

void check_inputs(const CmeDesign& design, std::span<const double> y,
                  const Family& family, const PenaltyParams& params,
                  const FitOptions& options) {
  if (y.size() != design.n())
    throw DimensionError("response length does not match design rows");
  family.validate_response(y);
  params.validate(design.p(), design.width());
  if (!options.exclude.empty() && options.exclude.size() != design.width())
    throw DimensionError("exclusion mask length does not match design width");
  if (options.warm_beta && options.warm_beta->size() != design.width())
    throw DimensionError("warm start length does not match design width");
}

std::vector<std::size_t> fitting_set(const CmeDesign& design,
                                     const FitOptions& options) {
  std::vector<std::size_t> cols;
  cols.reserve(design.width());
  for (std::size_t c = 0; c < design.width(); ++c) {
    if (design.excluded(c)) continue;
    if (!options.exclude.empty() && options.exclude[c]) continue;
    cols.push_back(c);
  }
  return cols;
}

// Applies the coordinate update for one column and keeps eta, resid and
// both affected slopes in sync. Returns |beta change|.
double update_column(FitState& s, const CmeDesign& design,
                     const PenaltyParams& params,
                     const kernels::KernelTable& k, std::size_t c) {
  const std::size_t n = design.n();
  const double* x = design.column(c).data();
  double xwr = 0.0;
  double xwx = 0.0;
  k.weighted_moments(x, s.weight.data(), s.resid.data(), n, &xwr, &xwx);
  const double nd = static_cast<double>(n);
  const double v = xwx / nd;
  if (!(v > 0.0)) return 0.0;
  const double old = s.beta[c];
  const double z = xwr / nd + v * old;
  const ColumnId& id = design.column_id(c);
  const double l1 = params.lambda_sib(id.parent);
  const double l2 = params.lambda_cou(id.child);
  const double omega = params.indiv_weight[c];
  bool inflated = false;
  const double now = coordinate_update(
      z, v, old, l1, l2, s.delta.delta_sib[id.parent],
      s.delta.delta_cou[id.child], omega, params.gamma, &inflated);
  if (inflated) ++s.inflated_updates;
  if (now == old) return 0.0;
  s.beta[c] = now;
  k.shift_fit(now - old, x, s.resid.data(), s.eta.data(), n);
  if (l1 > 0.0) {
    const double dg = mcp(now, l1, params.gamma) - mcp(old, l1, params.gamma);
    double& d = s.delta.delta_sib[id.parent];
    d = std::min(l1, d * std::exp(-params.tau / l1 * omega * dg));
  }
  if (l2 > 0.0) {
    const double dg = mcp(now, l2, params.gamma) - mcp(old, l2, params.gamma);
    double& d = s.delta.delta_cou[id.child];
    d = std::min(l2, d * std::exp(-params.tau / l2 * omega * dg));
  }
  return std::fabs(now - old);
}

class Fitter {
 public:
  Fitter(const CmeDesign& design, std::span<const double> y,
         const Family& family, const PenaltyParams& params,
         const FitOptions& options)
      : design_(design),
        y_(y),
        family_(family),
        params_(params),
        options_(options),
        k_(kernels::active()) {}

  FitState run() {
    check_inputs(design_, y_, family_, params_, options_);
    if (options_.require_stable) {
      const StabilityReport rep = check_stability(params_, family_, design_);
      if (!rep.coordinate_ok)
        throw StabilityError(
            "coordinate convexity condition fails: tau + 1/(gamma*omega_max) "
            "exceeds the bound");
    }
    const std::vector<std::size_t> all = fitting_set(design_, options_);
    init(all);

    double prev = s_.objective_trace.back();
    bool full = true;
    std::vector<std::size_t> active;
    for (int iter = 0; iter < options_.max_iter; ++iter) {
      const std::span<const std::size_t> cols =
          full ? std::span<const std::size_t>(all)
               : std::span<const std::size_t>(active);
      Snapshot snap;
      if (family_.is_binomial()) {
        snap = take();
        refresh(false);
      }
      double change = sweep(cols);
      double obj = current_objective();
      const double slack = options_.descent_slack * std::max(1.0, std::fabs(prev));
      if (obj > prev + slack) {
        if (!family_.is_binomial())
          throw ConvergenceError("objective increased during coordinate pass");
        restore(snap);
        refresh(true);
        change = sweep(cols);
        obj = current_objective();
        ++s_.mm_steps;
        if (obj > prev + slack)
          throw ConvergenceError("objective increased under majorized weights");
      }
      s_.objective_trace.push_back(obj);
      prev = obj;
      s_.iterations = iter + 1;
      if (full) {
        if (change < options_.tol) {
          s_.converged = true;
          break;
        }
        if (options_.active_set) {
          active.clear();
          for (std::size_t c : all) {
            if (s_.beta[c] != 0.0) active.push_back(c);
          }
          full = active.empty();
        }
      } else if (change < options_.tol) {
        full = true;
      }
    }
    s_.active.clear();
    for (std::size_t c = 0; c < s_.beta.size(); ++c) {
      if (s_.beta[c] != 0.0) s_.active.push_back(c);
    }
    return std::move(s_);
  }

 private:
  struct Snapshot {
    std::vector<double> beta;
    double intercept = 0.0;
    std::vector<double> eta;
    GroupSlopes delta;
    long inflated = 0;
  };

  Snapshot take() const {
    return {s_.beta, s_.intercept, s_.eta, s_.delta, s_.inflated_updates};
  }

  void restore(const Snapshot& snap) {
    s_.beta = snap.beta;
    s_.intercept = snap.intercept;
    s_.eta = snap.eta;
    s_.delta = snap.delta;
    s_.inflated_updates = snap.inflated;
  }

  void init(const std::vector<std::size_t>& all) {
    const std::size_t n = design_.n();
    s_.beta.assign(design_.width(), 0.0);
    if (options_.warm_beta) {
      for (std::size_t c : all) s_.beta[c] = (*options_.warm_beta)[c];
    }
    s_.intercept = options_.warm_intercept ? *options_.warm_intercept
                                           : family_.null_intercept(y_);
    s_.eta.assign(n, s_.intercept);
    for (std::size_t c : all) {
      if (s_.beta[c] != 0.0)
        k_.axpy(s_.beta[c], design_.column(c).data(), s_.eta.data(), n);
    }
    s_.delta = compute_slopes(design_, s_.beta, params_);
    s_.weight.assign(n, 1.0);
    s_.resid.resize(n);
    for (std::size_t i = 0; i < n; ++i) s_.resid[i] = y_[i] - s_.eta[i];
    s_.objective_trace.push_back(current_objective());
  }

  // IRLS weights and working residuals at the current eta. The majorized
  // variant uses the global curvature bound 1/4, under which the quadratic
  // model lies above the logistic loss.
  void refresh(bool majorize) {
    for (std::size_t i = 0; i < design_.n(); ++i) {
      const double eta = s_.eta[i];
      if (std::fabs(eta) > kSeparationEta) s_.separation_warning = true;
      const double mu = family_.mean(eta);
      const double w = majorize ? 0.25 : family_.working_weight(eta);
      s_.weight[i] = w;
      s_.resid[i] = (y_[i] - mu) / w;
    }
  }

  double sweep(std::span<const std::size_t> cols) {
    const std::size_t n = design_.n();
    double swr = 0.0;
    double sw = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      swr += s_.weight[i] * s_.resid[i];
      sw += s_.weight[i];
    }
    const double d0 = swr / sw;
    s_.intercept += d0;
    for (std::size_t i = 0; i < n; ++i) {
      s_.resid[i] -= d0;
      s_.eta[i] += d0;
    }
    double change = std::fabs(d0);
    for (std::size_t c : cols) {
      change = std::max(change, update_column(s_, design_, params_, k_, c));
    }
    return change;
  }

  double current_objective() const {
    return objective_from_eta(design_, y_, family_, params_, s_.beta, s_.eta);
  }

  const CmeDesign& design_;
  std::span<const double> y_;
  Family family_;
  const PenaltyParams& params_;
  const FitOptions& options_;
  const kernels::KernelTable& k_;
  FitState s_;
};

}  // namespace

std::size_t FitState::nonzero_count() const {
  return static_cast<std::size_t>(
      std::count_if(beta.begin(), beta.end(), [](double b) { return b != 0.0; }));
}

double objective_from_eta(const CmeDesign& design, std::span<const double> y,
                          const Family& family, const PenaltyParams& params,
                          std::span<const double> beta,
                          std::span<const double> eta) {
  return family.mean_loss(y, eta) + penalty_value(design, beta, params);
}

double objective(const CmeDesign& design, std::span<const double> y,
                 const Family& family, const PenaltyParams& params,
                 std::span<const double> beta, double intercept) {
  if (beta.size() != design.width())
    throw DimensionError("coefficient length does not match design width");
  std::vector<double> eta(design.n(), intercept);
  for (std::size_t c = 0; c < beta.size(); ++c) {
    if (beta[c] != 0.0) kernels::axpy(beta[c], design.column(c), eta);
  }
  return objective_from_eta(design, y, family, params, beta, eta);
}

double coordinate_update(double z, double v, double beta_old, double lambda1,
                         double lambda2, double delta1, double delta2,
                         double omega, double gamma, bool* inflated) {
  double bend = 0.0;
  if (lambda1 > 0.0) bend += omega * delta1 / (lambda1 * gamma);
  if (lambda2 > 0.0) bend += omega * delta2 / (lambda2 * gamma);
  if (inflated != nullptr) *inflated = false;
  if (v - bend > 1e-10 * v) {
    return threshold(z, v, lambda1, lambda2, delta1, delta2, omega, gamma);
  }
  // Proximal step: a larger curvature majorizes the coordinate objective
  // and makes the penalized one-dimensional problem convex.
  const double v_eff = (1.0 + kInflation) * bend;
  if (inflated != nullptr) *inflated = true;
  return threshold(z + (v_eff - v) * beta_old, v_eff, lambda1, lambda2, delta1,
                   delta2, omega, gamma);
}

double coordinate_pass(FitState& state, const CmeDesign& design,
                       const PenaltyParams& params,
                       std::span<const std::size_t> columns) {
  const std::size_t n = design.n();
  if (state.beta.size() != design.width() || state.eta.size() != n ||
      state.resid.size() != n || state.weight.size() != n)
    throw DimensionError("fit state does not match design");
  if (state.delta.delta_sib.size() != design.p() ||
      state.delta.delta_cou.size() != design.p())
    state.delta = compute_slopes(design, state.beta, params);
  const kernels::KernelTable& k = kernels::active();
  double change = 0.0;
  for (std::size_t c : columns) {
    if (c >= design.width()) throw IndexError("column index out of range");
    if (design.excluded(c)) continue;
    change = std::max(change, update_column(state, design, params, k, c));
  }
  return change;
}

FitState fit_gaussian(const CmeDesign& design, std::span<const double> y,
                      const PenaltyParams& params, const FitOptions& options) {
  return Fitter(design, y, Family::gaussian(), params, options).run();
}

FitState fit_glm(const CmeDesign& design, std::span<const double> y,
                 const Family& family, const PenaltyParams& params,
                 const FitOptions& options) {
  return Fitter(design, y, family, params, options).run();
}

FitState fit(const CmeDesign& design, std::span<const double> y,
             const Family& family, const PenaltyParams& params,
             const FitOptions& options) {
  if (family.is_binomial()) return fit_glm(design, y, family, params, options);
  return fit_gaussian(design, y, params, options);
}

StabilityReport check_stability(const PenaltyParams& params,
                                const Family& family,
                                const CmeDesign& design) {
  StabilityReport rep;
  for (double w : params.indiv_weight) rep.omega_max = std::max(rep.omega_max, w);
  const double c = family.is_binomial() ? 1.0 / 8.0 : 1.0 / 2.0;
  if (rep.omega_max > 0.0) {
    rep.lhs = params.tau + 1.0 / (params.gamma * rep.omega_max);
    rep.coordinate_bound = c / (rep.omega_max * rep.omega_max);
    rep.coordinate_ok =
        coordinate_condition(rep.omega_max, params.gamma, params.tau, family);
  }
  if (design.n() >= design.width() && rep.omega_max > 0.0) {
    const auto n = static_cast<Eigen::Index>(design.n());
    const auto m = static_cast<Eigen::Index>(design.width());
    Eigen::Map<const Eigen::MatrixXd> x(design.values().data(), n, m);
    const Eigen::MatrixXd gram =
        family.weight_bound() * (x.transpose() * x);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
        gram, Eigen::EigenvaluesOnly);
    const double zeta = std::max(0.0, eig.eigenvalues()[0]);
    rep.global_bound =
        zeta / (2.0 * static_cast<double>(design.n()) * rep.omega_max *
                rep.omega_max);
    rep.global_ok = rep.lhs < *rep.global_bound;
  }
  return rep;
}

Prediction predict(const FitState& fit, const CmeDesign& design_new,
                   const Family& family) {
  if (fit.beta.size() != design_new.width())
    throw DimensionError("new design width does not match the fit");
  Prediction out;
  out.eta.assign(design_new.n(), fit.intercept);
  for (std::size_t c = 0; c < fit.beta.size(); ++c) {
    if (fit.beta[c] != 0.0)
      kernels::axpy(fit.beta[c], design_new.column(c), out.eta);
  }
  out.mean.resize(out.eta.size());
  for (std::size_t i = 0; i < out.eta.size(); ++i)
    out.mean[i] = family.mean(out.eta[i]);
  if (family.is_binomial()) {
    out.label.resize(out.eta.size());
    for (std::size_t i = 0; i < out.eta.size(); ++i)
      out.label[i] = out.mean[i] >= 0.5 ? 1 : 0;
  }
  return out;
}

double stationarity_gap(const FitState& fit, const CmeDesign& design,
                        std::span<const double> y, const Family& family,
                        const PenaltyParams& params,
                        const FitOptions& options) {
  const std::size_t n = design.n();
  std::vector<double> w(n), r(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = family.working_weight(fit.eta[i]);
    r[i] = (y[i] - family.mean(fit.eta[i])) / w[i];
  }
  const GroupSlopes delta = compute_slopes(design, fit.beta, params);
  const kernels::KernelTable& k = kernels::active();
  const double nd = static_cast<double>(n);
  double gap = 0.0;
  for (std::size_t c : fitting_set(design, options)) {
    double xwr = 0.0;
    double xwx = 0.0;
    k.weighted_moments(design.column(c).data(), w.data(), r.data(), n, &xwr,
                       &xwx);
    const double v = xwx / nd;
    if (!(v > 0.0)) continue;
    const double b = fit.beta[c];
    const ColumnId& id = design.column_id(c);
    const double mapped = coordinate_update(
        xwr / nd + v * b, v, b, params.lambda_sib(id.parent),
        params.lambda_cou(id.child), delta.delta_sib[id.parent],
        delta.delta_cou[id.child], params.indiv_weight[c], params.gamma);
    gap = std::max(gap, std::fabs(mapped - b));
  }
  return gap;
}

double slope_gap(const FitState& fit, const CmeDesign& design,
                 const PenaltyParams& params) {
  const GroupSlopes fresh = compute_slopes(design, fit.beta, params);
  double gap = 0.0;
  for (std::size_t j = 0; j < design.p(); ++j) {
    gap = std::max(gap, std::fabs(fresh.delta_sib[j] - fit.delta.delta_sib[j]));
    gap = std::max(gap, std::fabs(fresh.delta_cou[j] - fit.delta.delta_cou[j]));
  }
  return gap;
}

double eta_gap(const FitState& fit, const CmeDesign& design) {
  std::vector<double> eta(design.n(), fit.intercept);
  for (std::size_t c = 0; c < fit.beta.size(); ++c) {
    if (fit.beta[c] != 0.0) kernels::axpy(fit.beta[c], design.column(c), eta);
  }
  double gap = 0.0;
  for (std::size_t i = 0; i < eta.size(); ++i)
    gap = std::max(gap, std::fabs(eta[i] - fit.eta[i]));
  return gap;
}

}  // namespace acme
