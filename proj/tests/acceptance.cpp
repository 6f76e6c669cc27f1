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

// Acceptance run: one PASS/FAIL line per criterion. The adaptive-versus-unit
// comparison is directional and only reported as FLAGGED when it does not
// hold; every other criterion is a hard gate and sets the exit status.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "acme/adaptive_weights.hpp"
#include "acme/cli.hpp"
#include "acme/design.hpp"
#include "acme/family.hpp"
#include "acme/io.hpp"
#include "acme/parallel.hpp"
#include "acme/penalty.hpp"
#include "acme/simulate.hpp"
#include "acme/solver.hpp"
#include "acme/tuning.hpp"
#include "oracles.hpp"

using namespace acme;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  enum Status { kPass, kFail, kFlagged } status = kPass;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Coordinate operator against brute-force minimization.

struct Tuple {
  double z, v, l1, l2, d1, d2, omega, gamma;
};

// MC+ profile scaled by 1/lambda, as it enters the group norms.
double oracle_mcp(double b, double lambda, double gamma) {
  if (lambda <= 0.0) return 0.0;
  const double a = std::fabs(b);
  return a >= lambda * gamma ? lambda * gamma / 2.0 : a - a * a / (2.0 * lambda * gamma);
}

double surrogate(const Tuple& t, double b) {
  return 0.5 * t.v * b * b - t.z * b +
         t.omega * (t.d1 * oracle_mcp(b, t.l1, t.gamma) + t.d2 * oracle_mcp(b, t.l2, t.gamma));
}

Outcome threshold_operator() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(7001);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int count = 10000;
  double worst = 0.0;
  int bad = 0;
  for (int k = 0; k < count; ++k) {
    Tuple t;
    for (;;) {
      t.v = 0.05 + 2.0 * u(rng);
      t.gamma = 1.01 + 20.0 * u(rng);
      t.omega = 0.05 + 3.0 * u(rng);
      const double pick = u(rng);
      t.l1 = 2.0 * u(rng);
      t.l2 = pick < 0.1 ? 0.0 : (pick < 0.2 ? t.l1 : 2.0 * u(rng));
      t.d1 = t.l1 * u(rng);
      t.d2 = t.l2 * u(rng);
      double curv = t.v;
      if (t.l1 > 0) curv -= t.omega * t.d1 / (t.l1 * t.gamma);
      if (t.l2 > 0) curv -= t.omega * t.d2 / (t.l2 * t.gamma);
      if (curv > 0.01 * t.v) break;
    }
    const double reach = 1.3 * t.v * t.gamma * std::max(t.l1, t.l2) + 0.1;
    t.z = (2.0 * u(rng) - 1.0) * reach;
    const double got = threshold(t.z, t.v, t.l1, t.l2, t.d1, t.d2, t.omega, t.gamma);
    const double span = std::fabs(t.z) / t.v + 1.0;
    const double want =
        oracle::brute_min([&](double b) { return surrogate(t, b); }, -span, span);
    const double gap = std::fabs(got - want);
    worst = std::max(worst, gap);
    bad += gap > 1e-6;
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.status = bad == 0 && secs < 60.0 ? Outcome::kPass : Outcome::kFail;
  o.detail = std::to_string(count) + " tuples, max gap " + fmt("%.2e", worst) + ", " +
             std::to_string(bad) + " above 1e-6, " + fmt("%.1f", secs) + " s";
  return o;
}

// ---------------------------------------------------------------------------
// 2. Two-effect model matrix.

Outcome two_effect_matrix() {
  const CmeDesign d = build_cme_matrix(MainEffectMatrix(4, 2, {1, 1, -1, -1, 1, -1, 1, -1}));
  const std::map<std::string, std::vector<double>> expected = {
      {"A|B+", {1, 0, -1, 0}},
      {"A|B-", {0, 1, 0, -1}},
      {"B|A+", {1, -1, 0, 0}},
      {"B|A-", {0, 0, 1, -1}},
  };
  int matched = 0;
  for (const auto& [name, want] : expected) {
    const auto c = d.find_column(name);
    if (!c) continue;
    const auto got = d.raw_column(*c);
    bool same = true;
    for (std::size_t i = 0; i < 4; ++i) same = same && got[i] == want[i];
    matched += same;
  }
  Outcome o;
  o.status = matched == 4 ? Outcome::kPass : Outcome::kFail;
  o.detail = std::to_string(matched) + "/4 conditional columns bit-equal";
  return o;
}

// ---------------------------------------------------------------------------
// 3, 6, 9. Invariants over a suite of fits.

struct Problem {
  CmeDesign design;
  std::vector<double> y;
};

Problem make_problem(std::size_t n, std::size_t p, std::uint64_t seed, const Family& family,
                     double signal) {
  Problem pr;
  pr.design = standardize(build_cme_matrix(oracle::random_me(n, p, seed)));
  std::mt19937_64 rng(seed + 101);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> eta(n, family.is_binomial() ? 0.0 : 1.0);
  const std::size_t picks[] = {0, pr.design.cme_index(1, 0, Level::kPlus),
                               pr.design.cme_index(p - 1, 1, Level::kMinus)};
  for (std::size_t c : picks)
    for (std::size_t i = 0; i < n; ++i) eta[i] += signal * pr.design.column(c)[i];
  pr.y.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    pr.y[i] = family.is_binomial() ? (u(rng) < family.mean(eta[i]) ? 1.0 : 0.0)
                                   : eta[i] + g(rng);
  return pr;
}

struct SuiteStats {
  int fits = 0;
  int converged = 0;
  int descent_violations = 0;
  double worst_rise = 0.0;
  double worst_stationarity = 0.0;
  int stationarity_violations = 0;
  double worst_slope = 0.0;
  int slope_violations = 0;
  int mm_fits = 0;
  int inflated_fits = 0;
};

void record(SuiteStats& st, const FitState& s, const CmeDesign& d, const std::vector<double>& y,
            const Family& fam, const PenaltyParams& params, const FitOptions& opt) {
  ++st.fits;
  for (std::size_t t = 1; t < s.objective_trace.size(); ++t) {
    const double rise = s.objective_trace[t] - s.objective_trace[t - 1];
    st.worst_rise = std::max(st.worst_rise, rise);
    st.descent_violations += rise > 1e-10;
  }
  const double sg = slope_gap(s, d, params);
  st.worst_slope = std::max(st.worst_slope, sg);
  st.slope_violations += sg > 1e-6;
  if (s.converged) {
    ++st.converged;
    const double gap = stationarity_gap(s, d, y, fam, params, opt);
    st.worst_stationarity = std::max(st.worst_stationarity, gap);
    st.stationarity_violations += gap > 1e-7;
  }
  st.mm_fits += s.mm_steps > 0;
  st.inflated_fits += s.inflated_updates > 0;
}

SuiteStats fit_suite() {
  SuiteStats st;
  for (std::uint64_t seed = 0; seed < 110; ++seed) {
    for (const Family fam : {Family::gaussian(), Family::binomial()}) {
      const std::size_t p = 3 + seed % 4;
      const Problem pr = fam.is_binomial() ? make_problem(90 + seed, p, 500 + seed, fam, 0.5)
                                           : make_problem(30 + seed, p, 500 + seed, fam, 1.0);
      const CmeDesign& d = pr.design;
      std::mt19937_64 rng(seed * 31 + 5);
      std::uniform_real_distribution<double> u(0.3, 3.0);
      PenaltyParams params = PenaltyParams::unit(d.p(), d.width(), 0, 0, 1.5 + seed % 6,
                                                 0.005 + 0.02 * (seed % 5));
      for (double& w : params.group_weight_sib) w = u(rng);
      for (double& w : params.group_weight_cou) w = u(rng);
      for (double& w : params.indiv_weight) w = u(rng);
      // Every fifth instance keeps weights that break the coordinate
      // condition, so the safeguarded updates are exercised too.
      if (seed % 5 != 0) {
        AdaptiveWeights aw;
        aw.group_weight_sib = params.group_weight_sib;
        aw.group_weight_cou = params.group_weight_cou;
        aw.indiv_weight = params.indiv_weight;
        stabilize_weights(aw, params.gamma, params.tau, fam).apply_to(params);
      }
      const double rho = 0.2 + 0.6 * std::uniform_real_distribution<double>(0, 1)(rng);
      const double lmax = lambda_max_weighted(d, pr.y, fam, rho, params);
      const double ratio = 0.02 + 0.5 * std::uniform_real_distribution<double>(0, 1)(rng);
      params.lambda_s = rho * ratio * lmax;
      params.lambda_c = (1 - rho) * ratio * lmax;
      FitOptions opt;
      opt.tol = 1e-10;
      opt.max_iter = 20000;
      const FitState s = fit(d, pr.y, fam, params, opt);
      record(st, s, d, pr.y, fam, params, opt);
    }
  }
  // Warm-started paths through the tuning code add more fits.
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    for (const Family fam : {Family::gaussian(), Family::binomial()}) {
      const Problem pr = make_problem(fam.is_binomial() ? 120 : 50, 4, 900 + seed, fam,
                                      fam.is_binomial() ? 0.5 : 1.0);
      const AdaptiveWeights w =
          stabilize_weights(pilot_weights(pr.design, pr.y, fam, seed), 3.0, 0.01, fam);
      PenaltyParams params = PenaltyParams::unit(pr.design.p(), pr.design.width(), 0, 0, 3.0, 0.01);
      w.apply_to(params);
      const double lmax = lambda_max_weighted(pr.design, pr.y, fam, 0.5, params);
      FitOptions opt;
      opt.tol = 1e-10;
      for (int k = 0; k < 10; ++k) {
        const double ratio = std::pow(0.01, k / 9.0);
        params.lambda_s = params.lambda_c = 0.5 * ratio * lmax;
        const FitState s = fit(pr.design, pr.y, fam, params, opt);
        record(st, s, pr.design, pr.y, fam, params, opt);
        opt.warm_beta = s.beta;
        opt.warm_intercept = s.intercept;
      }
    }
  }
  return st;
}

// ---------------------------------------------------------------------------
// 4. The all-zero solution at the weighted start value.

Outcome start_value_rule() {
  const auto t0 = Clock::now();
  int zero_at_max = 0;
  int enter_below = 0;
  const int count = 100;
  for (int k = 0; k < count; ++k) {
    const Family fam = k % 2 ? Family::binomial() : Family::gaussian();
    const std::size_t p = 3 + k % 4;
    const Problem pr = make_problem(fam.is_binomial() ? 100 + k : 40 + k, p, 3000 + k, fam,
                                    fam.is_binomial() ? 0.6 : 1.0);
    const AdaptiveWeights w = stabilize_weights(
        pilot_weights(pr.design, pr.y, fam, static_cast<std::uint64_t>(k)), 3.0, 0.01, fam);
    PenaltyParams params = PenaltyParams::unit(pr.design.p(), pr.design.width(), 0, 0, 3.0, 0.01);
    w.apply_to(params);
    const double rho = 0.1 + 0.8 * (k % 9) / 8.0;
    const double lmax = lambda_max_weighted(pr.design, pr.y, fam, rho, params);
    params.lambda_s = rho * lmax;
    params.lambda_c = (1 - rho) * lmax;
    zero_at_max += fit(pr.design, pr.y, fam, params).nonzero_count() == 0;
    params.lambda_s *= 0.95;
    params.lambda_c *= 0.95;
    enter_below += fit(pr.design, pr.y, fam, params).nonzero_count() > 0;
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.status = zero_at_max == count && enter_below >= 95 && secs < 120.0 ? Outcome::kPass
                                                                       : Outcome::kFail;
  o.detail = std::to_string(zero_at_max) + "/100 all-zero at the start value, " +
             std::to_string(enter_below) + "/100 with an entry at 0.95x, " +
             fmt("%.1f", secs) + " s";
  return o;
}

// ---------------------------------------------------------------------------
// 5. Vanishing penalty against direct solves.

// True when the logistic likelihood has a finite maximizer near (b0, b):
// the score vanishes and the coefficients stay bounded. Quasi-separated
// samples fail this and have no finite solution to compare against.
bool logistic_mle_exists(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double b0,
                         const Eigen::VectorXd& b) {
  if (!std::isfinite(b0) || !b.allFinite() || b.cwiseAbs().maxCoeff() > 8.0) return false;
  const Eigen::VectorXd eta = (x * b).array() + b0;
  Eigen::VectorXd r(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) r[i] = y[i] - 1.0 / (1.0 + std::exp(-eta[i]));
  return std::fabs(r.sum()) < 1e-9 && (x.transpose() * r).cwiseAbs().maxCoeff() < 1e-9;
}

Outcome unpenalized_equivalence() {
  double gauss_gap = 0.0;
  double logit_gap = 0.0;
  std::size_t widest = 0;
  int compared[2] = {0, 0};
  int skipped = 0;
  for (std::uint64_t seed = 0; compared[0] < 5 || compared[1] < 5; ++seed) {
    for (const Family fam : {Family::gaussian(), Family::binomial()}) {
      int& done = compared[fam.is_binomial()];
      if (done >= 5) continue;
      const Problem pr = make_problem(60, 4, 40 + seed, fam, fam.is_binomial() ? 0.5 : 1.0);
      const CmeDesign& d = pr.design;
      const auto cols = oracle::identifiable_columns(d);
      const Eigen::MatrixXd x = oracle::dense(d, cols);
      const Eigen::Map<const Eigen::VectorXd> y(pr.y.data(), 60);
      const auto [b0, b] =
          fam.is_binomial() ? oracle::newton_logistic(x, y) : oracle::least_squares(x, y);
      if (fam.is_binomial() && !logistic_mle_exists(x, y, b0, b)) {
        ++skipped;
        continue;
      }
      widest = std::max(widest, cols.size());
      PenaltyParams params = PenaltyParams::unit(d.p(), d.width(), 1e-10, 1e-10, 3, 0.1);
      FitOptions opt;
      opt.tol = 1e-13;
      opt.max_iter = 200000;
      opt.exclude = oracle::mask_except(d.width(), cols);
      const FitState s = fit(d, pr.y, fam, params, opt);
      double gap = std::fabs(s.intercept - b0);
      for (std::size_t c = 0; c < cols.size(); ++c)
        gap = std::max(gap, std::fabs(s.beta[cols[c]] - b[static_cast<Eigen::Index>(c)]));
      double& worst = fam.is_binomial() ? logit_gap : gauss_gap;
      worst = std::max(worst, gap);
      ++done;
    }
  }
  Outcome o;
  o.status = gauss_gap <= 1e-6 && logit_gap <= 1e-5 && widest <= 30 ? Outcome::kPass
                                                                    : Outcome::kFail;
  o.detail = "n = 60, " + std::to_string(widest) + " identifiable columns, 5 instances per " +
             "family; least squares gap " + fmt("%.2e", gauss_gap) + ", logistic gap " +
             fmt("%.2e", logit_gap) + " (" + std::to_string(skipped) +
             " separated samples without a finite solution skipped)";
  return o;
}

// ---------------------------------------------------------------------------
// 7. Latent equicorrelated generator.

Outcome latent_correlation() {
  const double rho = 1.0 / std::numbers::sqrt2;
  const double identity = 2.0 / std::numbers::pi * std::asin(rho);
  // Independent Monte Carlo of the sign correlation of two latent normals.
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> g;
  const int draws = 2000000;
  double agree = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double shared = g(rng);
    const double z1 = std::sqrt(rho) * shared + std::sqrt(1 - rho) * g(rng);
    const double z2 = std::sqrt(rho) * shared + std::sqrt(1 - rho) * g(rng);
    agree += (z1 > 0) == (z2 > 0) ? 1.0 : -1.0;
  }
  const double monte_carlo = agree / draws;

  const std::size_t n = 100000;
  const MainEffectMatrix me = gen_equicorrelated_me(n, 2, rho, 77);
  double m0 = 0, m1 = 0;
  for (std::size_t i = 0; i < n; ++i) m0 += me(i, 0), m1 += me(i, 1);
  m0 /= n;
  m1 /= n;
  double s01 = 0, s00 = 0, s11 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    s01 += (me(i, 0) - m0) * (me(i, 1) - m1);
    s00 += (me(i, 0) - m0) * (me(i, 0) - m0);
    s11 += (me(i, 1) - m1) * (me(i, 1) - m1);
  }
  const double r = s01 / std::sqrt(s00 * s11);
  Outcome o;
  const bool oracle_ok = std::fabs(identity - 0.5) < 1e-12 && std::fabs(monte_carlo - 0.5) < 0.003;
  o.status = oracle_ok && std::fabs(r - 0.5) <= 0.01 ? Outcome::kPass : Outcome::kFail;
  o.detail = "target 0.5 (identity " + fmt("%.15f", identity) + ", Monte Carlo " +
             fmt("%.4f", monte_carlo) + "), generated " + fmt("%.4f", r);
  return o;
}

// ---------------------------------------------------------------------------
// 8. Adaptive versus unit weights on the main-plus-cousin scenario.

Outcome adaptive_vs_unit(const fs::path& table_path) {
  const auto t0 = Clock::now();
  ScenarioSpec spec;
  spec.n = 50;
  spec.p = 20;
  spec.rho = 0.0;
  spec.family = Family::gaussian();
  spec.structure = Structure::kMainPlusCousins;
  spec.n_groups = 4;
  spec.beta_me = 5.0;
  spec.beta_cme = 1.0;
  spec.seed = 2024;
  TuneConfig base;
  const std::vector<MethodConfig> methods = {MethodConfig::make(Method::kAdaptive, base),
                                             MethodConfig::make(Method::kUnit, base)};
  const int reps = 20;
  const BenchResult br = run_replicates(spec, methods, reps, resolve_threads(0),
                                        "main_plus_cousins");
  std::vector<double> fa, fu;
  for (int r = 0; r < reps; ++r) {
    const auto& a = br.per_method[0][r];
    const auto& b = br.per_method[1][r];
    if (!a.ok || !b.ok) continue;
    fa.push_back(a.metrics.f1);
    fu.push_back(b.metrics.f1);
  }
  double ma = 0, mu = 0;
  for (std::size_t i = 0; i < fa.size(); ++i) ma += fa[i], mu += fu[i];
  if (!fa.empty()) ma /= fa.size(), mu /= fu.size();
  const double p = sign_test_p(fa, fu);
  const double secs = seconds_since(t0);

  std::ofstream tab(table_path);
  write_aggregate_csv(tab, br.rows);
  tab << "\nrep,f1_adaptive,f1_unit,selected_adaptive,selected_unit,mspe_adaptive,mspe_unit\n";
  for (int r = 0; r < reps; ++r) {
    const auto& a = br.per_method[0][r].metrics;
    const auto& b = br.per_method[1][r].metrics;
    tab << r << ',' << io::format_double(a.f1) << ',' << io::format_double(b.f1) << ','
        << a.n_selected << ',' << b.n_selected << ',' << io::format_double(a.prediction_error)
        << ',' << io::format_double(b.prediction_error) << '\n';
  }
  std::cout << "---- adaptive versus unit tables (" << table_path.string() << ")\n";
  write_aggregate_csv(std::cout, br.rows);
  std::cout << "----\n";

  Outcome o;
  const bool directional = fa.size() == static_cast<std::size_t>(reps) && ma >= mu && p < 0.2;
  o.status = directional && secs < 600.0 ? Outcome::kPass : Outcome::kFlagged;
  o.detail = "mean F1 adaptive " + fmt("%.3f", ma) + " vs unit " + fmt("%.3f", mu) +
             ", sign test p = " + fmt("%.3f", p) + ", " + std::to_string(fa.size()) +
             " paired replicates, " + fmt("%.0f", secs) + " s";
  return o;
}

// ---------------------------------------------------------------------------
// 10. Selection-threshold curves from the command line tool.

std::vector<std::pair<char, std::string>> groups_of(const std::string& name) {
  const auto bar = name.find('|');
  if (bar == std::string::npos) return {{'S', name}, {'C', name}};
  return {{'S', name.substr(0, bar)}, {'C', name.substr(bar + 1, name.size() - bar - 2)}};
}

bool share_group(const std::string& a, const std::string& b) {
  for (const auto& x : groups_of(a))
    for (const auto& y : groups_of(b))
      if (x == y) return true;
  return false;
}

Outcome threshold_curves(const fs::path& dir) {
  int same_curves = 0, cross_curves = 0, bad = 0;
  for (const char* mode : {"unit", "pilot"}) {
    const std::string out = (dir / mode).string();
    std::vector<std::string> args = {"acmenet", "threshold-curve", "--lambda_s", "1",
                                     "--lambda_c", "0.5", "--gamma", "3", "--tau", "0.25",
                                     "--weights", mode, "--points", "201", "--out", out};
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream sink;
    if (cli::run(static_cast<int>(argv.size()), argv.data(), sink, sink) != 0) {
      return {Outcome::kFail, std::string("threshold-curve failed: ") + sink.str()};
    }
    const io::Table t = io::read_csv(fs::path(out) / "threshold_curve.csv");
    std::map<std::vector<std::string>, std::vector<double>> curves;
    for (const auto& row : t.rows)
      curves[{row[0], row[1], row[2], row[3]}].push_back(std::stod(row[5]));
    for (const auto& [key, c] : curves) {
      if (share_group(key[2], key[3])) {
        ++same_curves;
        for (std::size_t k = 1; k < c.size(); ++k) bad += c[k] > c[k - 1];
      } else {
        ++cross_curves;
        for (double v : c) bad += v != c.front();
      }
    }
  }
  Outcome o;
  o.status = bad == 0 && same_curves > 0 && cross_curves > 0 ? Outcome::kPass : Outcome::kFail;
  o.detail = std::to_string(same_curves) + " same-group curves non-increasing, " +
             std::to_string(cross_curves) + " cross-group curves constant (unit and pilot " +
             "weights), " + std::to_string(bad) + " violations";
  return o;
}

}  // namespace

// With arguments, only the listed criteria run (for example `acceptance 5 8`).
int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));

  const fs::path work = fs::temp_directory_path() / "acmenet-acceptance";
  fs::create_directories(work);

  std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria;
  SuiteStats suite;
  bool suite_done = false;
  auto need_suite = [&] {
    if (!suite_done) {
      suite = fit_suite();
      suite_done = true;
    }
  };
  criteria[1] = {"coordinate operator vs brute force", threshold_operator};
  criteria[2] = {"two-effect model matrix", two_effect_matrix};
  criteria[3] = {"objective descent over the fit suite", [&] {
                   need_suite();
                   Outcome o;
                   o.status = suite.fits >= 200 && suite.descent_violations == 0
                                  ? Outcome::kPass
                                  : Outcome::kFail;
                   o.detail = std::to_string(suite.fits) + " fits (" +
                              std::to_string(suite.mm_fits) + " with fallback steps, " +
                              std::to_string(suite.inflated_fits) +
                              " with inflated curvature), largest rise " +
                              fmt("%.2e", suite.worst_rise) + ", " +
                              std::to_string(suite.descent_violations) + " violations";
                   return o;
                 }};
  criteria[4] = {"all-zero solution at the start value", start_value_rule};
  criteria[5] = {"vanishing penalty vs direct solves", unpenalized_equivalence};
  criteria[6] = {"stationarity at convergence", [&] {
                   need_suite();
                   Outcome o;
                   o.status = suite.stationarity_violations == 0 && suite.converged > 0
                                  ? Outcome::kPass
                                  : Outcome::kFail;
                   o.detail = std::to_string(suite.converged) + "/" +
                              std::to_string(suite.fits) + " converged fits, max gap " +
                              fmt("%.2e", suite.worst_stationarity) + ", " +
                              std::to_string(suite.stationarity_violations) + " above 1e-7";
                   return o;
                 }};
  criteria[7] = {"latent equicorrelated generator", latent_correlation};
  criteria[8] = {"adaptive vs unit weights (directional)",
                 [&] { return adaptive_vs_unit("acceptance_adaptive_vs_unit.csv"); }};
  criteria[9] = {"group slope bookkeeping", [&] {
                   need_suite();
                   Outcome o;
                   o.status = suite.slope_violations == 0 ? Outcome::kPass : Outcome::kFail;
                   o.detail = std::to_string(suite.fits) + " fits, max gap " +
                              fmt("%.2e", suite.worst_slope);
                   return o;
                 }};
  criteria[10] = {"selection-threshold curves", [&] { return threshold_curves(work); }};

  int failed = 0;
  int flagged = 0;
  std::vector<std::string> lines;
  for (auto& [id, entry] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = entry.second();
    } catch (const std::exception& e) {
      o.status = id == 8 ? Outcome::kFlagged : Outcome::kFail;
      o.detail = std::string("exception: ") + e.what();
    }
    const char* tag = o.status == Outcome::kPass ? "PASS"
                      : o.status == Outcome::kFlagged ? "FLAGGED"
                                                      : "FAIL";
    failed += o.status == Outcome::kFail;
    flagged += o.status == Outcome::kFlagged;
    std::ostringstream line;
    line << "criterion " << id << " [" << tag << "] " << entry.first << ": " << o.detail;
    std::cout << line.str() << std::endl;
    lines.push_back(line.str());
  }
  std::cout << "summary: " << failed << " failed, " << flagged << " flagged\n";
  std::ofstream report("acceptance_report.txt");
  for (const auto& l : lines) report << l << '\n';
  report << "summary: " << failed << " failed, " << flagged << " flagged\n";
  std::error_code ec;
  fs::remove_all(work, ec);
  return failed == 0 ? 0 : 1;
}
