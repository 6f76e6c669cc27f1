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

#include "acme/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <set>
#include <stdexcept>
#include <string>

#include "acme/errors.hpp"
#include "acme/parallel.hpp"

namespace acme {
namespace {

constexpr int kMaxAttempts = 10000;

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
  return splitmix(splitmix(seed) ^ (stream * 0xD1B54A32D192ED03ULL));
}

Level random_level(std::mt19937_64& rng) {
  return std::uniform_int_distribution<int>(0, 1)(rng) ? Level::kPlus
                                                       : Level::kMinus;
}

// k distinct values from [0, p) excluding `skip` and anything in `taken`.
bool draw_distinct(std::mt19937_64& rng, std::size_t p, std::size_t k,
                   std::size_t skip, const std::set<std::size_t>& taken,
                   std::vector<std::size_t>* out) {
  std::vector<std::size_t> pool;
  for (std::size_t j = 0; j < p; ++j) {
    if (j != skip && !taken.count(j)) pool.push_back(j);
  }
  if (pool.size() < k) return false;
  std::shuffle(pool.begin(), pool.end(), rng);
  out->assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
  return true;
}

// One placement attempt. Returns false when this draw violates the
// structure constraint.
bool try_place(const ScenarioSpec& spec, const CmeDesign& design,
               std::mt19937_64& rng, std::vector<std::size_t>* active) {
  const std::size_t p = spec.p;
  active->clear();
  std::vector<std::size_t> heads(p);
  for (std::size_t j = 0; j < p; ++j) heads[j] = j;
  std::shuffle(heads.begin(), heads.end(), rng);
  heads.resize(spec.n_groups);

  switch (spec.structure) {
    case Structure::kPureMains:
      *active = heads;
      return true;
    case Structure::kPureSiblings:
    case Structure::kPureCousins: {
      // Siblings: heads are parents and every child is used once overall.
      // Cousins: heads are children and every parent is used once overall.
      const bool sib = spec.structure == Structure::kPureSiblings;
      std::set<std::size_t> used;
      for (std::size_t h : heads) {
        std::vector<std::size_t> others;
        if (!draw_distinct(rng, p, spec.effects_per_group, h, used, &others))
          return false;
        for (std::size_t o : others) {
          used.insert(o);
          const std::size_t parent = sib ? h : o;
          const std::size_t child = sib ? o : h;
          active->push_back(design.cme_index(parent, child, random_level(rng)));
        }
      }
      return true;
    }
    case Structure::kMainPlusSiblings:
    case Structure::kMainPlusCousins: {
      const bool sib = spec.structure == Structure::kMainPlusSiblings;
      for (std::size_t h : heads) {
        active->push_back(h);
        std::vector<std::size_t> others;
        if (!draw_distinct(rng, p, spec.effects_per_group, h, {}, &others))
          return false;
        for (std::size_t o : others) {
          const std::size_t parent = sib ? h : o;
          const std::size_t child = sib ? o : h;
          active->push_back(design.cme_index(parent, child, random_level(rng)));
        }
      }
      return true;
    }
  }
  return false;
}

}  // namespace

std::string_view structure_name(Structure s) {
  switch (s) {
    case Structure::kPureMains: return "pure_mains";
    case Structure::kPureSiblings: return "pure_siblings";
    case Structure::kPureCousins: return "pure_cousins";
    case Structure::kMainPlusSiblings: return "main_plus_siblings";
    case Structure::kMainPlusCousins: return "main_plus_cousins";
  }
  return "unknown";
}

Structure parse_structure(std::string_view name) {
  for (Structure s : {Structure::kPureMains, Structure::kPureSiblings,
                      Structure::kPureCousins, Structure::kMainPlusSiblings,
                      Structure::kMainPlusCousins}) {
    if (structure_name(s) == name) return s;
  }
  throw std::invalid_argument("unknown structure '" + std::string(name) + "'");
}

void ScenarioSpec::validate() const {
  if (p < 2) throw ScenarioError("scenario needs p >= 2");
  if (n < 2) throw ScenarioError("scenario needs n >= 2");
  if (n_groups == 0) throw ScenarioError("scenario needs at least one group");
  if (n_groups > p) throw ScenarioError("more groups than main effects");
  if (structure != Structure::kPureMains &&
      (effects_per_group == 0 || effects_per_group > p - 1))
    throw ScenarioError("effects_per_group must lie in [1, p-1]");
  if (!(rho >= 0.0)) throw ScenarioError("rho must be non-negative");
  if (!(noise_sd >= 0.0)) throw ScenarioError("noise_sd must be non-negative");
}

MainEffectMatrix gen_equicorrelated_me(std::size_t n, std::size_t p,
                                       double rho, std::uint64_t seed) {
  if (!(rho >= 0.0)) throw std::invalid_argument("rho must be non-negative");
  if (rho >= 1.0)
    throw DegenerateError("rho = 1 makes every main effect identical");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double a = std::sqrt(rho);
  const double b = std::sqrt(1.0 - rho);
  std::vector<double> values(n * p);
  for (std::size_t i = 0; i < n; ++i) {
    const double g = normal(rng);
    for (std::size_t j = 0; j < p; ++j) {
      const double z = a * g + b * normal(rng);
      values[j * n + i] = z > 0.0 ? 1.0 : -1.0;
    }
  }
  return MainEffectMatrix(n, p, std::move(values));
}

std::vector<double> gen_response(const CmeDesign& design,
                                 std::span<const double> beta_true,
                                 double beta0, const Family& family,
                                 double noise_sd, std::uint64_t seed) {
  if (beta_true.size() != design.width())
    throw DimensionError("true coefficient length does not match design");
  const std::size_t n = design.n();
  std::vector<double> eta(n, beta0);
  for (std::size_t c = 0; c < beta_true.size(); ++c) {
    if (beta_true[c] == 0.0) continue;
    auto x = design.raw_column(c);
    for (std::size_t i = 0; i < n; ++i) eta[i] += beta_true[c] * x[i];
  }
  std::mt19937_64 rng(seed);
  std::vector<double> y(n);
  if (family.is_binomial()) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i)
      y[i] = unif(rng) < family.mean(eta[i]) ? 1.0 : 0.0;
  } else {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) y[i] = eta[i] + noise_sd * normal(rng);
  }
  return y;
}

Scenario build_scenario(const ScenarioSpec& spec) {
  spec.validate();
  Scenario s;
  const std::size_t n_test = spec.n_test == 0 ? spec.n : spec.n_test;
  s.me_train = gen_equicorrelated_me(spec.n, spec.p, spec.rho, derive(spec.seed, 1));
  s.me_test = gen_equicorrelated_me(n_test, spec.p, spec.rho, derive(spec.seed, 2));
  s.train = build_cme_matrix(s.me_train);
  s.test = build_cme_matrix(s.me_test);

  std::mt19937_64 rng(derive(spec.seed, 3));
  bool placed = false;
  for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
    placed = try_place(spec, s.train, rng, &s.active);
  }
  if (!placed)
    throw ScenarioError("could not place actives under the structure constraint");
  std::sort(s.active.begin(), s.active.end());

  s.beta_true.assign(s.train.width(), 0.0);
  for (std::size_t c : s.active) {
    s.beta_true[c] = s.train.column_id(c).is_main() ? spec.beta_me : spec.beta_cme;
  }
  s.y_train = gen_response(s.train, s.beta_true, spec.beta0, spec.family,
                           spec.noise_sd, derive(spec.seed, 4));
  s.y_test = gen_response(s.test, s.beta_true, spec.beta0, spec.family,
                          spec.noise_sd, derive(spec.seed, 5));
  return s;
}

MetricReport evaluate(std::span<const std::size_t> selected,
                      std::span<const std::size_t> truth, std::size_t width,
                      std::span<const double> predictions,
                      std::span<const double> y_test, const Family& family) {
  if (predictions.size() != y_test.size())
    throw DimensionError("prediction and response lengths differ");
  const std::set<std::size_t> sel(selected.begin(), selected.end());
  const std::set<std::size_t> tru(truth.begin(), truth.end());
  for (std::size_t c : sel)
    if (c >= width) throw IndexError("selected column outside the universe");
  for (std::size_t c : tru)
    if (c >= width) throw IndexError("true column outside the universe");
  MetricReport m;
  for (std::size_t c : sel) (tru.count(c) ? m.tp : m.fp)++;
  for (std::size_t c : tru) if (!sel.count(c)) ++m.fn;
  m.tn = width - m.tp - m.fp - m.fn;
  m.n_selected = sel.size();
  m.precision = m.tp + m.fp > 0 ? static_cast<double>(m.tp) / (m.tp + m.fp) : 0.0;
  m.recall = m.tp + m.fn > 0 ? static_cast<double>(m.tp) / (m.tp + m.fn) : 0.0;
  m.f1 = m.precision + m.recall > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  double err = 0.0;
  for (std::size_t i = 0; i < y_test.size(); ++i) {
    if (family.is_binomial()) {
      err += predictions[i] != y_test[i] ? 1.0 : 0.0;
    } else {
      err += (y_test[i] - predictions[i]) * (y_test[i] - predictions[i]);
    }
  }
  m.prediction_error = y_test.empty() ? 0.0 : err / static_cast<double>(y_test.size());
  return m;
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::kAdaptive: return "adaptive";
    case Method::kUnit: return "unit";
    case Method::kLasso: return "lasso";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::kAdaptive, Method::kUnit, Method::kLasso}) {
    if (method_name(m) == name) return m;
  }
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

MethodConfig MethodConfig::make(Method method, const TuneConfig& base) {
  MethodConfig mc;
  mc.method = method;
  mc.tune = base;
  switch (method) {
    case Method::kAdaptive:
      mc.tune.weights = WeightScheme::kAdaptive;
      break;
    case Method::kUnit:
      mc.tune.weights = WeightScheme::kUnit;
      break;
    case Method::kLasso:
      mc.tune.weights = WeightScheme::kUnit;
      mc.tune.grid.gamma_grid = {1e6};
      mc.tune.grid.tau_grid = {1e-6};
      mc.tune.grid.rho_grid = {0.5};
      break;
  }
  return mc;
}

std::uint64_t replicate_seed(std::uint64_t seed, std::uint64_t rep) {
  return derive(seed, 1000 + rep);
}

BenchResult run_replicates(const ScenarioSpec& spec,
                           const std::vector<MethodConfig>& methods,
                           int n_reps, int threads,
                           const std::string& scenario_label) {
  if (n_reps < 1) throw std::invalid_argument("n_reps must be at least 1");
  spec.validate();
  BenchResult out;
  out.per_method.assign(methods.size(),
                        std::vector<ReplicateResult>(static_cast<std::size_t>(n_reps)));
  parallel_for(static_cast<std::size_t>(n_reps), threads, [&](std::size_t r) {
    ScenarioSpec rs = spec;
    rs.seed = replicate_seed(spec.seed, r);
    Scenario sc;
    std::string build_error;
    try {
      sc = build_scenario(rs);
    } catch (const std::exception& e) {
      build_error = e.what();
    }
    for (std::size_t m = 0; m < methods.size(); ++m) {
      ReplicateResult& res = out.per_method[m][r];
      res.rep = static_cast<int>(r);
      if (!build_error.empty()) {
        res.error = build_error;
        continue;
      }
      try {
        TuneConfig tc = methods[m].tune;
        tc.threads = 1;
        tc.grid.seed = derive(rs.seed, 7);
        const CvReport rep = cv_tune(sc.train, sc.y_train, rs.family, tc);
        const CmeDesign train_std = standardize(sc.train);
        const CmeDesign test_std = sc.test.standardized_like(train_std);
        const Prediction pred = predict(rep.fit, test_std, rs.family);
        std::vector<double> yhat;
        if (rs.family.is_binomial()) {
          yhat.assign(pred.label.begin(), pred.label.end());
        } else {
          yhat = pred.mean;
        }
        res.metrics = evaluate(rep.fit.active, sc.active, sc.train.width(),
                               yhat, sc.y_test, rs.family);
        res.ok = true;
      } catch (const std::exception& e) {
        res.error = e.what();
      }
    }
  });

  const std::string err_name = spec.family.is_binomial() ? "mcr" : "mspe";
  const std::vector<std::string> metrics = {"precision", "recall", "f1",
                                            "n_selected", err_name};
  for (std::size_t m = 0; m < methods.size(); ++m) {
    for (const std::string& metric : metrics) {
      std::vector<double> vals;
      int failed = 0;
      for (const ReplicateResult& r : out.per_method[m]) {
        if (!r.ok) {
          ++failed;
          continue;
        }
        const MetricReport& mr = r.metrics;
        if (metric == "precision") vals.push_back(mr.precision);
        else if (metric == "recall") vals.push_back(mr.recall);
        else if (metric == "f1") vals.push_back(mr.f1);
        else if (metric == "n_selected") vals.push_back(static_cast<double>(mr.n_selected));
        else vals.push_back(mr.prediction_error);
      }
      AggregateRow row;
      row.scenario = scenario_label;
      row.method = std::string(method_name(methods[m].method));
      row.metric = metric;
      row.n_groups = spec.n_groups;
      row.n_ok = static_cast<int>(vals.size());
      row.n_failed = failed;
      if (!vals.empty()) {
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= static_cast<double>(vals.size());
        double ss = 0.0;
        for (double v : vals) ss += (v - mean) * (v - mean);
        row.mean = mean;
        row.se = vals.size() > 1
                     ? std::sqrt(ss / static_cast<double>(vals.size() - 1) /
                                 static_cast<double>(vals.size()))
                     : 0.0;
      } else {
        row.mean = std::nan("");
        row.se = std::nan("");
      }
      out.rows.push_back(row);
    }
  }
  return out;
}

void write_aggregate_csv(std::ostream& out,
                         const std::vector<AggregateRow>& rows) {
  out << "scenario,method,metric,n_groups,mean,se,n_ok,n_failed\n";
  char buf[64];
  for (const AggregateRow& r : rows) {
    out << r.scenario << ',' << r.method << ',' << r.metric << ','
        << r.n_groups << ',';
    std::snprintf(buf, sizeof buf, "%.17g", r.mean);
    out << buf << ',';
    std::snprintf(buf, sizeof buf, "%.17g", r.se);
    out << buf << ',' << r.n_ok << ',' << r.n_failed << '\n';
  }
}

double sign_test_p(std::span<const double> first,
                   std::span<const double> second) {
  if (first.size() != second.size())
    throw DimensionError("paired samples differ in length");
  int wins = 0;
  int losses = 0;
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (first[i] > second[i]) ++wins;
    else if (first[i] < second[i]) ++losses;
  }
  const int m = wins + losses;
  if (m == 0) return 1.0;
  // P(Bin(m, 1/2) >= wins), summed in log space.
  double p = 0.0;
  for (int k = wins; k <= m; ++k) {
    p += std::exp(std::lgamma(m + 1.0) - std::lgamma(k + 1.0) -
                  std::lgamma(m - k + 1.0) - m * std::log(2.0));
  }
  return std::min(1.0, p);
}

}  // namespace acme
