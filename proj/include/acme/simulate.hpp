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

// Synthetic data from an equicorrelated latent model, scenario builders and
// selection / prediction metrics for replicate studies.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "acme/design.hpp"
#include "acme/family.hpp"
#include "acme/tuning.hpp"

namespace acme {

enum class Structure {
  kPureMains,
  kPureSiblings,
  kPureCousins,
  kMainPlusSiblings,
  kMainPlusCousins,
};

std::string_view structure_name(Structure s);
/// Accepts the names returned by structure_name; throws
/// std::invalid_argument otherwise.
Structure parse_structure(std::string_view name);

struct ScenarioSpec {
  std::size_t n = 100;
  std::size_t n_test = 0;  // 0 means n
  std::size_t p = 40;
  double rho = 0.0;
  Family family = Family::gaussian();
  Structure structure = Structure::kPureSiblings;
  std::size_t n_groups = 4;
  std::size_t effects_per_group = 2;
  double beta_me = 5.0;
  double beta_cme = 5.0;
  double beta0 = 12.0;
  double noise_sd = 1.0;
  std::uint64_t seed = 1;

  /// Throws ScenarioError for counts that cannot describe a scenario.
  void validate() const;
};

/// n x p matrix with x_ij = sign(sqrt(rho) g_i + sqrt(1-rho) e_ij), where a
/// non-positive latent value maps to -1. Throws DegenerateError for
/// rho >= 1 and std::invalid_argument for rho < 0.
MainEffectMatrix gen_equicorrelated_me(std::size_t n, std::size_t p,
                                       double rho, std::uint64_t seed);

/// Gaussian: beta0 + X beta + noise_sd * N(0,1). Binomial: Bernoulli draws
/// with success probability logistic(beta0 + X beta). Uses raw columns.
std::vector<double> gen_response(const CmeDesign& design,
                                 std::span<const double> beta_true,
                                 double beta0, const Family& family,
                                 double noise_sd, std::uint64_t seed);

struct Scenario {
  MainEffectMatrix me_train;
  MainEffectMatrix me_test;
  CmeDesign train;  // raw
  CmeDesign test;   // raw
  std::vector<std::size_t> active;  // sorted column positions
  std::vector<double> beta_true;    // raw scale, length p'
  std::vector<double> y_train;
  std::vector<double> y_test;
};

/// Places actives per the structure (rejection sampling, at most 1e4
/// attempts) and draws train and test data. Throws ScenarioError when the
/// structure cannot be satisfied.
Scenario build_scenario(const ScenarioSpec& spec);

struct MetricReport {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  /// MSPE for Gaussian, misclassification rate for Binomial.
  double prediction_error = 0.0;
  std::size_t n_selected = 0;
};

/// Confusion counts over a universe of `width` columns plus the prediction
/// error of `predictions` (means for Gaussian, 0/1 labels for Binomial).
MetricReport evaluate(std::span<const std::size_t> selected,
                      std::span<const std::size_t> truth, std::size_t width,
                      std::span<const double> predictions,
                      std::span<const double> y_test, const Family& family);

enum class Method { kAdaptive, kUnit, kLasso };

std::string_view method_name(Method m);
Method parse_method(std::string_view name);

struct MethodConfig {
  Method method = Method::kAdaptive;
  TuneConfig tune;

  /// Tuning configuration for the method, derived from a base grid. The
  /// L1 baseline uses unit weights with gamma and 1/tau so large that the
  /// composite penalty reduces to (lambda_s + lambda_c) * |beta|.
  static MethodConfig make(Method method, const TuneConfig& base);
};

struct ReplicateResult {
  int rep = 0;
  bool ok = false;
  std::string error;
  MetricReport metrics;
};

struct AggregateRow {
  std::string scenario;
  std::string method;
  std::string metric;
  std::size_t n_groups = 0;
  double mean = 0.0;
  double se = 0.0;
  int n_ok = 0;
  int n_failed = 0;
};

struct BenchResult {
  std::vector<std::vector<ReplicateResult>> per_method;  // [method][rep]
  std::vector<AggregateRow> rows;
};

/// Fits every method on n_reps independent draws (replicate r uses a seed
/// derived from (spec.seed, r)) and aggregates precision, recall, f1,
/// n_selected and the prediction error. Failed replicates are recorded.
BenchResult run_replicates(const ScenarioSpec& spec,
                           const std::vector<MethodConfig>& methods,
                           int n_reps, int threads,
                           const std::string& scenario_label);

/// Header plus one row per aggregate, floats at 17 significant digits.
void write_aggregate_csv(std::ostream& out,
                         const std::vector<AggregateRow>& rows);

/// One-sided sign test p-value for "first >= second" over paired values;
/// ties are dropped. Returns 1 when every pair ties.
double sign_test_p(std::span<const double> first,
                   std::span<const double> second);

/// Seed for replicate `rep` of a study with base seed `seed`.
std::uint64_t replicate_seed(std::uint64_t seed, std::uint64_t rep);

}  // namespace acme
