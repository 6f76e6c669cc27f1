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

#include <cstddef>
#include <span>
#include <string_view>

namespace acme {

enum class FamilyKind { kGaussian, kBinomial };

/// Response family: Gaussian (identity link) or Binomial (logit link).
class Family {
 public:
  static constexpr double kWeightFloor = 1e-5;

  constexpr Family() = default;
  constexpr explicit Family(FamilyKind kind) : kind_(kind) {}
  static constexpr Family gaussian() { return Family(FamilyKind::kGaussian); }
  static constexpr Family binomial() { return Family(FamilyKind::kBinomial); }
  /// "gaussian" or "binomial"; throws std::invalid_argument otherwise.
  static Family parse(std::string_view name);

  FamilyKind kind() const { return kind_; }
  bool is_binomial() const { return kind_ == FamilyKind::kBinomial; }
  std::string_view name() const;

  double mean(double eta) const;
  double variance(double mu) const;
  /// IRLS weight at eta, floored at kWeightFloor for Binomial.
  double working_weight(double eta) const;
  /// Upper bound of the working weight over all eta.
  double weight_bound() const { return is_binomial() ? 0.25 : 1.0; }
  /// Per-observation negative log-likelihood up to data-only constants:
  /// (y-eta)^2/2 or log(1+e^eta) - y*eta.
  double loss(double y, double eta) const;
  double mean_loss(std::span<const double> y,
                   std::span<const double> eta) const;
  /// y - mean(eta).
  double score_residual(double y, double eta) const { return y - mean(eta); }
  /// Intercept of the intercept-only fit: mean(y) or logit(mean(y)).
  /// Throws DegenerateError for a Binomial response with a single class.
  double null_intercept(std::span<const double> y) const;
  /// Throws DimensionError for an empty or non-finite y and DesignError when
  /// a Binomial response has entries outside {0,1}.
  void validate_response(std::span<const double> y) const;

 private:
  FamilyKind kind_ = FamilyKind::kGaussian;
};

/// log(1 + exp(x)) without overflow.
double softplus(double x);

}  // namespace acme
