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

#include "acme/family.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "acme/errors.hpp"

namespace acme {

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

Family Family::parse(std::string_view name) {
  if (name == "gaussian") return gaussian();
  if (name == "binomial") return binomial();
  throw std::invalid_argument("unknown family '" + std::string(name) + "'");
}

std::string_view Family::name() const {
  return is_binomial() ? "binomial" : "gaussian";
}

double Family::mean(double eta) const {
  if (!is_binomial()) return eta;
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double Family::variance(double mu) const {
  return is_binomial() ? mu * (1.0 - mu) : 1.0;
}

double Family::working_weight(double eta) const {
  if (!is_binomial()) return 1.0;
  const double mu = mean(eta);
  return std::max(mu * (1.0 - mu), kWeightFloor);
}

double Family::loss(double y, double eta) const {
  if (!is_binomial()) return 0.5 * (y - eta) * (y - eta);
  return softplus(eta) - y * eta;
}

double Family::mean_loss(std::span<const double> y,
                         std::span<const double> eta) const {
  if (y.size() != eta.size())
    throw DimensionError("response and predictor lengths differ");
  if (y.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) total += loss(y[i], eta[i]);
  return total / static_cast<double>(y.size());
}

double Family::null_intercept(std::span<const double> y) const {
  if (y.empty()) throw DimensionError("empty response");
  double m = 0.0;
  for (double v : y) m += v;
  m /= static_cast<double>(y.size());
  if (!is_binomial()) return m;
  if (m <= 0.0 || m >= 1.0)
    throw DegenerateError("binomial response contains a single class");
  return std::log(m / (1.0 - m));
}

void Family::validate_response(std::span<const double> y) const {
  if (y.empty()) throw DimensionError("empty response");
  for (double v : y) {
    if (!std::isfinite(v)) throw DimensionError("non-finite response value");
    if (is_binomial() && v != 0.0 && v != 1.0)
      throw DesignError("binomial response must be coded 0/1");
  }
}

}  // namespace acme
