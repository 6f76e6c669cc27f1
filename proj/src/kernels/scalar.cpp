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

#include "acme/kernels.hpp"

namespace acme::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void weighted_moments_scalar(const double* x, const double* w, const double* r,
                             std::size_t n, double* xwr, double* xwx) {
  double a = 0.0;
  double b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wx = w[i] * x[i];
    a += wx * r[i];
    b += wx * x[i];
  }
  *xwr = a;
  *xwx = b;
}

double sumsq_scalar(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
  return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void shift_fit_scalar(double d, const double* x, double* resid, double* eta,
                      std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = d * x[i];
    resid[i] -= dx;
    eta[i] += dx;
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t{Isa::kScalar, dot_scalar, weighted_moments_scalar,
                             sumsq_scalar, axpy_scalar, shift_fit_scalar};
  return t;
}

}  // namespace acme::kernels
