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

#include <arm_neon.h>

#include "acme/kernels.hpp"

namespace acme::kernels {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void weighted_moments_neon(const double* x, const double* w, const double* r,
                           std::size_t n, double* xwr, double* xwx) {
  float64x2_t a = vdupq_n_f64(0.0);
  float64x2_t b = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t xv = vld1q_f64(x + i);
    const float64x2_t wx = vmulq_f64(vld1q_f64(w + i), xv);
    a = vfmaq_f64(a, wx, vld1q_f64(r + i));
    b = vfmaq_f64(b, wx, xv);
  }
  double sa = vaddvq_f64(a);
  double sb = vaddvq_f64(b);
  for (; i < n; ++i) {
    const double wx = w[i] * x[i];
    sa += wx * r[i];
    sb += wx * x[i];
  }
  *xwr = sa;
  *xwx = sb;
}

double sumsq_neon(const double* x, std::size_t n) { return dot_neon(x, x, n); }

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t av = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), av, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void shift_fit_neon(double d, const double* x, double* resid, double* eta,
                    std::size_t n) {
  const float64x2_t dv = vdupq_n_f64(d);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t dx = vmulq_f64(dv, vld1q_f64(x + i));
    vst1q_f64(resid + i, vsubq_f64(vld1q_f64(resid + i), dx));
    vst1q_f64(eta + i, vaddq_f64(vld1q_f64(eta + i), dx));
  }
  for (; i < n; ++i) {
    const double dx = d * x[i];
    resid[i] -= dx;
    eta[i] += dx;
  }
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable t{Isa::kNeon, dot_neon, weighted_moments_neon,
                             sumsq_neon, axpy_neon, shift_fit_neon};
  return t;
}

}  // namespace acme::kernels
