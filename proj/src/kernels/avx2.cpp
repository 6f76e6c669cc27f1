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

// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include "acme/kernels.hpp"

namespace acme::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                           _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void weighted_moments_avx2(const double* x, const double* w, const double* r,
                           std::size_t n, double* xwr, double* xwx) {
  __m256d a = _mm256_setzero_pd();
  __m256d b = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    const __m256d wx = _mm256_mul_pd(_mm256_loadu_pd(w + i), xv);
    a = _mm256_fmadd_pd(wx, _mm256_loadu_pd(r + i), a);
    b = _mm256_fmadd_pd(wx, xv, b);
  }
  double sa = hsum(a);
  double sb = hsum(b);
  for (; i < n; ++i) {
    const double wx = w[i] * x[i];
    sa += wx * r[i];
    sb += wx * x[i];
  }
  *xwr = sa;
  *xwx = sb;
}

double sumsq_avx2(const double* x, std::size_t n) { return dot_avx2(x, x, n); }

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void shift_fit_avx2(double d, const double* x, double* resid, double* eta,
                    std::size_t n) {
  const __m256d dv = _mm256_set1_pd(d);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_mul_pd(dv, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(resid + i, _mm256_sub_pd(_mm256_loadu_pd(resid + i), dx));
    _mm256_storeu_pd(eta + i, _mm256_add_pd(_mm256_loadu_pd(eta + i), dx));
  }
  for (; i < n; ++i) {
    const double dx = d * x[i];
    resid[i] -= dx;
    eta[i] += dx;
  }
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable t{Isa::kAvx2, dot_avx2, weighted_moments_avx2,
                             sumsq_avx2, axpy_avx2, shift_fit_avx2};
  return t;
}

}  // namespace acme::kernels
