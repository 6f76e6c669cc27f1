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

// Column kernels used by the coordinate-descent inner loop. Every kernel has
// a scalar reference implementation; vectorized variants are selected once at
// startup from the CPU features and can be overridden for testing.

#include <cstddef>
#include <span>
#include <string_view>

namespace acme::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view isa_name(Isa isa);

struct KernelTable {
  Isa isa;
  // sum_i a_i * b_i
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum_i x_i * w_i * r_i and sum_i w_i * x_i^2 in one sweep
  void (*weighted_moments)(const double* x, const double* w, const double* r,
                           std::size_t n, double* xwr, double* xwx);
  // sum_i x_i^2
  double (*sumsq)(const double* x, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // resid -= d * x; eta += d * x
  void (*shift_fit)(double d, const double* x, double* resid, double* eta,
                    std::size_t n);
};

const KernelTable& scalar_table();
#if defined(ACME_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(ACME_HAVE_NEON)
const KernelTable& neon_table();
#endif

/// True when the running CPU can execute the given variant.
bool supported(Isa isa);

/// Best variant for this CPU, honouring the ACME_ISA environment variable
/// ("scalar", "avx2", "neon") when it names a supported variant.
Isa detect();

/// Table for an explicit variant. Throws std::invalid_argument when the
/// variant was not compiled in or the CPU lacks it.
const KernelTable& table(Isa isa);

/// Table currently used by the library.
const KernelTable& active();

/// Overrides the active table. Not thread-safe with respect to concurrent
/// fits; intended for tests and benchmarks.
void select(Isa isa);

// span conveniences over the active table

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline double sumsq(std::span<const double> x) {
  return active().sumsq(x.data(), x.size());
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size());
}

}  // namespace acme::kernels
