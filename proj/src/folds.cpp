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

#include "acme/folds.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

namespace acme {

std::vector<int> make_folds(std::span<const double> y, const Family& family,
                            int k, std::uint64_t seed) {
  const std::size_t n = y.size();
  if (k < 2 || static_cast<std::size_t>(k) > n)
    throw std::invalid_argument("fold count must lie in [2, n]");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order;
  order.reserve(n);
  if (family.is_binomial()) {
    std::vector<std::size_t> zeros, ones;
    for (std::size_t i = 0; i < n; ++i) (y[i] > 0.5 ? ones : zeros).push_back(i);
    std::shuffle(zeros.begin(), zeros.end(), rng);
    std::shuffle(ones.begin(), ones.end(), rng);
    order = zeros;
    order.insert(order.end(), ones.begin(), ones.end());
  } else {
    order.resize(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<int> folds(n, 0);
  for (std::size_t r = 0; r < n; ++r) {
    folds[order[r]] = static_cast<int>(r % static_cast<std::size_t>(k));
  }
  return folds;
}

std::vector<std::size_t> fold_rows(const std::vector<int>& folds, int fold,
                                   bool held) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < folds.size(); ++i) {
    if ((folds[i] == fold) == held) rows.push_back(i);
  }
  return rows;
}

}  // namespace acme
