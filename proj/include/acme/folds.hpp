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

#include <cstdint>
#include <span>
#include <vector>

#include "acme/family.hpp"

namespace acme {

/// Fold id in [0, k) per row. Rows are shuffled with a seeded mt19937_64
/// and dealt round-robin; Binomial responses are dealt class by class so
/// every fold gets a near-equal share of each class. Throws
/// std::invalid_argument unless 2 <= k <= y.size().
std::vector<int> make_folds(std::span<const double> y, const Family& family,
                            int k, std::uint64_t seed);

/// Row indices with fold id == fold (held) or != fold (train).
std::vector<std::size_t> fold_rows(const std::vector<int>& folds, int fold,
                                   bool held);

}  // namespace acme
