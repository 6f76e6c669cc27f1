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

// Conditional-main-effect (CME) model matrix.
//
// For p binary main effects (MEs) x_1..x_p in {-1,+1}^n the full matrix has
// p + 4*C(p,2) columns: the MEs themselves followed by every CME j|k+ and j|k-
// (j != k), where x_{j|k+} equals x_j on rows with x_k = +1 and 0 elsewhere.
//
// Column order is fixed: MEs 0..p-1, then CMEs by (parent, child, level) with
// level + before -. The sibling group S(j) holds ME j and every CME whose
// parent is j; the cousin group C(k) holds ME k and every CME whose child is k.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace acme {

enum class Level : int { kPlus = 1, kMinus = -1 };

struct ColumnId {
  enum class Kind { kMain, kConditional };

  Kind kind = Kind::kMain;
  std::size_t parent = 0;
  std::size_t child = 0;  // equals parent for MEs
  Level level = Level::kPlus;

  bool is_main() const { return kind == Kind::kMain; }
  friend bool operator==(const ColumnId&, const ColumnId&) = default;
};

/// n x p matrix of main effects with entries in {-1,+1}, column-major.
class MainEffectMatrix {
 public:
  MainEffectMatrix() = default;

  /// Throws DesignError when p < 2, the value count is wrong, an entry is
  /// not exactly -1 or +1, or the name count does not match p. Empty names
  /// default to A, B, ..., Z, AA, AB, ...
  MainEffectMatrix(std::size_t n, std::size_t p, std::vector<double> values,
                   std::vector<std::string> names = {});

  std::size_t n() const { return n_; }
  std::size_t p() const { return p_; }
  double operator()(std::size_t i, std::size_t j) const {
    return values_[j * n_ + i];
  }
  std::span<const double> column(std::size_t j) const {
    return {values_.data() + j * n_, n_};
  }
  const std::vector<double>& values() const { return values_; }
  const std::vector<std::string>& names() const { return names_; }

  MainEffectMatrix subset_rows(std::span<const std::size_t> rows) const;

 private:
  std::size_t n_ = 0;
  std::size_t p_ = 0;
  std::vector<double> values_;
  std::vector<std::string> names_;
};

/// Spreadsheet-style default name for ME index j: A..Z, AA, AB, ...
std::string default_me_name(std::size_t j);

class CmeDesign {
 public:
  CmeDesign() = default;

  std::size_t n() const { return n_; }
  std::size_t p() const { return p_; }
  /// Total column count p' = p + 4*C(p,2).
  std::size_t width() const { return columns_.size(); }

  /// Values the solver works on: standardized when standardized() is true,
  /// raw otherwise. Column-major, n rows.
  const std::vector<double>& values() const {
    return standardized_ ? scaled_ : raw_;
  }
  const std::vector<double>& raw_values() const { return raw_; }
  std::span<const double> column(std::size_t col) const {
    return {values().data() + col * n_, n_};
  }
  std::span<const double> raw_column(std::size_t col) const {
    return {raw_.data() + col * n_, n_};
  }

  const std::vector<ColumnId>& columns() const { return columns_; }
  const ColumnId& column_id(std::size_t col) const { return columns_[col]; }

  std::span<const std::size_t> sibling_group(std::size_t j) const {
    return sibling_index_[j];
  }
  std::span<const std::size_t> cousin_group(std::size_t k) const {
    return cousin_index_[k];
  }

  /// Position of CME parent|child(level). Throws IndexError when
  /// parent == child or either index is out of range.
  std::size_t cme_index(std::size_t parent, std::size_t child,
                        Level level) const;

  bool standardized() const { return standardized_; }
  const std::vector<double>& col_mean() const { return col_mean_; }
  const std::vector<double>& col_scale() const { return col_scale_; }
  /// Zero-variance column; held at 0 by the solver. Only meaningful once
  /// standardized.
  bool excluded(std::size_t col) const {
    return standardized_ && col_scale_[col] == 0.0;
  }
  std::size_t excluded_count() const;

  const std::vector<std::string>& me_names() const { return me_names_; }
  /// "A" for MEs, "A|B+" / "A|B-" for CMEs.
  std::string column_name(std::size_t col) const;
  std::optional<std::size_t> find_column(std::string_view name) const;

  /// Raw rows selected by index; the result is not standardized.
  CmeDesign subset_rows(std::span<const std::size_t> rows) const;

  /// Applies another design's column means and scales (e.g. training
  /// statistics to a test design). Throws DimensionError on shape mismatch.
  CmeDesign standardized_like(const CmeDesign& reference) const;

  friend CmeDesign build_cme_matrix(const MainEffectMatrix& me);
  friend CmeDesign standardize(const CmeDesign& design);

 private:
  void build_index();
  void apply_scaling(std::vector<double> mean, std::vector<double> scale);

  std::size_t n_ = 0;
  std::size_t p_ = 0;
  std::vector<double> raw_;
  std::vector<double> scaled_;
  std::vector<ColumnId> columns_;
  std::vector<std::vector<std::size_t>> sibling_index_;
  std::vector<std::vector<std::size_t>> cousin_index_;
  std::vector<std::string> me_names_;
  std::vector<double> col_mean_;
  std::vector<double> col_scale_;
  bool standardized_ = false;
};

/// Raw full model matrix; standardization is a separate step.
CmeDesign build_cme_matrix(const MainEffectMatrix& me);

/// Centers every column and scales it to (1/n)*||x||^2 = 1. Columns with
/// zero variance get scale 0, are zeroed, and are excluded from fitting.
CmeDesign standardize(const CmeDesign& design);

/// Maps coefficients on the standardized scale back to raw columns.
/// Throws DimensionError if beta_std.size() != design.width().
std::pair<std::vector<double>, double> destandardize_coefficients(
    const CmeDesign& design, std::span<const double> beta_std,
    double intercept_std);

}  // namespace acme
