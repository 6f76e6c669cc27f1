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

#include "acme/design.hpp"

#include <cmath>
#include <string>

#include "acme/errors.hpp"

namespace acme {

std::string default_me_name(std::size_t j) {
  std::string name;
  std::size_t k = j + 1;
  while (k > 0) {
    --k;
    name.insert(name.begin(), static_cast<char>('A' + k % 26));
    k /= 26;
  }
  return name;
}

MainEffectMatrix::MainEffectMatrix(std::size_t n, std::size_t p,
                                   std::vector<double> values,
                                   std::vector<std::string> names)
    : n_(n), p_(p), values_(std::move(values)), names_(std::move(names)) {
  if (p_ < 2) throw DesignError("at least two main effects are required");
  if (n_ == 0) throw DesignError("main-effect matrix has no rows");
  if (values_.size() != n_ * p_)
    throw DesignError("main-effect value count does not match n*p");
  for (double v : values_) {
    if (v != 1.0 && v != -1.0)
      throw DesignError("main-effect entries must be -1 or +1");
  }
  if (names_.empty()) {
    for (std::size_t j = 0; j < p_; ++j) names_.push_back(default_me_name(j));
  } else if (names_.size() != p_) {
    throw DesignError("main-effect name count does not match p");
  }
}

MainEffectMatrix MainEffectMatrix::subset_rows(
    std::span<const std::size_t> rows) const {
  std::vector<double> out(rows.size() * p_);
  for (std::size_t j = 0; j < p_; ++j) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r] >= n_) throw IndexError("row index out of range");
      out[j * rows.size() + r] = values_[j * n_ + rows[r]];
    }
  }
  return MainEffectMatrix(rows.size(), p_, std::move(out), names_);
}

std::size_t CmeDesign::cme_index(std::size_t parent, std::size_t child,
                                 Level level) const {
  if (parent >= p_ || child >= p_ || parent == child)
    throw IndexError("invalid CME parent/child pair");
  const std::size_t slot = child < parent ? child : child - 1;
  return p_ + parent * 2 * (p_ - 1) + 2 * slot +
         (level == Level::kMinus ? 1 : 0);
}

void CmeDesign::build_index() {
  columns_.clear();
  columns_.reserve(p_ + 2 * p_ * (p_ - 1));
  for (std::size_t j = 0; j < p_; ++j) {
    columns_.push_back({ColumnId::Kind::kMain, j, j, Level::kPlus});
  }
  for (std::size_t j = 0; j < p_; ++j) {
    for (std::size_t k = 0; k < p_; ++k) {
      if (k == j) continue;
      columns_.push_back({ColumnId::Kind::kConditional, j, k, Level::kPlus});
      columns_.push_back({ColumnId::Kind::kConditional, j, k, Level::kMinus});
    }
  }
  sibling_index_.assign(p_, {});
  cousin_index_.assign(p_, {});
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    sibling_index_[columns_[c].parent].push_back(c);
    cousin_index_[columns_[c].child].push_back(c);
  }
}

CmeDesign build_cme_matrix(const MainEffectMatrix& me) {
  if (me.p() < 2) throw DesignError("at least two main effects are required");
  CmeDesign d;
  d.n_ = me.n();
  d.p_ = me.p();
  d.me_names_ = me.names();
  d.build_index();
  const std::size_t n = d.n_;
  d.raw_.assign(n * d.columns_.size(), 0.0);
  for (std::size_t c = 0; c < d.columns_.size(); ++c) {
    const ColumnId& id = d.columns_[c];
    auto parent = me.column(id.parent);
    double* out = d.raw_.data() + c * n;
    if (id.is_main()) {
      for (std::size_t i = 0; i < n; ++i) out[i] = parent[i];
      continue;
    }
    auto child = me.column(id.child);
    const double want = id.level == Level::kPlus ? 1.0 : -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = child[i] == want ? parent[i] : 0.0;
    }
  }
  return d;
}

void CmeDesign::apply_scaling(std::vector<double> mean,
                              std::vector<double> scale) {
  col_mean_ = std::move(mean);
  col_scale_ = std::move(scale);
  scaled_.assign(raw_.size(), 0.0);
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (col_scale_[c] == 0.0) continue;
    const double* in = raw_.data() + c * n_;
    double* out = scaled_.data() + c * n_;
    const double m = col_mean_[c];
    const double s = col_scale_[c];
    for (std::size_t i = 0; i < n_; ++i) out[i] = (in[i] - m) / s;
  }
  standardized_ = true;
}

CmeDesign standardize(const CmeDesign& design) {
  CmeDesign d = design;
  const std::size_t n = d.n_;
  const std::size_t w = d.width();
  std::vector<double> mean(w, 0.0), scale(w, 0.0);
  for (std::size_t c = 0; c < w; ++c) {
    const double* x = d.raw_.data() + c * n;
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += x[i];
    m /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (x[i] - m) * (x[i] - m);
    const double var = ss / static_cast<double>(n);
    mean[c] = m;
    // Entries are in {-1,0,1}, so any non-constant column has variance of
    // at least 1/n^2; anything below this is rounding noise.
    scale[c] = var > 1e-14 ? std::sqrt(var) : 0.0;
  }
  d.apply_scaling(std::move(mean), std::move(scale));
  return d;
}

CmeDesign CmeDesign::standardized_like(const CmeDesign& reference) const {
  if (!reference.standardized_)
    throw DimensionError("reference design is not standardized");
  if (reference.p_ != p_)
    throw DimensionError("reference design has a different ME count");
  CmeDesign d = *this;
  d.apply_scaling(reference.col_mean_, reference.col_scale_);
  return d;
}

std::size_t CmeDesign::excluded_count() const {
  std::size_t count = 0;
  for (std::size_t c = 0; c < width(); ++c) count += excluded(c) ? 1 : 0;
  return count;
}

std::string CmeDesign::column_name(std::size_t col) const {
  if (col >= columns_.size()) throw IndexError("column index out of range");
  const ColumnId& id = columns_[col];
  if (id.is_main()) return me_names_[id.parent];
  return me_names_[id.parent] + "|" + me_names_[id.child] +
         (id.level == Level::kPlus ? "+" : "-");
}

std::optional<std::size_t> CmeDesign::find_column(std::string_view name) const {
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (column_name(c) == name) return c;
  }
  return std::nullopt;
}

CmeDesign CmeDesign::subset_rows(std::span<const std::size_t> rows) const {
  CmeDesign d;
  d.n_ = rows.size();
  d.p_ = p_;
  d.me_names_ = me_names_;
  d.columns_ = columns_;
  d.sibling_index_ = sibling_index_;
  d.cousin_index_ = cousin_index_;
  d.raw_.resize(rows.size() * width());
  for (std::size_t c = 0; c < width(); ++c) {
    const double* in = raw_.data() + c * n_;
    double* out = d.raw_.data() + c * d.n_;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r] >= n_) throw IndexError("row index out of range");
      out[r] = in[rows[r]];
    }
  }
  return d;
}

std::pair<std::vector<double>, double> destandardize_coefficients(
    const CmeDesign& design, std::span<const double> beta_std,
    double intercept_std) {
  if (beta_std.size() != design.width())
    throw DimensionError("coefficient length does not match design width");
  std::vector<double> beta(beta_std.size(), 0.0);
  if (!design.standardized()) {
    beta.assign(beta_std.begin(), beta_std.end());
    return {beta, intercept_std};
  }
  double intercept = intercept_std;
  for (std::size_t c = 0; c < beta.size(); ++c) {
    const double s = design.col_scale()[c];
    if (s == 0.0) continue;
    beta[c] = beta_std[c] / s;
    intercept -= beta[c] * design.col_mean()[c];
  }
  return {beta, intercept};
}

}  // namespace acme
