// Copyright 2026 The qdfit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qdfit/functional.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "qdfit/error.h"

namespace qdfit {

namespace {

// Gradient evaluation point for kernels whose derivative blows up at zero.
constexpr double kTinyMass = 1e-300;

}  // namespace

LinearFunctional::LinearFunctional(std::vector<double> coefficients)
    : coefficients_(std::move(coefficients)) {
  require(!coefficients_.empty(), ErrorCode::kInvalidArgument,
          "linear functional needs at least one coefficient");
  for (double c : coefficients_) {
    require(!std::isnan(c) && c != std::numeric_limits<double>::infinity(),
            ErrorCode::kInvalidArgument,
            "linear functional coefficients must be finite or -inf");
  }
}

double LinearFunctional::value(std::span<const double> q) const {
  CompensatedSum sum;
  for (std::size_t i = 0; i < coefficients_.size(); ++i) {
    if (q[i] == 0.0) continue;
    sum.add(q[i] * coefficients_[i]);
  }
  return sum.value();
}

double LinearFunctional::value_and_gradient(std::span<const double> q,
                                            std::span<double> grad) const {
  for (std::size_t i = 0; i < coefficients_.size(); ++i) {
    grad[i] = std::isfinite(coefficients_[i]) ? coefficients_[i] : 0.0;
  }
  return value(q);
}

std::vector<bool> LinearFunctional::forced_zero() const {
  std::vector<bool> out(coefficients_.size(), false);
  bool any = false;
  for (std::size_t i = 0; i < coefficients_.size(); ++i) {
    if (!std::isfinite(coefficients_[i])) out[i] = any = true;
  }
  if (!any) out.clear();
  return out;
}

SeparableFunctional::SeparableFunctional(MetricPair pair, std::size_t dim)
    : pair_(std::move(pair)), dim_(dim) {
  require(dim_ > 0, ErrorCode::kInvalidArgument,
          "separable functional needs a positive dimension");
}

double SeparableFunctional::value(std::span<const double> q) const {
  CompensatedSum sum;
  for (std::size_t i = 0; i < dim_; ++i) sum.add(pair_.g(q[i]));
  return sum.value();
}

double SeparableFunctional::value_and_gradient(std::span<const double> q,
                                               std::span<double> grad) const {
  for (std::size_t i = 0; i < dim_; ++i) {
    grad[i] = pair_.g_prime(std::max(q[i], kTinyMass));
  }
  return value(q);
}

MultilinearForm::MultilinearForm(std::size_t dim, int degree,
                                 std::vector<double> tensor)
    : dim_(dim), degree_(degree), tensor_(std::move(tensor)) {
  require(dim_ > 0 && degree_ >= 1, ErrorCode::kInvalidArgument,
          "multilinear form needs dim > 0 and degree >= 1");
  std::size_t entries = 1;
  for (int k = 0; k < degree_; ++k) {
    require(entries <= kMaxEntries / dim_, ErrorCode::kCapacity,
            "multilinear form tensor exceeds 2^24 entries");
    entries *= dim_;
  }
  require(tensor_.size() == entries, ErrorCode::kInvalidArgument,
          "multilinear form tensor has the wrong size");
}

double MultilinearForm::value(std::span<const double> q) const {
  std::vector<double> scratch(dim_);
  return value_and_gradient(q, scratch);
}

double MultilinearForm::value_and_gradient(std::span<const double> q,
                                           std::span<double> grad) const {
  const std::size_t n = dim_;
  std::fill(grad.begin(), grad.begin() + n, 0.0);
  if (degree_ == 1) {
    CompensatedSum sum;
    for (std::size_t i = 0; i < n; ++i) {
      grad[i] = tensor_[i];
      sum.add(tensor_[i] * q[i]);
    }
    return sum.value();
  }
  if (degree_ == 2) {
    CompensatedSum sum;
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = tensor_.data() + i * n;
      double row_dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        row_dot += row[j] * q[j];
        grad[j] += q[i] * row[j];
      }
      grad[i] += row_dot;
      sum.add(q[i] * row_dot);
    }
    return sum.value();
  }
  const int d = degree_;
  std::vector<std::size_t> digits(d, 0);
  std::vector<double> prefix(d + 1), suffix(d + 1);
  CompensatedSum sum;
  for (std::size_t t = 0; t < tensor_.size(); ++t) {
    const double coeff = tensor_[t];
    if (coeff != 0.0) {
      prefix[0] = 1.0;
      for (int k = 0; k < d; ++k) prefix[k + 1] = prefix[k] * q[digits[k]];
      suffix[d] = 1.0;
      for (int k = d - 1; k >= 0; --k) suffix[k] = suffix[k + 1] * q[digits[k]];
      sum.add(coeff * prefix[d]);
      for (int k = 0; k < d; ++k) {
        grad[digits[k]] += coeff * prefix[k] * suffix[k + 1];
      }
    }
    for (int k = d - 1; k >= 0; --k) {
      if (++digits[k] < n) break;
      digits[k] = 0;
    }
  }
  return sum.value();
}

CombinedFunctional::CombinedFunctional(FunctionalPtr first, double a,
                                       FunctionalPtr second, double b)
    : first_(std::move(first)), a_(a), second_(std::move(second)), b_(b) {
  require(first_ && second_ && first_->dim() == second_->dim(),
          ErrorCode::kInvalidArgument,
          "combined functional needs two functionals of equal dimension");
}

double CombinedFunctional::value(std::span<const double> q) const {
  const double u = a_ == 0.0 ? 0.0 : a_ * first_->value(q);
  const double v = b_ == 0.0 ? 0.0 : b_ * second_->value(q);
  return u + v;
}

double CombinedFunctional::value_and_gradient(std::span<const double> q,
                                              std::span<double> grad) const {
  const std::size_t n = dim();
  std::vector<double> g2(n);
  const double u = first_->value_and_gradient(q, grad);
  const double v = second_->value_and_gradient(q, g2);
  for (std::size_t i = 0; i < n; ++i) grad[i] = a_ * grad[i] + b_ * g2[i];
  return (a_ == 0.0 ? 0.0 : a_ * u) + (b_ == 0.0 ? 0.0 : b_ * v);
}

std::vector<bool> CombinedFunctional::forced_zero() const {
  auto a = a_ != 0.0 ? first_->forced_zero() : std::vector<bool>{};
  auto b = b_ != 0.0 ? second_->forced_zero() : std::vector<bool>{};
  if (a.empty()) return b;
  if (b.empty()) return a;
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = a[i] || b[i];
  return a;
}

FunctionalPtr general_quality(const MetricPair& pair,
                              const CategoricalDist& p) {
  std::vector<double> c(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) c[i] = pair.f(p[i]);
  return std::make_shared<LinearFunctional>(std::move(c));
}

FunctionalPtr general_diversity(const MetricPair& pair, std::size_t dim) {
  return std::make_shared<SeparableFunctional>(pair, dim);
}

}  // namespace qdfit
