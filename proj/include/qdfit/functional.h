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

#ifndef QDFIT_FUNCTIONAL_H_
#define QDFIT_FUNCTIONAL_H_

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "qdfit/distribution.h"
#include "qdfit/metric_pair.h"

namespace qdfit {

/// A differentiable real functional of a probability vector Q.
class Functional {
 public:
  virtual ~Functional() = default;

  virtual std::size_t dim() const = 0;
  virtual double value(std::span<const double> q) const = 0;
  /// Writes dF/dQ_i into `grad` (size dim()) and returns F(Q).
  virtual double value_and_gradient(std::span<const double> q,
                                    std::span<double> grad) const = 0;
  /// Coordinates that must carry zero mass (for instance where log P_i is
  /// -infinity). Empty means none.
  virtual std::vector<bool> forced_zero() const { return {}; }

  double value(const CategoricalDist& q) const { return value(q.probs()); }
};

using FunctionalPtr = std::shared_ptr<const Functional>;

/// F(Q) = sum_i c_i Q_i. Coefficients equal to -infinity mark forced zeros.
class LinearFunctional final : public Functional {
 public:
  explicit LinearFunctional(std::vector<double> coefficients);

  std::size_t dim() const override { return coefficients_.size(); }
  using Functional::value;
  double value(std::span<const double> q) const override;
  double value_and_gradient(std::span<const double> q,
                            std::span<double> grad) const override;
  std::vector<bool> forced_zero() const override;

  const std::vector<double>& coefficients() const { return coefficients_; }

 private:
  std::vector<double> coefficients_;
};

/// F(Q) = sum_i g(Q_i) for the diversity kernel of `pair`.
class SeparableFunctional final : public Functional {
 public:
  SeparableFunctional(MetricPair pair, std::size_t dim);

  std::size_t dim() const override { return dim_; }
  using Functional::value;
  double value(std::span<const double> q) const override;
  double value_and_gradient(std::span<const double> q,
                            std::span<double> grad) const override;

 private:
  MetricPair pair_;
  std::size_t dim_;
};

/// F(Q) = sum over index tuples (i_1..i_d) of T[i_1..i_d] Q_{i_1}...Q_{i_d},
/// with a dense row-major tensor (first index most significant).
class MultilinearForm final : public Functional {
 public:
  static constexpr std::size_t kMaxEntries = std::size_t{1} << 24;

  MultilinearForm(std::size_t dim, int degree, std::vector<double> tensor);

  std::size_t dim() const override { return dim_; }
  int degree() const { return degree_; }
  const std::vector<double>& tensor() const { return tensor_; }
  using Functional::value;
  double value(std::span<const double> q) const override;
  double value_and_gradient(std::span<const double> q,
                            std::span<double> grad) const override;

 private:
  std::size_t dim_;
  int degree_;
  std::vector<double> tensor_;
};

/// a * F1 + b * F2.
class CombinedFunctional final : public Functional {
 public:
  CombinedFunctional(FunctionalPtr first, double a, FunctionalPtr second,
                     double b);

  std::size_t dim() const override { return first_->dim(); }
  using Functional::value;
  double value(std::span<const double> q) const override;
  double value_and_gradient(std::span<const double> q,
                            std::span<double> grad) const override;
  std::vector<bool> forced_zero() const override;

 private:
  FunctionalPtr first_;
  double a_;
  FunctionalPtr second_;
  double b_;
};

/// U(.; P) of a general-form pair as a linear functional with c_i = f(P_i).
FunctionalPtr general_quality(const MetricPair& pair, const CategoricalDist& p);
/// V(.) of a general-form pair.
FunctionalPtr general_diversity(const MetricPair& pair, std::size_t dim);

}  // namespace qdfit

#endif  // QDFIT_FUNCTIONAL_H_
