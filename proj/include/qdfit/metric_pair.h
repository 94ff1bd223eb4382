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

#ifndef QDFIT_METRIC_PAIR_H_
#define QDFIT_METRIC_PAIR_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qdfit/distribution.h"

namespace qdfit {

using Kernel = std::function<double(double)>;

/// Kernel functions of a general-form quality/diversity pair:
///   U(Q; P) = sum_i Q_i f(P_i),   V(Q) = sum_i g(Q_i).
struct Kernels {
  Kernel f;
  Kernel g;  // must satisfy g(0) = 0
  Kernel g_prime;
  /// Inverse of g' on its range over (0, 1]. May be empty, in which case it
  /// is computed by bisection on [0, 1].
  Kernel g_prime_inv;
  /// F(x) = integral_0^x f(u) du; empty means "compute by quadrature".
  Kernel integral_f;
  /// g'(0), possibly +infinity.
  double g_prime_at_zero = 0.0;
};

struct KernelValidation {
  bool f_increasing = false;
  bool g_concave = false;
  bool inverse_consistent = false;
  bool ok() const { return f_increasing && g_concave && inverse_consistent; }
};

/// Immutable quality/diversity kernel pair. Validation (monotone f, strictly
/// concave g, consistent g'^-1) runs once at construction; pairs that fail
/// it are still usable for evaluation and penalty optimization but are not
/// frontier-eligible.
class MetricPair {
 public:
  MetricPair(std::string name, Kernels kernels,
             std::map<std::string, double> params = {});

  const std::string& name() const { return name_; }
  const std::map<std::string, double>& params() const { return params_; }

  double f(double x) const { return kernels_.f(x); }
  double g(double x) const { return x == 0.0 ? 0.0 : kernels_.g(x); }
  double g_prime(double x) const {
    return x == 0.0 ? kernels_.g_prime_at_zero : kernels_.g_prime(x);
  }
  double g_prime_at_zero() const { return kernels_.g_prime_at_zero; }
  /// Raw inverse of g'.
  double g_prime_inv(double y) const;
  /// Clamped inverse: 0 when y >= g'(0), g'^-1(y) otherwise.
  double g_hat_prime_inv(double y) const;

  bool has_integral() const { return static_cast<bool>(kernels_.integral_f); }
  /// F(x); falls back to adaptive quadrature when no closed form was given.
  double integral_f(double x) const;

  const KernelValidation& validation() const { return validation_; }
  bool frontier_eligible() const { return validation_.ok(); }

 private:
  std::string name_;
  Kernels kernels_;
  std::map<std::string, double> params_;
  KernelValidation validation_;
};

MetricPair ll_se_pair();
MetricPair cr_nrr_pair();
MetricPair ll_nrr_pair();
MetricPair cr_se_pair();
/// f(x) = 1 - (1-x)^R, g(x) = -x + x (1-x)^(C-1): the unigram expectations of
/// BLEU over |R| references and negative Self-BLEU over |C| candidates.
MetricPair bleu_expect_pair(int ref_size, int cand_size);

/// Parses `ll-se`, `cr-nrr`, `ll-nrr`, `cr-se`, `bleu-expect:R=<int>,C=<int>`.
MetricPair pair_from_id(std::string_view id);
std::vector<std::string> builtin_pair_ids();

/// sum_i Q_i f(P_i); zero-mass terms contribute nothing. Throws
/// kSupportMismatch when Q puts mass where f(P_i) is -infinity.
double quality(const MetricPair& pair, const CategoricalDist& q,
               const CategoricalDist& p);
/// sum_i g(Q_i).
double diversity(const MetricPair& pair, const CategoricalDist& q);
/// alpha U + (1 - alpha) V, alpha in [0, 1).
double combined_psi(const MetricPair& pair, const CategoricalDist& q,
                    const CategoricalDist& p, double alpha);

struct Compatibility {
  bool compatible = false;
  double w0 = 0.0;
  double b0 = 0.0;
  double max_residual = 0.0;
  /// alpha = w0 / (w0 - 1), meaningful when compatible.
  double alpha() const { return w0 / (w0 - 1.0); }
};

/// Least-squares fit of g(x) ~ w0 F(x) + b0 x on `grid_size` points in
/// [1e-6, 1 - 1e-6]. Compatible iff the max residual is below 1e-8 and
/// w0 <= 0.
Compatibility compatibility_analytic(const MetricPair& pair,
                                     int grid_size = 256);

/// Psi(P) - Psi(Q) with alpha from the compatibility fit. Throws
/// kNotADivergence for incompatible pairs.
double divergence(const MetricPair& pair, const CategoricalDist& q,
                  const CategoricalDist& p);

struct RationalityReport {
  bool passed = false;
  /// Grid condition on all of (0,1).
  bool grid_passed = false;
  /// Grid condition restricted to x1 + x2 <= 1.
  bool weak_grid_passed = false;
  bool perturbation_passed = false;
  std::string violated;  // "f-increasing", "g-concave", "property-1", ...
  std::optional<std::pair<double, double>> witness;
  std::size_t perturbation_trials = 0;
  std::size_t perturbation_violations = 0;
};

/// Checks f(x1) > f(x2) and g'(x1) < g'(x2) for x1 > x2 on a uniform grid,
/// then runs `perturbation_trials` random mass-shift trials of the two
/// rationality properties.
RationalityReport check_rationality(const MetricPair& pair, int grid_size,
                                    std::size_t perturbation_trials = 1000,
                                    std::uint64_t seed = 0);

}  // namespace qdfit

#endif  // QDFIT_METRIC_PAIR_H_
