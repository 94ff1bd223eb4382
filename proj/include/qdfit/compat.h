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

#ifndef QDFIT_COMPAT_H_
#define QDFIT_COMPAT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qdfit/distribution.h"
#include "qdfit/functional.h"
#include "qdfit/metric_pair.h"

namespace qdfit {

enum class CompatMethod { kFrontierSearch, kPenaltyOpt, kCurveInterp };

const char* compat_method_name(CompatMethod method);

struct TracePoint {
  int restart = 0;
  int step = 0;
  double u = 0.0;
  double v = 0.0;
  double objective = 0.0;
};

struct CompatReport {
  double qdisc = 0.0;
  double drate = 0.0;
  double denominator = 0.0;
  std::optional<double> self_ratio;
  std::optional<double> ref_ratio;
  CompatMethod method = CompatMethod::kFrontierSearch;
  std::optional<CategoricalDist> witness;
  /// Penalty runs only: whether any iterate satisfied V(Q) >= V(P) with
  /// U(Q) > U(P).
  bool feasible = true;
  double u_real = 0.0;
  double v_real = 0.0;
  /// Frontier runs: the w of the witness.
  std::optional<double> w_star;
  std::vector<TracePoint> trace;
};

struct PenaltyConfig {
  double lambda = 2.0;
  double learning_rate = 0.05;
  double momentum = 0.9;
  int max_steps = 20000;
  std::uint64_t seed = 0;
  int restarts = 8;
  /// Replaces momentum steps by a backtracking search that only accepts
  /// non-decreasing objective values.
  bool monotone = false;
  /// Record (U, V, objective) every trace_stride steps; 0 disables.
  int trace_stride = 0;
};

/// f(P_m1) - mean of f over the positive entries of P. Zero for uniform P.
double drate_denominator_generalform(const MetricPair& pair,
                                     const CategoricalDist& p);

/// QDisc by binary search along the closed-form frontier for the w* with
/// V(Q(w*)) = V(P). The witness always satisfies V >= V(P).
CompatReport qdisc_frontier(const MetricPair& pair, const CategoricalDist& p,
                            double w_min = -50.0);

/// Lower bound on QDisc from penalized gradient ascent of
/// U(Q) - lambda max(0, V(P) - V(Q)) over Q = softmax(z). When
/// `denominator` is not given the DRate denominator is estimated by the same
/// optimizer as max U - U(argmax V).
CompatReport qdisc_penalty(const FunctionalPtr& quality_fn,
                           const FunctionalPtr& diversity_fn,
                           const CategoricalDist& p, const PenaltyConfig& cfg,
                           std::optional<double> denominator = std::nullopt);

struct MaximizeResult {
  CategoricalDist q = uniform_dist(1);
  double value = 0.0;
  std::vector<TracePoint> trace;
};

/// Unconstrained maximization of `objective` over the simplex with the
/// penalty optimizer's update rule; restart 0 starts at `init`.
MaximizeResult maximize(const FunctionalPtr& objective,
                        const CategoricalDist& init, const PenaltyConfig& cfg);

/// max U - U(argmax V), both found by `maximize`.
double penalty_denominator(const FunctionalPtr& quality_fn,
                           const FunctionalPtr& diversity_fn,
                           const CategoricalDist& p, const PenaltyConfig& cfg);

struct CurvePoint {
  double u = 0.0;
  double v = 0.0;
  std::optional<double> epsilon;
};

/// Linear interpolation of curve quality at V(real). Ref-Ratio is filled
/// when the curve carries points labeled epsilon = 0 and epsilon = 0.2.
/// Throws kExtrapolationRefused when V(real) lies outside the curve span.
CompatReport qdisc_curve_interp(const std::vector<CurvePoint>& curve,
                                const CurvePoint& real_point,
                                double denominator = 1.0);

}  // namespace qdfit

#endif  // QDFIT_COMPAT_H_
