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

#ifndef QDFIT_PARETO_H_
#define QDFIT_PARETO_H_

#include <vector>

#include "qdfit/distribution.h"
#include "qdfit/metric_pair.h"

namespace qdfit {

/// A Pareto-optimum Q_i = g'^-1_hat(w f(P_i) + b) with its objectives.
struct FrontierPoint {
  double w = 0.0;
  double b = 0.0;
  CategoricalDist q = uniform_dist(1);
  double u = 0.0;
  double v = 0.0;
};

/// Points ordered by strictly decreasing w from 0 toward max(B, w_min).
struct FrontierSweep {
  std::vector<FrontierPoint> points;
  double bound = 0.0;  // B, possibly -infinity
};

/// Total mass T(w, b) = sum_i g'^-1_hat(w f(P_i) + b).
double frontier_mass(const MetricPair& pair, const CategoricalDist& p,
                     double w, double b);

/// The unique b with T(w, b) = 1, by bisection (|T - 1| < 1e-10, at most
/// 200 iterations after bracketing). Throws kDegenerateInput for uniform P,
/// kUnsupported for pairs that fail kernel validation, kNumeric on
/// non-convergence.
double solve_b(const MetricPair& pair, const CategoricalDist& p, double w);

FrontierPoint frontier_point(const MetricPair& pair, const CategoricalDist& p,
                             double w);

/// B = (g'(1/M) - g'(0)) / (f(P_m1) - f(P_m2)); -infinity when g'(0) is
/// infinite.
double compute_bound(const MetricPair& pair, const CategoricalDist& p);

/// n_points values of w evenly spaced on [max(B, w_min), 0]. Verifies
/// U increasing and V decreasing (tolerance 1e-9) along decreasing w.
/// Uniform P short-circuits to the single optimum Q = P.
FrontierSweep sweep(const MetricPair& pair, const CategoricalDist& p,
                    int n_points, double w_min = -50.0);

enum class Dominance { kFirstDominates, kSecondDominates, kIncomparable, kEqual };

const char* dominance_name(Dominance d);

/// Compares (U, V) of q1 and q2, treating differences within `tolerance` as
/// ties.
Dominance dominates(const MetricPair& pair, const CategoricalDist& p,
                    const CategoricalDist& q1, const CategoricalDist& q2,
                    double tolerance = 1e-12);

}  // namespace qdfit

#endif  // QDFIT_PARETO_H_
