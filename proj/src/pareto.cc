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

#include "qdfit/pareto.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qdfit/error.h"

namespace qdfit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxBisection = 200;
constexpr double kMassTolerance = 1e-10;

double frontier_arg(double w, double fp, double b) {
  // w = 0 must not multiply an infinite f(0).
  return w == 0.0 ? b : w * fp + b;
}

void require_frontier_input(const MetricPair& pair, const CategoricalDist& p) {
  require(pair.frontier_eligible(), ErrorCode::kUnsupported,
          "metric pair '" + pair.name() +
              "' fails kernel validation and has no closed-form frontier");
  require(!is_uniform(p), ErrorCode::kDegenerateInput,
          "frontier requires a non-uniform P");
}

}  // namespace

double frontier_mass(const MetricPair& pair, const CategoricalDist& p,
                     double w, double b) {
  CompensatedSum sum;
  for (double pi : p.probs()) {
    sum.add(pair.g_hat_prime_inv(frontier_arg(w, pair.f(pi), b)));
  }
  return sum.value();
}

double solve_b(const MetricPair& pair, const CategoricalDist& p, double w) {
  require(w <= 0.0 && std::isfinite(w), ErrorCode::kInvalidArgument,
          "frontier parameter w must be finite and <= 0");
  require_frontier_input(pair, p);

  // Lower bracket: every active outcome gets at least 1/K mass.
  double f_min = kInf;
  double f_max = -kInf;
  std::size_t active = 0;
  for (double pi : p.probs()) {
    const double fp = pair.f(pi);
    f_max = std::max(f_max, fp);
    if (w == 0.0 || std::isfinite(fp)) {
      ++active;
      if (std::isfinite(fp)) f_min = std::min(f_min, fp);
    }
  }
  const double f_low = std::isfinite(f_min) ? f_min : 0.0;
  double lo = pair.g_prime(1.0 / static_cast<double>(active)) -
              (w == 0.0 ? 0.0 : w * f_low);
  auto mass = [&](double b) { return frontier_mass(pair, p, w, b); };
  for (int i = 0; mass(lo) < 1.0; ++i) {
    require(i < kMaxBisection, ErrorCode::kNumeric,
            "solve_b: could not bracket the lower end");
    lo -= std::max(1.0, std::abs(lo));
  }

  // Upper bracket: T = 0 at g'(0) - w f(P_max); otherwise grow geometrically.
  double hi;
  if (std::isfinite(pair.g_prime_at_zero())) {
    hi = pair.g_prime_at_zero() - (w == 0.0 ? 0.0 : w * f_max);
  } else {
    double step = 1.0;
    hi = lo + step;
    for (int i = 0; mass(hi) >= 1.0; ++i) {
      require(i < kMaxBisection, ErrorCode::kNumeric,
              "solve_b: could not bracket the upper end");
      step *= 2.0;
      hi = lo + step;
    }
  }

  double best_b = lo;
  double best_gap = std::abs(mass(lo) - 1.0);
  for (int i = 0; i < kMaxBisection; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double t = mass(mid);
    const double gap = std::abs(t - 1.0);
    if (gap < best_gap) {
      best_gap = gap;
      best_b = mid;
    }
    if (gap == 0.0 || mid == lo || mid == hi) break;
    if (t > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  require(best_gap < kMassTolerance, ErrorCode::kNumeric,
          "solve_b: bisection did not reach |T - 1| < 1e-10 (gap " +
              format_double(best_gap) + ")");
  return best_b;
}

FrontierPoint frontier_point(const MetricPair& pair, const CategoricalDist& p,
                             double w) {
  const double b = solve_b(pair, p, w);
  std::vector<double> q(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    q[i] = pair.g_hat_prime_inv(frontier_arg(w, pair.f(p[i]), b));
  }
  FrontierPoint point;
  point.w = w;
  point.b = b;
  point.q = CategoricalDist::from_probabilities(std::move(q), p.labels());
  point.u = quality(pair, point.q, p);
  point.v = diversity(pair, point.q);
  return point;
}

double compute_bound(const MetricPair& pair, const CategoricalDist& p) {
  require(!is_uniform(p), ErrorCode::kDegenerateInput,
          "B is undefined for a uniform P");
  const auto probs = p.probs();
  const double p_max = *std::max_element(probs.begin(), probs.end());
  double p_second = -1.0;
  std::size_t ties = 0;
  for (double pi : probs) {
    if (pi == p_max) {
      ++ties;
    } else {
      p_second = std::max(p_second, pi);
    }
  }
  if (!std::isfinite(pair.g_prime_at_zero())) return -kInf;
  return (pair.g_prime(1.0 / static_cast<double>(ties)) -
          pair.g_prime_at_zero()) /
         (pair.f(p_max) - pair.f(p_second));
}

FrontierSweep sweep(const MetricPair& pair, const CategoricalDist& p,
                    int n_points, double w_min) {
  require(n_points >= 2, ErrorCode::kInvalidArgument,
          "sweep needs at least 2 points");
  require(w_min <= 0.0 && std::isfinite(w_min), ErrorCode::kInvalidArgument,
          "sweep w_min must be finite and <= 0");
  FrontierSweep out;
  if (is_uniform(p)) {
    FrontierPoint only;
    only.w = 0.0;
    only.b = pair.g_prime(1.0 / static_cast<double>(p.size()));
    only.q = p;
    only.u = quality(pair, p, p);
    only.v = diversity(pair, p);
    out.points.push_back(std::move(only));
    return out;
  }
  out.bound = compute_bound(pair, p);
  const double w_low = std::max(out.bound, w_min);
  out.points.reserve(n_points);
  for (int k = 0; k < n_points; ++k) {
    const double w =
        k == 0 ? 0.0 : w_low * static_cast<double>(k) / (n_points - 1);
    out.points.push_back(frontier_point(pair, p, w));
  }
  for (std::size_t k = 1; k < out.points.size(); ++k) {
    const auto& prev = out.points[k - 1];
    const auto& cur = out.points[k];
    require(cur.u >= prev.u - 1e-9 && cur.v <= prev.v + 1e-9,
            ErrorCode::kNumeric,
            "sweep: frontier monotonicity violated between w=" +
                format_double(prev.w) + " and w=" + format_double(cur.w));
  }
  return out;
}

const char* dominance_name(Dominance d) {
  switch (d) {
    case Dominance::kFirstDominates:
      return "q1_dominates";
    case Dominance::kSecondDominates:
      return "q2_dominates";
    case Dominance::kIncomparable:
      return "incomparable";
    case Dominance::kEqual:
      return "equal";
  }
  return "unknown";
}

Dominance dominates(const MetricPair& pair, const CategoricalDist& p,
                    const CategoricalDist& q1, const CategoricalDist& q2,
                    double tolerance) {
  const double du = quality(pair, q1, p) - quality(pair, q2, p);
  const double dv = diversity(pair, q1) - diversity(pair, q2);
  const bool u_tie = std::abs(du) <= tolerance;
  const bool v_tie = std::abs(dv) <= tolerance;
  if (u_tie && v_tie) return Dominance::kEqual;
  const bool first = (du > tolerance && dv >= -tolerance) ||
                     (du >= -tolerance && dv > tolerance);
  if (first) return Dominance::kFirstDominates;
  const bool second = (-du > tolerance && -dv >= -tolerance) ||
                      (-du >= -tolerance && -dv > tolerance);
  if (second) return Dominance::kSecondDominates;
  return Dominance::kIncomparable;
}

}  // namespace qdfit
