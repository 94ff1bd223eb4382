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

#include "qdfit/metric_pair.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qdfit/error.h"
#include "qdfit/rng.h"

namespace qdfit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kValidationGrid = 256;

KernelValidation validate(const MetricPair& pair) {
  KernelValidation v;
  v.f_increasing = true;
  v.g_concave = true;
  v.inverse_consistent = true;
  double prev_f = 0.0;
  double prev_gp = 0.0;
  for (int k = 1; k <= kValidationGrid; ++k) {
    const double x = static_cast<double>(k) / (kValidationGrid + 1);
    const double fx = pair.f(x);
    const double gpx = pair.g_prime(x);
    if (k > 1) {
      if (!(fx > prev_f)) v.f_increasing = false;
      if (!(gpx < prev_gp)) v.g_concave = false;
    }
    if (!(std::abs(pair.g_prime_inv(gpx) - x) <= 1e-10)) {
      v.inverse_consistent = false;
    }
    prev_f = fx;
    prev_gp = gpx;
  }
  return v;
}

double log_kernel(double x) { return x > 0.0 ? std::log(x) : -kInf; }

Kernels log_quality(Kernels k) {
  k.f = log_kernel;
  k.integral_f = [](double x) { return x > 0.0 ? x * std::log(x) - x : 0.0; };
  return k;
}

Kernels coverage_quality(Kernels k) {
  k.f = [](double x) { return x; };
  k.integral_f = [](double x) { return 0.5 * x * x; };
  return k;
}

Kernels entropy_diversity(Kernels k) {
  k.g = [](double x) { return x > 0.0 ? -x * std::log(x) : 0.0; };
  k.g_prime = [](double x) { return -std::log(x) - 1.0; };
  k.g_prime_inv = [](double y) { return std::exp(-1.0 - y); };
  k.g_prime_at_zero = kInf;
  return k;
}

Kernels repetition_diversity(Kernels k) {
  k.g = [](double x) { return -x * x; };
  k.g_prime = [](double x) { return -2.0 * x; };
  k.g_prime_inv = [](double y) { return -0.5 * y; };
  k.g_prime_at_zero = 0.0;
  return k;
}

}  // namespace

MetricPair::MetricPair(std::string name, Kernels kernels,
                       std::map<std::string, double> params)
    : name_(std::move(name)),
      kernels_(std::move(kernels)),
      params_(std::move(params)) {
  require(static_cast<bool>(kernels_.f) && static_cast<bool>(kernels_.g) &&
              static_cast<bool>(kernels_.g_prime),
          ErrorCode::kInvalidArgument, "metric pair needs f, g and g'");
  validation_ = validate(*this);
}

double MetricPair::g_prime_inv(double y) const {
  if (kernels_.g_prime_inv) return kernels_.g_prime_inv(y);
  // g' is decreasing on [0, 1] for valid pairs; bisect for g'(x) = y.
  if (y >= g_prime(0.0)) return 0.0;
  if (y <= g_prime(1.0)) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (g_prime(mid) > y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double MetricPair::g_hat_prime_inv(double y) const {
  if (y >= kernels_.g_prime_at_zero) return 0.0;
  return g_prime_inv(y);
}

double MetricPair::integral_f(double x) const {
  if (kernels_.integral_f) return kernels_.integral_f(x);
  return integrate(kernels_.f, 0.0, x, 1e-12);
}

MetricPair ll_se_pair() {
  return MetricPair("ll-se", entropy_diversity(log_quality({})));
}

MetricPair cr_nrr_pair() {
  return MetricPair("cr-nrr", repetition_diversity(coverage_quality({})));
}

MetricPair ll_nrr_pair() {
  return MetricPair("ll-nrr", repetition_diversity(log_quality({})));
}

MetricPair cr_se_pair() {
  return MetricPair("cr-se", entropy_diversity(coverage_quality({})));
}

MetricPair bleu_expect_pair(int ref_size, int cand_size) {
  require(ref_size >= 1, ErrorCode::kInvalidArgument,
          "bleu-expect needs R >= 1");
  require(cand_size >= 2, ErrorCode::kInvalidArgument,
          "bleu-expect needs C >= 2");
  const double r = ref_size;
  const double c = cand_size;
  Kernels k;
  k.f = [r](double x) { return 1.0 - std::pow(1.0 - x, r); };
  k.integral_f = [r](double x) {
    return x - (1.0 - std::pow(1.0 - x, r + 1.0)) / (r + 1.0);
  };
  k.g = [c](double x) { return -x + x * std::pow(1.0 - x, c - 1.0); };
  k.g_prime = [c](double x) {
    return -1.0 + std::pow(1.0 - x, c - 1.0) -
           (c - 1.0) * x * std::pow(1.0 - x, c - 2.0);
  };
  k.g_prime_at_zero = 0.0;
  return MetricPair("bleu-expect:R=" + std::to_string(ref_size) +
                        ",C=" + std::to_string(cand_size),
                    std::move(k), {{"R", r}, {"C", c}});
}

MetricPair pair_from_id(std::string_view id) {
  if (id == "ll-se") return ll_se_pair();
  if (id == "cr-nrr") return cr_nrr_pair();
  if (id == "ll-nrr") return ll_nrr_pair();
  if (id == "cr-se") return cr_se_pair();
  constexpr std::string_view kBleu = "bleu-expect:";
  if (id.substr(0, kBleu.size()) == kBleu) {
    std::optional<int> r;
    std::optional<int> c;
    std::string_view rest = id.substr(kBleu.size());
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view item = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{}
                                             : rest.substr(comma + 1);
      const auto eq = item.find('=');
      require(eq != std::string_view::npos, ErrorCode::kInvalidArgument,
              "bad bleu-expect parameter '" + std::string(item) + "'");
      const std::string_view key = item.substr(0, eq);
      const double value = parse_double(item.substr(eq + 1));
      require(value == std::floor(value), ErrorCode::kInvalidArgument,
              "bleu-expect parameters must be integers");
      if (key == "R") {
        r = static_cast<int>(value);
      } else if (key == "C") {
        c = static_cast<int>(value);
      } else {
        fail(ErrorCode::kInvalidArgument,
             "unknown bleu-expect parameter '" + std::string(key) + "'");
      }
    }
    require(r.has_value() && c.has_value(), ErrorCode::kInvalidArgument,
            "bleu-expect needs both R and C");
    return bleu_expect_pair(*r, *c);
  }
  fail(ErrorCode::kInvalidArgument, "unknown metric pair '" + std::string(id) +
                                        "' (expected ll-se, cr-nrr, ll-nrr, "
                                        "cr-se or bleu-expect:R=<int>,C=<int>)");
}

std::vector<std::string> builtin_pair_ids() {
  return {"ll-se", "cr-nrr", "ll-nrr", "cr-se", "bleu-expect:R=<int>,C=<int>"};
}

double quality(const MetricPair& pair, const CategoricalDist& q,
               const CategoricalDist& p) {
  require(q.same_space(p), ErrorCode::kInvalidArgument,
          "quality: Q and P are over different outcome spaces");
  CompensatedSum sum;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] == 0.0) continue;
    const double fp = pair.f(p[i]);
    require(std::isfinite(fp), ErrorCode::kSupportMismatch,
            "quality: Q puts mass on outcome " + std::to_string(i) +
                " where f(P_i) is not finite");
    sum.add(q[i] * fp);
  }
  return sum.value();
}

double diversity(const MetricPair& pair, const CategoricalDist& q) {
  CompensatedSum sum;
  for (double qi : q.probs()) {
    if (qi > 0.0) sum.add(pair.g(qi));
  }
  return sum.value();
}

double combined_psi(const MetricPair& pair, const CategoricalDist& q,
                    const CategoricalDist& p, double alpha) {
  require(alpha >= 0.0 && alpha < 1.0, ErrorCode::kInvalidArgument,
          "alpha must lie in [0, 1)");
  return alpha * quality(pair, q, p) + (1.0 - alpha) * diversity(pair, q);
}

Compatibility compatibility_analytic(const MetricPair& pair, int grid_size) {
  require(grid_size >= 2, ErrorCode::kInvalidArgument,
          "compatibility grid needs at least 2 points");
  constexpr double kLo = 1e-6;
  constexpr double kHi = 1.0 - 1e-6;
  std::vector<double> x(grid_size), big_f(grid_size), y(grid_size);
  for (int k = 0; k < grid_size; ++k) {
    x[k] = kLo + (kHi - kLo) * k / (grid_size - 1);
    y[k] = pair.g(x[k]);
  }
  if (pair.has_integral()) {
    for (int k = 0; k < grid_size; ++k) big_f[k] = pair.integral_f(x[k]);
  } else {
    const Kernel f = [&pair](double u) { return pair.f(u); };
    big_f[0] = integrate(f, 0.0, x[0], 1e-12);
    for (int k = 1; k < grid_size; ++k) {
      big_f[k] = big_f[k - 1] + integrate(f, x[k - 1], x[k], 1e-13);
    }
  }

  // Two-column least squares by Gram-Schmidt: columns (x, F(x)).
  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    CompensatedSum s;
    for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * b[i]);
    return s.value();
  };
  const double norm_x = std::sqrt(dot(x, x));
  std::vector<double> q1(grid_size);
  for (int k = 0; k < grid_size; ++k) q1[k] = x[k] / norm_x;
  const double r12 = dot(q1, big_f);
  std::vector<double> residual_f(grid_size);
  for (int k = 0; k < grid_size; ++k) residual_f[k] = big_f[k] - r12 * q1[k];
  const double r22 = std::sqrt(dot(residual_f, residual_f));

  Compatibility out;
  const double t1 = dot(q1, y);
  if (r22 > 1e-14 * std::max(1.0, std::abs(r12))) {
    std::vector<double> q2(grid_size);
    for (int k = 0; k < grid_size; ++k) q2[k] = residual_f[k] / r22;
    out.w0 = dot(q2, y) / r22;
  } else {
    out.w0 = 0.0;
  }
  out.b0 = (t1 - r12 * out.w0) / norm_x;
  for (int k = 0; k < grid_size; ++k) {
    const double r = std::abs(y[k] - out.w0 * big_f[k] - out.b0 * x[k]);
    out.max_residual = std::max(out.max_residual, r);
  }
  out.compatible = out.max_residual < 1e-8 && out.w0 <= 0.0;
  return out;
}

double divergence(const MetricPair& pair, const CategoricalDist& q,
                  const CategoricalDist& p) {
  const Compatibility compat = compatibility_analytic(pair);
  require(compat.compatible, ErrorCode::kNotADivergence,
          "metric pair '" + pair.name() +
              "' does not induce a divergence (incompatible kernels)");
  const double alpha = compat.alpha();
  const double du = quality(pair, p, p) - quality(pair, q, p);
  const double dv = diversity(pair, p) - diversity(pair, q);
  return alpha * du + (1.0 - alpha) * dv;
}

RationalityReport check_rationality(const MetricPair& pair, int grid_size,
                                    std::size_t perturbation_trials,
                                    std::uint64_t seed) {
  require(grid_size >= 16, ErrorCode::kInvalidArgument,
          "rationality grid needs at least 16 points");
  RationalityReport report;
  std::vector<double> x(grid_size), fx(grid_size), gp(grid_size);
  for (int k = 0; k < grid_size; ++k) {
    x[k] = static_cast<double>(k + 1) / (grid_size + 1);
    fx[k] = pair.f(x[k]);
    gp[k] = pair.g_prime(x[k]);
  }

  // Full-range condition: adjacent strictness implies it for every pair.
  report.grid_passed = true;
  for (int k = 1; k < grid_size && report.grid_passed; ++k) {
    if (!(fx[k] > fx[k - 1])) {
      report.grid_passed = false;
      report.violated = "f-increasing";
      report.witness = {x[k], x[k - 1]};
    } else if (!(gp[k] < gp[k - 1])) {
      report.grid_passed = false;
      report.violated = "g-concave";
      report.witness = {x[k], x[k - 1]};
    }
  }
  report.weak_grid_passed = true;
  for (int a = 0; a < grid_size && report.weak_grid_passed; ++a) {
    for (int b = 0; b < a; ++b) {
      if (x[a] + x[b] > 1.0) break;
      if (!(fx[a] > fx[b]) || !(gp[a] < gp[b])) {
        report.weak_grid_passed = false;
        break;
      }
    }
  }

  Rng rng = Rng(seed).split(0x7261);
  report.perturbation_trials = perturbation_trials;
  for (std::size_t t = 0; t < perturbation_trials; ++t) {
    const std::size_t n = 3 + rng.uniform_int(10);
    std::vector<double> p(n), q(n);
    double sp = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = rng.uniform_open();
      q[i] = rng.uniform_open();
      sp += p[i];
      sq += q[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      p[i] /= sp;
      q[i] /= sq;
    }
    std::size_t i = rng.uniform_int(n);
    std::size_t j = rng.uniform_int(n - 1);
    if (j >= i) ++j;

    // Property 1: shifting mass toward the more probable outcome raises U.
    {
      std::size_t hi = i, lo = j;
      if (p[hi] < p[lo]) std::swap(hi, lo);
      if (p[hi] > p[lo]) {
        const double eps = q[lo] * rng.uniform_open();
        const double du = (q[hi] + eps) * pair.f(p[hi]) +
                          (q[lo] - eps) * pair.f(p[lo]) -
                          q[hi] * pair.f(p[hi]) - q[lo] * pair.f(p[lo]);
        if (!(du > 0.0)) {
          ++report.perturbation_violations;
          if (report.violated.empty()) report.violated = "property-1";
          if (!report.witness) report.witness = {p[hi], p[lo]};
        }
      }
    }
    // Property 2: shifting mass toward the larger Q_i lowers V.
    {
      std::size_t hi = i, lo = j;
      if (q[hi] < q[lo]) std::swap(hi, lo);
      const double eps = q[lo] * rng.uniform_open();
      const double dv = pair.g(q[hi] + eps) + pair.g(q[lo] - eps) -
                        pair.g(q[hi]) - pair.g(q[lo]);
      if (!(dv < 0.0)) {
        ++report.perturbation_violations;
        if (report.violated.empty()) report.violated = "property-2";
        if (!report.witness) report.witness = {q[hi], q[lo]};
      }
    }
  }
  report.perturbation_passed = report.perturbation_violations == 0;
  report.passed = report.grid_passed && report.perturbation_passed;
  return report;
}

}  // namespace qdfit
