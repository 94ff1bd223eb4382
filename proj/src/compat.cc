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

#include "qdfit/compat.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>

#include "qdfit/error.h"
#include "qdfit/pareto.h"
#include "qdfit/rng.h"

namespace qdfit {

namespace {

constexpr double kLogFloor = -690.0;  // log of the smallest useful mass

struct Evaluation {
  double objective = 0.0;
  double u = 0.0;
  double v = 0.0;
};

// Evaluates objective and dJ/dQ at q.
using Evaluator =
    std::function<Evaluation(std::span<const double>, std::span<double>)>;
// Called on every iterate (including the starting point).
using Visitor = std::function<void(std::span<const double>, const Evaluation&)>;

class SimplexAscent {
 public:
  SimplexAscent(std::size_t n, std::vector<bool> forced_zero,
                const PenaltyConfig& cfg)
      : n_(n), cfg_(cfg), active_(n, true), z_(n), q_(n), grad_(n) {
    if (!forced_zero.empty()) {
      for (std::size_t i = 0; i < n_; ++i) active_[i] = !forced_zero[i];
    }
    require(std::find(active_.begin(), active_.end(), true) != active_.end(),
            ErrorCode::kSupportMismatch,
            "every coordinate is forced to zero mass");
  }

  void run(const CategoricalDist& init, const Evaluator& eval,
           const Visitor& visit, std::vector<TracePoint>* trace) {
    for (int r = 0; r < std::max(1, cfg_.restarts); ++r) {
      Rng rng = Rng(cfg_.seed).split(static_cast<std::uint64_t>(r));
      for (std::size_t i = 0; i < n_; ++i) {
        const double base =
            init[i] > 0.0 ? std::max(std::log(init[i]), kLogFloor) : kLogFloor;
        if (r == 0) {
          z_[i] = base;
        } else if (r % 2 == 1) {
          z_[i] = base + rng.normal(0.0, 1.0);
        } else {
          z_[i] = rng.normal(0.0, 1.0);
        }
      }
      if (cfg_.monotone) {
        run_monotone(r, eval, visit, trace);
      } else {
        run_momentum(r, eval, visit, trace);
      }
    }
  }

 private:
  void project() {
    double z_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_; ++i) {
      if (active_[i]) z_max = std::max(z_max, z_[i]);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      q_[i] = active_[i] ? std::exp(z_[i] - z_max) : 0.0;
      total += q_[i];
    }
    for (std::size_t i = 0; i < n_; ++i) q_[i] /= total;
  }

  // Mirror direction: dJ/dQ centred under Q. Stepping z along it is the
  // exponentiated-gradient update.
  void direction(std::vector<double>& dir) const {
    double mean = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (active_[i]) mean += q_[i] * grad_[i];
    }
    for (std::size_t i = 0; i < n_; ++i) {
      dir[i] = active_[i] ? grad_[i] - mean : 0.0;
    }
  }

  void record(int restart, int step, const Evaluation& e,
              std::vector<TracePoint>* trace) const {
    if (trace == nullptr || cfg_.trace_stride <= 0) return;
    if (step % cfg_.trace_stride != 0 && step != cfg_.max_steps) return;
    trace->push_back({restart, step, e.u, e.v, e.objective});
  }

  void run_momentum(int restart, const Evaluator& eval, const Visitor& visit,
                    std::vector<TracePoint>* trace) {
    std::vector<double> velocity(n_, 0.0);
    std::vector<double> dir(n_);
    for (int step = 0; step <= cfg_.max_steps; ++step) {
      project();
      const Evaluation e = eval(q_, grad_);
      visit(q_, e);
      record(restart, step, e, trace);
      if (step == cfg_.max_steps) break;
      direction(dir);
      for (std::size_t i = 0; i < n_; ++i) {
        velocity[i] = cfg_.momentum * velocity[i] + cfg_.learning_rate * dir[i];
        z_[i] += velocity[i];
      }
    }
  }

  void run_monotone(int restart, const Evaluator& eval, const Visitor& visit,
                    std::vector<TracePoint>* trace) {
    std::vector<double> dir(n_);
    std::vector<double> z_saved(n_);
    std::vector<double> trial_grad(n_);
    double step_size = cfg_.learning_rate;
    project();
    Evaluation current = eval(q_, grad_);
    visit(q_, current);
    record(restart, 0, current, trace);
    for (int step = 1; step <= cfg_.max_steps; ++step) {
      direction(dir);
      z_saved = z_;
      bool accepted = false;
      for (int attempt = 0; attempt < 60; ++attempt) {
        for (std::size_t i = 0; i < n_; ++i) {
          z_[i] = z_saved[i] + step_size * dir[i];
        }
        project();
        const Evaluation trial = eval(q_, trial_grad);
        if (trial.objective >= current.objective) {
          current = trial;
          std::swap(grad_, trial_grad);
          accepted = true;
          step_size *= 1.5;
          break;
        }
        step_size *= 0.5;
      }
      if (!accepted) {
        z_ = z_saved;
        project();
        record(restart, cfg_.max_steps, current, trace);
        break;
      }
      visit(q_, current);
      record(restart, step, current, trace);
    }
  }

  std::size_t n_;
  PenaltyConfig cfg_;
  std::vector<bool> active_;
  std::vector<double> z_;
  std::vector<double> q_;
  std::vector<double> grad_;
};

void check_functional(const FunctionalPtr& fn, const CategoricalDist& p,
                      const char* what) {
  require(fn != nullptr, ErrorCode::kInvalidArgument,
          std::string(what) + " functional is null");
  require(fn->dim() == p.size(), ErrorCode::kInvalidArgument,
          std::string(what) + " functional dimension " +
              std::to_string(fn->dim()) + " does not match P (" +
              std::to_string(p.size()) + ")");
}

void check_config(const PenaltyConfig& cfg) {
  require(cfg.lambda > 0.0, ErrorCode::kInvalidArgument,
          "penalty lambda must be positive");
  require(cfg.learning_rate > 0.0, ErrorCode::kInvalidArgument,
          "learning rate must be positive");
  require(cfg.momentum >= 0.0 && cfg.momentum < 1.0,
          ErrorCode::kInvalidArgument, "momentum must lie in [0, 1)");
  require(cfg.max_steps >= 0 && cfg.restarts >= 1, ErrorCode::kInvalidArgument,
          "max_steps must be >= 0 and restarts >= 1");
}

}  // namespace

const char* compat_method_name(CompatMethod method) {
  switch (method) {
    case CompatMethod::kFrontierSearch:
      return "frontier_search";
    case CompatMethod::kPenaltyOpt:
      return "penalty_opt";
    case CompatMethod::kCurveInterp:
      return "curve_interp";
  }
  return "unknown";
}

double drate_denominator_generalform(const MetricPair& pair,
                                     const CategoricalDist& p) {
  if (is_uniform(p)) return 0.0;
  const auto probs = p.probs();
  const double p_max = *std::max_element(probs.begin(), probs.end());
  CompensatedSum sum;
  std::size_t count = 0;
  for (double pi : probs) {
    const double fp = pair.f(pi);
    if (!std::isfinite(fp)) continue;
    sum.add(fp);
    ++count;
  }
  return pair.f(p_max) - sum.value() / static_cast<double>(count);
}

CompatReport qdisc_frontier(const MetricPair& pair, const CategoricalDist& p,
                            double w_min) {
  require(pair.frontier_eligible(), ErrorCode::kUnsupported,
          "metric pair '" + pair.name() + "' is not frontier-eligible");
  require(!is_uniform(p), ErrorCode::kDegenerateInput,
          "QDisc along the frontier requires a non-uniform P");
  require(w_min < 0.0 && std::isfinite(w_min), ErrorCode::kInvalidArgument,
          "w_min must be finite and negative");

  CompatReport report;
  report.method = CompatMethod::kFrontierSearch;
  report.u_real = quality(pair, p, p);
  report.v_real = diversity(pair, p);
  const double v_uniform = diversity(pair, uniform_dist(p.size()));
  require(report.v_real <= v_uniform + 1e-12, ErrorCode::kImpossible,
          "V(P) exceeds the diversity of the uniform distribution");

  const double bound = compute_bound(pair, p);
  double w_low = std::max(bound, w_min);
  FrontierPoint low = frontier_point(pair, p, w_low);
  // An infinite (or very negative) B can leave the target outside [w_min, 0].
  for (int i = 0; low.v >= report.v_real && w_low > bound && i < 64; ++i) {
    w_low = std::max(bound, 2.0 * w_low);
    low = frontier_point(pair, p, w_low);
  }

  FrontierPoint witness;
  if (low.v >= report.v_real) {
    witness = std::move(low);
  } else {
    double lo = w_low;
    double hi = 0.0;
    std::optional<FrontierPoint> hi_point;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      FrontierPoint point = frontier_point(pair, p, mid);
      if (point.v >= report.v_real) {
        hi = mid;
        hi_point = std::move(point);
      } else {
        lo = mid;
      }
    }
    if (hi_point) {
      witness = std::move(*hi_point);
    } else {
      witness = frontier_point(pair, p, hi);
    }
  }
  report.w_star = witness.w;
  report.qdisc = std::max(0.0, witness.u - report.u_real);
  report.witness = witness.q;
  report.denominator = drate_denominator_generalform(pair, p);
  report.drate =
      report.denominator > 0.0 ? report.qdisc / report.denominator : 0.0;
  return report;
}

MaximizeResult maximize(const FunctionalPtr& objective,
                        const CategoricalDist& init, const PenaltyConfig& cfg) {
  check_functional(objective, init, "objective");
  check_config(cfg);
  MaximizeResult result;
  result.value = -std::numeric_limits<double>::infinity();
  std::vector<double> best_q;
  SimplexAscent ascent(init.size(), objective->forced_zero(), cfg);
  ascent.run(
      init,
      [&](std::span<const double> q, std::span<double> grad) {
        Evaluation e;
        e.objective = objective->value_and_gradient(q, grad);
        e.u = e.objective;
        return e;
      },
      [&](std::span<const double> q, const Evaluation& e) {
        if (e.objective > result.value) {
          result.value = e.objective;
          best_q.assign(q.begin(), q.end());
        }
      },
      &result.trace);
  result.q = CategoricalDist::from_probabilities(std::move(best_q),
                                                 init.labels());
  return result;
}

double penalty_denominator(const FunctionalPtr& quality_fn,
                           const FunctionalPtr& diversity_fn,
                           const CategoricalDist& p, const PenaltyConfig& cfg) {
  PenaltyConfig quiet = cfg;
  quiet.trace_stride = 0;
  double max_u;
  if (const auto* linear =
          dynamic_cast<const LinearFunctional*>(quality_fn.get())) {
    max_u = *std::max_element(linear->coefficients().begin(),
                              linear->coefficients().end());
  } else if (const auto* form =
                 dynamic_cast<const MultilinearForm*>(quality_fn.get());
             form != nullptr && form->degree() == 1) {
    max_u = *std::max_element(form->tensor().begin(), form->tensor().end());
  } else {
    max_u = maximize(quality_fn, p, quiet).value;
  }
  const MaximizeResult most_diverse = maximize(diversity_fn, p, quiet);
  return max_u - quality_fn->value(most_diverse.q);
}

CompatReport qdisc_penalty(const FunctionalPtr& quality_fn,
                           const FunctionalPtr& diversity_fn,
                           const CategoricalDist& p, const PenaltyConfig& cfg,
                           std::optional<double> denominator) {
  check_functional(quality_fn, p, "quality");
  check_functional(diversity_fn, p, "diversity");
  check_config(cfg);

  CompatReport report;
  report.method = CompatMethod::kPenaltyOpt;
  report.u_real = quality_fn->value(p);
  report.v_real = diversity_fn->value(p);
  report.feasible = false;
  const double u_p = report.u_real;
  const double v_p = report.v_real;
  const double lambda = cfg.lambda;
  const std::size_t n = p.size();

  std::vector<double> grad_v(n);
  double best = 0.0;
  std::vector<double> best_q;
  SimplexAscent ascent(n, quality_fn->forced_zero(), cfg);
  ascent.run(
      p,
      [&](std::span<const double> q, std::span<double> grad) {
        Evaluation e;
        e.u = quality_fn->value_and_gradient(q, grad);
        e.v = diversity_fn->value_and_gradient(q, grad_v);
        const double shortfall = v_p - e.v;
        e.objective = e.u - (shortfall > 0.0 ? lambda * shortfall : 0.0);
        if (shortfall > 0.0) {
          for (std::size_t i = 0; i < n; ++i) grad[i] += lambda * grad_v[i];
        }
        return e;
      },
      [&](std::span<const double> q, const Evaluation& e) {
        if (e.v >= v_p && e.u > u_p && e.u - u_p > best) {
          best = e.u - u_p;
          best_q.assign(q.begin(), q.end());
          report.feasible = true;
        }
      },
      &report.trace);

  report.qdisc = best;
  if (report.feasible) {
    report.witness =
        CategoricalDist::from_probabilities(std::move(best_q), p.labels());
  }
  report.denominator = denominator ? *denominator
                                   : penalty_denominator(quality_fn,
                                                         diversity_fn, p, cfg);
  report.drate =
      report.denominator > 0.0 ? report.qdisc / report.denominator : 0.0;
  return report;
}

CompatReport qdisc_curve_interp(const std::vector<CurvePoint>& curve,
                                const CurvePoint& real_point,
                                double denominator) {
  require(curve.size() >= 2, ErrorCode::kInvalidArgument,
          "curve interpolation needs at least two points");
  std::vector<CurvePoint> sorted = curve;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const CurvePoint& a, const CurvePoint& b) {
                     return a.v < b.v;
                   });
  const double v = real_point.v;
  if (v < sorted.front().v || v > sorted.back().v) {
    fail(ErrorCode::kExtrapolationRefused,
         "V(real) = " + format_double(v) + " lies outside the curve span [" +
             format_double(sorted.front().v) + ", " +
             format_double(sorted.back().v) + "]");
  }
  double u_interp = sorted.back().u;
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    const CurvePoint& a = sorted[i];
    const CurvePoint& b = sorted[i + 1];
    if (v < a.v || v > b.v) continue;
    if (v == a.v) {
      u_interp = a.u;
    } else if (v == b.v) {
      u_interp = b.u;
    } else {
      const double t = (v - a.v) / (b.v - a.v);
      u_interp = a.u + t * (b.u - a.u);
    }
    break;
  }

  CompatReport report;
  report.method = CompatMethod::kCurveInterp;
  report.u_real = real_point.u;
  report.v_real = real_point.v;
  report.qdisc = std::max(0.0, u_interp - real_point.u);
  report.denominator = denominator;
  report.drate = denominator > 0.0 ? report.qdisc / denominator : 0.0;
  if (real_point.u != 0.0) report.self_ratio = report.qdisc / real_point.u;

  auto labeled = [&](double eps) -> const CurvePoint* {
    for (const auto& c : curve) {
      if (c.epsilon && std::abs(*c.epsilon - eps) < 1e-12) return &c;
    }
    return nullptr;
  };
  const CurvePoint* clean = labeled(0.0);
  const CurvePoint* noisy = labeled(0.2);
  if (clean != nullptr && noisy != nullptr && clean->u != noisy->u) {
    report.ref_ratio = report.qdisc / (clean->u - noisy->u);
  }
  return report;
}

}  // namespace qdfit
