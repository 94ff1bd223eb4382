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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "qdfit/error.h"
#include "qdfit/metric_pair.h"
#include "support/oracles.h"

namespace qdfit {
namespace {

using qdfit_test::Vec;

Vec as_vec(const CategoricalDist& d) { return {d.probs().begin(), d.probs().end()}; }

TEST(MetricPair, QualityExamples) {
  const auto u = uniform_dist(5);
  EXPECT_NEAR(quality(cr_nrr_pair(), u, u), 0.2, 1e-15);
  const auto p = random_toy(20, 7);
  EXPECT_NEAR(quality(ll_se_pair(), p, p), -entropy(p), 1e-13);
  const auto q3 = CategoricalDist::from_probabilities({0.5, 0.3, 0.2});
  EXPECT_DOUBLE_EQ(quality(cr_nrr_pair(), one_hot(3, 0), q3), 0.5);
}

TEST(MetricPair, QualitySupportMismatch) {
  const auto p = CategoricalDist::from_probabilities({1.0, 0.0});
  try {
    quality(ll_se_pair(), uniform_dist(2), p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSupportMismatch);
  }
  // Zero mass on the -inf outcome is fine.
  EXPECT_DOUBLE_EQ(quality(ll_se_pair(), one_hot(2, 0), p), 0.0);
}

TEST(MetricPair, DiversityExamples) {
  EXPECT_NEAR(diversity(ll_se_pair(), uniform_dist(7)), std::log(7.0), 1e-14);
  EXPECT_NEAR(diversity(cr_nrr_pair(), uniform_dist(8)), -0.125, 1e-15);
  EXPECT_DOUBLE_EQ(diversity(cr_nrr_pair(), one_hot(4, 2)), -1.0);
}

TEST(MetricPair, CombinedPsi) {
  const auto p = random_toy(9, 2);
  EXPECT_NEAR(combined_psi(ll_se_pair(), p, p, 0.5), 0.0, 1e-14);
  const auto u = uniform_dist(6);
  EXPECT_NEAR(combined_psi(cr_nrr_pair(), u, u, 2.0 / 3.0), 1.0 / 18.0, 1e-15);
  const auto u9 = uniform_dist(9);
  EXPECT_DOUBLE_EQ(combined_psi(cr_nrr_pair(), p, u9, 0.0),
                   diversity(cr_nrr_pair(), p));
  EXPECT_THROW(combined_psi(cr_nrr_pair(), p, p, 1.0), Error);
}

TEST(MetricPair, CompatibilityFits) {
  const auto cn = compatibility_analytic(cr_nrr_pair());
  EXPECT_TRUE(cn.compatible);
  EXPECT_NEAR(cn.w0, -2.0, 1e-8);
  EXPECT_NEAR(cn.b0, 0.0, 1e-8);
  EXPECT_NEAR(cn.alpha(), 2.0 / 3.0, 1e-8);
  // -x log x = -(x log x - x) - x, so the linear coefficient is -1.
  const auto ll = compatibility_analytic(ll_se_pair());
  EXPECT_TRUE(ll.compatible);
  EXPECT_NEAR(ll.w0, -1.0, 1e-8);
  EXPECT_NEAR(ll.b0, -1.0, 1e-8);
  EXPECT_FALSE(compatibility_analytic(ll_nrr_pair()).compatible);
  EXPECT_FALSE(compatibility_analytic(cr_se_pair()).compatible);
  EXPECT_FALSE(compatibility_analytic(bleu_expect_pair(2, 2)).compatible);
  EXPECT_TRUE(compatibility_analytic(bleu_expect_pair(1, 2)).compatible);
  EXPECT_FALSE(compatibility_analytic(bleu_expect_pair(1, 3)).compatible);
}

TEST(MetricPair, DivergenceMatchesReverseKl) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + trial % 15;
    const auto p = CategoricalDist::from_probabilities(qdfit_test::random_simplex(n, gen));
    const auto q = CategoricalDist::from_probabilities(qdfit_test::random_simplex(n, gen));
    ASSERT_NEAR(divergence(ll_se_pair(), q, p),
                0.5 * qdfit_test::reverse_kl(as_vec(q), as_vec(p)), 1e-12);
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) sq += (q[i] - p[i]) * (q[i] - p[i]);
    ASSERT_NEAR(divergence(cr_nrr_pair(), q, p), sq / 3.0, 1e-12);
  }
  const auto p = random_toy(5, 1);
  EXPECT_NEAR(divergence(ll_se_pair(), p, p), 0.0, 1e-15);
}

TEST(MetricPair, DivergenceRefusedForIncompatible) {
  const auto p = random_toy(5, 1);
  try {
    divergence(ll_nrr_pair(), p, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotADivergence);
  }
}

TEST(MetricPair, BleuExpectKernelsReduce) {
  const auto b = bleu_expect_pair(1, 2);
  for (double x : {0.1, 0.4, 0.9}) {
    EXPECT_NEAR(b.f(x), x, 1e-15);
    EXPECT_NEAR(b.g(x), -x * x, 1e-15);
  }
  EXPECT_TRUE(b.frontier_eligible());
}

TEST(MetricPair, InverseIsConsistent) {
  for (auto id : builtin_pair_ids()) {
    if (id.find('<') != std::string::npos) id = "bleu-expect:R=3,C=2";
    const auto pair = pair_from_id(id);
    if (!pair.frontier_eligible()) continue;
    for (double x : {0.01, 0.2, 0.5, 0.93}) {
      EXPECT_NEAR(pair.g_prime_inv(pair.g_prime(x)), x, 1e-9) << id;
    }
  }
  EXPECT_DOUBLE_EQ(cr_nrr_pair().g_hat_prime_inv(0.5), 0.0);
}

TEST(MetricPair, PairIds) {
  EXPECT_EQ(pair_from_id("ll-se").name(), "ll-se");
  const auto b = pair_from_id("bleu-expect:R=3,C=4");
  EXPECT_EQ(b.params().at("R"), 3.0);
  EXPECT_EQ(b.params().at("C"), 4.0);
  for (const char* bad : {"nope", "bleu-expect:R=2", "bleu-expect:R=1.5,C=2",
                          "bleu-expect:R=0,C=2", "bleu-expect:R=1,C=1"}) {
    EXPECT_THROW(pair_from_id(bad), Error) << bad;
  }
}

TEST(MetricPair, IntegralFallsBackToQuadrature) {
  Kernels k;
  k.f = [](double x) { return x * x; };
  k.g = [](double x) { return -x * x; };
  k.g_prime = [](double x) { return -2 * x; };
  k.g_prime_at_zero = 0.0;
  const MetricPair pair("custom", k);
  EXPECT_FALSE(pair.has_integral());
  EXPECT_NEAR(pair.integral_f(0.6), 0.072, 1e-10);
  EXPECT_NEAR(pair.g_prime_inv(-1.0), 0.5, 1e-9);
}

TEST(Rationality, BuiltinPairsPass) {
  for (const auto& pair : {ll_se_pair(), cr_nrr_pair()}) {
    const auto r = check_rationality(pair, 64, 2000, 3);
    EXPECT_TRUE(r.passed) << pair.name() << " " << r.violated;
    EXPECT_EQ(r.perturbation_violations, 0u);
    EXPECT_EQ(r.perturbation_trials, 2000u);
  }
}

TEST(Rationality, DecreasingQualityFails) {
  Kernels k;
  k.f = [](double x) { return -x; };
  k.g = [](double x) { return -x * x; };
  k.g_prime = [](double x) { return -2 * x; };
  k.integral_f = [](double x) { return -x * x / 2; };
  const MetricPair pair("bad", k);
  EXPECT_FALSE(pair.frontier_eligible());
  const auto r = check_rationality(pair, 32, 100, 0);
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.violated, "f-increasing");
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_GT(r.witness->first, r.witness->second);
}

}  // namespace
}  // namespace qdfit
