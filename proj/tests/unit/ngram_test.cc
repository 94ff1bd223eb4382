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
#include "qdfit/ngram.h"
#include "support/oracles.h"

namespace qdfit {
namespace {

constexpr TokenId a = 0, b = 1, c = 2;

NGramDist table(std::initializer_list<std::pair<Gram, double>> items) {
  NGramDist::Table t;
  for (const auto& [g, p] : items) t.emplace(g, p);
  return NGramDist::from_probabilities(static_cast<int>(items.begin()->first.size()), t);
}

NGramDist random_table(std::mt19937_64& gen, std::size_t n) {
  const auto v = qdfit_test::random_simplex(n, gen);
  NGramDist::Table t;
  for (std::size_t i = 0; i < n; ++i) {
    t.emplace(Gram{static_cast<TokenId>(gen() % 6), static_cast<TokenId>(i)}, v[i]);
  }
  return NGramDist::from_probabilities(2, t);
}

TEST(NGramDist, CountsBigrams) {
  const auto d = ngram_dist({{a, b, a, b}}, 2);
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.total_count(), 3);
  EXPECT_NEAR(d.probability({a, b}), 2.0 / 3, 1e-15);
  EXPECT_NEAR(d.probability({b, a}), 1.0 / 3, 1e-15);
  EXPECT_EQ(d.probability({b, b}), 0.0);
}

TEST(NGramDist, DegenerateCases) {
  EXPECT_DOUBLE_EQ(ngram_dist({{a}}, 1).probability({a}), 1.0);
  const auto whole = ngram_dist({{a, b, c}}, 3);
  EXPECT_EQ(whole.size(), 1u);
  // No cross-sentence grams.
  EXPECT_EQ(ngram_dist({{a}, {b}, {a, b}}, 2).size(), 1u);
  try {
    ngram_dist({{a}, {b}}, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyDistribution);
  }
  EXPECT_THROW(NGramDist::from_counts(2, {{{a}, 1}}), Error);
  EXPECT_THROW(table({{{a}, 0.5}, {{b}, 0.6}}), Error);
}

TEST(Metrics, CrExamples) {
  EXPECT_NEAR(cr(table({{{a}, 0.5}, {{b}, 0.5}}), table({{{a}, 0.8}, {{c}, 0.2}})),
              0.4, 1e-15);
  const auto u = table({{{a}, 0.25}, {{b}, 0.25}, {{c}, 0.25}, {{3}, 0.25}});
  EXPECT_NEAR(cr(u, u), 0.25, 1e-15);
  EXPECT_EQ(cr(table({{{a}, 1.0}}), table({{{b}, 1.0}})), 0.0);
}

TEST(Metrics, NrrExamples) {
  EXPECT_NEAR(nrr(table({{{a}, 0.5}, {{b}, 0.3}, {{c}, 0.2}})), -0.38, 1e-15);
  EXPECT_DOUBLE_EQ(nrr(table({{{a}, 1.0}})), -1.0);
  EXPECT_NEAR(nrr(table({{{a}, 0.5}, {{b}, 0.5}})), -0.5, 1e-15);
}

TEST(Metrics, CndExamples) {
  const auto q = table({{{a}, 0.5}, {{b}, 0.5}});
  EXPECT_NEAR(cnd(q, q), 0.0, 1e-15);
  EXPECT_NEAR(cnd(table({{{a}, 1.0}}), table({{{b}, 1.0}})), 2.0, 1e-15);
}

TEST(Metrics, PsiExamples) {
  const auto u = table({{{a}, 0.5}, {{b}, 0.5}});
  EXPECT_NEAR(psi_n(u, u), 1.0 / 6, 1e-15);
  const auto d = table({{{c}, 1.0}});
  EXPECT_NEAR(psi_n(u, d), nrr(u) / 3, 1e-15);
  EXPECT_NEAR(psi_n(d, d), 1.0 / 3, 1e-15);
}

TEST(Metrics, CndIdentityProperty) {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto q = random_table(gen, 3 + trial % 17);
    const auto p = random_table(gen, 3 + trial % 11);
    const double via_psi = 3 * (psi_n(p, p) - psi_n(q, p));
    ASSERT_NEAR(cnd(q, p), via_psi, 1e-12);
    ASSERT_GE(cnd(q, p), 0.0);
    // Psi is maximized at Q = P.
    ASSERT_LE(psi_n(q, p), psi_n(p, p) + 1e-15);
  }
}

TEST(Align, SortedUnion) {
  const auto [q, p] = align(table({{{b}, 0.5}, {{a}, 0.5}}), table({{{c}, 1.0}}));
  ASSERT_EQ(q.size(), 3u);
  EXPECT_EQ(q.labels()[0], (Sentence{a}));
  EXPECT_EQ(q.labels()[2], (Sentence{c}));
  EXPECT_DOUBLE_EQ(q[2], 0.0);
  EXPECT_DOUBLE_EQ(p[2], 1.0);
}

TEST(GramMarginal, MatchesSampleCounts) {
  const std::vector<Sentence> labels = {{a, b, a}, {b, b}};
  const auto q = CategoricalDist::from_probabilities({0.25, 0.75}, labels);
  const auto m = gram_marginal(q, 2);
  // Expected bigram counts: 0.25 * 2 from text 0, 0.75 * 1 from text 1.
  EXPECT_NEAR(m.probability({a, b}), 0.25 / 1.25, 1e-15);
  EXPECT_NEAR(m.probability({b, b}), 0.75 / 1.25, 1e-15);
  EXPECT_THROW(gram_marginal(uniform_dist(2), 1), Error);
}

TEST(GramProjection, LinearMapProperty) {
  OracleSpec spec;
  spec.seed = 3;
  const auto p = oracle_enumerate(spec);
  std::mt19937_64 gen(4);
  const auto q = CategoricalDist::from_probabilities(
      qdfit_test::random_simplex(p.size(), gen), p.labels());
  for (int order : {1, 2, 3}) {
    const auto proj = gram_projection(p.labels(), order);
    EXPECT_EQ(proj.n_texts, 64u);
    const auto qg = gram_marginal(q, order);
    const auto pg = gram_marginal(p, order);
    EXPECT_NEAR(cr_functional(p, order)->value(q), cr(qg, pg), 1e-13);
    EXPECT_NEAR(nrr_functional(p.labels(), order)->value(q), nrr(qg), 1e-13);
  }
  EXPECT_THROW(gram_projection({{a, b}, {a}}, 1), Error);
  EXPECT_THROW(gram_projection({{a, b}}, 3), Error);
}

}  // namespace
}  // namespace qdfit
