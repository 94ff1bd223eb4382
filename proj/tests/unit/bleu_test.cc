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

#include "qdfit/bleu.h"
#include "qdfit/error.h"
#include "support/oracles.h"

namespace qdfit {
namespace {

using qdfit_test::Text;

// a=0 b=1 c=2 d=3
const Sentence kAbc = {0, 1, 2};
const Sentence kAbcd = {0, 1, 2, 3};

std::vector<Text> texts(const std::vector<Sentence>& s) {
  return {s.begin(), s.end()};
}

std::vector<Sentence> random_sentences(std::size_t n, int vocab, std::uint64_t seed,
                                       int min_len = 1, int max_len = 9) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> len(min_len, max_len), tok(0, vocab - 1);
  std::vector<Sentence> out(n);
  for (auto& s : out) {
    s.resize(len(gen));
    for (auto& t : s) t = tok(gen);
  }
  return out;
}

CategoricalDist vec_dist(const std::vector<double>& v, std::vector<Sentence> labels = {}) {
  return CategoricalDist::from_probabilities(v, std::move(labels));
}

TEST(CorpusBleu, HandExample) {
  BleuConfig cfg;
  cfg.max_order = 2;
  EXPECT_NEAR(corpus_bleu({kAbc}, {kAbcd}, cfg), std::exp(-1.0 / 3.0), 1e-15);
}

TEST(CorpusBleu, Extremes) {
  EXPECT_DOUBLE_EQ(corpus_bleu({kAbcd}, {kAbcd}), 1.0);
  EXPECT_EQ(corpus_bleu({{5, 6, 7}}, {kAbcd}), 0.0);
  BleuConfig off;
  off.brevity_penalty = BrevityPenalty::kOff;
  off.max_order = 2;
  EXPECT_DOUBLE_EQ(corpus_bleu({kAbc}, {kAbcd}, off), 1.0);
  EXPECT_THROW(corpus_bleu({}, {kAbc}), Error);
  EXPECT_THROW(corpus_bleu({kAbc}, {}), Error);
}

TEST(CorpusBleu, ClosestLengthPrefersShorter) {
  // Lengths 2 and 4 are equally close to 3; the shorter one means no penalty.
  BleuConfig cfg;
  cfg.max_order = 1;
  EXPECT_DOUBLE_EQ(corpus_bleu({kAbc}, {{0, 1}, {0, 1, 2, 3}}, cfg), 1.0);
}

TEST(CorpusBleu, ClipsPerSingleReference) {
  // "a a" against refs "a" and "a": the max count in any one reference is 1.
  BleuConfig cfg;
  cfg.max_order = 1;
  cfg.brevity_penalty = BrevityPenalty::kOff;
  EXPECT_DOUBLE_EQ(corpus_bleu({{0, 0}}, {{0}, {0}}, cfg), 0.5);
}

TEST(CorpusBleu, MatchesNaiveOracleProperty) {
  for (int trial = 0; trial < 60; ++trial) {
    const auto cands = random_sentences(1 + trial % 7, 5, 100 + trial);
    const auto refs = random_sentences(1 + trial % 5, 5, 200 + trial);
    for (int m : {1, 2, 4}) {
      BleuConfig cfg;
      cfg.max_order = m;
      ASSERT_NEAR(corpus_bleu(cands, refs, cfg),
                  qdfit_test::naive_bleu(texts(cands), texts(refs), m), 1e-12)
          << trial << " " << m;
    }
  }
}

TEST(SelfBleu, Extremes) {
  EXPECT_DOUBLE_EQ(self_bleu({kAbcd, kAbcd, kAbcd}), 1.0);
  EXPECT_EQ(self_bleu({{0, 1}, {2, 3}, {4, 5}}), 0.0);
  EXPECT_THROW(self_bleu({kAbc}), Error);
}

TEST(SelfBleu, ThreeCandidatesByHand) {
  const std::vector<Sentence> c = {{0, 1, 2}, {0, 1, 3}, {1, 2, 3, 4}};
  BleuConfig cfg;
  cfg.max_order = 2;
  double manual = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    std::vector<Sentence> others;
    for (std::size_t j = 0; j < 3; ++j)
      if (j != i) others.push_back(c[j]);
    manual += corpus_bleu({c[i]}, others, cfg) / 3.0;
  }
  EXPECT_NEAR(self_bleu(c, cfg), manual, 1e-12);
  EXPECT_NEAR(self_bleu(c, cfg), qdfit_test::naive_self_bleu(texts(c), 2), 1e-12);
}

TEST(SelfBleu, MatchesNaiveOracleProperty) {
  for (int trial = 0; trial < 30; ++trial) {
    const auto c = random_sentences(2 + trial % 6, 4, 300 + trial);
    ASSERT_NEAR(self_bleu(c), qdfit_test::naive_self_bleu(texts(c), 4), 1e-12);
  }
}

TEST(ExpectedUnigram, ClosedForms) {
  const auto q = vec_dist({0.1, 0.2, 0.3, 0.4});
  const auto p = vec_dist({0.4, 0.3, 0.2, 0.1});
  double cr = 0.0;
  for (int i = 0; i < 4; ++i) cr += q[i] * p[i];
  EXPECT_NEAR(expected_unigram_bleu(q, p, 1), cr, 1e-15);
  EXPECT_NEAR(expected_unigram_bleu(one_hot(4, 1), p, 500), 1.0, 1e-12);
  double nrr = 0.0;
  for (int i = 0; i < 4; ++i) nrr -= q[i] * q[i];
  EXPECT_NEAR(expected_nsbleu_unigram(q, 2), nrr, 1e-15);
  EXPECT_DOUBLE_EQ(expected_nsbleu_unigram(one_hot(4, 2), 5), -1.0);
  const double n = 6;
  EXPECT_NEAR(expected_nsbleu_unigram(uniform_dist(6), 3),
              -(1 - std::pow(1 - 1 / n, 2)), 1e-15);
}

TEST(ExpectedUnigram, MonteCarlo) {
  std::mt19937_64 gen(77);
  const auto qv = qdfit_test::random_simplex(8, gen);
  const auto pv = qdfit_test::random_simplex(8, gen);
  qdfit_test::Sampler qs(qv, 1), ps(pv, 2);
  const auto est = qdfit_test::monte_carlo(1000000, [&] {
    const auto c = qs.draw();
    return (c == ps.draw() || c == ps.draw()) ? 1.0 : 0.0;
  });
  EXPECT_LE(std::abs(expected_unigram_bleu(vec_dist(qv), vec_dist(pv), 2) - est.mean),
            3 * est.stderr_);
  qdfit_test::Sampler us(std::vector<double>(5, 0.2), 3);
  const auto self = qdfit_test::monte_carlo(200000, [&] {
    const auto a = us.draw(), b = us.draw(), c = us.draw();
    return -((a == b || a == c) ? 1.0 : 0.0);
  });
  EXPECT_LE(std::abs(expected_nsbleu_unigram(uniform_dist(5), 3) - self.mean),
            3 * self.stderr_);
}

TEST(Enumeration, SingleTokenMatchesClosedForm) {
  const std::vector<Sentence> labels = {{0}, {1}};
  const auto q = vec_dist({0.3, 0.7}, labels);
  const auto p = vec_dist({0.6, 0.4}, labels);
  BleuConfig uni;
  uni.max_order = 1;
  EXPECT_NEAR(expected_bleu_enumerate({q, p, 1, 1, uni}),
              expected_unigram_bleu(q, p, 1), 1e-15);
  EXPECT_NEAR(expected_selfbleu_enumerate(q, 2, uni),
              -expected_nsbleu_unigram(q, 2), 1e-15);
  const auto h = vec_dist({1.0, 0.0}, labels);
  EXPECT_DOUBLE_EQ(expected_bleu_enumerate({h, h, 2, 2, uni}), 1.0);
  EXPECT_DOUBLE_EQ(expected_selfbleu_enumerate(h, 3, uni), 1.0);
}

TEST(Enumeration, SmallCaseByHand) {
  // Two texts "a" and "b", one candidate, two references.
  const std::vector<Sentence> labels = {{0}, {1}};
  const auto q = vec_dist({0.25, 0.75}, labels);
  const auto p = vec_dist({0.5, 0.5}, labels);
  BleuConfig uni;
  uni.max_order = 1;
  // BLEU is 1 when the candidate appears among the references.
  const double want = 0.25 * (1 - 0.25) + 0.75 * (1 - 0.25);
  EXPECT_NEAR(expected_bleu_enumerate({q, p, 1, 2, uni}), want, 1e-15);
}

TEST(Enumeration, FormsAgreeWithEnumeration) {
  OracleSpec spec;
  spec.vocab_size = 2;
  spec.length = 3;
  spec.seed = 5;
  const auto p = oracle_enumerate(spec);
  spec.seed = 6;
  const auto q = oracle_enumerate(spec);
  BleuConfig cfg;
  cfg.max_order = 2;
  const auto form = expected_bleu_form(p, 1, 2, cfg);
  EXPECT_NEAR(form->value(q), expected_bleu_enumerate({q, p, 1, 2, cfg}), 1e-13);
  const auto ns = expected_nsbleu_form(q.labels(), 3, cfg);
  EXPECT_EQ(ns->degree(), 3);
  EXPECT_NEAR(ns->value(q), -expected_selfbleu_enumerate(q, 3, cfg), 1e-13);
}

TEST(Enumeration, RequiresLabelsAndCapacity) {
  EXPECT_THROW(expected_bleu_enumerate({uniform_dist(3), uniform_dist(3), 1, 1, {}}),
               Error);
  OracleSpec spec;
  spec.vocab_size = 4;
  spec.length = 4;
  const auto big = oracle_enumerate(spec);  // 256 outcomes
  try {
    expected_bleu_enumerate({big, big, 2, 2, {}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCapacity);
  }
}

}  // namespace
}  // namespace qdfit
