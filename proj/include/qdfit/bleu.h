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

#ifndef QDFIT_BLEU_H_
#define QDFIT_BLEU_H_

#include <cstdint>
#include <memory>
#include <vector>

#include "qdfit/distribution.h"
#include "qdfit/functional.h"
#include "qdfit/numeric.h"

namespace qdfit {

enum class BrevityPenalty { kStandard, kOff };

struct BleuConfig {
  int max_order = 4;
  BrevityPenalty brevity_penalty = BrevityPenalty::kStandard;
};

/// Corpus BLEU: modified n-gram precisions with counts clipped, per
/// candidate, by the largest count in any single reference; geometric mean
/// over the orders that have at least one candidate n-gram; standard brevity
/// penalty with the closest reference length (shorter wins ties). No
/// smoothing, so any zero precision gives 0.
double corpus_bleu(const std::vector<Sentence>& candidates,
                   const std::vector<Sentence>& references,
                   const BleuConfig& config = {});

/// Mean over i of corpus_bleu({c_i}, candidates without c_i). Every other
/// candidate is rescanned for each i.
double self_bleu(const std::vector<Sentence>& candidates,
                 const BleuConfig& config = {});

/// sum_i Q_i [1 - (1 - P_i)^R].
double expected_unigram_bleu(const CategoricalDist& q, const CategoricalDist& p,
                             int ref_size);

/// -sum_i Q_i [1 - (1 - Q_i)^(C-1)].
double expected_nsbleu_unigram(const CategoricalDist& q, int cand_size);

/// Exact expectation over i.i.d. candidate and reference draws.
struct EnumSpec {
  CategoricalDist q = uniform_dist(1);
  CategoricalDist p = uniform_dist(1);
  int m = 1;  // candidates
  int n = 2;  // references
  BleuConfig config;
};

constexpr std::uint64_t kMaxEnumerationTerms = std::uint64_t{1} << 28;

/// sum over (C, R) of prod Q(C_i) prod P(R_j) BLEU(C, R). Throws kCapacity
/// when N^(m+n) exceeds 2^28.
double expected_bleu_enumerate(const EnumSpec& spec);

/// sum over candidate tuples of prod Q(c_i) SelfBLEU(tuple).
double expected_selfbleu_enumerate(const CategoricalDist& q, int cand_size,
                                   const BleuConfig& config = {});

/// E BLEU as a degree-m form in Q with P fixed: the coefficient of a
/// candidate tuple is its BLEU averaged over reference draws from P.
std::shared_ptr<MultilinearForm> expected_bleu_form(const CategoricalDist& p,
                                                    int m, int n,
                                                    const BleuConfig& config);

/// E NSBLEU = -E SelfBLEU as a degree-C form over the outcome labels.
std::shared_ptr<MultilinearForm> expected_nsbleu_form(
    const std::vector<Sentence>& labels, int cand_size,
    const BleuConfig& config);

}  // namespace qdfit

#endif  // QDFIT_BLEU_H_
