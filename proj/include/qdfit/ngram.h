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

#ifndef QDFIT_NGRAM_H_
#define QDFIT_NGRAM_H_

#include <cstddef>
#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qdfit/distribution.h"
#include "qdfit/functional.h"
#include "qdfit/numeric.h"

namespace qdfit {

using Gram = std::vector<TokenId>;

struct GramHash {
  std::size_t operator()(const Gram& gram) const noexcept;
};

/// Sparse empirical n-gram distribution.
class NGramDist {
 public:
  using Table = std::unordered_map<Gram, double, GramHash>;
  using Counts = std::unordered_map<Gram, std::int64_t, GramHash>;

  /// Normalizes integer counts. Throws kEmptyDistribution when the total is
  /// zero and kInvalidArgument for keys of the wrong length.
  static NGramDist from_counts(int order, Counts counts);
  /// Accepts probabilities summing to one within 1e-9.
  static NGramDist from_probabilities(int order, Table table);

  int order() const { return order_; }
  /// Number of grams counted; zero when built from probabilities.
  std::int64_t total_count() const { return total_count_; }
  std::size_t size() const { return table_.size(); }
  const Table& table() const { return table_; }
  double probability(const Gram& gram) const;

 private:
  NGramDist(int order, Table table, std::int64_t total_count);

  int order_;
  Table table_;
  std::int64_t total_count_;
};

/// Sliding windows inside each sentence, no padding and no cross-sentence
/// grams. Throws kEmptyDistribution when no sentence has `order` tokens.
NGramDist ngram_dist(const std::vector<Sentence>& corpus, int order);

/// sum_g Q_g P_g.
double cr(const NGramDist& qg, const NGramDist& pg);
/// -sum_g Q_g^2.
double nrr(const NGramDist& qg);
/// sum over the union of supports of (Q_g - P_g)^2. Cross-checked against
/// 3 (Psi_n(P) - Psi_n(Q)); a mismatch beyond 1e-9 throws kNumeric.
double cnd(const NGramDist& qg, const NGramDist& pg);
/// (2/3) CR_n(Q; P) + (1/3) NRR_n(Q).
double psi_n(const NGramDist& qg, const NGramDist& pg);

/// Both tables as categorical distributions over the sorted union of their
/// grams; labels are the grams.
std::pair<CategoricalDist, CategoricalDist> align(const NGramDist& qg,
                                                  const NGramDist& pg);

/// Exact gram distribution of a labeled text-space distribution:
/// Q_g(g) = sum_x Q(x) count_x(g) / sum_x Q(x) (|x| - n + 1).
NGramDist gram_marginal(const CategoricalDist& q, int order);

/// Linear map A from text space to gram space for equal-length labels:
/// A[g][x] = count_x(g) / (L - n + 1), so Q_g = A Q.
struct GramProjection {
  int order = 1;
  std::vector<Gram> grams;      // sorted
  std::vector<double> matrix;   // grams.size() x n_texts, row-major
  std::size_t n_texts = 0;
};

/// Throws kUnsupported when labels differ in length or are shorter than
/// `order`.
GramProjection gram_projection(const std::vector<Sentence>& labels, int order);

/// CR_n(Q; P) = (A^T P_g) . Q with P_g = A P.
FunctionalPtr cr_functional(const CategoricalDist& p, int order);
/// NRR_n(Q) = -|A Q|^2 as a quadratic form.
FunctionalPtr nrr_functional(const std::vector<Sentence>& labels, int order);

}  // namespace qdfit

#endif  // QDFIT_NGRAM_H_
