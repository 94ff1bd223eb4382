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

#ifndef QDFIT_DISTRIBUTION_H_
#define QDFIT_DISTRIBUTION_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qdfit/numeric.h"

namespace qdfit {

/// An explicit probability vector over an enumerable outcome space, with
/// optional token-sequence labels (one per outcome).
///
/// Immutable after construction. Entries are non-negative and sum to one
/// within 1e-12.
class CategoricalDist {
 public:
  /// Normalizes non-negative weights. Throws kInvalidArgument on negative or
  /// non-finite weights, empty input or zero total mass.
  static CategoricalDist from_weights(std::vector<double> weights,
                                      std::vector<Sentence> labels = {});

  /// Accepts values that already sum to one within `tolerance`. Values are
  /// stored untouched when the sum is within 1e-12 of one (so file round
  /// trips are bit-exact) and rescaled otherwise.
  static CategoricalDist from_probabilities(std::vector<double> probs,
                                            std::vector<Sentence> labels = {},
                                            double tolerance = 1e-9);

  std::size_t size() const { return probs_.size(); }
  std::span<const double> probs() const { return probs_; }
  double operator[](std::size_t i) const { return probs_[i]; }

  bool has_labels() const { return !labels_.empty(); }
  const std::vector<Sentence>& labels() const { return labels_; }

  /// True when both are over the same outcome space (size, and labels when
  /// both carry them).
  bool same_space(const CategoricalDist& other) const;

  bool operator==(const CategoricalDist& other) const = default;

 private:
  CategoricalDist(std::vector<double> probs, std::vector<Sentence> labels);

  std::vector<double> probs_;
  std::vector<Sentence> labels_;
};

CategoricalDist uniform_dist(std::size_t n);
CategoricalDist one_hot(std::size_t n, std::size_t index);

/// Entries drawn i.i.d. uniform(0,1), then normalized.
CategoricalDist random_toy(std::size_t n_categories, std::uint64_t seed);

/// Seeded recurrent ground-truth generator.
struct OracleSpec {
  int vocab_size = 4;
  int length = 3;
  int hidden_dim = 8;
  double sigma = 1.0;
  std::uint64_t seed = 0;
};

constexpr std::uint64_t kMaxOracleOutcomes = std::uint64_t{1} << 22;

/// Enumerates the joint distribution of a single-layer LSTM with Gaussian
/// weights over every sequence in V^L. Outcome i corresponds to the base-|V|
/// expansion of i with the first token most significant. Throws kCapacity
/// when |V|^L exceeds kMaxOracleOutcomes.
CategoricalDist oracle_enumerate(const OracleSpec& spec);

/// Q_i proportional to P_i^beta; beta = 0 gives uniform over the support.
CategoricalDist temper(const CategoricalDist& dist, double beta);

/// Pointwise (1 - epsilon) * base + epsilon * noise.
CategoricalDist mix_with_noise(const CategoricalDist& base, double epsilon,
                               const CategoricalDist& noise);

/// Shannon entropy in nats, 0 log 0 = 0.
double entropy(const CategoricalDist& dist);

double total_variation(const CategoricalDist& a, const CategoricalDist& b);

bool is_uniform(const CategoricalDist& dist, double tolerance = 1e-12);

/// Text format: one probability per line, or `label<TAB>probability` with a
/// space-joined token-id label. Values use 17 significant digits.
void write_dist(std::ostream& out, const CategoricalDist& dist);
CategoricalDist read_dist(std::istream& in);
void write_dist_file(const std::string& path, const CategoricalDist& dist);
CategoricalDist read_dist_file(const std::string& path);

}  // namespace qdfit

#endif  // QDFIT_DISTRIBUTION_H_
