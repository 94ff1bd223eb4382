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

#include "qdfit/ngram.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "qdfit/error.h"

namespace qdfit {

namespace {

void require_same_order(const NGramDist& a, const NGramDist& b) {
  require(a.order() == b.order(), ErrorCode::kInvalidArgument,
          "n-gram orders differ: " + std::to_string(a.order()) + " vs " +
              std::to_string(b.order()));
}

std::vector<Gram> sorted_keys(const NGramDist::Table& table) {
  std::vector<Gram> keys;
  keys.reserve(table.size());
  for (const auto& [g, _] : table) keys.push_back(g);
  std::sort(keys.begin(), keys.end());
  return keys;
}

}  // namespace

std::size_t GramHash::operator()(const Gram& gram) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (TokenId t : gram) {
    h ^= static_cast<std::uint32_t>(t) + 0x9e3779b97f4a7c15ULL + (h << 6) +
         (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

NGramDist::NGramDist(int order, Table table, std::int64_t total_count)
    : order_(order), table_(std::move(table)), total_count_(total_count) {}

NGramDist NGramDist::from_counts(int order, Counts counts) {
  require(order >= 1, ErrorCode::kInvalidArgument, "n-gram order must be >= 1");
  std::int64_t total = 0;
  for (const auto& [g, c] : counts) {
    require(static_cast<int>(g.size()) == order, ErrorCode::kInvalidArgument,
            "n-gram key length does not match the order");
    require(c >= 0, ErrorCode::kInvalidArgument, "negative n-gram count");
    total += c;
  }
  require(total > 0, ErrorCode::kEmptyDistribution,
          "no n-grams of order " + std::to_string(order));
  Table table;
  table.reserve(counts.size());
  const double denom = static_cast<double>(total);
  for (auto& [g, c] : counts) {
    if (c > 0) table.emplace(g, static_cast<double>(c) / denom);
  }
  return NGramDist(order, std::move(table), total);
}

NGramDist NGramDist::from_probabilities(int order, Table table) {
  require(order >= 1, ErrorCode::kInvalidArgument, "n-gram order must be >= 1");
  require(!table.empty(), ErrorCode::kEmptyDistribution, "empty n-gram table");
  CompensatedSum sum;
  for (const auto& [g, p] : table) {
    require(static_cast<int>(g.size()) == order, ErrorCode::kInvalidArgument,
            "n-gram key length does not match the order");
    require(p >= 0.0 && std::isfinite(p), ErrorCode::kInvalidArgument,
            "n-gram probabilities must be finite and non-negative");
    sum.add(p);
  }
  require(std::abs(sum.value() - 1.0) <= 1e-9, ErrorCode::kInvalidArgument,
          "n-gram probabilities sum to " + format_double(sum.value()));
  for (auto it = table.begin(); it != table.end();) {
    it = it->second == 0.0 ? table.erase(it) : std::next(it);
  }
  return NGramDist(order, std::move(table), 0);
}

double NGramDist::probability(const Gram& gram) const {
  const auto it = table_.find(gram);
  return it == table_.end() ? 0.0 : it->second;
}

NGramDist ngram_dist(const std::vector<Sentence>& corpus, int order) {
  require(order >= 1, ErrorCode::kInvalidArgument, "n-gram order must be >= 1");
  NGramDist::Counts counts;
  Gram key(order);
  for (const auto& s : corpus) {
    if (s.size() < static_cast<std::size_t>(order)) continue;
    for (std::size_t i = 0; i + order <= s.size(); ++i) {
      std::copy(s.begin() + i, s.begin() + i + order, key.begin());
      ++counts[key];
    }
  }
  require(!counts.empty(), ErrorCode::kEmptyDistribution,
          "no sentence has at least " + std::to_string(order) + " tokens");
  return NGramDist::from_counts(order, std::move(counts));
}

double cr(const NGramDist& qg, const NGramDist& pg) {
  require_same_order(qg, pg);
  const bool q_smaller = qg.size() <= pg.size();
  const NGramDist& small = q_smaller ? qg : pg;
  const NGramDist& large = q_smaller ? pg : qg;
  CompensatedSum sum;
  for (const auto& [g, p] : small.table()) {
    const double other = large.probability(g);
    if (other != 0.0) sum.add(p * other);
  }
  return sum.value();
}

double nrr(const NGramDist& qg) {
  CompensatedSum sum;
  for (const auto& [g, p] : qg.table()) sum.add(p * p);
  return -sum.value();
}

double psi_n(const NGramDist& qg, const NGramDist& pg) {
  require_same_order(qg, pg);
  return (2.0 / 3.0) * cr(qg, pg) + (1.0 / 3.0) * nrr(qg);
}

double cnd(const NGramDist& qg, const NGramDist& pg) {
  require_same_order(qg, pg);
  CompensatedSum sum;
  for (const auto& [g, q] : qg.table()) {
    const double d = q - pg.probability(g);
    sum.add(d * d);
  }
  for (const auto& [g, p] : pg.table()) {
    if (qg.table().count(g) == 0) sum.add(p * p);
  }
  const double direct = sum.value();
  const double identity = 3.0 * (psi_n(pg, pg) - psi_n(qg, pg));
  require(std::abs(direct - identity) <= 1e-9, ErrorCode::kNumeric,
          "CND identity check failed: " + format_double(direct) + " vs " +
              format_double(identity));
  return direct;
}

std::pair<CategoricalDist, CategoricalDist> align(const NGramDist& qg,
                                                  const NGramDist& pg) {
  require_same_order(qg, pg);
  std::vector<Gram> keys = sorted_keys(qg.table());
  for (const auto& [g, _] : pg.table()) {
    if (qg.table().count(g) == 0) keys.push_back(g);
  }
  std::sort(keys.begin(), keys.end());
  std::vector<double> q(keys.size());
  std::vector<double> p(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    q[i] = qg.probability(keys[i]);
    p[i] = pg.probability(keys[i]);
  }
  return {CategoricalDist::from_probabilities(std::move(q), keys),
          CategoricalDist::from_probabilities(std::move(p), keys)};
}

NGramDist gram_marginal(const CategoricalDist& q, int order) {
  require(q.has_labels(), ErrorCode::kInvalidArgument,
          "gram_marginal needs a labeled distribution");
  require(order >= 1, ErrorCode::kInvalidArgument, "n-gram order must be >= 1");
  std::map<Gram, CompensatedSum> mass;
  CompensatedSum total;
  Gram key(order);
  for (std::size_t x = 0; x < q.size(); ++x) {
    const Sentence& s = q.labels()[x];
    if (q[x] == 0.0 || s.size() < static_cast<std::size_t>(order)) continue;
    for (std::size_t i = 0; i + order <= s.size(); ++i) {
      std::copy(s.begin() + i, s.begin() + i + order, key.begin());
      mass[key].add(q[x]);
      total.add(q[x]);
    }
  }
  require(total.value() > 0.0, ErrorCode::kEmptyDistribution,
          "no outcome with positive mass has " + std::to_string(order) +
              " tokens");
  NGramDist::Table table;
  for (const auto& [g, m] : mass) table.emplace(g, m.value() / total.value());
  return NGramDist::from_probabilities(order, std::move(table));
}

GramProjection gram_projection(const std::vector<Sentence>& labels,
                               int order) {
  require(!labels.empty(), ErrorCode::kInvalidArgument,
          "gram projection needs labels");
  require(order >= 1, ErrorCode::kInvalidArgument, "n-gram order must be >= 1");
  const std::size_t length = labels.front().size();
  for (const auto& s : labels) {
    require(s.size() == length, ErrorCode::kUnsupported,
            "gram projection needs equal-length labels");
  }
  require(length >= static_cast<std::size_t>(order), ErrorCode::kUnsupported,
          "labels are shorter than the n-gram order");
  const double windows = static_cast<double>(length - order + 1);

  std::map<Gram, std::size_t> index;
  Gram key(order);
  for (const auto& s : labels) {
    for (std::size_t i = 0; i + order <= s.size(); ++i) {
      std::copy(s.begin() + i, s.begin() + i + order, key.begin());
      index.emplace(key, 0);
    }
  }
  GramProjection proj;
  proj.order = order;
  proj.n_texts = labels.size();
  for (auto& [g, id] : index) {
    id = proj.grams.size();
    proj.grams.push_back(g);
  }
  proj.matrix.assign(proj.grams.size() * proj.n_texts, 0.0);
  for (std::size_t x = 0; x < labels.size(); ++x) {
    const Sentence& s = labels[x];
    for (std::size_t i = 0; i + order <= s.size(); ++i) {
      std::copy(s.begin() + i, s.begin() + i + order, key.begin());
      proj.matrix[index.at(key) * proj.n_texts + x] += 1.0 / windows;
    }
  }
  return proj;
}

FunctionalPtr cr_functional(const CategoricalDist& p, int order) {
  require(p.has_labels(), ErrorCode::kInvalidArgument,
          "cr_functional needs a labeled distribution");
  const GramProjection proj = gram_projection(p.labels(), order);
  const std::size_t n = proj.n_texts;
  std::vector<double> pg(proj.grams.size(), 0.0);
  for (std::size_t g = 0; g < proj.grams.size(); ++g) {
    CompensatedSum s;
    for (std::size_t x = 0; x < n; ++x) {
      s.add(proj.matrix[g * n + x] * p[x]);
    }
    pg[g] = s.value();
  }
  std::vector<double> coeff(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    CompensatedSum s;
    for (std::size_t g = 0; g < proj.grams.size(); ++g) {
      s.add(proj.matrix[g * n + x] * pg[g]);
    }
    coeff[x] = s.value();
  }
  return std::make_shared<LinearFunctional>(std::move(coeff));
}

FunctionalPtr nrr_functional(const std::vector<Sentence>& labels, int order) {
  const GramProjection proj = gram_projection(labels, order);
  const std::size_t n = proj.n_texts;
  std::vector<double> tensor(n * n, 0.0);
  for (std::size_t g = 0; g < proj.grams.size(); ++g) {
    const double* row = proj.matrix.data() + g * n;
    for (std::size_t x = 0; x < n; ++x) {
      if (row[x] == 0.0) continue;
      for (std::size_t y = 0; y < n; ++y) {
        tensor[x * n + y] -= row[x] * row[y];
      }
    }
  }
  return std::make_shared<MultilinearForm>(n, 2, std::move(tensor));
}

}  // namespace qdfit
