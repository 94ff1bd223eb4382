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

#include "qdfit/bleu.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <unordered_map>
#include <utility>

#include "qdfit/error.h"

namespace qdfit {

namespace {

using GramCounts = std::vector<std::pair<int, int>>;  // (gram id, count)

// Dense per-order ids for n-grams seen so far.
class GramInterner {
 public:
  explicit GramInterner(int max_order) : tables_(max_order) {}

  int intern(const Sentence& s, std::size_t start, int order) {
    std::string key(order * sizeof(TokenId), '\0');
    std::memcpy(key.data(), s.data() + start, key.size());
    auto& table = tables_[order - 1];
    const auto [it, inserted] =
        table.try_emplace(std::move(key), static_cast<int>(table.size()));
    return it->second;
  }

  int lookup(const Sentence& s, std::size_t start, int order) const {
    std::string key(order * sizeof(TokenId), '\0');
    std::memcpy(key.data(), s.data() + start, key.size());
    const auto& table = tables_[order - 1];
    const auto it = table.find(key);
    return it == table.end() ? -1 : it->second;
  }

  std::size_t size(int order) const { return tables_[order - 1].size(); }

 private:
  std::vector<std::unordered_map<std::string, int>> tables_;
};

struct Profile {
  int length = 0;
  std::vector<GramCounts> orders;  // sorted by id
};

Profile make_profile(const Sentence& s, int max_order, GramInterner& interner) {
  Profile profile;
  profile.length = static_cast<int>(s.size());
  profile.orders.resize(max_order);
  for (int k = 1; k <= max_order; ++k) {
    if (s.size() < static_cast<std::size_t>(k)) continue;
    std::vector<int> ids;
    ids.reserve(s.size() - k + 1);
    for (std::size_t i = 0; i + k <= s.size(); ++i) {
      ids.push_back(interner.intern(s, i, k));
    }
    std::sort(ids.begin(), ids.end());
    GramCounts& counts = profile.orders[k - 1];
    for (int id : ids) {
      if (!counts.empty() && counts.back().first == id) {
        ++counts.back().second;
      } else {
        counts.emplace_back(id, 1);
      }
    }
  }
  return profile;
}

struct BleuStats {
  std::vector<std::int64_t> matched;
  std::vector<std::int64_t> total;
  std::int64_t cand_len = 0;
  std::int64_t ref_len = 0;

  explicit BleuStats(int max_order = 0)
      : matched(max_order, 0), total(max_order, 0) {}

  void add(const BleuStats& other) {
    for (std::size_t k = 0; k < matched.size(); ++k) {
      matched[k] += other.matched[k];
      total[k] += other.total[k];
    }
    cand_len += other.cand_len;
    ref_len += other.ref_len;
  }
};

double bleu_from_stats(const BleuStats& s, const BleuConfig& config) {
  double log_sum = 0.0;
  int used = 0;
  for (std::size_t k = 0; k < s.matched.size(); ++k) {
    if (s.total[k] == 0) continue;
    if (s.matched[k] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(s.matched[k]) /
                        static_cast<double>(s.total[k]));
    ++used;
  }
  if (used == 0) return 0.0;
  double bp = 1.0;
  if (config.brevity_penalty == BrevityPenalty::kStandard &&
      s.cand_len < s.ref_len) {
    bp = std::exp(1.0 - static_cast<double>(s.ref_len) /
                            static_cast<double>(s.cand_len));
  }
  return bp * std::exp(log_sum / used);
}

// Closest length in a sorted list of distinct lengths; ties go to the shorter.
int closest_length(const std::vector<int>& sorted_lengths, int c) {
  const auto it =
      std::lower_bound(sorted_lengths.begin(), sorted_lengths.end(), c);
  if (it == sorted_lengths.end()) return sorted_lengths.back();
  if (*it == c || it == sorted_lengths.begin()) return *it;
  const int above = *it;
  const int below = *(it - 1);
  return (c - below) <= (above - c) ? below : above;
}

// Elementwise max of sorted gram-count lists.
GramCounts merge_max(const GramCounts& a, const GramCounts& b) {
  GramCounts out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      out.push_back(b[j++]);
    } else {
      out.emplace_back(a[i].first, std::max(a[i].second, b[j].second));
      ++i;
      ++j;
    }
  }
  return out;
}

std::int64_t clipped_matches(const GramCounts& cand, const GramCounts& ref_max) {
  std::int64_t matched = 0;
  std::size_t j = 0;
  for (const auto& [id, count] : cand) {
    while (j < ref_max.size() && ref_max[j].first < id) ++j;
    if (j < ref_max.size() && ref_max[j].first == id) {
      matched += std::min(count, ref_max[j].second);
    }
  }
  return matched;
}

struct RefSet {
  std::vector<GramCounts> max_counts;  // per order
  std::vector<int> lengths;            // sorted, distinct
};

RefSet make_ref_set(const std::vector<const Profile*>& refs, int max_order) {
  RefSet set;
  set.max_counts.resize(max_order);
  for (const Profile* r : refs) {
    for (int k = 0; k < max_order; ++k) {
      set.max_counts[k] = merge_max(set.max_counts[k], r->orders[k]);
    }
    set.lengths.push_back(r->length);
  }
  std::sort(set.lengths.begin(), set.lengths.end());
  set.lengths.erase(std::unique(set.lengths.begin(), set.lengths.end()),
                    set.lengths.end());
  return set;
}

BleuStats candidate_stats(const Profile& cand, const RefSet& refs,
                          int max_order) {
  BleuStats s(max_order);
  for (int k = 0; k < max_order; ++k) {
    s.total[k] = std::max(0, cand.length - k);
    s.matched[k] = clipped_matches(cand.orders[k], refs.max_counts[k]);
  }
  s.cand_len = cand.length;
  s.ref_len = closest_length(refs.lengths, cand.length);
  return s;
}

void check_config(const BleuConfig& config) {
  require(config.max_order >= 1, ErrorCode::kInvalidArgument,
          "BLEU max_order must be >= 1");
}

std::uint64_t checked_power(std::size_t base, int exponent,
                            std::uint64_t cap, const std::string& what) {
  std::uint64_t result = 1;
  for (int i = 0; i < exponent; ++i) {
    require(result <= cap / base, ErrorCode::kCapacity,
            what + ": " + std::to_string(base) + "^" +
                std::to_string(exponent) + " exceeds the enumeration cap");
    result *= base;
  }
  return result;
}

// Decodes a tuple index (first position most significant).
void decode(std::uint64_t index, std::size_t base, std::vector<int>& digits) {
  for (int k = static_cast<int>(digits.size()) - 1; k >= 0; --k) {
    digits[k] = static_cast<int>(index % base);
    index /= base;
  }
}

std::vector<Profile> label_profiles(const std::vector<Sentence>& labels,
                                    int max_order) {
  GramInterner interner(max_order);
  std::vector<Profile> profiles;
  profiles.reserve(labels.size());
  for (const auto& s : labels) {
    profiles.push_back(make_profile(s, max_order, interner));
  }
  return profiles;
}

// Calls visit(candidate tuple index, BLEU weighted by the reference tuple's
// probability) for every (candidate tuple, reference tuple) pair.
template <typename Visit>
void enumerate_bleu(const CategoricalDist& p, int m, int n,
                    const BleuConfig& config, Visit&& visit) {
  require(p.has_labels(), ErrorCode::kInvalidArgument,
          "BLEU enumeration needs a labeled distribution");
  require(m >= 1 && n >= 1, ErrorCode::kInvalidArgument,
          "BLEU enumeration needs m >= 1 and n >= 1");
  check_config(config);
  const std::size_t size = p.size();
  checked_power(size, m + n, kMaxEnumerationTerms, "BLEU enumeration");
  const std::uint64_t n_cand = checked_power(size, m, kMaxEnumerationTerms, "");
  const std::uint64_t n_ref = checked_power(size, n, kMaxEnumerationTerms, "");
  const int order = config.max_order;
  const auto profiles = label_profiles(p.labels(), order);

  std::vector<int> ref_digits(n);
  std::vector<int> cand_digits(m);
  std::vector<const Profile*> ref_ptrs(n);
  std::vector<BleuStats> per_label(size);
  for (std::uint64_t r = 0; r < n_ref; ++r) {
    decode(r, size, ref_digits);
    double weight = 1.0;
    for (int j = 0; j < n; ++j) {
      weight *= p[ref_digits[j]];
      ref_ptrs[j] = &profiles[ref_digits[j]];
    }
    if (weight == 0.0) continue;
    const RefSet refs = make_ref_set(ref_ptrs, order);
    for (std::size_t c = 0; c < size; ++c) {
      per_label[c] = candidate_stats(profiles[c], refs, order);
    }
    for (std::uint64_t c = 0; c < n_cand; ++c) {
      decode(c, size, cand_digits);
      BleuStats stats = per_label[cand_digits[0]];
      for (int i = 1; i < m; ++i) stats.add(per_label[cand_digits[i]]);
      visit(c, weight * bleu_from_stats(stats, config));
    }
  }
}

double self_bleu_of_tuple(const std::vector<Profile>& profiles,
                          const std::vector<int>& digits,
                          const BleuConfig& config) {
  const int order = config.max_order;
  std::vector<const Profile*> others;
  others.reserve(digits.size() - 1);
  double total = 0.0;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    others.clear();
    for (std::size_t j = 0; j < digits.size(); ++j) {
      if (j != i) others.push_back(&profiles[digits[j]]);
    }
    const RefSet refs = make_ref_set(others, order);
    total += bleu_from_stats(candidate_stats(profiles[digits[i]], refs, order),
                             config);
  }
  return total / static_cast<double>(digits.size());
}

template <typename Visit>
void enumerate_self_bleu(const std::vector<Sentence>& labels, int cand_size,
                         const BleuConfig& config, Visit&& visit) {
  require(!labels.empty(), ErrorCode::kInvalidArgument,
          "Self-BLEU enumeration needs a labeled distribution");
  require(cand_size >= 2, ErrorCode::kInvalidArgument,
          "Self-BLEU needs at least 2 candidates");
  check_config(config);
  const std::uint64_t n_tuples = checked_power(
      labels.size(), cand_size, kMaxEnumerationTerms, "Self-BLEU enumeration");
  const auto profiles = label_profiles(labels, config.max_order);
  std::vector<int> digits(cand_size);
  for (std::uint64_t t = 0; t < n_tuples; ++t) {
    decode(t, labels.size(), digits);
    visit(t, digits, self_bleu_of_tuple(profiles, digits, config));
  }
}

}  // namespace

double corpus_bleu(const std::vector<Sentence>& candidates,
                   const std::vector<Sentence>& references,
                   const BleuConfig& config) {
  require(!candidates.empty(), ErrorCode::kInvalidArgument,
          "corpus_bleu: empty candidate set");
  require(!references.empty(), ErrorCode::kInvalidArgument,
          "corpus_bleu: empty reference set");
  check_config(config);
  const int order = config.max_order;

  // Reference side: the largest count of each gram in any single reference.
  GramInterner interner(order);
  std::vector<std::vector<int>> max_count(order);
  std::vector<int> lengths;
  lengths.reserve(references.size());
  for (const auto& ref : references) {
    const Profile profile = make_profile(ref, order, interner);
    for (int k = 0; k < order; ++k) {
      max_count[k].resize(interner.size(k + 1), 0);
      for (const auto& [id, count] : profile.orders[k]) {
        max_count[k][id] = std::max(max_count[k][id], count);
      }
    }
    lengths.push_back(profile.length);
  }
  std::sort(lengths.begin(), lengths.end());
  lengths.erase(std::unique(lengths.begin(), lengths.end()), lengths.end());

  BleuStats stats(order);
  std::vector<std::pair<int, int>> local;
  std::vector<int> ids;
  for (const auto& cand : candidates) {
    for (int k = 1; k <= order; ++k) {
      if (cand.size() < static_cast<std::size_t>(k)) continue;
      ids.clear();
      std::int64_t unseen = 0;
      for (std::size_t i = 0; i + k <= cand.size(); ++i) {
        const int id = interner.lookup(cand, i, k);
        if (id < 0) {
          ++unseen;
        } else {
          ids.push_back(id);
        }
      }
      std::sort(ids.begin(), ids.end());
      std::int64_t matched = 0;
      for (std::size_t a = 0; a < ids.size();) {
        std::size_t b = a;
        while (b < ids.size() && ids[b] == ids[a]) ++b;
        matched += std::min<std::int64_t>(static_cast<std::int64_t>(b - a),
                                          max_count[k - 1][ids[a]]);
        a = b;
      }
      stats.matched[k - 1] += matched;
      stats.total[k - 1] += static_cast<std::int64_t>(ids.size()) + unseen;
    }
    stats.cand_len += static_cast<std::int64_t>(cand.size());
    stats.ref_len +=
        closest_length(lengths, static_cast<int>(cand.size()));
  }
  return bleu_from_stats(stats, config);
}

double self_bleu(const std::vector<Sentence>& candidates,
                 const BleuConfig& config) {
  require(candidates.size() >= 2, ErrorCode::kInvalidArgument,
          "self_bleu needs at least 2 candidates");
  check_config(config);
  const int order = config.max_order;
  GramInterner interner(order);
  std::vector<Profile> profiles;
  profiles.reserve(candidates.size());
  int max_len = 0;
  for (const auto& s : candidates) {
    profiles.push_back(make_profile(s, order, interner));
    max_len = std::max(max_len, profiles.back().length);
  }
  std::vector<int> length_count(max_len + 1, 0);
  for (const auto& pr : profiles) ++length_count[pr.length];

  CompensatedSum total;
  std::vector<std::vector<int>> best(order);
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const Profile& cand = profiles[i];
    for (int k = 0; k < order; ++k) {
      best[k].assign(cand.orders[k].size(), 0);
    }
    for (std::size_t j = 0; j < profiles.size(); ++j) {
      if (j == i) continue;
      for (int k = 0; k < order; ++k) {
        const GramCounts& mine = cand.orders[k];
        const GramCounts& theirs = profiles[j].orders[k];
        std::size_t b = 0;
        for (std::size_t a = 0; a < mine.size() && b < theirs.size(); ++a) {
          while (b < theirs.size() && theirs[b].first < mine[a].first) ++b;
          if (b < theirs.size() && theirs[b].first == mine[a].first) {
            best[k][a] = std::max(best[k][a], theirs[b].second);
          }
        }
      }
    }
    BleuStats stats(order);
    for (int k = 0; k < order; ++k) {
      stats.total[k] = std::max(0, cand.length - k);
      for (std::size_t a = 0; a < cand.orders[k].size(); ++a) {
        stats.matched[k] += std::min(cand.orders[k][a].second, best[k][a]);
      }
    }
    stats.cand_len = cand.length;
    --length_count[cand.length];
    int closest = -1;
    for (int d = 0; closest < 0; ++d) {
      if (cand.length - d >= 0 && length_count[cand.length - d] > 0) {
        closest = cand.length - d;
      } else if (cand.length + d <= max_len &&
                 length_count[cand.length + d] > 0) {
        closest = cand.length + d;
      }
    }
    ++length_count[cand.length];
    stats.ref_len = closest;
    total.add(bleu_from_stats(stats, config));
  }
  return total.value() / static_cast<double>(profiles.size());
}

double expected_unigram_bleu(const CategoricalDist& q, const CategoricalDist& p,
                             int ref_size) {
  require(ref_size >= 1, ErrorCode::kInvalidArgument,
          "expected_unigram_bleu: ref_size must be >= 1");
  require(q.same_space(p), ErrorCode::kInvalidArgument,
          "expected_unigram_bleu: Q and P differ in outcome space");
  CompensatedSum sum;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] == 0.0) continue;
    sum.add(q[i] * (1.0 - std::pow(1.0 - p[i], ref_size)));
  }
  return sum.value();
}

double expected_nsbleu_unigram(const CategoricalDist& q, int cand_size) {
  require(cand_size >= 2, ErrorCode::kInvalidArgument,
          "expected_nsbleu_unigram: cand_size must be >= 2");
  CompensatedSum sum;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] == 0.0) continue;
    sum.add(q[i] * (1.0 - std::pow(1.0 - q[i], cand_size - 1)));
  }
  return -sum.value();
}

double expected_bleu_enumerate(const EnumSpec& spec) {
  require(spec.q.has_labels() && spec.q.same_space(spec.p),
          ErrorCode::kInvalidArgument,
          "expected_bleu_enumerate: Q and P must share labeled outcomes");
  const std::size_t size = spec.q.size();
  std::vector<int> digits(spec.m);
  CompensatedSum sum;
  enumerate_bleu(spec.p, spec.m, spec.n, spec.config,
                 [&](std::uint64_t c, double weighted) {
                   if (weighted == 0.0) return;
                   decode(c, size, digits);
                   double prob = 1.0;
                   for (int d : digits) prob *= spec.q[d];
                   sum.add(prob * weighted);
                 });
  return sum.value();
}

double expected_selfbleu_enumerate(const CategoricalDist& q, int cand_size,
                                   const BleuConfig& config) {
  require(q.has_labels(), ErrorCode::kInvalidArgument,
          "expected_selfbleu_enumerate needs a labeled distribution");
  CompensatedSum sum;
  enumerate_self_bleu(q.labels(), cand_size, config,
                      [&](std::uint64_t, const std::vector<int>& digits,
                          double value) {
                        double prob = 1.0;
                        for (int d : digits) prob *= q[d];
                        if (prob != 0.0) sum.add(prob * value);
                      });
  return sum.value();
}

std::shared_ptr<MultilinearForm> expected_bleu_form(const CategoricalDist& p,
                                                    int m, int n,
                                                    const BleuConfig& config) {
  const std::uint64_t entries = checked_power(
      p.size(), std::max(m, 1), MultilinearForm::kMaxEntries, "BLEU form");
  std::vector<CompensatedSum> acc(entries);
  enumerate_bleu(p, m, n, config, [&](std::uint64_t c, double weighted) {
    acc[c].add(weighted);
  });
  std::vector<double> tensor(entries);
  for (std::uint64_t i = 0; i < entries; ++i) tensor[i] = acc[i].value();
  return std::make_shared<MultilinearForm>(p.size(), m, std::move(tensor));
}

std::shared_ptr<MultilinearForm> expected_nsbleu_form(
    const std::vector<Sentence>& labels, int cand_size,
    const BleuConfig& config) {
  require(!labels.empty(), ErrorCode::kInvalidArgument,
          "NSBLEU form needs outcome labels");
  const std::uint64_t entries =
      checked_power(labels.size(), std::max(cand_size, 1),
                    MultilinearForm::kMaxEntries, "NSBLEU form");
  std::vector<double> tensor(entries);
  enumerate_self_bleu(labels, cand_size, config,
                      [&](std::uint64_t t, const std::vector<int>&,
                          double value) { tensor[t] = -value; });
  return std::make_shared<MultilinearForm>(labels.size(), cand_size,
                                           std::move(tensor));
}

}  // namespace qdfit
