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

// Independent reference implementations used only by tests. Nothing here
// calls into the library code paths it is meant to check.

#ifndef QDFIT_TESTS_SUPPORT_ORACLES_H_
#define QDFIT_TESTS_SUPPORT_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <vector>

namespace qdfit_test {

using Text = std::vector<int>;
using Vec = std::vector<double>;

inline double sum(const Vec& v) {
  long double s = 0.0L;
  for (double x : v) s += x;
  return static_cast<double>(s);
}

inline Vec normalized(Vec v) {
  const double s = sum(v);
  for (double& x : v) x /= s;
  return v;
}

/// P_i^beta / sum_j P_j^beta, computed directly.
inline Vec power_normalize(const Vec& p, double beta) {
  Vec q(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    q[i] = p[i] > 0.0 ? std::pow(p[i], beta) : 0.0;
  }
  return normalized(q);
}

/// sum_i Q_i log(Q_i / P_i).
inline double reverse_kl(const Vec& q, const Vec& p) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] > 0.0) s += q[i] * std::log(q[i] / p[i]);
  }
  return static_cast<double>(s);
}

inline double tv(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

// ---- BLEU, written from the textbook definition with ordered maps. ----

using GramCount = std::map<Text, int>;

inline GramCount count_grams(const Text& s, int n) {
  GramCount c;
  for (std::size_t i = 0; i + n <= s.size(); ++i) {
    ++c[Text(s.begin() + i, s.begin() + i + n)];
  }
  return c;
}

inline double naive_bleu(const std::vector<Text>& cands,
                         const std::vector<Text>& refs, int max_order,
                         bool brevity = true) {
  double log_sum = 0.0;
  int used = 0;
  for (int n = 1; n <= max_order; ++n) {
    long long num = 0;
    long long den = 0;
    for (const Text& c : cands) {
      const GramCount cc = count_grams(c, n);
      for (const auto& [g, k] : cc) {
        int best = 0;
        for (const Text& r : refs) {
          const GramCount rc = count_grams(r, n);
          const auto it = rc.find(g);
          if (it != rc.end()) best = std::max(best, it->second);
        }
        num += std::min(k, best);
        den += k;
      }
    }
    if (den == 0) continue;
    if (num == 0) return 0.0;
    log_sum += std::log(static_cast<double>(num) / den);
    ++used;
  }
  if (used == 0) return 0.0;
  long long c_len = 0;
  long long r_len = 0;
  for (const Text& c : cands) {
    c_len += static_cast<long long>(c.size());
    int best = -1;
    for (const Text& r : refs) {
      const int d = std::abs(static_cast<int>(r.size()) - static_cast<int>(c.size()));
      const int bd = std::abs(best - static_cast<int>(c.size()));
      if (best < 0 || d < bd || (d == bd && static_cast<int>(r.size()) < best)) {
        best = static_cast<int>(r.size());
      }
    }
    r_len += best;
  }
  double bp = 1.0;
  if (brevity && c_len < r_len) {
    bp = std::exp(1.0 - static_cast<double>(r_len) / static_cast<double>(c_len));
  }
  return bp * std::exp(log_sum / used);
}

inline double naive_self_bleu(const std::vector<Text>& cands, int max_order) {
  double total = 0.0;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    std::vector<Text> others;
    for (std::size_t j = 0; j < cands.size(); ++j) {
      if (j != i) others.push_back(cands[j]);
    }
    total += naive_bleu({cands[i]}, others, max_order);
  }
  return total / static_cast<double>(cands.size());
}

// ---- Monte-Carlo estimates with their standard errors. ----

struct Estimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

class Sampler {
 public:
  Sampler(const Vec& probs, std::uint64_t seed) : gen_(seed), cdf_(probs.size()) {
    double c = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      c += probs[i];
      cdf_[i] = c;
    }
  }
  std::size_t draw() {
    const double u = std::uniform_real_distribution<double>(0.0, cdf_.back())(gen_);
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::size_t>(it - cdf_.begin(), cdf_.size() - 1);
  }
  std::mt19937_64& gen() { return gen_; }

 private:
  std::mt19937_64 gen_;
  Vec cdf_;
};

inline Estimate monte_carlo(std::size_t draws,
                            const std::function<double()>& sample) {
  long double s = 0.0L;
  long double s2 = 0.0L;
  for (std::size_t k = 0; k < draws; ++k) {
    const double x = sample();
    s += x;
    s2 += static_cast<long double>(x) * x;
  }
  const double mean = static_cast<double>(s / draws);
  const double var = static_cast<double>(s2 / draws) - mean * mean;
  return {mean, std::sqrt(std::max(var, 0.0) / static_cast<double>(draws))};
}

// ---- Synthetic corpora. ----

/// Sentences from a sparse first-order Markov chain with Zipf-like
/// emission weights; lengths uniform on [min_len, max_len].
inline std::vector<Text> markov_corpus(std::size_t n_sentences, int vocab,
                                       std::uint64_t seed, int min_len = 6,
                                       int max_len = 14, int fanout = 12) {
  std::mt19937_64 gen(seed);
  std::vector<std::vector<int>> next(vocab + 1);
  std::vector<Vec> weights(vocab + 1);
  for (int s = 0; s <= vocab; ++s) {
    for (int k = 0; k < fanout; ++k) {
      next[s].push_back(static_cast<int>(gen() % vocab));
      weights[s].push_back(1.0 / (k + 1.0));
    }
  }
  std::uniform_int_distribution<int> len_dist(min_len, max_len);
  std::vector<Text> out;
  out.reserve(n_sentences);
  for (std::size_t i = 0; i < n_sentences; ++i) {
    const int len = len_dist(gen);
    Text t;
    int state = vocab;  // start state
    for (int k = 0; k < len; ++k) {
      std::discrete_distribution<int> pick(weights[state].begin(),
                                           weights[state].end());
      const int tok = next[state][pick(gen)];
      t.push_back(tok);
      state = tok;
    }
    out.push_back(std::move(t));
  }
  return out;
}

/// Random point on the simplex (flat Dirichlet).
inline Vec random_simplex(std::size_t n, std::mt19937_64& gen) {
  std::exponential_distribution<double> e(1.0);
  Vec v(n);
  for (double& x : v) x = e(gen);
  return normalized(v);
}

}  // namespace qdfit_test

#endif  // QDFIT_TESTS_SUPPORT_ORACLES_H_
