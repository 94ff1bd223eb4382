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

#include "qdfit/distribution.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "qdfit/error.h"
#include "qdfit/rng.h"

namespace qdfit {

namespace {

constexpr std::uint64_t kToyStream = 0x7479;
constexpr std::uint64_t kOracleStream = 0x6f72;

void validate_labels(const std::vector<Sentence>& labels, std::size_t n) {
  if (labels.empty()) return;
  require(labels.size() == n, ErrorCode::kInvalidArgument,
          "label count " + std::to_string(labels.size()) +
              " does not match outcome count " + std::to_string(n));
  std::set<Sentence> seen(labels.begin(), labels.end());
  require(seen.size() == labels.size(), ErrorCode::kInvalidArgument,
          "distribution labels must be distinct");
}

double checked_total(const std::vector<double>& values) {
  require(!values.empty(), ErrorCode::kInvalidArgument,
          "distribution must have at least one outcome");
  for (double v : values) {
    require(std::isfinite(v) && v >= 0.0, ErrorCode::kInvalidArgument,
            "probability entries must be finite and non-negative");
  }
  return compensated_sum(values);
}

}  // namespace

CategoricalDist::CategoricalDist(std::vector<double> probs,
                                 std::vector<Sentence> labels)
    : probs_(std::move(probs)), labels_(std::move(labels)) {}

CategoricalDist CategoricalDist::from_weights(std::vector<double> weights,
                                              std::vector<Sentence> labels) {
  const double total = checked_total(weights);
  require(total > 0.0, ErrorCode::kInvalidArgument,
          "weights must have positive total mass");
  validate_labels(labels, weights.size());
  for (double& w : weights) w /= total;
  return CategoricalDist(std::move(weights), std::move(labels));
}

CategoricalDist CategoricalDist::from_probabilities(
    std::vector<double> probs, std::vector<Sentence> labels, double tolerance) {
  const double total = checked_total(probs);
  require(std::abs(total - 1.0) <= tolerance, ErrorCode::kInvalidArgument,
          "probabilities sum to " + format_double(total) + ", not 1");
  validate_labels(labels, probs.size());
  if (std::abs(total - 1.0) > 1e-12) {
    for (double& p : probs) p /= total;
  }
  return CategoricalDist(std::move(probs), std::move(labels));
}

bool CategoricalDist::same_space(const CategoricalDist& other) const {
  if (size() != other.size()) return false;
  if (has_labels() && other.has_labels()) return labels_ == other.labels_;
  return true;
}

CategoricalDist uniform_dist(std::size_t n) {
  require(n > 0, ErrorCode::kInvalidArgument, "uniform needs n > 0");
  return CategoricalDist::from_weights(std::vector<double>(n, 1.0));
}

CategoricalDist one_hot(std::size_t n, std::size_t index) {
  require(index < n, ErrorCode::kInvalidArgument, "one-hot index out of range");
  std::vector<double> p(n, 0.0);
  p[index] = 1.0;
  return CategoricalDist::from_probabilities(std::move(p));
}

CategoricalDist random_toy(std::size_t n_categories, std::uint64_t seed) {
  require(n_categories >= 2, ErrorCode::kInvalidArgument,
          "random_toy needs at least 2 categories");
  Rng rng = Rng(seed).split(kToyStream);
  std::vector<double> w(n_categories);
  for (double& x : w) x = rng.uniform_open();
  return CategoricalDist::from_weights(std::move(w));
}

namespace {

// Gate layout inside the 4H pre-activation vector: input, forget, cell,
// output.
class OracleLstm {
 public:
  OracleLstm(const OracleSpec& spec)
      : vocab_(spec.vocab_size), hidden_(spec.hidden_dim) {
    Rng rng = Rng(spec.seed).split(kOracleStream);
    auto draw = [&](std::vector<double>& m, std::size_t n) {
      m.resize(n);
      for (double& x : m) x = rng.normal(0.0, spec.sigma);
    };
    const std::size_t h = hidden_;
    draw(embed_, (vocab_ + 1) * h);
    draw(w_input_, 4 * h * h);
    draw(w_hidden_, 4 * h * h);
    draw(bias_, 4 * h);
    draw(w_out_, vocab_ * h);
    draw(b_out_, vocab_);
  }

  int vocab() const { return vocab_; }
  int begin_token() const { return vocab_; }

  // Advances (hidden, cell) by one step with the given input token.
  void step(std::vector<double>& hidden, std::vector<double>& cell,
            int token) const {
    const std::size_t h = hidden_;
    const double* x = &embed_[static_cast<std::size_t>(token) * h];
    std::vector<double> pre(4 * h);
    for (std::size_t r = 0; r < 4 * h; ++r) {
      double acc = bias_[r];
      for (std::size_t k = 0; k < h; ++k) {
        acc += w_input_[r * h + k] * x[k] + w_hidden_[r * h + k] * hidden[k];
      }
      pre[r] = acc;
    }
    auto sigmoid = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    for (std::size_t k = 0; k < h; ++k) {
      const double in = sigmoid(pre[k]);
      const double forget = sigmoid(pre[h + k]);
      const double candidate = std::tanh(pre[2 * h + k]);
      const double out = sigmoid(pre[3 * h + k]);
      cell[k] = forget * cell[k] + in * candidate;
      hidden[k] = out * std::tanh(cell[k]);
    }
  }

  std::vector<double> next_token_probs(const std::vector<double>& hidden) const {
    const std::size_t h = hidden_;
    std::vector<double> logits(vocab_);
    for (int v = 0; v < vocab_; ++v) {
      double acc = b_out_[v];
      for (std::size_t k = 0; k < h; ++k) acc += w_out_[v * h + k] * hidden[k];
      logits[v] = acc;
    }
    const double top = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (double& l : logits) {
      l = std::exp(l - top);
      total += l;
    }
    for (double& l : logits) l /= total;
    return logits;
  }

 private:
  int vocab_;
  int hidden_;
  std::vector<double> embed_, w_input_, w_hidden_, bias_, w_out_, b_out_;
};

void enumerate_prefixes(const OracleLstm& lstm, int length, int depth,
                        std::vector<double> hidden, std::vector<double> cell,
                        int input_token, double prefix_prob,
                        std::size_t prefix_index, std::vector<double>& out) {
  lstm.step(hidden, cell, input_token);
  const std::vector<double> probs = lstm.next_token_probs(hidden);
  for (int t = 0; t < lstm.vocab(); ++t) {
    const std::size_t index = prefix_index * lstm.vocab() + t;
    const double p = prefix_prob * probs[t];
    if (depth + 1 == length) {
      out[index] = p;
    } else {
      enumerate_prefixes(lstm, length, depth + 1, hidden, cell, t, p, index,
                         out);
    }
  }
}

}  // namespace

CategoricalDist oracle_enumerate(const OracleSpec& spec) {
  require(spec.vocab_size >= 1 && spec.length >= 1 && spec.hidden_dim >= 1,
          ErrorCode::kInvalidArgument,
          "oracle vocab_size, length and hidden_dim must be positive");
  require(spec.sigma > 0.0 && std::isfinite(spec.sigma),
          ErrorCode::kInvalidArgument, "oracle sigma must be positive");
  std::uint64_t outcomes = 1;
  for (int i = 0; i < spec.length; ++i) {
    outcomes *= static_cast<std::uint64_t>(spec.vocab_size);
    require(outcomes <= kMaxOracleOutcomes, ErrorCode::kCapacity,
            "oracle space vocab_size^length exceeds 2^22 outcomes (vocab_size=" +
                std::to_string(spec.vocab_size) +
                ", length=" + std::to_string(spec.length) + ")");
  }
  const OracleLstm lstm(spec);
  std::vector<double> probs(outcomes, 0.0);
  const std::size_t h = static_cast<std::size_t>(spec.hidden_dim);
  enumerate_prefixes(lstm, spec.length, 0, std::vector<double>(h, 0.0),
                     std::vector<double>(h, 0.0), lstm.begin_token(), 1.0, 0,
                     probs);

  std::vector<Sentence> labels(outcomes, Sentence(spec.length));
  for (std::size_t i = 0; i < outcomes; ++i) {
    std::size_t rest = i;
    for (int pos = spec.length - 1; pos >= 0; --pos) {
      labels[i][pos] = static_cast<TokenId>(rest % spec.vocab_size);
      rest /= spec.vocab_size;
    }
  }
  return CategoricalDist::from_probabilities(std::move(probs),
                                             std::move(labels));
}

CategoricalDist temper(const CategoricalDist& dist, double beta) {
  require(beta >= 0.0 && std::isfinite(beta), ErrorCode::kInvalidArgument,
          "temper requires a finite beta >= 0");
  const auto p = dist.probs();
  const double top = *std::max_element(p.begin(), p.end());
  const double log_top = std::log(top);
  std::vector<double> w(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) w[i] = std::exp(beta * (std::log(p[i]) - log_top));
  }
  return CategoricalDist::from_weights(std::move(w), dist.labels());
}

CategoricalDist mix_with_noise(const CategoricalDist& base, double epsilon,
                               const CategoricalDist& noise) {
  require(epsilon >= 0.0 && epsilon <= 1.0, ErrorCode::kInvalidArgument,
          "epsilon must lie in [0, 1]");
  require(base.same_space(noise), ErrorCode::kInvalidArgument,
          "base and noise distributions are over different outcome spaces");
  std::vector<double> q(base.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    q[i] = (1.0 - epsilon) * base[i] + epsilon * noise[i];
  }
  return CategoricalDist::from_probabilities(
      std::move(q), base.has_labels() ? base.labels() : noise.labels());
}

double entropy(const CategoricalDist& dist) {
  CompensatedSum sum;
  for (double q : dist.probs()) {
    if (q > 0.0) sum.add(-q * std::log(q));
  }
  return sum.value();
}

double total_variation(const CategoricalDist& a, const CategoricalDist& b) {
  require(a.size() == b.size(), ErrorCode::kInvalidArgument,
          "total variation needs equal-size distributions");
  CompensatedSum sum;
  for (std::size_t i = 0; i < a.size(); ++i) sum.add(std::abs(a[i] - b[i]));
  return 0.5 * sum.value();
}

bool is_uniform(const CategoricalDist& dist, double tolerance) {
  const auto [lo, hi] = std::minmax_element(dist.probs().begin(),
                                            dist.probs().end());
  return *hi - *lo <= tolerance;
}

void write_dist(std::ostream& out, const CategoricalDist& dist) {
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist.has_labels()) {
      const Sentence& label = dist.labels()[i];
      for (std::size_t k = 0; k < label.size(); ++k) {
        if (k > 0) out << ' ';
        out << label[k];
      }
      out << '\t';
    }
    out << format_double(dist[i]) << '\n';
  }
}

CategoricalDist read_dist(std::istream& in) {
  std::vector<double> probs;
  std::vector<Sentence> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    const bool labeled = tab != std::string::npos;
    require(probs.empty() || labeled == !labels.empty(), ErrorCode::kInvalidArgument,
            "line " + std::to_string(line_no) + ": mixed labeled/unlabeled rows");
    if (labeled) {
      Sentence label;
      std::istringstream tokens(line.substr(0, tab));
      std::string tok;
      while (tokens >> tok) {
        TokenId id = 0;
        const auto [ptr, ec] =
            std::from_chars(tok.data(), tok.data() + tok.size(), id);
        require(ec == std::errc() && ptr == tok.data() + tok.size() && id >= 0,
                ErrorCode::kInvalidArgument,
                "line " + std::to_string(line_no) + ": bad token id '" + tok + "'");
        label.push_back(id);
      }
      labels.push_back(std::move(label));
      probs.push_back(parse_double(std::string_view(line).substr(tab + 1)));
    } else {
      probs.push_back(parse_double(line));
    }
  }
  require(!probs.empty(), ErrorCode::kEmptyDistribution,
          "distribution file has no entries");
  return CategoricalDist::from_probabilities(std::move(probs), std::move(labels));
}

void write_dist_file(const std::string& path, const CategoricalDist& dist) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write " + path);
  write_dist(out, dist);
}

CategoricalDist read_dist_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot read " + path);
  return read_dist(in);
}

}  // namespace qdfit
