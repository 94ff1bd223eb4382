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

#include "qdfit/corpus.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <utility>

#include "qdfit/error.h"
#include "qdfit/rng.h"

namespace qdfit {

namespace {

constexpr std::uint64_t kSplitStream = 0x7370;
constexpr std::uint64_t kCoinStream = 0x6e6d;
constexpr std::uint64_t kPoolStream = 0x6e70;
constexpr std::uint64_t kNoiseTokenStream = 0x6e74;

std::vector<std::string> tokenize(const std::string& line, bool lowercase) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
    }
    std::size_t j = i;
    while (j < line.size() &&
           !std::isspace(static_cast<unsigned char>(line[j]))) {
      ++j;
    }
    if (j > i) {
      std::string token = line.substr(i, j - i);
      if (lowercase) {
        for (char& c : token) {
          c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
      }
      tokens.push_back(std::move(token));
    }
    i = j;
  }
  return tokens;
}

}  // namespace

TokenId Vocabulary::add(const std::string& token, std::int64_t count) {
  const auto [it, inserted] =
      ids_.try_emplace(token, static_cast<TokenId>(tokens_.size()));
  if (inserted) {
    tokens_.push_back(token);
    freq_.push_back(0);
  }
  freq_[it->second] += count;
  return it->second;
}

TokenId Vocabulary::find(const std::string& token) const {
  const auto it = ids_.find(token);
  return it == ids_.end() ? -1 : it->second;
}

CorpusStats Corpus::stats() const {
  CorpusStats s;
  s.n_sentences = sentences.size();
  s.vocab_size = vocab.size();
  for (const auto& sentence : sentences) {
    s.max_len = std::max(s.max_len, sentence.size());
  }
  return s;
}

std::string Corpus::detokenize(const Sentence& s) const {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i > 0) out += ' ';
    out += vocab.token(s[i]);
  }
  return out;
}

Corpus ingest_stream(std::istream& in, const IngestOptions& options) {
  require(options.min_len <= options.max_len, ErrorCode::kInvalidArgument,
          "ingest: min_len exceeds max_len");
  std::vector<std::vector<std::string>> lines;
  std::string line;
  while (std::getline(in, line)) {
    lines.push_back(tokenize(line, options.lowercase));
  }
  require(!in.bad(), ErrorCode::kIo, "ingest: read error");

  std::vector<bool> keep(lines.size(), true);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t len = lines[i].size();
    keep[i] = len >= options.min_len && len <= options.max_len;
  }
  // Dropping sentences lowers other tokens' counts, so iterate to a fixed
  // point.
  for (bool changed = true; changed;) {
    changed = false;
    std::unordered_map<std::string, std::int64_t> freq;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (!keep[i]) continue;
      for (const auto& t : lines[i]) ++freq[t];
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (!keep[i]) continue;
      for (const auto& t : lines[i]) {
        if (freq[t] < options.min_token_freq) {
          keep[i] = false;
          changed = true;
          break;
        }
      }
    }
  }

  Corpus corpus;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!keep[i]) continue;
    Sentence s;
    s.reserve(lines[i].size());
    for (const auto& t : lines[i]) s.push_back(corpus.vocab.add(t, 1));
    corpus.sentences.push_back(std::move(s));
  }
  require(!corpus.sentences.empty(), ErrorCode::kEmptyCorpus,
          "ingest: no sentence survived filtering");
  return corpus;
}

Corpus ingest(const std::string& path, const IngestOptions& options) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open corpus file '" + path + "'");
  return ingest_stream(in, options);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& s : corpus.sentences) out << corpus.detokenize(s) << '\n';
}

void write_corpus_file(const std::string& path, const Corpus& corpus) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::kIo, "cannot write '" + path + "'");
  write_corpus(out, corpus);
  require(out.good(), ErrorCode::kIo, "write failed for '" + path + "'");
}

void write_vocab(std::ostream& out, const Vocabulary& vocab) {
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const auto id = static_cast<TokenId>(i);
    out << vocab.token(id) << '\t' << id << '\t' << vocab.frequency(id) << '\n';
  }
}

void write_vocab_file(const std::string& path, const Vocabulary& vocab) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::kIo, "cannot write '" + path + "'");
  write_vocab(out, vocab);
  require(out.good(), ErrorCode::kIo, "write failed for '" + path + "'");
}

std::vector<Sentence> tokenize_lines(std::istream& in, Vocabulary& vocab,
                                     bool lowercase) {
  std::vector<Sentence> out;
  std::string line;
  while (std::getline(in, line)) {
    Sentence s;
    for (const auto& t : tokenize(line, lowercase)) s.push_back(vocab.add(t));
    out.push_back(std::move(s));
  }
  require(!in.bad(), ErrorCode::kIo, "read error");
  return out;
}

std::vector<Corpus> split(const Corpus& corpus,
                          const std::vector<std::size_t>& sizes,
                          std::uint64_t seed) {
  std::size_t needed = 0;
  for (std::size_t s : sizes) needed += s;
  require(needed <= corpus.sentences.size(), ErrorCode::kInvalidArgument,
          "split: requested " + std::to_string(needed) +
              " sentences but the corpus has " +
              std::to_string(corpus.sentences.size()));
  std::vector<std::size_t> order(corpus.sentences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng = Rng(seed).split(kSplitStream);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.uniform_int(i)]);
  }
  std::vector<Corpus> parts;
  std::size_t offset = 0;
  for (std::size_t size : sizes) {
    Corpus part;
    part.vocab = corpus.vocab;
    part.sentences.reserve(size);
    for (std::size_t k = 0; k < size; ++k) {
      part.sentences.push_back(corpus.sentences[order[offset + k]]);
    }
    offset += size;
    parts.push_back(std::move(part));
  }
  return parts;
}

NoiseMixResult noise_mix_sample(const Corpus& reference_pool,
                                const NoiseMixSpec& spec) {
  require(!reference_pool.sentences.empty(), ErrorCode::kEmptyCorpus,
          "noise_mix_sample: empty reference pool");
  require(spec.epsilon >= 0.0 && spec.epsilon <= 1.0,
          ErrorCode::kInvalidArgument, "epsilon must lie in [0, 1]");
  require(spec.noise_len >= 1, ErrorCode::kInvalidArgument,
          "noise length must be positive");
  require(reference_pool.vocab.size() > 0, ErrorCode::kEmptyCorpus,
          "noise_mix_sample: empty vocabulary");
  NoiseMixResult result;
  result.corpus.vocab = reference_pool.vocab;
  result.corpus.sentences.reserve(spec.n_samples);
  result.is_noise.reserve(spec.n_samples);
  // Separate streams, all advanced for every sample, so that for a fixed
  // seed the noise positions at epsilon are a subset of those at any larger
  // epsilon.
  const Rng root(spec.seed);
  Rng coin = root.split(kCoinStream);
  Rng pick = root.split(kPoolStream);
  Rng noise_tokens = root.split(kNoiseTokenStream);
  const std::size_t pool = reference_pool.sentences.size();
  const std::size_t vocab = reference_pool.vocab.size();
  Sentence noise_text(spec.noise_len);
  for (std::size_t k = 0; k < spec.n_samples; ++k) {
    const bool noise = coin.uniform() < spec.epsilon;
    const std::size_t index = pick.uniform_int(pool);
    for (auto& t : noise_text) {
      t = static_cast<TokenId>(noise_tokens.uniform_int(vocab));
    }
    result.corpus.sentences.push_back(noise ? noise_text
                                            : reference_pool.sentences[index]);
    result.is_noise.push_back(noise);
  }
  return result;
}

}  // namespace qdfit
