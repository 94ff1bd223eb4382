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

#ifndef QDFIT_CORPUS_H_
#define QDFIT_CORPUS_H_

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "qdfit/numeric.h"

namespace qdfit {

/// Token strings in first-occurrence order, with their corpus frequencies.
class Vocabulary {
 public:
  TokenId add(const std::string& token, std::int64_t count = 0);
  /// -1 when absent.
  TokenId find(const std::string& token) const;

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const { return tokens_[id]; }
  std::int64_t frequency(TokenId id) const { return freq_[id]; }
  void set_frequency(TokenId id, std::int64_t count) { freq_[id] = count; }

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_ && freq_ == other.freq_;
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::int64_t> freq_;
  std::unordered_map<std::string, TokenId> ids_;
};

struct CorpusStats {
  std::size_t n_sentences = 0;
  std::size_t max_len = 0;
  std::size_t vocab_size = 0;
};

struct Corpus {
  std::vector<Sentence> sentences;
  Vocabulary vocab;

  CorpusStats stats() const;
  std::string detokenize(const Sentence& s) const;
  bool operator==(const Corpus& other) const = default;
};

struct IngestOptions {
  std::int64_t min_token_freq = 1;
  std::size_t max_len = std::numeric_limits<std::size_t>::max();
  std::size_t min_len = 1;
  bool lowercase = false;
};

/// Whitespace-tokenized, one sentence per line. Sentences outside
/// [min_len, max_len] or containing a token rarer than min_token_freq are
/// dropped; frequencies are recounted and the filter repeated until nothing
/// changes, so every surviving token meets the cutoff in the final corpus.
/// Throws kEmptyCorpus when nothing survives and kIo when unreadable.
Corpus ingest(const std::string& path, const IngestOptions& options = {});
Corpus ingest_stream(std::istream& in, const IngestOptions& options = {});

/// Space-joined tokens, one sentence per line.
void write_corpus(std::ostream& out, const Corpus& corpus);
void write_corpus_file(const std::string& path, const Corpus& corpus);
/// `token<TAB>id<TAB>freq` per line.
void write_vocab(std::ostream& out, const Vocabulary& vocab);
void write_vocab_file(const std::string& path, const Vocabulary& vocab);

/// Tokenizes lines against an existing vocabulary; unknown tokens are
/// appended to it with frequency 0.
std::vector<Sentence> tokenize_lines(std::istream& in, Vocabulary& vocab,
                                     bool lowercase = false);

/// Disjoint uniform-random subsets of the given sizes, sharing the
/// vocabulary. Throws kInvalidArgument when sizes exceed the corpus.
std::vector<Corpus> split(const Corpus& corpus,
                          const std::vector<std::size_t>& sizes,
                          std::uint64_t seed);

struct NoiseMixSpec {
  double epsilon = 0.0;
  std::size_t noise_len = 5;
  std::uint64_t seed = 0;
  std::size_t n_samples = 1000;
};

struct NoiseMixResult {
  Corpus corpus;
  std::vector<bool> is_noise;
};

/// Each sample is, with probability 1 - epsilon, a uniform draw with
/// replacement from the pool, otherwise noise_len tokens drawn uniformly
/// from the whole vocabulary.
NoiseMixResult noise_mix_sample(const Corpus& reference_pool,
                                const NoiseMixSpec& spec);

}  // namespace qdfit

#endif  // QDFIT_CORPUS_H_
