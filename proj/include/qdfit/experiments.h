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

#ifndef QDFIT_EXPERIMENTS_H_
#define QDFIT_EXPERIMENTS_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qdfit/compat.h"
#include "qdfit/corpus.h"
#include "qdfit/distribution.h"
#include "qdfit/functional.h"

namespace qdfit {

/// Metric ids for text-space studies: "BS-n" (expected n-gram BLEU against
/// reference draws, expected NSBLEU over candidate draws) and "CN-n"
/// (gram-space CR and NRR).
struct MetricFunctionals {
  FunctionalPtr quality;
  FunctionalPtr diversity;
};

MetricFunctionals synth_functionals(const std::string& metric,
                                    const CategoricalDist& p, int ref_size = 2,
                                    int cand_size = 2);

struct SynthConfig {
  std::vector<double> sigmas = {0.5, 1.0, 2.0};
  int vocab_size = 4;
  int length = 3;
  int hidden_dim = 8;
  std::uint64_t oracle_seed = 1;
  std::vector<std::string> metrics = {"BS-1", "BS-2", "BS-3",
                                      "CN-1", "CN-2", "CN-3"};
  int ref_size = 2;
  int cand_size = 2;
  PenaltyConfig penalty;
};

struct SynthRow {
  std::string metric;
  double sigma = 0.0;
  CompatReport report;
};

std::vector<SynthRow> run_synth(const SynthConfig& config);

/// Wide layout: one row per metric with qdisc and drate columns per sigma.
/// Long layout: metric,sigma,qdisc,drate,denominator,u_real,v_real,feasible.
void write_synth_csv(std::ostream& out, const std::vector<SynthRow>& rows,
                     bool wide = true);
/// step,U,V,objective for every recorded restart.
void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& trace);

struct SweepConfig {
  std::vector<double> epsilons = {0.0, 0.2, 0.4, 0.6};
  std::vector<int> orders = {2, 3};
  /// Noise text lengths; 0 stands for the longest reference sentence.
  std::vector<std::size_t> noise_lengths = {5, 0};
  /// Mixture size; 0 means the size of the candidate set.
  std::size_t n_samples = 0;
  /// Self-BLEU is computed on the first this-many sentences of each set.
  std::size_t self_bleu_subsample = 1000;
  bool include_bleu = true;
  std::uint64_t seed = 0;
};

struct SweepCurveRow {
  std::string metric;  // "cr-nrr" or "bleu-nsbleu"
  int order = 0;
  std::size_t noise_len = 0;
  double epsilon = 0.0;
  double quality = 0.0;
  double diversity = 0.0;
};

struct SweepReport {
  std::string metric;
  int order = 0;
  std::size_t noise_len = 0;
  CurvePoint real;
  std::optional<CompatReport> report;  // empty when interpolation refused
  std::string note;
  /// Largest QDisc among the noise lengths of this metric and order.
  bool selected = false;
};

struct SweepResult {
  std::vector<SweepCurveRow> curve;
  std::vector<SweepReport> reports;
};

/// Mixtures drawn from `pool` (1 - eps of the time a pool sentence, else
/// noise) are scored against `references`; usually pool and references are
/// the same set, so eps = 0 reproduces it. The real point is `candidates`
/// scored against `references`.
SweepResult run_epsilon_sweep(const Corpus& pool, const Corpus& references,
                              const Corpus& candidates,
                              const SweepConfig& config);
void write_sweep_csv(std::ostream& out, const SweepResult& result);

/// max over sentences s of CR_n({s}; P_g): the empirical stand-in for
/// max_Q CR.
double max_sentence_cr(const std::vector<Sentence>& candidates,
                       const std::vector<Sentence>& references, int order);

}  // namespace qdfit

#endif  // QDFIT_EXPERIMENTS_H_
