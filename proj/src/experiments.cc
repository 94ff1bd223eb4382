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

#include "qdfit/experiments.h"

#include <algorithm>
#include <charconv>
#include <map>
#include <ostream>

#include "qdfit/bleu.h"
#include "qdfit/error.h"
#include "qdfit/ngram.h"

namespace qdfit {

namespace {

std::pair<std::string, int> parse_metric(const std::string& metric) {
  const auto dash = metric.find('-');
  require(dash != std::string::npos, ErrorCode::kInvalidArgument,
          "unknown metric '" + metric + "' (expected BS-n or CN-n)");
  const std::string family = metric.substr(0, dash);
  int order = 0;
  const char* first = metric.data() + dash + 1;
  const char* last = metric.data() + metric.size();
  const auto [ptr, ec] = std::from_chars(first, last, order);
  require(ec == std::errc() && ptr == last && order >= 1 &&
              (family == "BS" || family == "CN"),
          ErrorCode::kInvalidArgument,
          "unknown metric '" + metric + "' (expected BS-n or CN-n)");
  return {family, order};
}

std::vector<Sentence> head(const std::vector<Sentence>& s, std::size_t k) {
  return {s.begin(), s.begin() + std::min(k, s.size())};
}

struct Scores {
  double quality;
  double diversity;
};

Scores score(const std::string& metric, int order,
             const std::vector<Sentence>& cand,
             const std::vector<Sentence>& refs, const NGramDist& ref_grams,
             std::size_t subsample) {
  if (metric == "cr-nrr") {
    const NGramDist qg = ngram_dist(cand, order);
    return {cr(qg, ref_grams), nrr(qg)};
  }
  BleuConfig config;
  config.max_order = order;
  return {corpus_bleu(cand, refs, config),
          -self_bleu(head(cand, subsample), config)};
}

}  // namespace

MetricFunctionals synth_functionals(const std::string& metric,
                                    const CategoricalDist& p, int ref_size,
                                    int cand_size) {
  const auto [family, order] = parse_metric(metric);
  require(p.has_labels(), ErrorCode::kInvalidArgument,
          "text-space metrics need a labeled distribution");
  MetricFunctionals out;
  if (family == "BS") {
    BleuConfig config;
    config.max_order = order;
    out.quality = expected_bleu_form(p, 1, ref_size, config);
    out.diversity = expected_nsbleu_form(p.labels(), cand_size, config);
  } else {
    out.quality = cr_functional(p, order);
    out.diversity = nrr_functional(p.labels(), order);
  }
  return out;
}

std::vector<SynthRow> run_synth(const SynthConfig& config) {
  require(!config.sigmas.empty() && !config.metrics.empty(),
          ErrorCode::kInvalidArgument, "synth needs sigmas and metrics");
  for (const auto& m : config.metrics) parse_metric(m);
  std::vector<SynthRow> rows;
  for (double sigma : config.sigmas) {
    OracleSpec spec;
    spec.vocab_size = config.vocab_size;
    spec.length = config.length;
    spec.hidden_dim = config.hidden_dim;
    spec.sigma = sigma;
    spec.seed = config.oracle_seed;
    const CategoricalDist p = oracle_enumerate(spec);
    for (const auto& metric : config.metrics) {
      const MetricFunctionals fns =
          synth_functionals(metric, p, config.ref_size, config.cand_size);
      SynthRow row;
      row.metric = metric;
      row.sigma = sigma;
      row.report = qdisc_penalty(fns.quality, fns.diversity, p, config.penalty);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_synth_csv(std::ostream& out, const std::vector<SynthRow>& rows,
                     bool wide) {
  if (!wide) {
    out << "metric,sigma,qdisc,drate,denominator,u_real,v_real,feasible\n";
    for (const auto& r : rows) {
      out << r.metric << ',' << format_double(r.sigma) << ','
          << format_double(r.report.qdisc) << ','
          << format_double(r.report.drate) << ','
          << format_double(r.report.denominator) << ','
          << format_double(r.report.u_real) << ','
          << format_double(r.report.v_real) << ','
          << (r.report.feasible ? 1 : 0) << '\n';
    }
    return;
  }
  std::vector<double> sigmas;
  std::vector<std::string> metrics;
  for (const auto& r : rows) {
    if (std::find(sigmas.begin(), sigmas.end(), r.sigma) == sigmas.end()) {
      sigmas.push_back(r.sigma);
    }
    if (std::find(metrics.begin(), metrics.end(), r.metric) == metrics.end()) {
      metrics.push_back(r.metric);
    }
  }
  out << "metric";
  for (double s : sigmas) out << ",qdisc_sigma=" << format_double(s);
  for (double s : sigmas) out << ",drate_sigma=" << format_double(s);
  out << '\n';
  for (const auto& m : metrics) {
    std::vector<const SynthRow*> cells(sigmas.size(), nullptr);
    for (const auto& r : rows) {
      if (r.metric != m) continue;
      const auto it = std::find(sigmas.begin(), sigmas.end(), r.sigma);
      cells[it - sigmas.begin()] = &r;
    }
    out << m;
    for (const auto* c : cells) {
      out << ',' << (c ? format_double(c->report.qdisc) : "");
    }
    for (const auto* c : cells) {
      out << ',' << (c ? format_double(c->report.drate) : "");
    }
    out << '\n';
  }
}

void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& trace) {
  out << "restart,step,U,V,objective\n";
  for (const auto& t : trace) {
    out << t.restart << ',' << t.step << ',' << format_double(t.u) << ','
        << format_double(t.v) << ',' << format_double(t.objective) << '\n';
  }
}

double max_sentence_cr(const std::vector<Sentence>& candidates,
                       const std::vector<Sentence>& references, int order) {
  const NGramDist pg = ngram_dist(references, order);
  double best = 0.0;
  for (const auto& s : candidates) {
    if (s.size() < static_cast<std::size_t>(order)) continue;
    best = std::max(best, cr(ngram_dist({s}, order), pg));
  }
  return best;
}

SweepResult run_epsilon_sweep(const Corpus& pool, const Corpus& references,
                              const Corpus& candidates,
                              const SweepConfig& config) {
  require(!pool.sentences.empty() && !candidates.sentences.empty() &&
              !references.sentences.empty(),
          ErrorCode::kEmptyCorpus,
          "sweep needs pool, candidate and reference sets");
  require(!config.epsilons.empty() && !config.orders.empty() &&
              !config.noise_lengths.empty(),
          ErrorCode::kInvalidArgument,
          "sweep needs epsilons, orders and noise lengths");
  for (double e : config.epsilons) {
    require(e >= 0.0 && e <= 1.0, ErrorCode::kInvalidArgument,
            "epsilon must lie in [0, 1]");
  }
  const std::size_t n_samples =
      config.n_samples > 0 ? config.n_samples : candidates.sentences.size();
  const std::size_t ref_max_len = references.stats().max_len;

  std::vector<std::string> metrics = {"cr-nrr"};
  if (config.include_bleu) metrics.push_back("bleu-nsbleu");

  std::map<int, NGramDist> ref_grams;
  for (int order : config.orders) {
    ref_grams.emplace(order, ngram_dist(references.sentences, order));
  }

  SweepResult result;
  for (std::size_t noise_len_opt : config.noise_lengths) {
    const std::size_t noise_len =
        noise_len_opt == 0 ? ref_max_len : noise_len_opt;
    std::map<std::pair<std::string, int>, std::vector<CurvePoint>> curves;
    for (double eps : config.epsilons) {
      NoiseMixSpec spec;
      spec.epsilon = eps;
      spec.noise_len = noise_len;
      spec.seed = config.seed;
      spec.n_samples = n_samples;
      const Corpus mix = noise_mix_sample(pool, spec).corpus;
      for (const auto& metric : metrics) {
        for (int order : config.orders) {
          const Scores s =
              score(metric, order, mix.sentences, references.sentences,
                    ref_grams.at(order), config.self_bleu_subsample);
          result.curve.push_back(
              {metric, order, noise_len, eps, s.quality, s.diversity});
          curves[{metric, order}].push_back({s.quality, s.diversity, eps});
        }
      }
    }
    for (const auto& metric : metrics) {
      for (int order : config.orders) {
        const Scores real =
            score(metric, order, candidates.sentences, references.sentences,
                  ref_grams.at(order), config.self_bleu_subsample);
        SweepReport rep;
        rep.metric = metric;
        rep.order = order;
        rep.noise_len = noise_len;
        rep.real = {real.quality, real.diversity, std::nullopt};
        const double denominator =
            metric == "cr-nrr"
                ? max_sentence_cr(pool.sentences, references.sentences, order)
                : 1.0;
        try {
          rep.report = qdisc_curve_interp(curves.at({metric, order}), rep.real,
                                          denominator);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kExtrapolationRefused) throw;
          rep.note = e.what();
        }
        result.reports.push_back(std::move(rep));
      }
    }
  }
  // Mark, per metric and order, the noise length with the larger QDisc.
  for (auto& rep : result.reports) {
    if (!rep.report) continue;
    bool best = true;
    for (const auto& other : result.reports) {
      if (&other == &rep || other.metric != rep.metric ||
          other.order != rep.order || !other.report) {
        continue;
      }
      if (other.report->qdisc > rep.report->qdisc ||
          (other.report->qdisc == rep.report->qdisc &&
           other.noise_len < rep.noise_len)) {
        best = false;
      }
    }
    rep.selected = best;
  }
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "metric,order,noise_len,epsilon,quality,diversity\n";
  for (const auto& r : result.curve) {
    out << r.metric << ',' << r.order << ',' << r.noise_len << ','
        << format_double(r.epsilon) << ',' << format_double(r.quality) << ','
        << format_double(r.diversity) << '\n';
  }
  for (const auto& r : result.reports) {
    out << r.metric << ',' << r.order << ',' << r.noise_len << ",real,"
        << format_double(r.real.u) << ',' << format_double(r.real.v) << '\n';
  }
}

}  // namespace qdfit
