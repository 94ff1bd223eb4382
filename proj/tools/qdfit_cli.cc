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

// qdfit command-line tool.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qdfit/bleu.h"
#include "qdfit/compat.h"
#include "qdfit/corpus.h"
#include "qdfit/distribution.h"
#include "qdfit/error.h"
#include "qdfit/experiments.h"
#include "qdfit/metric_pair.h"
#include "qdfit/ngram.h"
#include "qdfit/pareto.h"

namespace {

using qdfit::Error;
using qdfit::ErrorCode;
using Json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

// Failure while reading or validating a user-supplied input.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out = "-";
  std::string format = "json";
  bool no_timing = false;
  std::vector<std::string> argv;
};

struct InputRecord {
  std::string path;
  std::uint64_t hash = 0;
  std::uintmax_t bytes = 0;
};

class Session {
 public:
  explicit Session(const Globals& globals) : g_(globals) {}

  const Globals& globals() const { return g_; }

  std::string read_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read input file '" + path + "'");
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    inputs_.push_back({path, qdfit::fnv1a64(content), content.size()});
    return content;
  }

  qdfit::CategoricalDist load_dist(const std::string& path) {
    std::istringstream in(read_input(path));
    try {
      return qdfit::read_dist(in);
    } catch (const Error& e) {
      throw DataError("bad distribution file '" + path + "': " + e.what());
    }
  }

  std::vector<qdfit::Sentence> load_sentences(const std::string& path,
                                              qdfit::Vocabulary& vocab,
                                              bool lowercase) {
    std::istringstream in(read_input(path));
    auto sentences = qdfit::tokenize_lines(in, vocab, lowercase);
    if (sentences.empty()) {
      throw DataError("corpus file '" + path + "' has no lines");
    }
    return sentences;
  }

  qdfit::Corpus load_corpus(const std::string& path,
                            const qdfit::IngestOptions& options) {
    std::istringstream in(read_input(path));
    try {
      return qdfit::ingest_stream(in, options);
    } catch (const Error& e) {
      throw DataError("corpus file '" + path + "': " + e.what());
    }
  }

  // Output stream for --out ("-" is stdout).
  std::ostream& out() {
    if (g_.out == "-") return std::cout;
    if (!file_) {
      file_.emplace(g_.out);
      if (!*file_) throw DataError("cannot write output file '" + g_.out + "'");
    }
    return *file_;
  }

  void note_output(const std::string& path) { extra_outputs_.push_back(path); }

  void finish(const std::string& command) {
    if (file_) {
      file_->flush();
      if (!*file_) throw DataError("write failed for '" + g_.out + "'");
    }
    if (g_.out == "-") return;
    Json m;
    m["command"] = command;
    m["argv"] = g_.argv;
    m["seed"] = g_.seed;
    m["threads"] = g_.threads;
    m["format"] = g_.format;
    m["tool_version"] = QDFIT_VERSION;
    Json inputs = Json::array();
    for (const auto& r : inputs_) {
      std::ostringstream hex;
      hex << std::hex << r.hash;
      inputs.push_back({{"path", r.path}, {"fnv1a64", hex.str()},
                        {"bytes", r.bytes}});
    }
    m["inputs"] = inputs;
    m["outputs"] = extra_outputs_;
    if (!g_.no_timing) {
      const auto now = std::chrono::system_clock::to_time_t(
          std::chrono::system_clock::now());
      std::tm tm{};
      gmtime_r(&now, &tm);
      char buf[32];
      std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
      m["wall_clock"] = buf;
    }
    std::ofstream side(g_.out + ".manifest.json");
    side << m.dump(2) << '\n';
    if (!side) throw DataError("cannot write manifest for '" + g_.out + "'");
  }

 private:
  Globals g_;
  std::vector<InputRecord> inputs_;
  std::vector<std::string> extra_outputs_;
  std::optional<std::ofstream> file_;
};

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - start)
      .count();
}

Json number(double x) {
  if (std::isfinite(x)) return x;
  return qdfit::format_double(x);
}

Json dist_json(const qdfit::CategoricalDist& d) {
  Json arr = Json::array();
  for (double p : d.probs()) arr.push_back(p);
  return arr;
}

Json report_json(const qdfit::CompatReport& r, bool with_witness) {
  Json j;
  j["method"] = qdfit::compat_method_name(r.method);
  j["qdisc"] = number(r.qdisc);
  j["drate"] = number(r.drate);
  j["denominator"] = number(r.denominator);
  j["u_real"] = number(r.u_real);
  j["v_real"] = number(r.v_real);
  j["self_ratio"] = r.self_ratio ? number(*r.self_ratio) : Json(nullptr);
  j["ref_ratio"] = r.ref_ratio ? number(*r.ref_ratio) : Json(nullptr);
  j["feasible"] = r.feasible;
  if (r.w_star) j["w_star"] = number(*r.w_star);
  if (with_witness) {
    j["witness"] = r.witness ? dist_json(*r.witness) : Json(nullptr);
  }
  return j;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(qdfit::parse_double(item));
  }
  return out;
}

std::vector<std::string> parse_words(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// --- eval ---------------------------------------------------------------

struct EvalArgs {
  std::string metric = "cr-nrr";
  int ngram = 2;
  std::string candidates;
  std::string refs;
  bool lowercase = false;
  std::size_t self_bleu_subsample = 1000;
  std::string pair;
  std::string q_path;
  std::string p_path;
};

int run_eval(const EvalArgs& a, Session& s) {
  const auto start = std::chrono::steady_clock::now();
  Json j;
  j["metric"] = a.metric;
  if (a.metric == "pair") {
    if (a.pair.empty() || a.q_path.empty() || a.p_path.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "--metric pair needs --pair, --q and --p");
    }
    const auto pair = qdfit::pair_from_id(a.pair);
    const auto q = s.load_dist(a.q_path);
    const auto p = s.load_dist(a.p_path);
    if (!q.same_space(p)) {
      throw DataError("distributions '" + a.q_path + "' and '" + a.p_path +
                      "' are over different outcome spaces");
    }
    j["pair"] = pair.name();
    j["quality"] = number(qdfit::quality(pair, q, p));
    j["diversity"] = number(qdfit::diversity(pair, q));
    const auto compat = qdfit::compatibility_analytic(pair);
    j["compatible"] = compat.compatible;
    if (compat.compatible) {
      j["alpha"] = number(compat.alpha());
      j["divergence"] = number(qdfit::divergence(pair, q, p));
    }
    j["outcomes"] = q.size();
  } else {
    if (a.candidates.empty() || a.refs.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "--candidates and --refs are required");
    }
    qdfit::Vocabulary vocab;
    const auto cand = s.load_sentences(a.candidates, vocab, a.lowercase);
    const auto refs = s.load_sentences(a.refs, vocab, a.lowercase);
    j["order"] = a.ngram;
    if (a.metric == "cr-nrr") {
      qdfit::NGramDist qg = [&] {
        try {
          return qdfit::ngram_dist(cand, a.ngram);
        } catch (const Error& e) {
          throw DataError("candidates '" + a.candidates + "': " + e.what());
        }
      }();
      qdfit::NGramDist pg = [&] {
        try {
          return qdfit::ngram_dist(refs, a.ngram);
        } catch (const Error& e) {
          throw DataError("references '" + a.refs + "': " + e.what());
        }
      }();
      j["cr"] = number(qdfit::cr(qg, pg));
      j["nrr"] = number(qdfit::nrr(qg));
      j["cnd"] = number(qdfit::cnd(qg, pg));
      j["psi"] = number(qdfit::psi_n(qg, pg));
      j["counts"] = {{"candidate_sentences", cand.size()},
                     {"reference_sentences", refs.size()},
                     {"candidate_grams", qg.total_count()},
                     {"reference_grams", pg.total_count()},
                     {"candidate_types", qg.size()},
                     {"reference_types", pg.size()}};
    } else if (a.metric == "bleu") {
      qdfit::BleuConfig config;
      config.max_order = a.ngram;
      j["bleu"] = number(qdfit::corpus_bleu(cand, refs, config));
      const std::size_t k = a.self_bleu_subsample == 0
                                ? cand.size()
                                : std::min(a.self_bleu_subsample, cand.size());
      if (k >= 2) {
        const std::vector<qdfit::Sentence> head(cand.begin(), cand.begin() + k);
        const double sb = qdfit::self_bleu(head, config);
        j["self_bleu"] = number(sb);
        j["nsbleu"] = number(-sb);
      } else {
        j["self_bleu"] = nullptr;
        j["nsbleu"] = nullptr;
      }
      j["counts"] = {{"candidate_sentences", cand.size()},
                     {"reference_sentences", refs.size()},
                     {"self_bleu_sentences", k}};
    } else {
      throw Error(ErrorCode::kInvalidArgument,
                  "unknown metric '" + a.metric + "' (cr-nrr, bleu, pair)");
    }
  }
  if (!s.globals().no_timing) j["runtime_ms"] = elapsed_ms(start);
  if (s.globals().format == "csv") {
    std::ostream& out = s.out();
    bool first = true;
    std::ostringstream header, row;
    for (const auto& [key, value] : j.items()) {
      if (value.is_structured()) continue;
      header << (first ? "" : ",") << key;
      row << (first ? "" : ",")
          << (value.is_string() ? value.get<std::string>() : value.dump());
      first = false;
    }
    out << header.str() << '\n' << row.str() << '\n';
  } else {
    s.out() << j.dump(2) << '\n';
  }
  return kExitOk;
}

// --- frontier -----------------------------------------------------------

struct FrontierArgs {
  std::string dist;
  std::string pair = "ll-se";
  int points = 64;
  double w_min = -50.0;
};

int run_frontier(const FrontierArgs& a, Session& s) {
  const auto pair = qdfit::pair_from_id(a.pair);
  const auto p = s.load_dist(a.dist);
  const auto sweep = qdfit::sweep(pair, p, a.points, a.w_min);
  std::ostream& out = s.out();
  if (s.globals().format == "json") {
    Json j;
    j["pair"] = pair.name();
    j["bound"] = number(sweep.bound);
    Json pts = Json::array();
    for (const auto& pt : sweep.points) {
      pts.push_back({{"w", number(pt.w)}, {"b", number(pt.b)},
                     {"U", number(pt.u)}, {"V", number(pt.v)},
                     {"q", dist_json(pt.q)}});
    }
    j["points"] = pts;
    out << j.dump(2) << '\n';
  } else {
    out << "w,b,U,V";
    for (std::size_t i = 0; i < p.size(); ++i) out << ",q_" << i;
    out << '\n';
    for (const auto& pt : sweep.points) {
      out << qdfit::format_double(pt.w) << ',' << qdfit::format_double(pt.b)
          << ',' << qdfit::format_double(pt.u) << ','
          << qdfit::format_double(pt.v);
      for (double q : pt.q.probs()) out << ',' << qdfit::format_double(q);
      out << '\n';
    }
  }
  return kExitOk;
}

// --- qdisc --------------------------------------------------------------

struct PenaltyArgs {
  double lambda = 2.0;
  double learning_rate = 0.05;
  double momentum = 0.9;
  int steps = 20000;
  int restarts = 8;
  bool monotone = false;
  int trace_stride = 100;

  qdfit::PenaltyConfig config(std::uint64_t seed, bool trace) const {
    qdfit::PenaltyConfig c;
    c.lambda = lambda;
    c.learning_rate = learning_rate;
    c.momentum = momentum;
    c.max_steps = steps;
    c.restarts = restarts;
    c.monotone = monotone;
    c.seed = seed;
    c.trace_stride = trace ? trace_stride : 0;
    return c;
  }
};

void add_penalty_options(CLI::App* cmd, PenaltyArgs& a) {
  cmd->add_option("--lambda", a.lambda, "Penalty weight")->capture_default_str();
  cmd->add_option("--lr", a.learning_rate, "Learning rate")
      ->capture_default_str();
  cmd->add_option("--momentum", a.momentum, "Momentum")->capture_default_str();
  cmd->add_option("--steps", a.steps, "Steps per restart")
      ->capture_default_str();
  cmd->add_option("--restarts", a.restarts, "Restarts")->capture_default_str();
  cmd->add_flag("--monotone", a.monotone,
                "Backtracking steps with a non-decreasing objective");
  cmd->add_option("--trace-stride", a.trace_stride,
                  "Record the trace every this-many steps")
      ->capture_default_str();
}

void write_trace_file(const std::string& path,
                      const std::vector<qdfit::TracePoint>& trace,
                      Session& s) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write trace file '" + path + "'");
  qdfit::write_trace_csv(out, trace);
  s.note_output(path);
}

struct QdiscArgs {
  std::string dist;
  std::string pair = "ll-se";
  std::string metric;
  std::string method = "frontier";
  double w_min = -50.0;
  std::string trace;
  PenaltyArgs penalty;
};

int run_qdisc(const QdiscArgs& a, Session& s) {
  const auto p = s.load_dist(a.dist);
  qdfit::CompatReport report;
  if (a.method == "frontier") {
    if (!a.metric.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "--metric requires --method penalty");
    }
    report = qdfit::qdisc_frontier(qdfit::pair_from_id(a.pair), p, a.w_min);
  } else if (a.method == "penalty") {
    qdfit::FunctionalPtr u;
    qdfit::FunctionalPtr v;
    std::optional<double> denominator;
    if (!a.metric.empty()) {
      const auto fns = qdfit::synth_functionals(a.metric, p);
      u = fns.quality;
      v = fns.diversity;
    } else {
      const auto pair = qdfit::pair_from_id(a.pair);
      u = qdfit::general_quality(pair, p);
      v = qdfit::general_diversity(pair, p.size());
      denominator = qdfit::drate_denominator_generalform(pair, p);
    }
    report = qdfit::qdisc_penalty(
        u, v, p, a.penalty.config(s.globals().seed, !a.trace.empty()),
        denominator);
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "--method must be frontier or penalty");
  }
  if (!a.trace.empty()) write_trace_file(a.trace, report.trace, s);
  std::ostream& out = s.out();
  if (s.globals().format == "csv") {
    out << "method,qdisc,drate,denominator,u_real,v_real,feasible\n"
        << qdfit::compat_method_name(report.method) << ','
        << qdfit::format_double(report.qdisc) << ','
        << qdfit::format_double(report.drate) << ','
        << qdfit::format_double(report.denominator) << ','
        << qdfit::format_double(report.u_real) << ','
        << qdfit::format_double(report.v_real) << ','
        << (report.feasible ? 1 : 0) << '\n';
  } else {
    Json j = report_json(report, false);
    j["pair"] = a.metric.empty() ? a.pair : a.metric;
    out << j.dump() << '\n';
  }
  return kExitOk;
}

// --- synth --------------------------------------------------------------

struct SynthArgs {
  std::string sigmas = "0.5,1,2";
  int vocab = 4;
  int length = 3;
  int hidden = 8;
  std::uint64_t oracle_seed = 1;
  std::string metrics = "BS-1,BS-2,BS-3,CN-1,CN-2,CN-3";
  int ref_size = 2;
  int cand_size = 2;
  std::string layout = "wide";
  std::string trace_dir;
  PenaltyArgs penalty;
};

int run_synth(const SynthArgs& a, Session& s) {
  qdfit::SynthConfig config;
  config.sigmas = parse_list(a.sigmas);
  config.vocab_size = a.vocab;
  config.length = a.length;
  config.hidden_dim = a.hidden;
  config.oracle_seed = a.oracle_seed;
  config.metrics = parse_words(a.metrics);
  config.ref_size = a.ref_size;
  config.cand_size = a.cand_size;
  config.penalty = a.penalty.config(s.globals().seed, !a.trace_dir.empty());
  if (a.layout != "wide" && a.layout != "long") {
    throw Error(ErrorCode::kInvalidArgument, "--layout must be wide or long");
  }
  const auto rows = qdfit::run_synth(config);
  if (!a.trace_dir.empty()) {
    std::filesystem::create_directories(a.trace_dir);
    for (const auto& r : rows) {
      const std::string path = a.trace_dir + "/trace_" + r.metric + "_sigma" +
                               qdfit::format_double(r.sigma) + ".csv";
      write_trace_file(path, r.report.trace, s);
    }
  }
  std::ostream& out = s.out();
  if (s.globals().format == "json") {
    Json arr = Json::array();
    for (const auto& r : rows) {
      Json j = report_json(r.report, false);
      j["metric"] = r.metric;
      j["sigma"] = r.sigma;
      arr.push_back(j);
    }
    out << arr.dump(2) << '\n';
  } else {
    qdfit::write_synth_csv(out, rows, a.layout == "wide");
  }
  return kExitOk;
}

// --- sweep-epsilon ------------------------------------------------------

struct SweepArgs {
  std::string pool;
  std::string candidates;
  std::string refs;
  std::string epsilons = "0,0.2,0.4,0.6";
  std::string orders = "2,3";
  std::string noise_lengths = "5,max";
  std::size_t samples = 0;
  std::size_t self_bleu_subsample = 1000;
  bool no_bleu = false;
  bool lowercase = false;
  std::string report;
};

Json sweep_reports_json(const qdfit::SweepResult& result) {
  Json arr = Json::array();
  for (const auto& r : result.reports) {
    Json j;
    j["metric"] = r.metric;
    j["order"] = r.order;
    j["noise_len"] = r.noise_len;
    j["real_quality"] = number(r.real.u);
    j["real_diversity"] = number(r.real.v);
    j["selected"] = r.selected;
    if (r.report) {
      j["report"] = report_json(*r.report, false);
    } else {
      j["report"] = nullptr;
      j["note"] = r.note;
    }
    arr.push_back(j);
  }
  return arr;
}

int run_sweep(const SweepArgs& a, Session& s) {
  qdfit::SweepConfig config;
  config.epsilons = parse_list(a.epsilons);
  config.orders.clear();
  for (double o : parse_list(a.orders)) config.orders.push_back(static_cast<int>(o));
  config.noise_lengths.clear();
  for (const auto& w : parse_words(a.noise_lengths)) {
    config.noise_lengths.push_back(
        w == "max" ? 0 : static_cast<std::size_t>(qdfit::parse_double(w)));
  }
  config.n_samples = a.samples;
  config.self_bleu_subsample = a.self_bleu_subsample;
  config.include_bleu = !a.no_bleu;
  config.seed = s.globals().seed;
  if (a.candidates.empty() || a.refs.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "--candidates and --refs are required");
  }
  const std::string& pool_path = a.pool.empty() ? a.refs : a.pool;
  // One vocabulary across the three sets so noise draws cover all of it.
  qdfit::Vocabulary vocab;
  qdfit::Corpus pool;
  qdfit::Corpus cand;
  qdfit::Corpus refs;
  pool.sentences = s.load_sentences(pool_path, vocab, a.lowercase);
  cand.sentences = s.load_sentences(a.candidates, vocab, a.lowercase);
  refs.sentences = s.load_sentences(a.refs, vocab, a.lowercase);
  pool.vocab = cand.vocab = refs.vocab = vocab;
  const auto result = qdfit::run_epsilon_sweep(pool, refs, cand, config);
  const Json reports = sweep_reports_json(result);
  if (!a.report.empty()) {
    std::ofstream rep(a.report);
    if (!rep) throw DataError("cannot write report '" + a.report + "'");
    rep << reports.dump(2) << '\n';
    s.note_output(a.report);
  }
  std::ostream& out = s.out();
  if (s.globals().format == "json") {
    Json j;
    Json curve = Json::array();
    for (const auto& r : result.curve) {
      curve.push_back({{"metric", r.metric}, {"order", r.order},
                       {"noise_len", r.noise_len}, {"epsilon", r.epsilon},
                       {"quality", number(r.quality)},
                       {"diversity", number(r.diversity)}});
    }
    j["curve"] = curve;
    j["reports"] = reports;
    out << j.dump(2) << '\n';
  } else {
    qdfit::write_sweep_csv(out, result);
  }
  return kExitOk;
}

// --- ingest / split / mix ----------------------------------------------

struct IngestArgs {
  std::string input;
  std::int64_t min_freq = 1;
  std::size_t max_len = 0;
  std::size_t min_len = 1;
  bool lowercase = false;
};

qdfit::IngestOptions ingest_options(const IngestArgs& a) {
  qdfit::IngestOptions o;
  o.min_token_freq = a.min_freq;
  if (a.max_len > 0) o.max_len = a.max_len;
  o.min_len = a.min_len;
  o.lowercase = a.lowercase;
  return o;
}

void write_corpus_outputs(const qdfit::Corpus& corpus, Session& s) {
  qdfit::write_corpus(s.out(), corpus);
  if (s.globals().out != "-") {
    const std::string vocab_path = s.globals().out + ".vocab";
    qdfit::write_vocab_file(vocab_path, corpus.vocab);
    s.note_output(vocab_path);
  }
}

Json stats_json(const qdfit::Corpus& c) {
  const auto st = c.stats();
  return {{"n_sentences", st.n_sentences}, {"max_len", st.max_len},
          {"vocab_size", st.vocab_size}};
}

int run_ingest(const IngestArgs& a, Session& s) {
  const auto corpus = s.load_corpus(a.input, ingest_options(a));
  write_corpus_outputs(corpus, s);
  if (s.globals().out != "-") std::cout << stats_json(corpus).dump() << '\n';
  return kExitOk;
}

struct SplitArgs {
  std::string input;
  std::string sizes;
  std::string prefix;
  bool lowercase = false;
};

int run_split(const SplitArgs& a, Session& s) {
  qdfit::IngestOptions o;
  o.lowercase = a.lowercase;
  const auto corpus = s.load_corpus(a.input, o);
  std::vector<std::size_t> sizes;
  for (double v : parse_list(a.sizes)) {
    if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
      throw Error(ErrorCode::kInvalidArgument,
                  "--sizes must be non-negative integers");
    }
    sizes.push_back(static_cast<std::size_t>(v));
  }
  const auto parts = qdfit::split(corpus, sizes, s.globals().seed);
  Json j = Json::array();
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string path = a.prefix + "." + std::to_string(i) + ".txt";
    qdfit::write_corpus_file(path, parts[i]);
    s.note_output(path);
    j.push_back({{"path", path}, {"n_sentences", parts[i].sentences.size()}});
  }
  s.out() << j.dump(2) << '\n';
  return kExitOk;
}

struct MixArgs {
  std::string pool;
  double epsilon = 0.0;
  std::string noise_len = "5";
  std::size_t samples = 1000;
  std::string mask;
  bool lowercase = false;
};

int run_mix(const MixArgs& a, Session& s) {
  qdfit::IngestOptions o;
  o.lowercase = a.lowercase;
  const auto pool = s.load_corpus(a.pool, o);
  qdfit::NoiseMixSpec spec;
  spec.epsilon = a.epsilon;
  spec.noise_len = a.noise_len == "max"
                       ? pool.stats().max_len
                       : static_cast<std::size_t>(qdfit::parse_double(a.noise_len));
  spec.n_samples = a.samples;
  spec.seed = s.globals().seed;
  const auto mix = qdfit::noise_mix_sample(pool, spec);
  qdfit::write_corpus(s.out(), mix.corpus);
  if (!a.mask.empty()) {
    std::ofstream m(a.mask);
    if (!m) throw DataError("cannot write mask '" + a.mask + "'");
    for (bool b : mix.is_noise) m << (b ? 1 : 0) << '\n';
    s.note_output(a.mask);
  }
  return kExitOk;
}

// --- dist ---------------------------------------------------------------

struct DistArgs {
  std::string kind = "toy";
  std::size_t categories = 20;
  qdfit::OracleSpec oracle;
  double temper = 1.0;
};

int run_dist(const DistArgs& a, Session& s) {
  qdfit::CategoricalDist d = qdfit::uniform_dist(1);
  if (a.kind == "toy") {
    d = qdfit::random_toy(a.categories, s.globals().seed);
  } else if (a.kind == "oracle") {
    qdfit::OracleSpec spec = a.oracle;
    spec.seed = s.globals().seed;
    d = qdfit::oracle_enumerate(spec);
  } else {
    throw Error(ErrorCode::kInvalidArgument, "--kind must be toy or oracle");
  }
  if (a.temper != 1.0) d = qdfit::temper(d, a.temper);
  qdfit::write_dist(s.out(), d);
  return kExitOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNumeric:
    case ErrorCode::kCapacity:
      return kExitNumeric;
    case ErrorCode::kIo:
    case ErrorCode::kEmptyCorpus:
    case ErrorCode::kEmptyDistribution:
    case ErrorCode::kSupportMismatch:
    case ErrorCode::kDegenerateInput:
    case ErrorCode::kImpossible:
    case ErrorCode::kExtrapolationRefused:
      return kExitData;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kUnsupported:
    case ErrorCode::kNotADivergence:
      return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  Globals globals;
  globals.argv.assign(argv, argv + argc);

  CLI::App app{"Quality/diversity metric analysis"};
  app.set_version_flag("--version", QDFIT_VERSION);
  app.require_subcommand(1);
  app.add_option("--seed", globals.seed, "Seed for every random draw")
      ->capture_default_str();
  app.add_option("--threads", globals.threads, "Worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--out", globals.out, "Output file, - for stdout")
      ->capture_default_str();
  app.add_option("--format", globals.format, "Output format")
      ->capture_default_str()
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_flag("--no-timing", globals.no_timing,
               "Omit runtimes and wall-clock stamps");

  std::string command;
  std::function<int(Session&)> action;

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Evaluate metrics on corpora");
  c_eval->add_option("--metric", eval.metric, "cr-nrr, bleu or pair")
      ->capture_default_str();
  c_eval->add_option("--ngram", eval.ngram, "n-gram order")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  c_eval->add_option("--candidates", eval.candidates, "Candidate corpus");
  c_eval->add_option("--refs", eval.refs, "Reference corpus");
  c_eval->add_flag("--lowercase", eval.lowercase, "Lowercase tokens");
  c_eval->add_option("--self-bleu-subsample", eval.self_bleu_subsample,
                     "Candidates used for Self-BLEU (0 = all)")
      ->capture_default_str();
  c_eval->add_option("--pair", eval.pair, "Metric pair id for --metric pair");
  c_eval->add_option("--q", eval.q_path, "Model distribution file");
  c_eval->add_option("--p", eval.p_path, "Reference distribution file");
  c_eval->callback([&] {
    command = "eval";
    action = [&](Session& s) { return run_eval(eval, s); };
  });

  FrontierArgs frontier;
  auto* c_frontier = app.add_subcommand("frontier", "Pareto-frontier sweep");
  c_frontier->add_option("--dist", frontier.dist, "Distribution file")
      ->required();
  c_frontier->add_option("--pair", frontier.pair, "Metric pair id")
      ->capture_default_str();
  c_frontier->add_option("--points", frontier.points, "Number of w values")
      ->capture_default_str();
  c_frontier->add_option("--w-min", frontier.w_min, "Lowest w when B = -inf")
      ->capture_default_str();
  c_frontier->callback([&] {
    command = "frontier";
    action = [&](Session& s) { return run_frontier(frontier, s); };
  });

  QdiscArgs qdisc;
  auto* c_qdisc = app.add_subcommand("qdisc", "Quality discrepancy");
  c_qdisc->add_option("--dist", qdisc.dist, "Distribution file")->required();
  c_qdisc->add_option("--pair", qdisc.pair, "Metric pair id")
      ->capture_default_str();
  c_qdisc->add_option("--metric", qdisc.metric,
                      "Text-space metric BS-n or CN-n (penalty only)");
  c_qdisc->add_option("--method", qdisc.method, "frontier or penalty")
      ->capture_default_str();
  c_qdisc->add_option("--w-min", qdisc.w_min, "Starting lower end of w")
      ->capture_default_str();
  c_qdisc->add_option("--trace", qdisc.trace, "Write the optimizer trace CSV");
  add_penalty_options(c_qdisc, qdisc.penalty);
  c_qdisc->callback([&] {
    command = "qdisc";
    action = [&](Session& s) { return run_qdisc(qdisc, s); };
  });

  SynthArgs synth;
  synth.penalty.trace_stride = 100;
  auto* c_synth = app.add_subcommand("synth", "Oracle QDisc table");
  c_synth->add_option("--sigmas", synth.sigmas, "Comma-separated sigmas")
      ->capture_default_str();
  c_synth->add_option("--vocab", synth.vocab, "Vocabulary size")
      ->capture_default_str();
  c_synth->add_option("--length", synth.length, "Text length")
      ->capture_default_str();
  c_synth->add_option("--hidden", synth.hidden, "Oracle hidden size")
      ->capture_default_str();
  c_synth->add_option("--oracle-seed", synth.oracle_seed, "Oracle weight seed")
      ->capture_default_str();
  c_synth->add_option("--metrics", synth.metrics, "Comma-separated metrics")
      ->capture_default_str();
  c_synth->add_option("--ref-size", synth.ref_size, "References per draw")
      ->capture_default_str();
  c_synth->add_option("--cand-size", synth.cand_size, "Candidates per draw")
      ->capture_default_str();
  c_synth->add_option("--layout", synth.layout, "wide or long CSV")
      ->capture_default_str();
  c_synth->add_option("--trace-dir", synth.trace_dir,
                      "Directory for per-run trace CSVs");
  add_penalty_options(c_synth, synth.penalty);
  c_synth->callback([&] {
    command = "synth";
    action = [&](Session& s) { return run_synth(synth, s); };
  });

  SweepArgs sweep;
  auto* c_sweep = app.add_subcommand("sweep-epsilon", "Noise-mixture curves");
  c_sweep->add_option("--pool", sweep.pool,
                      "Sentences the mixtures are drawn from (default: --refs)");
  c_sweep->add_option("--candidates", sweep.candidates,
                      "Real or generated text scored as the real point")
      ->required();
  c_sweep->add_option("--refs", sweep.refs, "Reference set")->required();
  c_sweep->add_option("--epsilons", sweep.epsilons, "Comma-separated epsilons")
      ->capture_default_str();
  c_sweep->add_option("--orders", sweep.orders, "Comma-separated orders")
      ->capture_default_str();
  c_sweep->add_option("--noise-lengths", sweep.noise_lengths,
                      "Comma-separated noise lengths; max = longest reference")
      ->capture_default_str();
  c_sweep->add_option("--samples", sweep.samples,
                      "Mixture size (0 = candidate set size)")
      ->capture_default_str();
  c_sweep->add_option("--self-bleu-subsample", sweep.self_bleu_subsample,
                      "Sentences used for Self-BLEU")
      ->capture_default_str();
  c_sweep->add_flag("--no-bleu", sweep.no_bleu, "Skip BLEU/NSBLEU");
  c_sweep->add_flag("--lowercase", sweep.lowercase, "Lowercase tokens");
  c_sweep->add_option("--report", sweep.report, "Write QDisc reports as JSON");
  c_sweep->callback([&] {
    command = "sweep-epsilon";
    action = [&](Session& s) { return run_sweep(sweep, s); };
  });

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Filter a raw corpus");
  c_ingest->add_option("--input", ingest.input, "Raw corpus")->required();
  c_ingest->add_option("--min-freq", ingest.min_freq, "Minimum token frequency")
      ->capture_default_str();
  c_ingest->add_option("--max-len", ingest.max_len,
                       "Maximum sentence length (0 = none)")
      ->capture_default_str();
  c_ingest->add_option("--min-len", ingest.min_len, "Minimum sentence length")
      ->capture_default_str();
  c_ingest->add_flag("--lowercase", ingest.lowercase, "Lowercase tokens");
  c_ingest->callback([&] {
    command = "ingest";
    action = [&](Session& s) { return run_ingest(ingest, s); };
  });

  SplitArgs split;
  auto* c_split = app.add_subcommand("split", "Disjoint random subsets");
  c_split->add_option("--input", split.input, "Corpus")->required();
  c_split->add_option("--sizes", split.sizes, "Comma-separated sizes")
      ->required();
  c_split->add_option("--out-prefix", split.prefix, "Output path prefix")
      ->required();
  c_split->add_flag("--lowercase", split.lowercase, "Lowercase tokens");
  c_split->callback([&] {
    command = "split";
    action = [&](Session& s) { return run_split(split, s); };
  });

  MixArgs mix;
  auto* c_mix = app.add_subcommand("mix", "Noise-mixture sample");
  c_mix->add_option("--pool", mix.pool, "Corpus to resample")->required();
  c_mix->add_option("--epsilon", mix.epsilon, "Noise probability")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  c_mix->add_option("--noise-len", mix.noise_len, "Noise length or max")
      ->capture_default_str();
  c_mix->add_option("--samples", mix.samples, "Number of sentences")
      ->capture_default_str();
  c_mix->add_option("--mask", mix.mask, "Write 0/1 noise indicators");
  c_mix->add_flag("--lowercase", mix.lowercase, "Lowercase tokens");
  c_mix->callback([&] {
    command = "mix";
    action = [&](Session& s) { return run_mix(mix, s); };
  });

  DistArgs dist;
  auto* c_dist = app.add_subcommand("dist", "Write a toy or oracle distribution");
  c_dist->add_option("--kind", dist.kind, "toy or oracle")
      ->capture_default_str();
  c_dist->add_option("--categories", dist.categories, "Toy size")
      ->capture_default_str();
  c_dist->add_option("--vocab", dist.oracle.vocab_size, "Oracle vocabulary")
      ->capture_default_str();
  c_dist->add_option("--length", dist.oracle.length, "Oracle text length")
      ->capture_default_str();
  c_dist->add_option("--hidden", dist.oracle.hidden_dim, "Oracle hidden size")
      ->capture_default_str();
  c_dist->add_option("--sigma", dist.oracle.sigma, "Oracle weight std-dev")
      ->capture_default_str();
  c_dist->add_option("--temper", dist.temper, "Raise to this power")
      ->capture_default_str();
  c_dist->callback([&] {
    command = "dist";
    action = [&](Session& s) { return run_dist(dist, s); };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    Session session(globals);
    const int rc = action(session);
    session.finish(command);
    return rc;
  } catch (const DataError& e) {
    std::cerr << "qdfit: data error: " << e.what() << '\n';
    return kExitData;
  } catch (const Error& e) {
    std::cerr << "qdfit: " << qdfit::error_code_name(e.code()) << ": "
              << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "qdfit: " << e.what() << '\n';
    return kExitData;
  }
}
