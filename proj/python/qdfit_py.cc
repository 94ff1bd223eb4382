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

#include <pybind11/pybind11.h>
#include <pybind11/operators.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "qdfit/bleu.h"
#include "qdfit/compat.h"
#include "qdfit/distribution.h"
#include "qdfit/error.h"
#include "qdfit/experiments.h"
#include "qdfit/functional.h"
#include "qdfit/metric_pair.h"
#include "qdfit/ngram.h"
#include "qdfit/pareto.h"

namespace py = pybind11;
using namespace qdfit;

namespace {

CategoricalDist make_dist(std::vector<double> probs,
                          std::vector<Sentence> labels) {
  return CategoricalDist::from_probabilities(std::move(probs), std::move(labels));
}

py::dict report_dict(const CompatReport& r) {
  py::dict d;
  d["qdisc"] = r.qdisc;
  d["drate"] = r.drate;
  d["denominator"] = r.denominator;
  d["self_ratio"] = r.self_ratio ? py::cast(*r.self_ratio) : py::none();
  d["ref_ratio"] = r.ref_ratio ? py::cast(*r.ref_ratio) : py::none();
  d["method"] = compat_method_name(r.method);
  d["witness"] = r.witness ? py::cast(*r.witness) : py::none();
  d["feasible"] = r.feasible;
  d["u_real"] = r.u_real;
  d["v_real"] = r.v_real;
  d["w_star"] = r.w_star ? py::cast(*r.w_star) : py::none();
  py::list trace;
  for (const auto& t : r.trace) {
    trace.append(py::make_tuple(t.restart, t.step, t.u, t.v, t.objective));
  }
  d["trace"] = trace;
  return d;
}

NGramDist table_from_dict(int order, const py::dict& items) {
  NGramDist::Table t;
  for (const auto& [k, v] : items) {
    t.emplace(k.cast<Gram>(), v.cast<double>());
  }
  return NGramDist::from_probabilities(order, std::move(t));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Quality/diversity metric analysis as distribution fitting";
  m.attr("__version__") = QDFIT_VERSION;

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result([&]() {
    return py::object(py::exception<Error>(m, "Error", PyExc_RuntimeError));
  });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object type = error_type.get_stored();
      py::object inst = type(e.what());
      inst.attr("code") = std::string(error_code_name(e.code()));
      PyErr_SetObject(type.ptr(), inst.ptr());
    }
  });

  // distribution
  py::class_<CategoricalDist>(m, "CategoricalDist")
      .def(py::init(&make_dist), py::arg("probs"),
           py::arg("labels") = std::vector<Sentence>{})
      .def_static("from_weights", &CategoricalDist::from_weights,
                  py::arg("weights"), py::arg("labels") = std::vector<Sentence>{})
      .def_property_readonly("probs", [](const CategoricalDist& d) {
        return std::vector<double>(d.probs().begin(), d.probs().end());
      })
      .def_property_readonly("labels", &CategoricalDist::labels)
      .def("__len__", &CategoricalDist::size)
      .def("__getitem__", [](const CategoricalDist& d, std::size_t i) {
        if (i >= d.size()) throw py::index_error();
        return d[i];
      })
      .def(py::self == py::self)
      .def("__repr__", [](const CategoricalDist& d) {
        return "<CategoricalDist n=" + std::to_string(d.size()) + ">";
      });

  py::class_<OracleSpec>(m, "OracleSpec")
      .def(py::init<>())
      .def_readwrite("vocab_size", &OracleSpec::vocab_size)
      .def_readwrite("length", &OracleSpec::length)
      .def_readwrite("hidden_dim", &OracleSpec::hidden_dim)
      .def_readwrite("sigma", &OracleSpec::sigma)
      .def_readwrite("seed", &OracleSpec::seed);

  m.def("uniform_dist", &uniform_dist, py::arg("n"));
  m.def("one_hot", &one_hot, py::arg("n"), py::arg("index"));
  m.def("random_toy", &random_toy, py::arg("n_categories"), py::arg("seed"));
  m.def("oracle_enumerate", &oracle_enumerate, py::arg("spec"));
  m.def("temper", &temper, py::arg("dist"), py::arg("beta"));
  m.def("mix_with_noise", &mix_with_noise, py::arg("base"), py::arg("epsilon"),
        py::arg("noise"));
  m.def("entropy", &entropy);
  m.def("total_variation", &total_variation);

  // metric pairs
  py::class_<MetricPair>(m, "MetricPair")
      .def(py::init(&pair_from_id), py::arg("id"))
      .def_property_readonly("name", &MetricPair::name)
      .def_property_readonly("params", &MetricPair::params)
      .def_property_readonly("frontier_eligible", &MetricPair::frontier_eligible)
      .def("f", &MetricPair::f)
      .def("g", &MetricPair::g)
      .def("g_prime", &MetricPair::g_prime)
      .def("__repr__", [](const MetricPair& p) {
        return "<MetricPair " + p.name() + ">";
      });
  m.def("builtin_pair_ids", &builtin_pair_ids);
  m.def("quality", &quality, py::arg("pair"), py::arg("q"), py::arg("p"));
  m.def("diversity", &diversity, py::arg("pair"), py::arg("q"));
  m.def("divergence", &divergence, py::arg("pair"), py::arg("q"), py::arg("p"));
  m.def("compatibility", [](const MetricPair& pair, int grid) {
    const auto c = compatibility_analytic(pair, grid);
    py::dict d;
    d["compatible"] = c.compatible;
    d["w0"] = c.w0;
    d["b0"] = c.b0;
    d["max_residual"] = c.max_residual;
    d["alpha"] = c.alpha();
    return d;
  }, py::arg("pair"), py::arg("grid_size") = 256);
  m.def("check_rationality", [](const MetricPair& pair, int grid,
                                std::size_t trials, std::uint64_t seed) {
    const auto r = check_rationality(pair, grid, trials, seed);
    py::dict d;
    d["passed"] = r.passed;
    d["violated"] = r.violated;
    d["witness"] = r.witness ? py::cast(*r.witness) : py::none();
    d["perturbation_trials"] = r.perturbation_trials;
    d["perturbation_violations"] = r.perturbation_violations;
    return d;
  }, py::arg("pair"), py::arg("grid_size") = 64, py::arg("trials") = 1000,
        py::arg("seed") = 0);

  // frontier
  py::class_<FrontierPoint>(m, "FrontierPoint")
      .def_readonly("w", &FrontierPoint::w)
      .def_readonly("b", &FrontierPoint::b)
      .def_readonly("q", &FrontierPoint::q)
      .def_readonly("u", &FrontierPoint::u)
      .def_readonly("v", &FrontierPoint::v);
  m.def("solve_b", &solve_b, py::arg("pair"), py::arg("p"), py::arg("w"));
  m.def("frontier_point", &frontier_point, py::arg("pair"), py::arg("p"),
        py::arg("w"));
  m.def("compute_bound", &compute_bound, py::arg("pair"), py::arg("p"));
  m.def("sweep", [](const MetricPair& pair, const CategoricalDist& p, int n,
                    double w_min) {
    auto s = sweep(pair, p, n, w_min);
    return py::make_tuple(s.points, s.bound);
  }, py::arg("pair"), py::arg("p"), py::arg("n_points"), py::arg("w_min") = -50.0);

  // compatibility measurement
  py::class_<Functional, std::shared_ptr<Functional>>(m, "Functional")
      .def_property_readonly("dim", &Functional::dim)
      .def("__call__", [](const Functional& f, const CategoricalDist& q) {
        return f.value(q);
      });
  m.def("general_quality", [](const MetricPair& pair, const CategoricalDist& p) {
    return std::const_pointer_cast<Functional>(general_quality(pair, p));
  });
  m.def("general_diversity", [](const MetricPair& pair, std::size_t dim) {
    return std::const_pointer_cast<Functional>(general_diversity(pair, dim));
  });
  m.def("synth_functionals", [](const std::string& id, const CategoricalDist& p,
                                int ref_size, int cand_size) {
    auto f = synth_functionals(id, p, ref_size, cand_size);
    return py::make_tuple(std::const_pointer_cast<Functional>(f.quality),
                          std::const_pointer_cast<Functional>(f.diversity));
  }, py::arg("metric"), py::arg("p"), py::arg("ref_size") = 2,
        py::arg("cand_size") = 2);

  py::class_<PenaltyConfig>(m, "PenaltyConfig")
      .def(py::init<>())
      .def_readwrite("lam", &PenaltyConfig::lambda)
      .def_readwrite("learning_rate", &PenaltyConfig::learning_rate)
      .def_readwrite("momentum", &PenaltyConfig::momentum)
      .def_readwrite("max_steps", &PenaltyConfig::max_steps)
      .def_readwrite("seed", &PenaltyConfig::seed)
      .def_readwrite("restarts", &PenaltyConfig::restarts)
      .def_readwrite("monotone", &PenaltyConfig::monotone)
      .def_readwrite("trace_stride", &PenaltyConfig::trace_stride);

  m.def("qdisc_frontier", [](const MetricPair& pair, const CategoricalDist& p,
                             double w_min) {
    return report_dict(qdisc_frontier(pair, p, w_min));
  }, py::arg("pair"), py::arg("p"), py::arg("w_min") = -50.0);
  m.def("qdisc_penalty", [](const std::shared_ptr<Functional>& u,
                            const std::shared_ptr<Functional>& v,
                            const CategoricalDist& p, const PenaltyConfig& cfg) {
    return report_dict(qdisc_penalty(u, v, p, cfg));
  }, py::arg("quality"), py::arg("diversity"), py::arg("p"),
        py::arg("config") = PenaltyConfig{});
  m.def("qdisc_curve_interp", [](const std::vector<std::pair<double, double>>& curve,
                                 std::pair<double, double> real,
                                 const std::vector<std::optional<double>>& eps,
                                 double denominator) {
    std::vector<CurvePoint> pts;
    for (std::size_t i = 0; i < curve.size(); ++i) {
      pts.push_back({curve[i].first, curve[i].second,
                     i < eps.size() ? eps[i] : std::nullopt});
    }
    return report_dict(
        qdisc_curve_interp(pts, {real.first, real.second, std::nullopt}, denominator));
  }, py::arg("curve"), py::arg("real"),
        py::arg("epsilons") = std::vector<std::optional<double>>{},
        py::arg("denominator") = 1.0);

  // BLEU
  m.def("corpus_bleu", [](const std::vector<Sentence>& c,
                          const std::vector<Sentence>& r, int max_order,
                          bool brevity) {
    BleuConfig cfg;
    cfg.max_order = max_order;
    cfg.brevity_penalty = brevity ? BrevityPenalty::kStandard : BrevityPenalty::kOff;
    return corpus_bleu(c, r, cfg);
  }, py::arg("candidates"), py::arg("references"), py::arg("max_order") = 4,
        py::arg("brevity_penalty") = true);
  m.def("self_bleu", [](const std::vector<Sentence>& c, int max_order) {
    BleuConfig cfg;
    cfg.max_order = max_order;
    return self_bleu(c, cfg);
  }, py::arg("candidates"), py::arg("max_order") = 4);
  m.def("expected_unigram_bleu", &expected_unigram_bleu, py::arg("q"),
        py::arg("p"), py::arg("ref_size"));
  m.def("expected_nsbleu_unigram", &expected_nsbleu_unigram, py::arg("q"),
        py::arg("cand_size"));
  m.def("expected_bleu_enumerate", [](const CategoricalDist& q,
                                      const CategoricalDist& p, int cands,
                                      int refs, int max_order) {
    EnumSpec spec{q, p, cands, refs, {}};
    spec.config.max_order = max_order;
    return expected_bleu_enumerate(spec);
  }, py::arg("q"), py::arg("p"), py::arg("m") = 1, py::arg("n") = 2,
        py::arg("max_order") = 4);

  // n-grams
  py::class_<NGramDist>(m, "NGramDist")
      .def_static("from_dict", &table_from_dict, py::arg("order"), py::arg("table"))
      .def_property_readonly("order", &NGramDist::order)
      .def_property_readonly("total_count", &NGramDist::total_count)
      .def("__len__", &NGramDist::size)
      .def("probability", &NGramDist::probability)
      .def("to_dict", [](const NGramDist& d) {
        py::dict out;
        for (const auto& [g, p] : d.table()) out[py::tuple(py::cast(g))] = p;
        return out;
      });
  m.def("ngram_dist", &ngram_dist, py::arg("corpus"), py::arg("order"));
  m.def("cr", &cr);
  m.def("nrr", &nrr);
  m.def("cnd", &cnd);
  m.def("psi_n", &psi_n);
}
