#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <chrono>
#include <memory>

#include "halueval/corpus.hpp"
#include "halueval/decompose.hpp"
#include "halueval/error.hpp"
#include "halueval/metrics.hpp"
#include "halueval/pipeline.hpp"
#include "halueval/retrieve.hpp"
#include "halueval/score.hpp"
#include "halueval/text.hpp"

namespace py = pybind11;
using namespace halueval;

namespace {

PyObject* g_error_type = nullptr;

void translate_error(std::exception_ptr p) {
  try {
    if (p) std::rethrow_exception(p);
  } catch (const Error& e) {
    py::object inst = py::reinterpret_borrow<py::object>(g_error_type)(e.what());
    inst.attr("code") = std::string(errc_name(e.code()));
    inst.attr("subject") = e.subject();
    PyErr_SetObject(g_error_type, inst.ptr());
  }
}

std::unique_ptr<ScorerBackend> backend_for(const std::optional<std::string>& endpoint,
                                           std::size_t batch_size, std::size_t timeout_ms) {
  if (!endpoint) return std::make_unique<BaselineScorer>();
  return std::make_unique<RemoteScorer>(
      RemoteOptions{*endpoint, batch_size, std::chrono::milliseconds(timeout_ms)});
}

std::vector<std::string> substrings(std::string_view text, const std::vector<CharRange>& ranges) {
  std::vector<std::string> out;
  out.reserve(ranges.size());
  for (const auto& r : ranges) out.emplace_back(text.substr(r.begin, r.size()));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hallucination detection and evaluation toolkit";

  g_error_type = PyErr_NewException("halueval.Error", PyExc_RuntimeError, nullptr);
  m.add_object("Error", py::handle(g_error_type));
  py::register_exception_translator(&translate_error);

  py::enum_<Task>(m, "Task").value("QA", Task::QA).value("Summarization", Task::Summarization);
  py::enum_<GoldLabel>(m, "GoldLabel")
      .value("Hallucinated", GoldLabel::Hallucinated)
      .value("Faithful", GoldLabel::Faithful);
  py::enum_<Label>(m, "Label")
      .value("Hallucinated", Label::Hallucinated)
      .value("Faithful", Label::Faithful)
      .value("NonAnswer", Label::NonAnswer);

  py::class_<Sample>(m, "Sample")
      .def(py::init<>())
      .def_readwrite("id", &Sample::id)
      .def_readwrite("task", &Sample::task)
      .def_readwrite("knowledge", &Sample::knowledge)
      .def_readwrite("question", &Sample::question)
      .def_readwrite("generation", &Sample::generation)
      .def_readwrite("gold_label", &Sample::gold_label)
      .def("__repr__", [](const Sample& s) { return "<Sample " + s.id + ">"; });

  py::class_<Dataset>(m, "Dataset")
      .def(py::init<>())
      .def_readwrite("samples", &Dataset::samples)
      .def_readwrite("task", &Dataset::task)
      .def_readwrite("origin", &Dataset::origin)
      .def("__len__", &Dataset::size)
      .def("has_gold_labels", &Dataset::has_gold_labels);

  m.def("ingest_dataset", &ingest_dataset, py::arg("path"), py::arg("task"));
  m.def("parse_dataset", &parse_dataset, py::arg("content"), py::arg("task"),
        py::arg("origin") = std::string{});
  m.def("convert_halueval", &convert_halueval, py::arg("content"), py::arg("task"),
        py::arg("origin") = std::string{},
        "Each native HaluEval record becomes a faithful and a hallucinated sample.");
  m.def("subsample", &subsample, py::arg("dataset"), py::arg("n"), py::arg("seed"));

  m.def("tokenize", &text::tokenize, py::arg("text"));
  m.def(
      "split_sentences",
      [](const std::string& s) { return substrings(s, text::split_sentences(s)); },
      py::arg("text"));

  m.def(
      "decompose_qa",
      [](const std::string& question, const std::string& answer) {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& q : decompose_qa(question, answer))
          out.emplace_back(std::string(to_string(q.kind)), q.text);
        return out;
      },
      py::arg("question"), py::arg("answer"),
      "Sub-queries as (kind, text) pairs in step order.");
  m.def(
      "segment_summary",
      [](const std::string& summary) {
        std::vector<std::string> out;
        for (const auto& s : segment_summary(summary)) out.push_back(s.text);
        return out;
      },
      py::arg("summary"));

  m.def(
      "retrieve",
      [](const std::vector<std::pair<std::string, std::string>>& documents,
         const std::string& query, std::size_t k) {
        std::vector<Document> docs;
        for (const auto& [id, body] : documents) docs.push_back({id, body, 0});
        const auto index = build_index(std::move(docs));
        RetrieverConfig config;
        config.k = k;
        py::list out;
        for (const auto& item : retrieve(index, query, config)) {
          py::list triplets;
          for (const auto& t : item.triplets)
            triplets.append(py::make_tuple(t.subject, t.relation, t.object));
          py::dict d;
          d["doc_id"] = item.doc_id;
          d["score"] = item.score;
          d["snippet"] = item.snippet;
          d["triplets"] = triplets;
          out.append(d);
        }
        return out;
      },
      py::arg("documents"), py::arg("query"), py::arg("k") = 3,
      "BM25 over (doc_id, text) pairs; returns hits best first.");

  m.def("baseline_score", &baseline_score, py::arg("premise"), py::arg("hypothesis"));
  m.def(
      "aggregate_segments",
      [](double raw, const std::vector<double>& segments, double segment_threshold,
         double halving_factor) {
        return aggregate_segments(raw, segments, segment_threshold, halving_factor);
      },
      py::arg("raw_score"), py::arg("segment_scores"), py::arg("segment_threshold") = 0.5,
      py::arg("halving_factor") = 0.5);
  m.def("classify", &classify, py::arg("adjusted_score"), py::arg("threshold"),
        py::arg("fabricated") = false);
  m.def("fabrication_anchors", &fabrication_anchors, py::arg("hypothesis"),
        py::arg("knowledge"));
  m.def("non_fabrication_check", &non_fabrication_check, py::arg("hypothesis"),
        py::arg("knowledge"));

  py::class_<JudgeConfig>(m, "JudgeConfig")
      .def(py::init<>())
      .def_readwrite("threshold", &JudgeConfig::threshold)
      .def_readwrite("segmented", &JudgeConfig::segmented)
      .def_readwrite("non_fabrication", &JudgeConfig::non_fabrication)
      .def_readwrite("segment_threshold", &JudgeConfig::segment_threshold)
      .def_readwrite("halving_factor", &JudgeConfig::halving_factor)
      .def_readwrite("knowledge_budget", &JudgeConfig::knowledge_budget)
      .def_property(
          "k", [](const JudgeConfig& c) { return c.retriever.k; },
          [](JudgeConfig& c, std::size_t k) { c.retriever.k = k; });

  py::class_<ConsistencyJudgment>(m, "ConsistencyJudgment")
      .def_readonly("sample_id", &ConsistencyJudgment::sample_id)
      .def_readonly("raw_score", &ConsistencyJudgment::raw_score)
      .def_readonly("adjusted_score", &ConsistencyJudgment::adjusted_score)
      .def_readonly("fabricated", &ConsistencyJudgment::fabricated)
      .def_readonly("label", &ConsistencyJudgment::label)
      .def_readonly("threshold", &ConsistencyJudgment::threshold)
      .def_property_readonly("segment_scores", [](const ConsistencyJudgment& j) {
        std::vector<double> out;
        for (const auto& s : j.segment_scores) out.push_back(s.score);
        return out;
      });

  m.def(
      "judge_sample",
      [](const Sample& sample, const JudgeConfig& config, std::optional<std::string> endpoint,
         std::size_t batch_size, std::size_t timeout_ms) {
        auto backend = backend_for(endpoint, batch_size, timeout_ms);
        py::gil_scoped_release release;
        return judge_sample(sample, *backend, config);
      },
      py::arg("sample"), py::arg("config") = JudgeConfig{}, py::arg("endpoint") = py::none(),
      py::arg("batch_size") = 16, py::arg("timeout_ms") = 30000,
      "Judges one sample with the baseline scorer, or the remote scorer when endpoint is set.");

  py::class_<MetricsReport>(m, "MetricsReport")
      .def_readonly("tp", &MetricsReport::tp)
      .def_readonly("fp", &MetricsReport::fp)
      .def_readonly("tn", &MetricsReport::tn)
      .def_readonly("fn", &MetricsReport::fn)
      .def_readonly("tpr", &MetricsReport::tpr)
      .def_readonly("tnr", &MetricsReport::tnr)
      .def_readonly("accuracy", &MetricsReport::accuracy)
      .def_readonly("f1", &MetricsReport::f1)
      .def_readonly("n_samples", &MetricsReport::n_samples)
      .def_readonly("n_nonanswer", &MetricsReport::n_nonanswer);

  m.def("metrics_from_counts", &metrics_from_counts, py::arg("tp"), py::arg("fp"), py::arg("tn"),
        py::arg("fn"));

  m.def(
      "evaluate",
      [](const Dataset& dataset, const JudgeConfig& config, std::size_t workers,
         std::optional<std::string> endpoint, std::size_t batch_size, std::size_t timeout_ms) {
        auto backend = backend_for(endpoint, batch_size, timeout_ms);
        Evaluation evaluation;
        {
          py::gil_scoped_release release;
          evaluation = evaluate(dataset, *backend, config, workers);
        }
        std::vector<ConsistencyJudgment> judgments;
        for (const auto& r : evaluation.records) judgments.push_back(r.judgment);
        py::dict out;
        out["judgments"] = judgments;
        out["metrics"] = evaluation.metrics ? py::cast(*evaluation.metrics) : py::none();
        return out;
      },
      py::arg("dataset"), py::arg("config") = JudgeConfig{}, py::arg("workers") = 1,
      py::arg("endpoint") = py::none(), py::arg("batch_size") = 16,
      py::arg("timeout_ms") = 30000,
      "Judges every sample; returns judgments sorted by id and metrics when labeled.");

  m.def("default_grid", &default_grid);
  m.def(
      "sweep_threshold",
      [](const std::vector<double>& scores, const std::vector<GoldLabel>& gold,
         std::optional<std::vector<double>> grid, std::optional<std::vector<bool>> fabricated) {
        if (gold.size() != scores.size() || (fabricated && fabricated->size() != scores.size()))
          throw Error(Errc::InvalidArgument, "scores, gold and fabricated differ in length");
        std::vector<ScoredExample> scored(scores.size());
        for (std::size_t i = 0; i < scores.size(); ++i)
          scored[i] = {scores[i], gold[i], fabricated ? (*fabricated)[i] : false};
        const auto g = grid ? *grid : default_grid();
        const auto result = sweep_threshold(scored, g);
        py::list curve;
        for (const auto& p : result.curve)
          curve.append(py::make_tuple(p.tau, p.tpr, p.tnr, p.f1));
        py::dict out;
        out["best_tau"] = result.best_tau;
        out["best_f1"] = result.best_f1;
        out["curve"] = curve;
        return out;
      },
      py::arg("scores"), py::arg("gold"), py::arg("grid") = py::none(),
      py::arg("fabricated") = py::none());

  m.def(
      "compute_cdf",
      [](const std::vector<double>& scores) {
        std::vector<std::pair<double, double>> out;
        for (const auto& p : compute_cdf(scores).points) out.emplace_back(p.score, p.fraction);
        return out;
      },
      py::arg("scores"), "Distinct scores with the fraction of scores at or below each.");

  m.def(
      "length_stats",
      [](const std::vector<std::pair<std::string, std::string>>& generations) {
        const auto s = length_stats(generations);
        py::dict out;
        out["min"] = s.min;
        out["q1"] = s.q1;
        out["median"] = s.median;
        out["q3"] = s.q3;
        out["max"] = s.max;
        out["outliers"] = s.outliers;
        return out;
      },
      py::arg("generations"), "Word-count quartiles over (id, text) pairs.");
}
