#include <doctest.h>

#include <atomic>
#include <sstream>

#include <json.hpp>

#include "halueval/config.hpp"
#include "halueval/error.hpp"
#include "halueval/pipeline.hpp"
#include "support/errors.hpp"
#include "support/temp_dir.hpp"

using namespace halueval;
using halueval::testing::data_path;
using halueval::testing::error_code_of;
using halueval::testing::read_file;
using halueval::testing::TempDir;

namespace {

Evaluation run_fixture(const std::string& file, Task task, JudgeConfig judge, std::size_t workers) {
  const auto ds = ingest_dataset(data_path(file), task);
  BaselineScorer scorer;
  return evaluate(ds, scorer, judge, workers);
}

const JudgmentRecord& record(const Evaluation& ev, const std::string& id) {
  for (const auto& r : ev.records) {
    if (r.judgment.sample_id == id) return r;
  }
  throw std::runtime_error("no record " + id);
}

}  // namespace

TEST_CASE("parse_config_text") {
  const auto kv = parse_config_text(
      "# run settings\n"
      "dataset = \"data/qa.jsonl\"\n"
      "Batch-Size=8   # inline comment\n"
      "\n"
      "abbreviations = [Dr, \"Prof\"]\n");
  CHECK(kv.at("dataset") == "data/qa.jsonl");
  CHECK(kv.at("batch_size") == "8");
  CHECK(parse_list(kv.at("abbreviations")) == std::vector<std::string>{"Dr", "Prof"});
  CHECK(error_code_of([] { parse_config_text("no equals sign"); }) == Errc::Config);
}

TEST_CASE("apply_config and validate") {
  RunConfig cfg;
  apply_config(cfg, {{"threshold", "0.4"},
                     {"segmented", "true"},
                     {"non-fabrication", "yes"},
                     {"retriever.k", "5"},
                     {"retriever.k1", "1.5"},
                     {"knowledge.form", "structured"},
                     {"task", "summarization"},
                     {"limit", "100"},
                     {"workers", "4"},
                     {"verbs", "[authored]"}});
  CHECK(cfg.judge.threshold == 0.4);
  CHECK(cfg.judge.segmented);
  CHECK(cfg.judge.non_fabrication);
  CHECK(cfg.judge.retriever.k == 5);
  CHECK(cfg.judge.retriever.bm25.k1 == 1.5);
  CHECK(cfg.judge.knowledge_form == KnowledgeForm::Structured);
  CHECK(cfg.task == Task::Summarization);
  CHECK(cfg.limit == 100u);
  CHECK(cfg.workers == 4);
  CHECK(cfg.judge.retriever.verb_lexicon.back() == "authored");
  CHECK_NOTHROW(cfg.validate());

  CHECK(error_code_of([&] { apply_config(cfg, {{"bogus", "1"}}); }) == Errc::Config);
  CHECK(error_code_of([&] { apply_config(cfg, {{"threshold", "abc"}}); }) == Errc::Config);
  RunConfig bad;
  bad.judge.threshold = 1.5;
  CHECK(error_code_of([&] { bad.validate(); }) == Errc::Config);
  bad = RunConfig{};
  bad.workers = 0;
  CHECK(error_code_of([&] { bad.validate(); }) == Errc::Config);
}

TEST_CASE("judgment json round-trip") {
  JudgmentRecord r;
  r.judgment.sample_id = "q\"1";
  r.judgment.raw_score = 0.8333333333333334;
  r.judgment.adjusted_score = 0.4166666666666667;
  r.judgment.segment_scores = {{0, 1.0}, {1, 0.25}};
  r.judgment.fabricated = true;
  r.judgment.label = Label::Hallucinated;
  r.judgment.threshold = 0.5;
  r.gold = GoldLabel::Faithful;
  r.generation_words = 7;
  const auto line = judgment_to_json(r);
  CHECK(judgment_from_json(line) == r);
  CHECK(line.find("\"id\"") < line.find("\"label\""));
  r.gold.reset();
  CHECK(judgment_from_json(judgment_to_json(r)) == r);
}

TEST_CASE("parallel_for covers every index and reports the lowest failure") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 8, [&](std::size_t i) { ++hits[i]; });
  for (const auto& h : hits) CHECK(h == 1);

  try {
    parallel_for(100, 4, [](std::size_t i) {
      if (i == 17 || i == 60) throw Error(Errc::InvalidArgument, "boom", std::to_string(i));
    });
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.subject() == "17");
  }
  CHECK_NOTHROW(parallel_for(0, 4, [](std::size_t) { FAIL("not called"); }));
}

// Golden values below were computed by tests/oracle/oracle.py.

TEST_CASE("QA fixture: baseline golden metrics") {
  const auto ev = run_fixture("qa_synthetic_50.jsonl", Task::QA, JudgeConfig{}, 1);
  REQUIRE(ev.records.size() == 50);
  REQUIRE(ev.metrics.has_value());
  const auto& m = *ev.metrics;
  CHECK(m.tp == 7);
  CHECK(m.fn == 16);
  CHECK(m.tn == 22);
  CHECK(m.fp == 3);
  CHECK(m.n_nonanswer == 2);
  CHECK(m.n_samples == 50);
  CHECK(m.tpr == doctest::Approx(7.0 / 23));
  CHECK(m.tnr == doctest::Approx(22.0 / 25));

  CHECK(record(ev, "qa000").judgment.raw_score == doctest::Approx(1.0 / 6));
  CHECK(record(ev, "qa003").judgment.raw_score == 0.5);
  CHECK(record(ev, "qa005").judgment.raw_score == doctest::Approx(6.0 / 7));
  CHECK(record(ev, "qa018").judgment.raw_score == doctest::Approx(0.75));
  CHECK(record(ev, "qa001").judgment.raw_score == 1.0);
  CHECK(record(ev, "qa008").judgment.raw_score == 0.0);
  CHECK(record(ev, "qa012").judgment.label == Label::NonAnswer);
  CHECK(record(ev, "qa013").judgment.label == Label::NonAnswer);
}

TEST_CASE("QA fixture: non-fabrication golden metrics") {
  JudgeConfig judge;
  judge.non_fabrication = true;
  const auto ev = run_fixture("qa_synthetic_50.jsonl", Task::QA, judge, 4);
  REQUIRE(ev.metrics.has_value());
  CHECK(ev.metrics->tp == 20);
  CHECK(ev.metrics->fn == 3);
  CHECK(ev.metrics->tn == 22);
  CHECK(ev.metrics->fp == 3);
}

TEST_CASE("summarization fixture: segmented detection beats whole-summary scoring") {
  JudgeConfig plain;
  const auto whole = run_fixture("summarization_synthetic_20.jsonl", Task::Summarization, plain, 2);
  JudgeConfig seg;
  seg.segmented = true;
  const auto split = run_fixture("summarization_synthetic_20.jsonl", Task::Summarization, seg, 2);
  REQUIRE(whole.metrics.has_value());
  REQUIRE(split.metrics.has_value());
  CHECK(whole.metrics->tp == 3);
  CHECK(whole.metrics->fn == 7);
  CHECK(whole.metrics->tn == 10);
  CHECK(split.metrics->tp == 7);
  CHECK(split.metrics->fn == 3);
  CHECK(split.metrics->tn == 10);
  CHECK(split.metrics->tpr > whole.metrics->tpr);
  for (const auto& r : split.records) {
    CHECK(r.judgment.adjusted_score <= r.judgment.raw_score);
    CHECK(r.judgment.segment_scores.size() == 3);
  }
}

TEST_CASE("evaluate is independent of the worker count") {
  RunConfig cfg;
  cfg.dataset = data_path("qa_synthetic_50.jsonl");
  JudgeConfig judge;
  judge.segmented = true;
  judge.non_fabrication = true;
  const auto one = run_fixture("qa_synthetic_50.jsonl", Task::QA, judge, 1);
  for (std::size_t w : {3u, 8u, 64u}) {
    const auto many = run_fixture("qa_synthetic_50.jsonl", Task::QA, judge, w);
    CHECK(judgments_jsonl(many.records) == judgments_jsonl(one.records));
    CHECK(report_json(many, cfg) == report_json(one, cfg));
  }
}

TEST_CASE("evaluate wraps failures with the sample id") {
  Dataset ds = parse_dataset(
      R"({"id":"a","knowledge":"K one.","question":"Q?","generation":"x"})"
      "\n"
      R"({"id":"b","knowledge":"K two.","question":"Q?","generation":"y"})",
      Task::QA);
  class Broken final : public ScorerBackend {
   public:
    std::vector<double> score_batch(std::span<const ScoreRequest> r) override {
      if (r[0].hypothesis == "y") throw Error(Errc::Timeout, "slow");
      return std::vector<double>(r.size(), 0.5);
    }
    std::string identity() const override { return "broken"; }
  } broken;
  try {
    evaluate(ds, broken, JudgeConfig{}, 2);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Timeout);
    CHECK(e.subject() == "b");
  }
}

TEST_CASE("cmd_evaluate writes artifacts") {
  TempDir dir;
  RunConfig cfg;
  cfg.dataset = data_path("qa_synthetic_50.jsonl");
  cfg.out = dir / "run";
  std::ostringstream log;
  REQUIRE(cmd_evaluate(cfg, log) == 0);
  CHECK(read_judgments(cfg.out / "judgments.jsonl").size() == 50);
  const auto report = nlohmann::json::parse(read_file(cfg.out / "report.json"));
  CHECK(report.at("metrics").at("tp") == 7);
  CHECK(report.at("metrics").at("n_nonanswer") == 2);
  CHECK(report.at("judgments").size() == 50);
  const auto timing = nlohmann::json::parse(read_file(cfg.out / "timing.json"));
  CHECK(timing.contains("retrieval_s"));
  CHECK(timing.contains("scoring_s"));
  CHECK(timing.contains("metrics_s"));
}

TEST_CASE("cmd_evaluate: missing dataset leaves no output") {
  TempDir dir;
  RunConfig cfg;
  cfg.dataset = dir / "absent.jsonl";
  cfg.out = dir / "run";
  std::ostringstream log;
  CHECK(cmd_evaluate(cfg, log) == 2);
  CHECK_FALSE(std::filesystem::exists(cfg.out));
}

TEST_CASE("cmd_evaluate: malformed dataset is a runtime failure") {
  TempDir dir;
  RunConfig cfg;
  cfg.dataset = dir.write("bad.jsonl", "{\"id\":\"a\"}\n");
  cfg.out = dir / "run";
  std::ostringstream log;
  CHECK(cmd_evaluate(cfg, log) == 1);
  CHECK(log.str().find("MalformedRecord") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(cfg.out / "report.json"));
}

TEST_CASE("cmd_sweep") {
  TempDir dir;
  RunConfig cfg;
  cfg.out = dir / "sweep";
  std::ostringstream log;

  SUBCASE("separable scores recover the oracle threshold") {
    std::string lines;
    const std::pair<const char*, double> rows[] = {
        {"hallucinated", 0.2}, {"hallucinated", 0.4}, {"faithful", 0.6}, {"faithful", 0.8}};
    int i = 0;
    for (const auto& [gold, score] : rows) {
      JudgmentRecord r;
      r.judgment.sample_id = "s" + std::to_string(i++);
      r.judgment.raw_score = r.judgment.adjusted_score = score;
      r.judgment.label = Label::Faithful;
      r.gold = parse_gold_label(gold);
      lines += judgment_to_json(r) + "\n";
    }
    SweepOptions opts;
    opts.judgments = dir.write("j.jsonl", lines);
    opts.grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    REQUIRE(cmd_sweep(cfg, opts, log) == 0);
    const auto summary = nlohmann::json::parse(read_file(cfg.out / "sweep.json"));
    CHECK(summary.at("best_tau").get<double>() == doctest::Approx(0.5));
    CHECK(summary.at("best_f1").get<double>() == 1.0);

    opts.grid = {0.5};
    REQUIRE(cmd_sweep(cfg, opts, log) == 0);
    const auto csv = read_file(cfg.out / "sweep.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);  // header + one row
  }
  SUBCASE("unlabeled dataset") {
    cfg.dataset = dir.write("u.jsonl", R"({"id":"a","knowledge":"K.","question":"Q?","generation":"g"})" "\n");
    CHECK(cmd_sweep(cfg, SweepOptions{}, log) == 2);
    CHECK(log.str().find("sweep requires gold labels") != std::string::npos);
  }
  SUBCASE("labeled fixture") {
    cfg.dataset = data_path("qa_synthetic_50.jsonl");
    CHECK(cmd_sweep(cfg, SweepOptions{}, log) == 0);
    CHECK(std::filesystem::exists(cfg.out / "sweep.csv"));
  }
}

TEST_CASE("cmd_leaderboard") {
  TempDir dir;
  std::ostringstream log;
  auto write_model = [&](const std::string& name, std::vector<double> scores) {
    std::string lines;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      JudgmentRecord r;
      r.judgment.sample_id = "s" + std::to_string(i);
      r.judgment.raw_score = r.judgment.adjusted_score = scores[i];
      r.judgment.label = scores[i] < 0.5 ? Label::Hallucinated : Label::Faithful;
      r.generation_words = 10 * (i + 1);
      lines += judgment_to_json(r) + "\n";
    }
    dir.write(name + "/judgments.jsonl", lines);
    return dir / name;
  };
  const auto a = write_model("model-a", {0.9, 0.2, 0.3, 0.6});
  const auto b = write_model("model-b", {0.9, 0.8, 0.3, 0.6});

  CHECK(cmd_leaderboard({a, b}, dir / "board", log) == 0);
  CHECK(read_file(dir / "board" / "leaderboard.csv") ==
        "model,accuracy,hallucination_score,answer_rate,avg_length\n"
        "model-b,0.7500,0.3500,1.0000,25.0000\n"
        "model-a,0.5000,0.5000,1.0000,25.0000\n");
  CHECK(std::filesystem::exists(dir / "board" / "cdf_model-a.csv"));
  CHECK(std::filesystem::exists(dir / "board" / "lengths_model-b.json"));

  CHECK(cmd_leaderboard({a}, dir / "single", log) == 0);
  const auto single = read_file(dir / "single" / "leaderboard.csv");
  CHECK(std::count(single.begin(), single.end(), '\n') == 2);
  CHECK(cmd_leaderboard({}, dir / "none", log) == 2);
  std::ostringstream missing_log;
  CHECK(cmd_leaderboard({a, dir / "ghost"}, dir / "ghost-board", missing_log) == 1);
  CHECK(missing_log.str().find("ghost") != std::string::npos);
}

TEST_CASE("cmd_stats") {
  TempDir dir;
  std::ostringstream log;
  RunConfig cfg;
  cfg.dataset = data_path("qa_synthetic_50.jsonl");
  cfg.out = dir / "run";
  REQUIRE(cmd_evaluate(cfg, log) == 0);
  CHECK(cmd_stats(cfg.out / "judgments.jsonl", dir / "stats", log) == 0);
  const auto csv = read_file(dir / "stats" / "cdf.csv");
  CHECK(csv.rfind("score,fraction\n", 0) == 0);
  CHECK(csv.find("1.000000,1.000000") != std::string::npos);
  CHECK(cmd_stats(dir.write("empty.jsonl", ""), dir / "stats2", log) == 1);
}

TEST_CASE("cmd_retrieve prints ranked knowledge") {
  TempDir dir;
  RunConfig cfg;
  cfg.dataset = data_path("qa_synthetic_50.jsonl");
  std::ostringstream out, log;
  RetrieveOptions opts{"who composed the score", "qa001", {}};
  REQUIRE(cmd_retrieve(cfg, opts, out, log) == 0);
  const auto first = nlohmann::json::parse(out.str().substr(0, out.str().find('\n')));
  CHECK(first.at("doc_id") == "qa001");
  CHECK(first.at("snippet").get<std::string>().find("Dario Quist") != std::string::npos);

  std::ostringstream out2;
  opts = {"bridge", {}, dir.write("doc.txt", "The bridge opened. It rained.")};
  CHECK(cmd_retrieve(cfg, opts, out2, log) == 0);
  CHECK(out2.str().find("bridge") != std::string::npos);
  CHECK(cmd_retrieve(cfg, {"q", "no-such-id", {}}, out2, log) == 2);
}
