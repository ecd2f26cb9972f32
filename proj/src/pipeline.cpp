#include "halueval/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "halueval/error.hpp"
#include "halueval/text.hpp"

namespace halueval {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string read_text(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(Errc::MissingFile, "no such file", path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::MissingFile, "cannot open", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Samples are judged independently; rethrow with the sample id attached.
template <typename F>
auto for_sample(const Sample& s, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.subject() == s.id) throw;
    throw Error(e.code(), std::string(e.what()) + " [sample " + s.id + "]", s.id);
  }
}

}  // namespace

// Judgment records ---------------------------------------------------------------

std::string judgment_to_json(const JudgmentRecord& r) {
  const auto& j = r.judgment;
  ordered_json o;
  o["id"] = j.sample_id;
  o["label"] = std::string(to_string(j.label));
  o["raw_score"] = j.raw_score;
  o["adjusted_score"] = j.adjusted_score;
  o["segment_scores"] = ordered_json::array();
  for (const auto& s : j.segment_scores) {
    o["segment_scores"].push_back({{"index", s.index}, {"score", s.score}});
  }
  o["fabricated"] = j.fabricated;
  o["threshold"] = j.threshold;
  o["gold_label"] = r.gold ? ordered_json(std::string(to_string(*r.gold))) : ordered_json();
  o["generation_words"] = r.generation_words;
  return o.dump();
}

JudgmentRecord judgment_from_json(std::string_view line) {
  const auto o = json::parse(line);
  JudgmentRecord r;
  auto& j = r.judgment;
  j.sample_id = o.at("id").get<std::string>();
  const auto label = parse_label(o.at("label").get<std::string>());
  if (!label) throw Error(Errc::MalformedRecord, "unknown label", j.sample_id);
  j.label = *label;
  j.raw_score = o.at("raw_score").get<double>();
  j.adjusted_score = o.at("adjusted_score").get<double>();
  for (const auto& s : o.value("segment_scores", json::array())) {
    j.segment_scores.push_back({s.at("index").get<std::size_t>(), s.at("score").get<double>()});
  }
  j.fabricated = o.value("fabricated", false);
  j.threshold = o.value("threshold", 0.5);
  if (auto it = o.find("gold_label"); it != o.end() && it->is_string()) {
    r.gold = parse_gold_label(it->get<std::string>());
    if (!r.gold) throw Error(Errc::MalformedRecord, "unknown gold_label", j.sample_id);
  }
  r.generation_words = o.value("generation_words", std::size_t{0});
  for (double s : {j.raw_score, j.adjusted_score}) {
    if (!(s >= 0.0 && s <= 1.0)) throw Error(Errc::OutOfRangeScore, "score outside [0, 1]", j.sample_id);
  }
  return r;
}

std::vector<JudgmentRecord> read_judgments(const std::filesystem::path& path) {
  const auto content = read_text(path);
  std::vector<JudgmentRecord> out;
  std::istringstream in(content);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(judgment_from_json(line));
    } catch (const json::exception& e) {
      throw Error(Errc::MalformedRecord, e.what(), std::to_string(number));
    } catch (const Error& e) {
      throw Error(Errc::MalformedRecord, e.what(), std::to_string(number));
    }
  }
  return out;
}

// Evaluation ---------------------------------------------------------------------

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

Evaluation evaluate(const Dataset& dataset, ScorerBackend& backend, const JudgeConfig& config,
                    std::size_t workers) {
  const auto t0 = Clock::now();
  const auto& samples = dataset.samples;
  Evaluation ev;

  std::vector<JudgePlan> plans(samples.size());
  parallel_for(samples.size(), workers, [&](std::size_t i) {
    plans[i] = for_sample(samples[i], [&] { return plan_judgment(samples[i], config); });
  });
  ev.times.retrieval_s = seconds_since(t0);

  const auto t1 = Clock::now();
  std::vector<ConsistencyJudgment> judgments(samples.size());
  parallel_for(samples.size(), workers, [&](std::size_t i) {
    judgments[i] = for_sample(samples[i], [&] {
      const auto requests = plans[i].requests();
      std::vector<double> scores;
      if (!requests.empty()) scores = backend.score_batch(requests);
      return finish_judgment(plans[i], scores, config);
    });
  });
  ev.times.scoring_s = seconds_since(t1);

  const auto t2 = Clock::now();
  ev.records.reserve(samples.size());
  std::map<std::string, GoldLabel> gold;
  std::map<std::string, std::size_t> words;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    JudgmentRecord r{std::move(judgments[i]), s.gold_label, text::word_count(s.generation)};
    if (s.gold_label) gold[s.id] = *s.gold_label;
    words[s.id] = r.generation_words;
    ev.records.push_back(std::move(r));
  }
  std::sort(ev.records.begin(), ev.records.end(),
            [](const JudgmentRecord& a, const JudgmentRecord& b) {
              return a.judgment.sample_id < b.judgment.sample_id;
            });
  std::vector<ConsistencyJudgment> sorted;
  sorted.reserve(ev.records.size());
  for (const auto& r : ev.records) sorted.push_back(r.judgment);
  if (dataset.has_gold_labels()) ev.metrics = compute_metrics(sorted, gold);
  ev.summary = leaderboard_row(dataset.origin, sorted, words);
  ev.times.metrics_s = seconds_since(t2);
  ev.times.total_s = seconds_since(t0);
  if (ev.metrics) ev.metrics->wall_time = std::chrono::duration<double>(ev.times.total_s);
  return ev;
}

Dataset load_dataset(const RunConfig& config) {
  auto ds = ingest_dataset(config.dataset, config.task);
  if (config.limit) return subsample(ds, *config.limit, config.seed);
  if (config.head) return head(ds, *config.head);
  return ds;
}

JudgeConfig make_judge_config(const RunConfig& config) {
  JudgeConfig judge = config.judge;
  if (config.decomposer == "external") {
    judge.decomposer =
        std::make_shared<ExternalDecomposer>(ExternalDecomposer::from_jsonl(read_text(config.decomposer_file)));
  }
  return judge;
}

std::unique_ptr<ScorerBackend> make_backend(const RunConfig& config) {
  if (config.scorer == "remote") {
    RemoteOptions opts{config.endpoint, config.batch_size,
                       std::chrono::milliseconds(config.timeout_ms)};
    if (!remote_healthy(opts)) {
      throw Error(Errc::Unreachable, "health check failed", config.endpoint + "/healthz");
    }
    return std::make_unique<RemoteScorer>(std::move(opts));
  }
  return std::make_unique<BaselineScorer>();
}

// Report emission ------------------------------------------------------------------

namespace {

ordered_json metrics_json(const MetricsReport& m) {
  ordered_json o;
  o["tp"] = m.tp;
  o["fp"] = m.fp;
  o["tn"] = m.tn;
  o["fn"] = m.fn;
  o["tpr"] = m.tpr;
  o["tnr"] = m.tnr;
  o["accuracy"] = m.accuracy;
  o["f1"] = m.f1;
  o["tpr_undefined"] = m.tpr_undefined;
  o["tnr_undefined"] = m.tnr_undefined;
  o["n_samples"] = m.n_samples;
  o["n_nonanswer"] = m.n_nonanswer;
  return o;
}

ordered_json number_or_null(double v) { return is_missing(v) ? ordered_json() : ordered_json(v); }

ordered_json summary_json(const LeaderboardRow& r) {
  ordered_json o;
  o["accuracy_above"] = number_or_null(r.accuracy_above);
  o["hallucination_score"] = number_or_null(r.hallucination_score);
  o["hallucination_rate"] = number_or_null(r.hallucination_rate);
  o["factual_consistency_rate"] = number_or_null(r.factual_consistency_rate);
  o["answer_rate"] = number_or_null(r.answer_rate);
  o["avg_length"] = number_or_null(r.avg_summary_length);
  return o;
}

ordered_json config_json(const RunConfig& c) {
  const auto& j = c.judge;
  ordered_json o;
  o["task"] = std::string(to_string(c.task));
  o["scorer"] = c.scorer;
  if (c.scorer == "remote") o["endpoint"] = c.endpoint;
  o["threshold"] = j.threshold;
  o["segmented"] = j.segmented;
  o["non_fabrication"] = j.non_fabrication;
  o["segment_threshold"] = j.segment_threshold;
  o["halving_factor"] = j.halving_factor;
  o["retriever"] = {{"k", j.retriever.k},
                    {"k1", j.retriever.bm25.k1},
                    {"b", j.retriever.bm25.b},
                    {"window_sentences", j.retriever.window_sentences}};
  o["knowledge_form"] = std::string(to_string(j.knowledge_form));
  o["knowledge_budget"] = j.knowledge_budget;
  o["decomposer"] = c.decomposer;
  o["limit"] = c.limit ? ordered_json(*c.limit) : ordered_json();
  o["head"] = c.head ? ordered_json(*c.head) : ordered_json();
  o["seed"] = c.seed;
  return o;
}

std::vector<double> answered_scores(const std::vector<JudgmentRecord>& records) {
  std::vector<double> out;
  for (const auto& r : records) {
    if (r.judgment.label != Label::NonAnswer) out.push_back(r.judgment.adjusted_score);
  }
  return out;
}

std::vector<std::pair<std::string, std::size_t>> answered_lengths(
    const std::vector<JudgmentRecord>& records) {
  std::vector<std::pair<std::string, std::size_t>> out;
  for (const auto& r : records) {
    if (r.judgment.label != Label::NonAnswer) {
      out.emplace_back(r.judgment.sample_id, r.generation_words);
    }
  }
  return out;
}

}  // namespace

std::string judgments_jsonl(const std::vector<JudgmentRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += judgment_to_json(r);
    out += '\n';
  }
  return out;
}

std::string report_json(const Evaluation& ev, const RunConfig& config) {
  ordered_json o;
  o["config"] = config_json(config);
  o["metrics"] = ev.metrics ? metrics_json(*ev.metrics) : ordered_json();
  o["summary"] = summary_json(ev.summary);
  o["cdf"] = ordered_json::array();
  if (const auto scores = answered_scores(ev.records); !scores.empty()) {
    for (const auto& p : compute_cdf(scores).points) o["cdf"].push_back({p.score, p.fraction});
  }
  o["judgments"] = ordered_json::array();
  for (const auto& r : ev.records) o["judgments"].push_back(ordered_json::parse(judgment_to_json(r)));
  return o.dump(2) + "\n";
}

std::string cdf_csv(const CdfCurve& curve) {
  std::string out = "score,fraction\n";
  for (const auto& p : curve.points) out += fixed(p.score, 6) + "," + fixed(p.fraction, 6) + "\n";
  return out;
}

std::string length_stats_json(const LengthStats& s) {
  ordered_json o;
  o["min"] = s.min;
  o["q1"] = s.q1;
  o["median"] = s.median;
  o["q3"] = s.q3;
  o["max"] = s.max;
  o["outliers"] = ordered_json::array();
  for (const auto& [id, n] : s.outliers) o["outliers"].push_back({{"id", id}, {"length", n}});
  return o.dump(2) + "\n";
}

std::string sweep_csv(const SweepResult& sweep) {
  std::string out = "tau,tpr,tnr,f1\n";
  for (const auto& p : sweep.curve) {
    out += fixed(p.tau, 6) + "," + fixed(p.tpr, 6) + "," + fixed(p.tnr, 6) + "," + fixed(p.f1, 6) + "\n";
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::InvalidArgument, "cannot write", tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error(Errc::InvalidArgument, "write failed", tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// Commands ---------------------------------------------------------------------------

namespace {

int fail(std::ostream& log, const std::exception& e) {
  log << "error: " << e.what() << "\n";
  if (const auto* err = dynamic_cast<const Error*>(&e); err && err->code() == Errc::Config) return 2;
  return 1;
}

int usage(std::ostream& log, const std::string& message) {
  log << "error: " << message << "\n";
  return 2;
}

// Config validation and dataset presence; returns an exit code or 0.
int preflight(const RunConfig& config, std::ostream& log) {
  try {
    config.validate();
  } catch (const Error& e) {
    return usage(log, e.what());
  }
  std::error_code ec;
  if (config.dataset.empty()) return usage(log, "no dataset given");
  if (!std::filesystem::is_regular_file(config.dataset, ec)) {
    return usage(log, "dataset not found: " + config.dataset.string());
  }
  return 0;
}

std::string json_text(const ordered_json& o) { return o.dump(2) + "\n"; }

}  // namespace

int cmd_evaluate(const RunConfig& config, std::ostream& log) {
  if (int rc = preflight(config, log)) return rc;
  try {
    const auto dataset = load_dataset(config);
    auto backend = make_backend(config);
    const auto judge = make_judge_config(config);
    const auto ev = evaluate(dataset, *backend, judge, config.workers);
    log << "[retrieval] " << dataset.size() << " samples, " << fixed(ev.times.retrieval_s, 3) << " s\n"
        << "[scoring] " << dataset.size() << " samples, " << fixed(ev.times.scoring_s, 3) << " s\n"
        << "[metrics] " << fixed(ev.times.metrics_s, 3) << " s\n";

    const auto report = report_json(ev, config);
    const auto judgments = judgments_jsonl(ev.records);
    ordered_json timing;
    timing["retrieval_s"] = ev.times.retrieval_s;
    timing["scoring_s"] = ev.times.scoring_s;
    timing["metrics_s"] = ev.times.metrics_s;
    timing["total_s"] = ev.times.total_s;
    timing["workers"] = config.workers;

    std::filesystem::create_directories(config.out);
    write_file_atomic(config.out / "judgments.jsonl", judgments);
    write_file_atomic(config.out / "report.json", report);
    write_file_atomic(config.out / "timing.json", json_text(timing));
    if (ev.metrics) {
      const auto& m = *ev.metrics;
      log << "tpr=" << fixed(m.tpr, 4) << " tnr=" << fixed(m.tnr, 4)
          << " accuracy=" << fixed(m.accuracy, 4) << " f1=" << fixed(m.f1, 4) << "\n";
    }
    return 0;
  } catch (const std::exception& e) {
    return fail(log, e);
  }
}

int cmd_sweep(const RunConfig& config, const SweepOptions& options, std::ostream& log) {
  if (options.grid.empty()) return usage(log, "threshold grid is empty");
  try {
    std::vector<JudgmentRecord> records;
    if (!options.judgments.empty()) {
      records = read_judgments(options.judgments);
    } else {
      if (int rc = preflight(config, log)) return rc;
      const auto dataset = load_dataset(config);
      if (!dataset.has_gold_labels()) return usage(log, "sweep requires gold labels");
      auto backend = make_backend(config);
      records = evaluate(dataset, *backend, make_judge_config(config), config.workers).records;
    }
    if (std::none_of(records.begin(), records.end(), [](const auto& r) { return r.gold.has_value(); })) {
      return usage(log, "sweep requires gold labels");
    }
    std::vector<ScoredExample> scored;
    for (const auto& r : records) {
      if (r.judgment.label == Label::NonAnswer) continue;
      if (!r.gold) throw Error(Errc::MissingGoldLabel, "no gold label", r.judgment.sample_id);
      scored.push_back({r.judgment.adjusted_score, *r.gold, r.judgment.fabricated});
    }
    const auto sweep = sweep_threshold(scored, options.grid);

    ordered_json summary;
    summary["best_tau"] = sweep.best_tau;
    summary["best_f1"] = sweep.best_f1;
    summary["n_scored"] = scored.size();
    summary["grid_size"] = options.grid.size();
    std::filesystem::create_directories(config.out);
    write_file_atomic(config.out / "sweep.csv", sweep_csv(sweep));
    write_file_atomic(config.out / "sweep.json", json_text(summary));
    log << "best_tau=" << fixed(sweep.best_tau, 4) << " best_f1=" << fixed(sweep.best_f1, 4) << "\n";
    return 0;
  } catch (const std::exception& e) {
    return fail(log, e);
  }
}

namespace {

std::string model_name(const std::filesystem::path& dir) {
  auto p = dir;
  while (!p.empty() && p.filename().empty()) p = p.parent_path();
  auto name = p.filename().string();
  return name.empty() || name == "." ? "model" : name;
}

std::string file_safe(const std::string& name) {
  std::string out = name;
  for (auto& c : out) {
    if (!(text::is_alnum(c) || c == '-' || c == '_' || c == '.')) c = '_';
  }
  return out;
}

}  // namespace

int cmd_leaderboard(const std::vector<std::filesystem::path>& score_dirs,
                    const std::filesystem::path& out, std::ostream& log) {
  if (score_dirs.empty()) return usage(log, "no score directories given");
  std::vector<std::pair<std::string, std::vector<JudgmentRecord>>> models;
  std::vector<std::string> unreadable;
  std::set<std::string> names;
  for (const auto& dir : score_dirs) {
    const auto name = model_name(dir);
    if (!names.insert(name).second) return usage(log, "duplicate model name '" + name + "'");
    try {
      models.emplace_back(name, read_judgments(dir / "judgments.jsonl"));
    } catch (const std::exception& e) {
      unreadable.push_back(dir.string() + " (" + e.what() + ")");
    }
  }
  if (!unreadable.empty()) {
    log << "error: unreadable score directories:\n";
    for (const auto& u : unreadable) log << "  " << u << "\n";
    return 1;
  }
  try {
    std::vector<LeaderboardRow> rows;
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& [name, records] : models) {
      std::vector<ConsistencyJudgment> judgments;
      std::map<std::string, std::size_t> words;
      for (const auto& r : records) {
        judgments.push_back(r.judgment);
        words[r.judgment.sample_id] = r.generation_words;
      }
      rows.push_back(leaderboard_row(name, judgments, words));

      const auto scores = answered_scores(records);
      const auto lengths = answered_lengths(records);
      files.emplace_back("cdf_" + file_safe(name) + ".csv",
                         scores.empty() ? cdf_csv({}) : cdf_csv(compute_cdf(scores)));
      files.emplace_back("lengths_" + file_safe(name) + ".json",
                         lengths.empty() ? std::string("null\n")
                                         : length_stats_json(length_stats_from_counts(lengths)));
    }
    sort_leaderboard(rows);
    std::filesystem::create_directories(out);
    write_file_atomic(out / "leaderboard.csv", leaderboard_csv(rows));
    for (const auto& [file, content] : files) write_file_atomic(out / file, content);
    log << leaderboard_csv(rows);
    return 0;
  } catch (const std::exception& e) {
    return fail(log, e);
  }
}

int cmd_stats(const std::filesystem::path& judgments, const std::filesystem::path& out,
              std::ostream& log) {
  try {
    const auto records = read_judgments(judgments);
    const auto scores = answered_scores(records);
    if (scores.empty()) throw Error(Errc::EmptyInput, "no scored judgments", judgments.string());
    const auto curve = compute_cdf(scores);
    const auto lengths = length_stats_from_counts(answered_lengths(records));
    std::filesystem::create_directories(out);
    write_file_atomic(out / "cdf.csv", cdf_csv(curve));
    write_file_atomic(out / "lengths.json", length_stats_json(lengths));
    log << "[stats] " << scores.size() << " scores, " << curve.points.size() << " cdf points\n";
    return 0;
  } catch (const std::exception& e) {
    return fail(log, e);
  }
}

int cmd_retrieve(const RunConfig& config, const RetrieveOptions& options, std::ostream& out,
                 std::ostream& log) {
  if (text::trim(options.query).empty()) return usage(log, "--query is required");
  if (options.text_file.empty() == options.sample_id.empty()) {
    return usage(log, "give exactly one of --file or --id");
  }
  try {
    config.validate();
  } catch (const Error& e) {
    return usage(log, e.what());
  }
  try {
    std::vector<KnowledgeItem> items;
    if (!options.text_file.empty()) {
      std::error_code ec;
      if (!std::filesystem::is_regular_file(options.text_file, ec)) {
        return usage(log, "file not found: " + options.text_file.string());
      }
      const Document doc{options.text_file.filename().string(), read_text(options.text_file), 0};
      RetrieverConfig rc = config.judge.retriever;
      rc.snippet_mode = SnippetMode::SentenceWindow;
      items = retrieve(build_index({doc}), options.query, rc);
    } else {
      if (int rc = preflight(config, log)) return rc;
      const auto ds = ingest_dataset(config.dataset, config.task);
      auto it = std::find_if(ds.samples.begin(), ds.samples.end(),
                             [&](const Sample& s) { return s.id == options.sample_id; });
      if (it == ds.samples.end()) return usage(log, "no sample with id '" + options.sample_id + "'");
      items = sample_retriever(*it, config.judge).retrieve(options.query);
    }
    std::size_t rank = 1;
    for (const auto& item : items) {
      ordered_json o;
      o["rank"] = rank++;
      o["doc_id"] = item.doc_id;
      o["score"] = item.score;
      o["span"] = {item.span.begin, item.span.end};
      o["snippet"] = item.snippet;
      o["triplets"] = ordered_json::array();
      for (const auto& t : item.triplets) o["triplets"].push_back({t.subject, t.relation, t.object});
      out << o.dump() << "\n";
    }
    return 0;
  } catch (const std::exception& e) {
    return fail(log, e);
  }
}

}  // namespace halueval
