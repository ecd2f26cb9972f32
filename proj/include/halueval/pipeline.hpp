#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "halueval/config.hpp"
#include "halueval/corpus.hpp"
#include "halueval/metrics.hpp"
#include "halueval/score.hpp"

namespace halueval {

/// A judgment plus what downstream reports need from the sample.
struct JudgmentRecord {
  ConsistencyJudgment judgment;
  std::optional<GoldLabel> gold;
  std::size_t generation_words = 0;

  bool operator==(const JudgmentRecord&) const = default;
};

std::string judgment_to_json(const JudgmentRecord& record);
JudgmentRecord judgment_from_json(std::string_view line);

/// Parses a judgments file. Throws MissingFile or MalformedRecord(line).
std::vector<JudgmentRecord> read_judgments(const std::filesystem::path& path);

struct PhaseTimes {
  double retrieval_s = 0, scoring_s = 0, metrics_s = 0, total_s = 0;
};

struct Evaluation {
  std::vector<JudgmentRecord> records;  // sorted by sample id
  std::optional<MetricsReport> metrics; // present when the dataset is labeled
  LeaderboardRow summary;
  PhaseTimes times;
};

/// Runs `fn(i)` for i in [0, n) on up to `workers` threads. If any call
/// throws, the exception from the lowest index is rethrown after all workers
/// finish.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

/// Judges every sample: retrieval on the worker pool, then scoring on the
/// worker pool, then metrics. Errors carry the failing sample id as subject.
Evaluation evaluate(const Dataset& dataset, ScorerBackend& backend, const JudgeConfig& config,
                    std::size_t workers);

Dataset load_dataset(const RunConfig& config);
JudgeConfig make_judge_config(const RunConfig& config);
std::unique_ptr<ScorerBackend> make_backend(const RunConfig& config);

/// Everything in report.json except wall-clock timing; byte-stable for a
/// deterministic backend.
std::string report_json(const Evaluation& evaluation, const RunConfig& config);
std::string judgments_jsonl(const std::vector<JudgmentRecord>& records);
std::string cdf_csv(const CdfCurve& curve);
std::string length_stats_json(const LengthStats& stats);
std::string sweep_csv(const SweepResult& sweep);

/// Writes via a temporary sibling file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// Commands. Each returns the process exit code: 0 ok, 1 runtime failure,
// 2 usage or configuration error. Diagnostics go to `log`.

int cmd_evaluate(const RunConfig& config, std::ostream& log);

struct SweepOptions {
  std::vector<double> grid = default_grid();
  std::filesystem::path judgments;  // sweep an existing run instead of evaluating
};
int cmd_sweep(const RunConfig& config, const SweepOptions& options, std::ostream& log);

int cmd_leaderboard(const std::vector<std::filesystem::path>& score_dirs,
                    const std::filesystem::path& out, std::ostream& log);

int cmd_stats(const std::filesystem::path& judgments, const std::filesystem::path& out,
              std::ostream& log);

struct RetrieveOptions {
  std::string query;
  std::string sample_id;           // look the knowledge up in config.dataset
  std::filesystem::path text_file; // or index this plain-text file
};
int cmd_retrieve(const RunConfig& config, const RetrieveOptions& options, std::ostream& out,
                 std::ostream& log);

}  // namespace halueval
