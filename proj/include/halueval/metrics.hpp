#pragma once

#include <chrono>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "halueval/corpus.hpp"
#include "halueval/score.hpp"

namespace halueval {

/// Confusion counts with Hallucinated as the positive class.
///
/// `f1` is the balanced mean (TPR + TNR) / 2, not the harmonic
/// precision/recall F1. A rate with an empty denominator is reported as 1 and
/// flagged through `tpr_undefined` / `tnr_undefined`.
struct MetricsReport {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double tpr = 1.0, tnr = 1.0, accuracy = 1.0, f1 = 1.0;
  bool tpr_undefined = true, tnr_undefined = true;
  std::chrono::duration<double> wall_time{0};
  std::size_t n_samples = 0, n_nonanswer = 0;
};

MetricsReport metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn);

/// NonAnswer judgments count toward n_nonanswer only. Throws
/// Error(MissingGoldLabel) for any other judgment without a gold label.
MetricsReport compute_metrics(std::span<const ConsistencyJudgment> judgments,
                              const std::map<std::string, GoldLabel>& gold);

struct ScoredExample {
  double score = 0.0;
  GoldLabel gold = GoldLabel::Faithful;
  bool fabricated = false;  // predicted Hallucinated at every threshold
};

struct SweepPoint {
  double tau = 0.0, tpr = 0.0, tnr = 0.0, f1 = 0.0;
};

struct SweepResult {
  double best_tau = 0.0;
  double best_f1 = 0.0;
  std::vector<SweepPoint> curve;
};

/// 0.05, 0.10, ..., 0.95.
std::vector<double> default_grid();

/// Evaluates the strict classification rule at every grid threshold and keeps
/// the one with the highest f1, smallest tau on ties. The grid must be
/// non-empty and ascending.
SweepResult sweep_threshold(std::span<const ScoredExample> scored, std::span<const double> grid);

struct CdfPoint {
  double score = 0.0;
  double fraction = 0.0;
};

struct CdfCurve {
  std::vector<CdfPoint> points;
};

/// Empirical CDF with one point per distinct score. Throws EmptyInput, or
/// InvalidArgument for scores outside [0, 1].
CdfCurve compute_cdf(std::span<const double> scores);

struct LengthStats {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
  std::vector<std::pair<std::string, std::size_t>> outliers;
};

/// Linear-interpolation quantile over sorted values: position p * (n - 1),
/// interpolated between the two closest ranks.
double quantile(std::span<const double> sorted, double p);

/// Word counts are whitespace-token counts. Outliers lie strictly outside
/// [q1 - 1.5 IQR, q3 + 1.5 IQR]. Throws EmptyInput.
LengthStats length_stats(std::span<const std::pair<std::string, std::string>> generations);
LengthStats length_stats_from_counts(std::span<const std::pair<std::string, std::size_t>> lengths);

struct LeaderboardRow {
  std::string model_name;
  double accuracy_above = 0.0;       // fraction of scores > 0.5
  double hallucination_score = 0.0;  // 1 - mean score
  double hallucination_rate = 0.0;   // fraction of scores < 0.5
  double factual_consistency_rate = 0.0;
  double answer_rate = 0.0;
  double avg_summary_length = 0.0;  // words, over answered samples
};

bool is_missing(double v) noexcept;

/// Aggregates adjusted scores of the answered judgments. A score of exactly
/// 0.5 counts as neither above nor below. A model with no answers gets NaN
/// for every score-derived field and an answer rate of 0.
LeaderboardRow leaderboard_row(std::string model_name,
                               std::span<const ConsistencyJudgment> judgments,
                               const std::map<std::string, std::size_t>& word_counts);
LeaderboardRow leaderboard_row(std::string model_name,
                               std::span<const ConsistencyJudgment> judgments,
                               std::span<const std::pair<std::string, std::string>> generations);

/// Descending accuracy, then ascending hallucination score, then name; rows
/// without answers last.
void sort_leaderboard(std::vector<LeaderboardRow>& rows);

/// `model,accuracy,hallucination_score,answer_rate,avg_length`, four decimals,
/// "NA" for missing values.
std::string leaderboard_csv(const std::vector<LeaderboardRow>& rows);

}  // namespace halueval
