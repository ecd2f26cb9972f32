#include "halueval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "halueval/error.hpp"
#include "halueval/text.hpp"

namespace halueval {

MetricsReport metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
  MetricsReport r;
  r.tp = tp;
  r.fp = fp;
  r.tn = tn;
  r.fn = fn;
  r.tpr_undefined = tp + fn == 0;
  r.tnr_undefined = tn + fp == 0;
  r.tpr = r.tpr_undefined ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  r.tnr = r.tnr_undefined ? 1.0 : static_cast<double>(tn) / static_cast<double>(tn + fp);
  const auto total = tp + fp + tn + fn;
  r.accuracy = total == 0 ? 1.0 : static_cast<double>(tp + tn) / static_cast<double>(total);
  r.f1 = (r.tpr + r.tnr) / 2.0;
  return r;
}

MetricsReport compute_metrics(std::span<const ConsistencyJudgment> judgments,
                              const std::map<std::string, GoldLabel>& gold) {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0, nonanswer = 0;
  for (const auto& j : judgments) {
    if (j.label == Label::NonAnswer) {
      ++nonanswer;
      continue;
    }
    auto it = gold.find(j.sample_id);
    if (it == gold.end()) throw Error(Errc::MissingGoldLabel, "no gold label", j.sample_id);
    const bool predicted = j.label == Label::Hallucinated;
    const bool actual = it->second == GoldLabel::Hallucinated;
    if (predicted && actual) ++tp;
    else if (predicted) ++fp;
    else if (actual) ++fn;
    else ++tn;
  }
  auto r = metrics_from_counts(tp, fp, tn, fn);
  r.n_samples = judgments.size();
  r.n_nonanswer = nonanswer;
  return r;
}

std::vector<double> default_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 19; ++i) grid.push_back(i * 5.0 / 100.0);
  return grid;
}

SweepResult sweep_threshold(std::span<const ScoredExample> scored, std::span<const double> grid) {
  if (grid.empty()) throw Error(Errc::InvalidArgument, "threshold grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0 && grid[i] <= 1.0)) {
      throw Error(Errc::InvalidArgument, "grid thresholds must lie in [0, 1]");
    }
    if (i > 0 && grid[i] < grid[i - 1]) {
      throw Error(Errc::InvalidArgument, "threshold grid must be ascending");
    }
  }

  std::vector<double> pos, neg;
  std::size_t forced_pos = 0, forced_neg = 0;
  for (const auto& s : scored) {
    const bool actual = s.gold == GoldLabel::Hallucinated;
    if (s.fabricated) {
      (actual ? forced_pos : forced_neg) += 1;
    } else {
      (actual ? pos : neg).push_back(s.score);
    }
  }
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  const std::size_t n_pos = pos.size() + forced_pos;
  const std::size_t n_neg = neg.size() + forced_neg;

  auto below = [](const std::vector<double>& v, double tau) {
    return static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), tau) - v.begin());
  };

  SweepResult result;
  bool first = true;
  for (double tau : grid) {
    const std::size_t tp = forced_pos + below(pos, tau);
    const std::size_t fp = forced_neg + below(neg, tau);
    const auto m = metrics_from_counts(tp, fp, n_neg - fp, n_pos - tp);
    result.curve.push_back({tau, m.tpr, m.tnr, m.f1});
    if (first || m.f1 > result.best_f1) {
      result.best_f1 = m.f1;
      result.best_tau = tau;
      first = false;
    }
  }
  return result;
}

CdfCurve compute_cdf(std::span<const double> scores) {
  if (scores.empty()) throw Error(Errc::EmptyInput, "no scores");
  std::vector<double> sorted(scores.begin(), scores.end());
  for (double s : sorted) {
    if (!(s >= 0.0 && s <= 1.0)) throw Error(Errc::InvalidArgument, "score outside [0, 1]");
  }
  std::sort(sorted.begin(), sorted.end());
  CdfCurve curve;
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    curve.points.push_back({sorted[i], static_cast<double>(i + 1) / n});
  }
  return curve;
}

double quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(Errc::EmptyInput, "no values");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

LengthStats length_stats_from_counts(std::span<const std::pair<std::string, std::size_t>> lengths) {
  if (lengths.empty()) throw Error(Errc::EmptyInput, "no generations");
  std::vector<double> sorted;
  sorted.reserve(lengths.size());
  for (const auto& [id, n] : lengths) sorted.push_back(static_cast<double>(n));
  std::sort(sorted.begin(), sorted.end());

  LengthStats s;
  s.min = sorted.front();
  s.max = sorted.back();
  s.q1 = quantile(sorted, 0.25);
  s.median = quantile(sorted, 0.5);
  s.q3 = quantile(sorted, 0.75);
  const double iqr = s.q3 - s.q1;
  const double lo = s.q1 - 1.5 * iqr;
  const double hi = s.q3 + 1.5 * iqr;
  for (const auto& [id, n] : lengths) {
    const double v = static_cast<double>(n);
    if (v < lo || v > hi) s.outliers.emplace_back(id, n);
  }
  return s;
}

LengthStats length_stats(std::span<const std::pair<std::string, std::string>> generations) {
  std::vector<std::pair<std::string, std::size_t>> counts;
  counts.reserve(generations.size());
  for (const auto& [id, t] : generations) counts.emplace_back(id, text::word_count(t));
  return length_stats_from_counts(counts);
}

bool is_missing(double v) noexcept { return std::isnan(v); }

LeaderboardRow leaderboard_row(std::string model_name,
                               std::span<const ConsistencyJudgment> judgments,
                               const std::map<std::string, std::size_t>& word_counts) {
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  LeaderboardRow row;
  row.model_name = std::move(model_name);

  std::size_t answered = 0, above = 0, below = 0, words = 0;
  double sum = 0.0;
  for (const auto& j : judgments) {
    if (j.label == Label::NonAnswer) continue;
    ++answered;
    sum += j.adjusted_score;
    above += j.adjusted_score > 0.5;
    below += j.adjusted_score < 0.5;
    if (auto it = word_counts.find(j.sample_id); it != word_counts.end()) words += it->second;
  }
  row.answer_rate = judgments.empty()
                        ? 0.0
                        : static_cast<double>(answered) / static_cast<double>(judgments.size());
  if (answered == 0) {
    row.accuracy_above = row.hallucination_score = row.hallucination_rate =
        row.factual_consistency_rate = row.avg_summary_length = kNaN;
    return row;
  }
  const double n = static_cast<double>(answered);
  row.accuracy_above = static_cast<double>(above) / n;
  row.hallucination_score = 1.0 - sum / n;
  row.hallucination_rate = static_cast<double>(below) / n;
  row.factual_consistency_rate = 1.0 - row.hallucination_rate;
  row.avg_summary_length = static_cast<double>(words) / n;
  return row;
}

LeaderboardRow leaderboard_row(std::string model_name,
                               std::span<const ConsistencyJudgment> judgments,
                               std::span<const std::pair<std::string, std::string>> generations) {
  std::map<std::string, std::size_t> counts;
  for (const auto& [id, t] : generations) counts[id] = text::word_count(t);
  return leaderboard_row(std::move(model_name), judgments, counts);
}

void sort_leaderboard(std::vector<LeaderboardRow>& rows) {
  std::sort(rows.begin(), rows.end(), [](const LeaderboardRow& a, const LeaderboardRow& b) {
    const bool am = is_missing(a.accuracy_above), bm = is_missing(b.accuracy_above);
    if (am != bm) return bm;
    if (!am) {
      if (a.accuracy_above != b.accuracy_above) return a.accuracy_above > b.accuracy_above;
      if (a.hallucination_score != b.hallucination_score) {
        return a.hallucination_score < b.hallucination_score;
      }
    }
    return a.model_name < b.model_name;
  });
}

namespace {

std::string csv_number(double v) {
  if (is_missing(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string leaderboard_csv(const std::vector<LeaderboardRow>& rows) {
  std::string out = "model,accuracy,hallucination_score,answer_rate,avg_length\n";
  for (const auto& r : rows) {
    out += csv_field(r.model_name) + "," + csv_number(r.accuracy_above) + "," +
           csv_number(r.hallucination_score) + "," + csv_number(r.answer_rate) + "," +
           csv_number(r.avg_summary_length) + "\n";
  }
  return out;
}

}  // namespace halueval
