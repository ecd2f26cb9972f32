#pragma once

// Brute-force reference implementations, written directly from the formulas
// and sharing nothing with the library beyond its public types.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "halueval/metrics.hpp"
#include "halueval/retrieve.hpp"
#include "halueval/score.hpp"

namespace halueval::testing {

inline std::vector<std::string> oracle_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 128 && std::isalnum(u)) {
      cur += static_cast<char>(std::tolower(u));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

struct OracleHit {
  std::string doc_id;
  double score;
};

/// Scores every document from scratch: k1 = 1.2, b = 0.75,
/// idf = ln(1 + (N - df + 0.5) / (df + 0.5)), distinct query terms. Term
/// contributions are added smallest first, so exact ties stay exact.
inline std::vector<OracleHit> bm25_brute_force(
    const std::vector<std::pair<std::string, std::string>>& docs, const std::string& query,
    std::size_t k, double k1 = 1.2, double b = 0.75) {
  std::vector<std::vector<std::string>> toks;
  double total = 0;
  for (const auto& d : docs) {
    toks.push_back(oracle_tokens(d.second));
    total += static_cast<double>(toks.back().size());
  }
  const double n = static_cast<double>(docs.size());
  const double avgdl = total / n;
  const auto q = oracle_tokens(query);
  const std::set<std::string> terms(q.begin(), q.end());

  std::vector<OracleHit> hits;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    std::vector<double> parts;
    for (const auto& t : terms) {
      double df = 0;
      for (const auto& other : toks) df += std::count(other.begin(), other.end(), t) > 0 ? 1 : 0;
      const double tf = static_cast<double>(std::count(toks[i].begin(), toks[i].end(), t));
      if (tf == 0) continue;
      const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
      const double len = static_cast<double>(toks[i].size());
      parts.push_back(idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len / avgdl)));
    }
    std::sort(parts.begin(), parts.end());
    double s = 0;
    for (double p : parts) s += p;
    if (s > 0) hits.push_back({docs[i].first, s});
  }
  std::sort(hits.begin(), hits.end(), [](const OracleHit& a, const OracleHit& c) {
    if (a.score != c.score) return a.score > c.score;
    return a.doc_id < c.doc_id;
  });
  if (hits.size() > k) hits.resize(k);
  return hits;
}

/// Re-runs compute_metrics at every grid point.
inline SweepResult sweep_brute_force(const std::vector<ScoredExample>& scored,
                                     const std::vector<double>& grid) {
  std::map<std::string, GoldLabel> gold;
  for (std::size_t i = 0; i < scored.size(); ++i) gold["s" + std::to_string(i)] = scored[i].gold;
  SweepResult best;
  best.best_f1 = -1;
  for (double tau : grid) {
    std::vector<ConsistencyJudgment> js;
    for (std::size_t i = 0; i < scored.size(); ++i) {
      ConsistencyJudgment j;
      j.sample_id = "s" + std::to_string(i);
      j.adjusted_score = scored[i].score;
      j.fabricated = scored[i].fabricated;
      j.label = (scored[i].fabricated || scored[i].score < tau) ? Label::Hallucinated
                                                                : Label::Faithful;
      js.push_back(j);
    }
    const auto m = compute_metrics(js, gold);
    best.curve.push_back({tau, m.tpr, m.tnr, m.f1});
    if (m.f1 > best.best_f1) {
      best.best_f1 = m.f1;
      best.best_tau = tau;
    }
  }
  return best;
}

/// Fraction of scores <= s.
inline double cdf_count(const std::vector<double>& scores, double s) {
  const auto c = std::count_if(scores.begin(), scores.end(), [&](double x) { return x <= s; });
  return static_cast<double>(c) / static_cast<double>(scores.size());
}

}  // namespace halueval::testing
