// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances and time budgets are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "halueval/metrics.hpp"
#include "halueval/pipeline.hpp"
#include "halueval/retrieve.hpp"
#include "halueval/score.hpp"
#include "support/echo_server.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using namespace halueval;
namespace ht = halueval::testing;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

struct Criterion {
  std::string name;
  double budget_s;
  std::function<Outcome()> run;
};

// Published TPR / TNR / accuracy rows, in percent, each read as a balanced
// 1000 + 1000 fixture.
struct TableRow {
  const char* method;
  double tpr, tnr, accuracy;
};

constexpr TableRow kTableRows[] = {
    {"qa/structured-reference", 67.80, 83.10, 75.45},
    {"qa/unstructured-reference", 72.40, 85.90, 79.15},
    {"qa/structured-replication", 66.00, 84.50, 75.25},
    {"qa/unstructured-replication", 69.50, 84.20, 76.85},
    {"qa/hhem", 67.20, 86.60, 76.90},
    {"qa/hhem-non-fabrication", 78.90, 85.50, 82.20},
    {"qa/retrieval-unstructured+hhem", 54.10, 93.30, 73.70},
    {"qa/retrieval-structured+hhem", 54.50, 92.90, 73.70},
    {"sum/structured-reference", 80.20, 45.40, 62.80},
    {"sum/unstructured-reference", 65.00, 67.20, 66.10},
    {"sum/structured-replication", 81.00, 43.40, 62.20},
    {"sum/unstructured-replication", 68.60, 62.00, 65.30},
    {"sum/hhem", 32.20, 79.40, 55.80},
    {"sum/retrieval-unstructured+hhem", 54.40, 69.00, 61.70},
    {"sum/retrieval-structured+hhem", 53.00, 68.80, 60.90},
};

Outcome metrics_engine() {
  Outcome o;
  constexpr double tol = 0.0005;
  for (const auto& row : kTableRows) {
    const auto tp = static_cast<std::size_t>(std::lround(row.tpr * 10));
    const auto tn = static_cast<std::size_t>(std::lround(row.tnr * 10));
    const auto m = metrics_from_counts(tp, 1000 - tn, tn, 1000 - tp);
    o.require(std::abs(m.tpr - row.tpr / 100) <= tol, std::string(row.method) + " tpr");
    o.require(std::abs(m.tnr - row.tnr / 100) <= tol, std::string(row.method) + " tnr");
    o.require(std::abs(m.accuracy - row.accuracy / 100) <= tol, std::string(row.method) + " accuracy");
    o.require(std::abs(m.accuracy - (m.tpr + m.tnr) / 2) <= 1e-12,
              std::string(row.method) + " balanced identity");
  }
  const auto hhem = metrics_from_counts(672, 134, 866, 328);
  o.require(hhem.tp == 672 && hhem.fn == 328 && hhem.tn == 866 && hhem.fp == 134, "hhem counts");
  return o;
}

Outcome halving_rule() {
  Outcome o;
  const double segs[] = {0.9, 0.3};
  o.require(aggregate_segments(0.84, segs, 0.5, 0.5) == 0.42, "0.84 with [0.9, 0.3] -> 0.42");
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    std::vector<double> s(rng() % 8);
    for (auto& x : s) x = u(rng);
    const double raw = 0.001 + 0.999 * u(rng), th = u(rng), factor = 0.999 * u(rng);
    const bool failing = std::any_of(s.begin(), s.end(), [&](double x) { return x < th; });
    const double out = aggregate_segments(raw, s, th, factor);
    o.require((out == raw) == !failing, "output = raw iff no failing segment, case " + std::to_string(i));
    o.require(out <= raw, "output <= raw");
  }
  return o;
}

Outcome classification_boundary() {
  Outcome o;
  constexpr double eps = 1e-9;
  for (int i = 0; i <= 1000; ++i) {
    const double tau = i / 1000.0;
    o.require(classify(tau, tau, false) == Label::Faithful, "classify(tau, tau) at " + std::to_string(tau));
    if (tau - eps >= 0.0) {
      o.require(classify(tau - eps, tau, false) == Label::Hallucinated,
                "classify(tau - eps, tau) at " + std::to_string(tau));
    }
  }
  return o;
}

std::string random_doc(std::mt19937& rng, std::size_t vocab, std::size_t max_tokens) {
  std::string s;
  const std::size_t n = 1 + rng() % max_tokens;
  for (std::size_t i = 0; i < n; ++i) s += "t" + std::to_string(rng() % vocab) + (rng() % 7 ? " " : ". ");
  return s;
}

Outcome bm25_oracle() {
  Outcome o;
  std::mt19937 rng(99);
  RetrieverConfig cfg;
  cfg.snippet_mode = SnippetMode::WholeDocument;
  for (int corpus = 0; corpus < 50; ++corpus) {
    const std::size_t n = 1 + rng() % 100;
    const std::size_t vocab = 5 + rng() % 80;
    std::vector<std::pair<std::string, std::string>> docs;
    std::vector<Document> input;
    for (std::size_t i = 0; i < n; ++i) {
      char id[16];
      std::snprintf(id, sizeof id, "doc%03zu", (i * 53) % 101);
      docs.push_back({id, random_doc(rng, vocab, 30)});
      input.push_back({id, docs.back().second, 0});
    }
    const auto index = build_index(std::move(input));
    for (int q = 0; q < 20; ++q) {
      cfg.k = 1 + rng() % 20;
      const auto query = random_doc(rng, vocab + 10, 6);
      const auto got = retrieve(index, query, cfg);
      const auto want = ht::bm25_brute_force(docs, query, cfg.k);
      o.require(got.size() == want.size(), "result count, corpus " + std::to_string(corpus));
      if (!o.ok) return o;
      for (std::size_t i = 0; i < got.size(); ++i) {
        o.require(got[i].doc_id == want[i].doc_id, "ranking, corpus " + std::to_string(corpus));
        o.require(std::abs(got[i].score - want[i].score) <= 1e-9,
                  "score within 1e-9, corpus " + std::to_string(corpus));
      }
    }
  }
  return o;
}

Outcome sweep_oracle() {
  Outcome o;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int set = 0; set < 100; ++set) {
    std::vector<ScoredExample> scored(1 + rng() % 200);
    for (auto& s : scored) {
      s.score = rng() % 3 == 0 ? std::round(u(rng) * 20) / 20 : u(rng);
      s.gold = rng() % 2 ? GoldLabel::Hallucinated : GoldLabel::Faithful;
      s.fabricated = rng() % 12 == 0;
    }
    std::vector<double> grid = default_grid();
    if (set % 4 == 1) {
      grid.clear();
      for (int i = 0; i <= 100; ++i) grid.push_back(i / 100.0);
    }
    const auto got = sweep_threshold(scored, grid);
    const auto want = ht::sweep_brute_force(scored, grid);
    o.require(got.best_tau == want.best_tau, "best_tau, set " + std::to_string(set));
    o.require(std::abs(got.best_f1 - want.best_f1) <= 1e-12, "best_f1, set " + std::to_string(set));
    o.require(got.curve.size() == want.curve.size(), "curve size, set " + std::to_string(set));
    for (std::size_t i = 0; o.ok && i < got.curve.size(); ++i) {
      o.require(std::abs(got.curve[i].tpr - want.curve[i].tpr) <= 1e-12 &&
                    std::abs(got.curve[i].tnr - want.curve[i].tnr) <= 1e-12 &&
                    std::abs(got.curve[i].f1 - want.curve[i].f1) <= 1e-12,
                "curve point, set " + std::to_string(set));
    }
  }
  return o;
}

Outcome cdf_and_lengths() {
  Outcome o;
  std::mt19937 rng(13);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> scores(1 + rng() % 300);
    for (auto& s : scores) s = static_cast<double>(rng() % 1001) / 1000.0;
    const auto c = compute_cdf(scores);
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      if (i > 0) {
        o.require(c.points[i].fraction >= c.points[i - 1].fraction, "cdf monotone");
        o.require(c.points[i].score > c.points[i - 1].score, "cdf scores increasing");
      }
      o.require(std::abs(c.points[i].fraction - ht::cdf_count(scores, c.points[i].score)) <= 1e-12,
                "cdf matches counting oracle");
    }
    o.require(c.points.back().fraction == 1.0, "cdf ends at 1");

    std::vector<std::pair<std::string, std::size_t>> lens(1 + rng() % 200);
    for (std::size_t i = 0; i < lens.size(); ++i) {
      lens[i] = {"s" + std::to_string(i), rng() % 10 == 0 ? rng() % 900 : 20 + rng() % 60};
    }
    const auto st = length_stats_from_counts(lens);
    o.require(st.min <= st.q1 && st.q1 <= st.median && st.median <= st.q3 && st.q3 <= st.max,
              "quartile ordering");
    const double iqr = st.q3 - st.q1;
    const double lo = st.q1 - 1.5 * iqr, hi = st.q3 + 1.5 * iqr;
    std::size_t expected = 0;
    for (const auto& [id, n] : lens) expected += (n < lo || n > hi);
    o.require(st.outliers.size() == expected, "fence membership count");
    for (const auto& [id, n] : st.outliers) o.require(n < lo || n > hi, "outlier outside fence");
  }
  return o;
}

Outcome end_to_end_determinism() {
  Outcome o;
  ht::TempDir dir;
  std::string judgments, report;
  int run = 0;
  for (std::size_t workers : {1u, 4u, 8u}) {
    for (int rep = 0; rep < 3; ++rep) {
      RunConfig cfg;
      cfg.dataset = ht::data_path("qa_synthetic_50.jsonl");
      cfg.workers = workers;
      cfg.out = dir / ("run" + std::to_string(run++));
      std::ostringstream log;
      o.require(cmd_evaluate(cfg, log) == 0, "evaluate exit code: " + log.str());
      if (!o.ok) return o;
      const auto j = ht::read_file(cfg.out / "judgments.jsonl");
      const auto r = ht::read_file(cfg.out / "report.json");
      o.require(std::count(j.begin(), j.end(), '\n') == 50, "50 judgments");
      if (judgments.empty()) {
        judgments = j;
        report = r;
      }
      o.require(j == judgments, "judgments.jsonl bytes, workers " + std::to_string(workers));
      o.require(r == report, "report.json bytes, workers " + std::to_string(workers));
    }
  }
  return o;
}

Outcome segmented_summarization() {
  Outcome o;
  const auto ds = ingest_dataset(ht::data_path("summarization_synthetic_20.jsonl"), Task::Summarization);
  BaselineScorer scorer;
  JudgeConfig whole_cfg, seg_cfg;
  seg_cfg.segmented = true;
  const auto whole = evaluate(ds, scorer, whole_cfg, 4).metrics;
  const auto seg = evaluate(ds, scorer, seg_cfg, 4).metrics;
  o.require(whole && seg, "labeled fixture");
  if (!o.ok) return o;
  o.require(whole->tp == 3 && whole->fn == 7 && whole->tn == 10 && whole->fp == 0,
            "unsegmented golden counts (3/7/10/0)");
  o.require(seg->tp == 7 && seg->fn == 3 && seg->tn == 10 && seg->fp == 0,
            "segmented golden counts (7/3/10/0)");
  o.require(seg->tpr > whole->tpr, "segmented TPR exceeds unsegmented TPR");
  char buf[96];
  std::snprintf(buf, sizeof buf, "tpr %.2f vs %.2f", seg->tpr, whole->tpr);
  if (o.ok) o.detail = buf;
  return o;
}

Outcome protocol_conformance() {
  Outcome o;
  ht::EchoServer server;
  std::mt19937 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    RemoteOptions opts{server.endpoint(), 1 + rng() % 17, std::chrono::milliseconds(5000)};
    std::vector<ScoreRequest> reqs(rng() % 70);
    for (auto& r : reqs) r = {"premise", std::string(rng() % 300, 'h')};
    const auto scores = remote_score_batch(opts, reqs);
    o.require(scores.size() == reqs.size(), "length preserved");
    for (std::size_t i = 0; o.ok && i < reqs.size(); ++i) {
      o.require(scores[i] == ht::EchoServer::echo_score(reqs[i].hypothesis), "order preserved");
    }
  }
  o.require(remote_healthy({server.endpoint(), 1, std::chrono::milliseconds(2000)}), "healthz");
  return o;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"metrics-engine: published rows reproduce within 0.0005", 1.0, metrics_engine},
      {"halving-rule: 0.42 example and 10000 randomized cases", 1.0, halving_rule},
      {"classification-boundary: strict rule with eps 1e-9", 1.0, classification_boundary},
      {"bm25-oracle: 50 corpora x 20 queries, scores within 1e-9", 30.0, bm25_oracle},
      {"sweep-oracle: 100 randomized labeled sets", 10.0, sweep_oracle},
      {"cdf-length-properties: monotone, terminal 1, quartiles, fence", 5.0, cdf_and_lengths},
      {"end-to-end-determinism: 3 runs x workers {1,4,8}, 50 judgments", 5.0, end_to_end_determinism},
      {"segmented-summarization: segmented TPR > unsegmented TPR", 5.0, segmented_summarization},
      {"protocol-conformance: order and length on randomized batches", 10.0, protocol_conformance},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.ok && secs > c.budget_s) {
      o.ok = false;
      o.detail = "over time budget";
    }
    std::printf("%s %s [%.3fs / %.0fs]%s%s\n", o.ok ? "PASS" : "FAIL", c.name.c_str(), secs,
                c.budget_s, o.detail.empty() ? "" : " ", o.detail.c_str());
    failures += o.ok ? 0 : 1;
  }
  std::fflush(stdout);
  return failures == 0 ? 0 : 1;
}
