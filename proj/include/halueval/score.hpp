#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "halueval/corpus.hpp"
#include "halueval/decompose.hpp"
#include "halueval/retrieve.hpp"

namespace halueval {

enum class Label { Hallucinated, Faithful, NonAnswer };

std::string_view to_string(Label label) noexcept;
std::optional<Label> parse_label(std::string_view s);

struct ScoreRequest {
  std::string premise;     // retrieved knowledge
  std::string hypothesis;  // generated content
};

struct SegmentScore {
  std::size_t index = 0;
  double score = 0.0;

  bool operator==(const SegmentScore&) const = default;
};

struct ConsistencyJudgment {
  std::string sample_id;
  double raw_score = 0.0;
  std::vector<SegmentScore> segment_scores;
  double adjusted_score = 0.0;
  bool fabricated = false;
  Label label = Label::NonAnswer;
  double threshold = 0.5;

  bool operator==(const ConsistencyJudgment&) const = default;
};

/// A factual-consistency function f(G, K). Implementations must be safe to
/// call from several threads at once and return one score in [0, 1] per
/// request, in request order.
class ScorerBackend {
 public:
  virtual ~ScorerBackend() = default;
  virtual std::vector<double> score_batch(std::span<const ScoreRequest> requests) = 0;
  virtual std::string identity() const = 0;
};

// Baseline lexical scorer -----------------------------------------------------

const std::unordered_set<std::string>& baseline_stop_words();  // 50 words
const std::unordered_set<std::string>& negation_tokens();      // not no never cannot nt

/// Tokens as the baseline scorer sees them: "n't" contractions become a
/// separate "nt" token ("isn't" -> is nt, "can't" -> can nt, "won't" -> will nt).
std::vector<std::string> baseline_tokens(std::string_view text);

/// Coverage of the hypothesis' content tokens by the premise, halved when
/// exactly one side is negated. Throws Error(EmptyHypothesis).
double baseline_score(std::string_view premise, std::string_view hypothesis);

class BaselineScorer final : public ScorerBackend {
 public:
  std::vector<double> score_batch(std::span<const ScoreRequest> requests) override;
  std::string identity() const override { return "baseline"; }
};

// Remote scorer ---------------------------------------------------------------

struct RemoteOptions {
  std::string endpoint;  // e.g. http://127.0.0.1:8080
  std::size_t batch_size = 16;
  std::chrono::milliseconds timeout{30000};
};

/// Posts requests in chunks of at most batch_size to {endpoint}/v1/score and
/// reassembles the scores in request order. Errors name the failing chunk:
/// Unreachable, Timeout, MalformedResponse or OutOfRangeScore.
std::vector<double> remote_score_batch(const RemoteOptions& options,
                                       std::span<const ScoreRequest> requests);

/// GET {endpoint}/healthz, true iff 200 with body "ok".
bool remote_healthy(const RemoteOptions& options);

class RemoteScorer final : public ScorerBackend {
 public:
  explicit RemoteScorer(RemoteOptions options);
  std::vector<double> score_batch(std::span<const ScoreRequest> requests) override {
    return remote_score_batch(options_, requests);
  }
  std::string identity() const override { return "remote:" + options_.endpoint; }

 private:
  RemoteOptions options_;
};

// Aggregation and classification ---------------------------------------------

/// raw_score * halving_factor when any segment scores below segment_threshold
/// (applied once), raw_score otherwise.
double aggregate_segments(double raw_score, std::span<const double> segment_scores,
                          double segment_threshold, double halving_factor);

/// Hallucinated if fabricated or score < threshold (strict), else Faithful.
Label classify(double adjusted_score, double threshold, bool fabricated);

/// Checkable anchors in a hypothesis: maximal runs of capitalized tokens
/// joined only by whitespace, and tokens containing a digit. A sentence-initial
/// single word whose lowercase form occurs in the knowledge is not an anchor,
/// and stop words inside an anchor are not checked.
std::vector<std::string> fabrication_anchors(std::string_view hypothesis,
                                             std::string_view knowledge);

/// True when some anchor has a content token missing from the knowledge
/// (case-insensitive).
bool non_fabrication_check(std::string_view hypothesis, std::string_view knowledge);

class FabricationChecker {
 public:
  virtual ~FabricationChecker() = default;
  virtual bool fabricated(std::string_view hypothesis, std::string_view knowledge) const = 0;
};

class AnchorFabricationChecker final : public FabricationChecker {
 public:
  bool fabricated(std::string_view hypothesis, std::string_view knowledge) const override {
    return non_fabrication_check(hypothesis, knowledge);
  }
};

// Per-sample judging ------------------------------------------------------------

enum class KnowledgeForm { Unstructured, Structured, Both };

std::string_view to_string(KnowledgeForm form) noexcept;
KnowledgeForm parse_knowledge_form(std::string_view s);

struct JudgeConfig {
  double threshold = 0.5;
  bool segmented = false;
  bool non_fabrication = false;
  double segment_threshold = 0.5;
  double halving_factor = 0.5;
  RetrieverConfig retriever;
  KnowledgeForm knowledge_form = KnowledgeForm::Both;
  std::size_t knowledge_budget = 512;
  std::shared_ptr<const Decomposer> decomposer;          // rule-based when null
  std::shared_ptr<const FabricationChecker> fabrication;  // anchor rule when null
};

/// Everything a judgment needs besides the scores: the retrieval phase output.
struct JudgePlan {
  std::string sample_id;
  bool non_answer = false;
  ScoreRequest raw;                   // request 0
  std::vector<Segment> segments;      // requests 1..n when segmented
  std::vector<ScoreRequest> segment_requests;

  std::vector<ScoreRequest> requests() const;
};

/// Packs retrieved items into a premise: in order, each item's snippet and/or
/// its triplets rendered as sentences, condensed to `budget` words.
std::string assemble_knowledge(const std::vector<KnowledgeItem>& items, KnowledgeForm form,
                               std::size_t budget);

/// Retriever over a sample's own knowledge: the whole text as one document
/// (QA, snippets are sentence windows) or overlapping sentence windows as
/// pseudo-documents (summarization, snippet = window).
Bm25Retriever sample_retriever(const Sample& sample, const JudgeConfig& config);

/// Decomposition and retrieval for one sample.
JudgePlan plan_judgment(const Sample& sample, const JudgeConfig& config);

/// Applies aggregation, the optional fabrication check and classification to
/// backend scores (one per plan request, in order).
ConsistencyJudgment finish_judgment(const JudgePlan& plan, std::span<const double> scores,
                                    const JudgeConfig& config);

ConsistencyJudgment judge_sample(const Sample& sample, ScorerBackend& backend,
                                 const JudgeConfig& config);

}  // namespace halueval
