#include "halueval/score.hpp"

#include <algorithm>
#include <map>

#include "halueval/error.hpp"
#include "halueval/text.hpp"

namespace halueval {

std::string_view to_string(Label label) noexcept {
  switch (label) {
    case Label::Hallucinated: return "hallucinated";
    case Label::Faithful: return "faithful";
    case Label::NonAnswer: return "non_answer";
  }
  return "unknown";
}

std::optional<Label> parse_label(std::string_view s) {
  const auto v = text::to_lower(text::trim(s));
  if (v == "hallucinated") return Label::Hallucinated;
  if (v == "faithful") return Label::Faithful;
  if (v == "non_answer" || v == "nonanswer") return Label::NonAnswer;
  return std::nullopt;
}

std::string_view to_string(KnowledgeForm form) noexcept {
  switch (form) {
    case KnowledgeForm::Unstructured: return "unstructured";
    case KnowledgeForm::Structured: return "structured";
    case KnowledgeForm::Both: return "both";
  }
  return "both";
}

KnowledgeForm parse_knowledge_form(std::string_view s) {
  const auto v = text::to_lower(s);
  if (v == "unstructured") return KnowledgeForm::Unstructured;
  if (v == "structured") return KnowledgeForm::Structured;
  if (v == "both") return KnowledgeForm::Both;
  throw Error(Errc::InvalidArgument, "unknown knowledge form '" + std::string(s) + "'");
}

const std::unordered_set<std::string>& baseline_stop_words() {
  static const std::unordered_set<std::string> words = {
      "a",    "an",    "the",   "is",    "are",  "was",  "were", "be",   "been",  "being",
      "am",   "of",    "in",    "on",    "at",   "to",   "for",  "from", "by",    "with",
      "and",  "or",    "but",   "as",    "that", "this", "these", "those", "it",   "its",
      "he",   "she",   "they",  "them",  "his",  "her",  "their", "i",    "you",   "we",
      "do",   "does",  "did",   "has",   "have", "had",  "will", "would", "there", "which"};
  return words;
}

const std::unordered_set<std::string>& negation_tokens() {
  static const std::unordered_set<std::string> words = {"not", "no", "never", "cannot", "nt"};
  return words;
}

namespace {

// Length of an "'t" / "’t" contraction tail starting at `pos`, or 0.
std::size_t contraction_tail(std::string_view s, std::size_t pos) {
  auto t_at = [&](std::size_t p) {
    return p < s.size() && (s[p] == 't' || s[p] == 'T') &&
           (p + 1 == s.size() || !text::is_alnum(s[p + 1]));
  };
  if (pos < s.size() && s[pos] == '\'' && t_at(pos + 1)) return 2;
  if (s.substr(pos, 3) == "\xE2\x80\x99" && t_at(pos + 3)) return 4;
  return 0;
}

}  // namespace

std::vector<std::string> baseline_tokens(std::string_view s) {
  const auto spans = text::tokenize_spans(s);
  std::vector<std::string> out;
  out.reserve(spans.size());
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto& tok = spans[i].text;
    const std::size_t tail = contraction_tail(s, spans[i].span.end);
    if (tail == 0 || tok.back() != 'n') {
      out.push_back(tok);
      continue;
    }
    if (tok == "can") {
      out.push_back("can");
    } else if (tok == "won") {
      out.push_back("will");
    } else if (tok == "shan") {
      out.push_back("shall");
    } else if (tok.size() > 1) {
      out.push_back(tok.substr(0, tok.size() - 1));
    }
    out.push_back("nt");
    // The "t" token that follows the apostrophe.
    if (i + 1 < spans.size() && spans[i + 1].span.begin == spans[i].span.end + tail - 1) ++i;
  }
  return out;
}

double baseline_score(std::string_view premise, std::string_view hypothesis) {
  if (text::trim(hypothesis).empty()) throw Error(Errc::EmptyHypothesis, "hypothesis is empty");
  const auto& stop = baseline_stop_words();
  const auto& neg = negation_tokens();

  const auto hyp_tokens = baseline_tokens(hypothesis);
  const auto prem_tokens = baseline_tokens(premise);
  const std::unordered_set<std::string> premise_set(prem_tokens.begin(), prem_tokens.end());

  std::unordered_set<std::string> content;
  bool hyp_negated = false;
  for (const auto& t : hyp_tokens) {
    if (neg.count(t)) {
      hyp_negated = true;
    } else if (!stop.count(t)) {
      content.insert(t);
    }
  }
  const bool prem_negated = std::any_of(prem_tokens.begin(), prem_tokens.end(),
                                        [&](const std::string& t) { return neg.count(t) > 0; });

  double coverage = 1.0;
  if (!content.empty()) {
    std::size_t covered = 0;
    for (const auto& t : content) covered += premise_set.count(t);
    coverage = static_cast<double>(covered) / static_cast<double>(content.size());
  }
  if (hyp_negated != prem_negated) coverage *= 0.5;
  return std::clamp(coverage, 0.0, 1.0);
}

std::vector<double> BaselineScorer::score_batch(std::span<const ScoreRequest> requests) {
  std::vector<double> out;
  out.reserve(requests.size());
  for (const auto& r : requests) out.push_back(baseline_score(r.premise, r.hypothesis));
  return out;
}

namespace {

void require_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(Errc::InvalidArgument, std::string(what) + " must lie in [0, 1]");
  }
}

}  // namespace

double aggregate_segments(double raw_score, std::span<const double> segment_scores,
                          double segment_threshold, double halving_factor) {
  require_unit(raw_score, "raw_score");
  require_unit(segment_threshold, "segment_threshold");
  require_unit(halving_factor, "halving_factor");
  bool failing = false;
  for (double s : segment_scores) {
    require_unit(s, "segment score");
    failing = failing || s < segment_threshold;
  }
  return failing ? raw_score * halving_factor : raw_score;
}

Label classify(double adjusted_score, double threshold, bool fabricated) {
  require_unit(adjusted_score, "score");
  require_unit(threshold, "threshold");
  if (fabricated) return Label::Hallucinated;
  return adjusted_score < threshold ? Label::Hallucinated : Label::Faithful;
}

namespace {

struct Anchor {
  std::vector<std::string> tokens;
  std::string surface;
};

std::vector<Anchor> find_anchors(std::string_view hypothesis,
                                 const std::unordered_set<std::string>& knowledge_tokens) {
  const auto tokens = text::tokenize_spans(hypothesis);
  std::vector<Anchor> anchors;

  auto sentence_initial = [&](std::size_t i) {
    if (i == 0) return true;
    const auto gap = hypothesis.substr(tokens[i - 1].span.end,
                                       tokens[i].span.begin - tokens[i - 1].span.end);
    return gap.find_first_of(".!?") != std::string_view::npos;
  };
  auto capitalized = [&](std::size_t i) { return text::is_upper(hypothesis[tokens[i].span.begin]); };
  auto numeric = [&](std::size_t i) {
    return std::any_of(tokens[i].text.begin(), tokens[i].text.end(), text::is_digit);
  };
  auto whitespace_gap = [&](std::size_t i) {
    const auto gap = hypothesis.substr(tokens[i - 1].span.end,
                                       tokens[i].span.begin - tokens[i - 1].span.end);
    return !gap.empty() && std::all_of(gap.begin(), gap.end(), text::is_space);
  };

  std::size_t i = 0;
  while (i < tokens.size()) {
    if (numeric(i)) {
      anchors.push_back({{tokens[i].text}, tokens[i].text});
      ++i;
      continue;
    }
    if (!capitalized(i)) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < tokens.size() && !numeric(j) && capitalized(j) && whitespace_gap(j)) ++j;
    const bool single = j == i + 1;
    if (!(single && sentence_initial(i) && knowledge_tokens.count(tokens[i].text))) {
      Anchor a;
      for (std::size_t k = i; k < j; ++k) a.tokens.push_back(tokens[k].text);
      a.surface = std::string(hypothesis.substr(tokens[i].span.begin,
                                                tokens[j - 1].span.end - tokens[i].span.begin));
      anchors.push_back(std::move(a));
    }
    i = j;
  }
  return anchors;
}

std::vector<std::string> checkable(const Anchor& a) {
  const auto& stop = baseline_stop_words();
  const auto& neg = negation_tokens();
  std::vector<std::string> out;
  for (const auto& t : a.tokens) {
    if (!stop.count(t) && !neg.count(t)) out.push_back(t);
  }
  return out;
}

}  // namespace

std::vector<std::string> fabrication_anchors(std::string_view hypothesis,
                                             std::string_view knowledge) {
  const auto kt = text::tokenize(knowledge);
  const std::unordered_set<std::string> knowledge_tokens(kt.begin(), kt.end());
  std::vector<std::string> out;
  for (const auto& a : find_anchors(hypothesis, knowledge_tokens)) {
    if (!checkable(a).empty()) out.push_back(a.surface);
  }
  return out;
}

bool non_fabrication_check(std::string_view hypothesis, std::string_view knowledge) {
  const auto kt = text::tokenize(knowledge);
  const std::unordered_set<std::string> knowledge_tokens(kt.begin(), kt.end());
  for (const auto& a : find_anchors(hypothesis, knowledge_tokens)) {
    for (const auto& t : checkable(a)) {
      if (!knowledge_tokens.count(t)) return true;
    }
  }
  return false;
}

std::vector<ScoreRequest> JudgePlan::requests() const {
  std::vector<ScoreRequest> out;
  if (non_answer) return out;
  out.reserve(1 + segment_requests.size());
  out.push_back(raw);
  out.insert(out.end(), segment_requests.begin(), segment_requests.end());
  return out;
}

std::string assemble_knowledge(const std::vector<KnowledgeItem>& items, KnowledgeForm form,
                               std::size_t budget) {
  std::string joined;
  auto append = [&](std::string_view part) {
    if (part.empty()) return;
    if (!joined.empty()) joined += ' ';
    joined += part;
  };
  for (const auto& item : items) {
    if (form != KnowledgeForm::Structured) append(text::trim(item.snippet));
    if (form != KnowledgeForm::Unstructured) {
      for (const auto& t : item.triplets) append(render_triplet(t));
    }
  }
  if (joined.empty()) return joined;
  return condense_snippet(joined, budget);
}

namespace {

// Items from several queries, best score first, one per source span. Equal
// scores keep query order.
std::vector<KnowledgeItem> merge_items(std::vector<std::vector<KnowledgeItem>> per_query) {
  std::vector<KnowledgeItem> all;
  for (auto& items : per_query) {
    for (auto& item : items) all.push_back(std::move(item));
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const KnowledgeItem& a, const KnowledgeItem& b) { return a.score > b.score; });
  std::vector<KnowledgeItem> out;
  std::vector<CharRange> seen;
  for (auto& item : all) {
    if (std::find(seen.begin(), seen.end(), item.span) != seen.end()) continue;
    seen.push_back(item.span);
    out.push_back(std::move(item));
  }
  return out;
}

}  // namespace

Bm25Retriever sample_retriever(const Sample& sample, const JudgeConfig& config) {
  RetrieverConfig rc = config.retriever;
  std::vector<Document> docs;
  if (sample.task == Task::Summarization) {
    docs = sentence_windows(sample.knowledge, sample.id, rc.window_sentences, rc.abbreviations);
    rc.snippet_mode = SnippetMode::WholeDocument;
  } else {
    docs.push_back({sample.id, sample.knowledge, 0});
    rc.snippet_mode = SnippetMode::SentenceWindow;
  }
  return Bm25Retriever(build_index(std::move(docs)), std::move(rc));
}

JudgePlan plan_judgment(const Sample& sample, const JudgeConfig& config) {
  JudgePlan plan;
  plan.sample_id = sample.id;
  if (text::trim(sample.generation).empty()) {
    plan.non_answer = true;
    return plan;
  }
  std::optional<Bm25Retriever> retriever;
  if (sample.task == Task::QA || config.segmented) retriever = sample_retriever(sample, config);

  plan.raw.hypothesis = sample.generation;
  if (sample.task == Task::QA) {
    static const RuleDecomposer rule;
    const Decomposer& decomposer = config.decomposer ? *config.decomposer : rule;
    const auto queries =
        decomposer.decompose(sample.id, sample.question.value_or(""), sample.generation);
    std::vector<std::vector<KnowledgeItem>> per_query;
    for (const auto& q : queries) per_query.push_back(retriever->retrieve(q.text));
    plan.raw.premise = assemble_knowledge(merge_items(std::move(per_query)),
                                          config.knowledge_form, config.knowledge_budget);
  } else {
    plan.raw.premise = sample.knowledge;
  }

  if (config.segmented) {
    plan.segments = segment_summary(sample.generation, config.retriever.abbreviations);
    for (const auto& seg : plan.segments) {
      auto items = retriever->retrieve(seg.text);
      const auto form = sample.task == Task::Summarization ? KnowledgeForm::Unstructured
                                                           : config.knowledge_form;
      plan.segment_requests.push_back(
          {assemble_knowledge(items, form, config.knowledge_budget), seg.text});
    }
  }
  return plan;
}

ConsistencyJudgment finish_judgment(const JudgePlan& plan, std::span<const double> scores,
                                    const JudgeConfig& config) {
  ConsistencyJudgment j;
  j.sample_id = plan.sample_id;
  j.threshold = config.threshold;
  if (plan.non_answer) {
    j.label = Label::NonAnswer;
    return j;
  }
  if (scores.size() != 1 + plan.segment_requests.size()) {
    throw Error(Errc::MalformedResponse, "score count does not match request count",
                plan.sample_id);
  }
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) {
      throw Error(Errc::OutOfRangeScore, "backend score outside [0, 1]", plan.sample_id);
    }
  }
  j.raw_score = scores[0];
  const auto segment_scores = scores.subspan(1);
  for (std::size_t i = 0; i < segment_scores.size(); ++i) {
    j.segment_scores.push_back({plan.segments[i].index, segment_scores[i]});
  }
  j.adjusted_score = config.segmented
                         ? aggregate_segments(j.raw_score, segment_scores,
                                              config.segment_threshold, config.halving_factor)
                         : j.raw_score;
  if (config.non_fabrication) {
    static const AnchorFabricationChecker anchors;
    const FabricationChecker& checker = config.fabrication ? *config.fabrication : anchors;
    j.fabricated = checker.fabricated(plan.raw.hypothesis, plan.raw.premise);
  }
  j.label = classify(j.adjusted_score, config.threshold, j.fabricated);
  return j;
}

ConsistencyJudgment judge_sample(const Sample& sample, ScorerBackend& backend,
                                 const JudgeConfig& config) {
  const auto plan = plan_judgment(sample, config);
  const auto requests = plan.requests();
  std::vector<double> scores;
  if (!requests.empty()) scores = backend.score_batch(requests);
  return finish_judgment(plan, scores, config);
}

}  // namespace halueval
