#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "halueval/text.hpp"

namespace halueval {

enum class QueryKind { General, Specific };

std::string_view to_string(QueryKind kind) noexcept;

struct SubQuery {
  int step = 1;
  QueryKind kind = QueryKind::General;
  std::string text;
  /// For Specific queries: the part of the answer this query checks.
  std::optional<CharRange> origin_span;

  bool operator==(const SubQuery&) const = default;
};

struct Segment {
  std::size_t index = 0;
  std::string text;
  CharRange span;

  bool operator==(const Segment&) const = default;
};

/// Splits on top-level " and " and ';', ignoring separators inside double
/// quotes or parentheses. Parts are trimmed; empty parts are dropped.
std::vector<std::pair<std::string, CharRange>> split_clauses(std::string_view s);

/// "Regarding: {general}. Candidate: {answer}."
std::string specific_query(std::string_view general, std::string_view answer);

/// Rule-based dual-query decomposition. Each question clause becomes a General
/// query followed by its Specific check. When the answer splits into as many
/// clauses as the question, clause i is checked against answer part i;
/// otherwise every Specific carries the full answer. An empty answer yields
/// General queries only.
///
/// Throws Error(EmptyQuestion).
std::vector<SubQuery> decompose_qa(std::string_view question, std::string_view answer);

std::vector<Segment> segment_summary(std::string_view summary,
                                     const std::vector<std::string>& abbreviations);
std::vector<Segment> segment_summary(std::string_view summary);

class Decomposer {
 public:
  virtual ~Decomposer() = default;
  virtual std::vector<SubQuery> decompose(std::string_view sample_id, std::string_view question,
                                          std::string_view answer) const = 0;
};

class RuleDecomposer final : public Decomposer {
 public:
  std::vector<SubQuery> decompose(std::string_view sample_id, std::string_view question,
                                  std::string_view answer) const override;
};

/// Serves sub-queries produced elsewhere (an LLM, a human), keyed by sample
/// id. Lines look like
///   {"id": "q1", "subqueries": [{"kind": "general", "text": "..."}, ...]}
/// Samples without an entry fall back to the rule decomposer.
class ExternalDecomposer final : public Decomposer {
 public:
  explicit ExternalDecomposer(std::map<std::string, std::vector<SubQuery>> table);
  static ExternalDecomposer from_jsonl(std::string_view content);

  std::vector<SubQuery> decompose(std::string_view sample_id, std::string_view question,
                                  std::string_view answer) const override;

 private:
  std::map<std::string, std::vector<SubQuery>> table_;
  RuleDecomposer fallback_;
};

}  // namespace halueval
