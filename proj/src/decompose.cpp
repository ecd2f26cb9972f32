#include "halueval/decompose.hpp"

#include <json.hpp>

#include "halueval/error.hpp"

namespace halueval {

std::string_view to_string(QueryKind kind) noexcept {
  return kind == QueryKind::General ? "general" : "specific";
}

namespace {

void push_part(std::vector<std::pair<std::string, CharRange>>& out, std::string_view s,
               std::size_t b, std::size_t e) {
  while (b < e && text::is_space(s[b])) ++b;
  while (e > b && text::is_space(s[e - 1])) --e;
  if (e > b) out.emplace_back(std::string(s.substr(b, e - b)), CharRange{b, e});
}

}  // namespace

std::vector<std::pair<std::string, CharRange>> split_clauses(std::string_view s) {
  static constexpr std::string_view kAnd = " and ";
  std::vector<std::pair<std::string, CharRange>> out;
  bool quoted = false;
  int depth = 0;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (c == '"') {
      quoted = !quoted;
    } else if (!quoted && c == '(') {
      ++depth;
    } else if (!quoted && c == ')' && depth > 0) {
      --depth;
    } else if (!quoted && depth == 0) {
      if (c == ';') {
        push_part(out, s, start, i);
        start = i + 1;
      } else if (s.substr(i, kAnd.size()) == kAnd) {
        push_part(out, s, start, i);
        start = i + kAnd.size();
        i = start;
        continue;
      }
    }
    ++i;
  }
  push_part(out, s, start, s.size());
  return out;
}

std::string specific_query(std::string_view general, std::string_view answer) {
  std::string out = "Regarding: ";
  out += general;
  out += ". Candidate: ";
  out += answer;
  out += '.';
  return out;
}

std::vector<SubQuery> decompose_qa(std::string_view question, std::string_view answer) {
  if (text::trim(question).empty()) throw Error(Errc::EmptyQuestion, "question is empty");

  auto generals = split_clauses(question);
  const auto trimmed = text::trim(answer);
  const CharRange whole{static_cast<std::size_t>(trimmed.data() - answer.data()),
                        static_cast<std::size_t>(trimmed.data() - answer.data()) + trimmed.size()};
  auto answer_parts = trimmed.empty() ? decltype(generals){} : split_clauses(answer);
  const bool paired = answer_parts.size() == generals.size() && generals.size() > 1;

  std::vector<SubQuery> out;
  int step = 1;
  for (std::size_t i = 0; i < generals.size(); ++i) {
    out.push_back({step++, QueryKind::General, generals[i].first, std::nullopt});
    if (trimmed.empty()) continue;
    if (paired) {
      out.push_back({step++, QueryKind::Specific,
                     specific_query(generals[i].first, answer_parts[i].first),
                     answer_parts[i].second});
    } else {
      out.push_back(
          {step++, QueryKind::Specific, specific_query(generals[i].first, trimmed), whole});
    }
  }
  return out;
}

std::vector<Segment> segment_summary(std::string_view summary,
                                     const std::vector<std::string>& abbreviations) {
  std::vector<Segment> out;
  for (const auto& r : text::split_sentences(summary, abbreviations)) {
    out.push_back({out.size(), std::string(summary.substr(r.begin, r.size())), r});
  }
  return out;
}

std::vector<Segment> segment_summary(std::string_view summary) {
  return segment_summary(summary, text::default_abbreviations());
}

std::vector<SubQuery> RuleDecomposer::decompose(std::string_view, std::string_view question,
                                                std::string_view answer) const {
  return decompose_qa(question, answer);
}

ExternalDecomposer::ExternalDecomposer(std::map<std::string, std::vector<SubQuery>> table)
    : table_(std::move(table)) {}

ExternalDecomposer ExternalDecomposer::from_jsonl(std::string_view content) {
  using json = nlohmann::json;
  std::map<std::string, std::vector<SubQuery>> table;
  std::size_t line = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    ++line;
    const auto raw = content.substr(pos, nl - pos);
    pos = nl + 1;
    if (text::trim(raw).empty()) continue;
    try {
      const auto obj = json::parse(raw);
      auto& queries = table[obj.at("id").get<std::string>()];
      int step = 1;
      for (const auto& q : obj.at("subqueries")) {
        const auto kind = text::to_lower(q.at("kind").get<std::string>());
        if (kind != "general" && kind != "specific") {
          throw Error(Errc::MalformedRecord, "unknown sub-query kind", std::to_string(line));
        }
        auto text = q.at("text").get<std::string>();
        if (text::trim(text).empty()) {
          throw Error(Errc::MalformedRecord, "empty sub-query text", std::to_string(line));
        }
        queries.push_back({step++, kind == "general" ? QueryKind::General : QueryKind::Specific,
                           std::move(text), std::nullopt});
      }
    } catch (const json::exception& e) {
      throw Error(Errc::MalformedRecord, e.what(), std::to_string(line));
    }
  }
  return ExternalDecomposer(std::move(table));
}

std::vector<SubQuery> ExternalDecomposer::decompose(std::string_view sample_id,
                                                    std::string_view question,
                                                    std::string_view answer) const {
  if (auto it = table_.find(std::string(sample_id)); it != table_.end() && !it->second.empty()) {
    return it->second;
  }
  return fallback_.decompose(sample_id, question, answer);
}

}  // namespace halueval
