#include "halueval/text.hpp"

#include <algorithm>

namespace halueval::text {

bool is_alnum(char c) noexcept {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}
bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
bool is_upper(char c) noexcept { return c >= 'A' && c <= 'Z'; }
bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }

static char lower(char c) noexcept { return is_upper(c) ? static_cast<char>(c - 'A' + 'a') : c; }

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = lower(c);
  return out;
}

std::vector<Token> tokenize_spans(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_alnum(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && is_alnum(s[j])) ++j;
    out.push_back({to_lower(s.substr(i, j - i)), {i, j}});
    i = j;
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  for (auto& t : tokenize_spans(s)) out.push_back(std::move(t.text));
  return out;
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::size_t word_count(std::string_view s) { return words(s).size(); }

std::string_view trim(std::string_view s) noexcept {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::string normalize_whitespace(std::string_view s) {
  std::string out;
  for (auto w : words(s)) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

const std::vector<std::string>& default_abbreviations() {
  static const std::vector<std::string> list = {"Mr", "Mrs", "Ms",  "Dr",  "Prof", "St",  "vs",
                                                "etc", "e.g", "i.e", "Jr", "Sr",   "U.S", "U.K"};
  return list;
}

namespace {

bool is_abbreviation(std::string_view s, std::size_t dot,
                     const std::vector<std::string>& abbreviations) {
  std::size_t b = dot;
  while (b > 0 && !is_space(s[b - 1])) --b;
  // Opening punctuation such as '(' or a quote is not part of the word.
  while (b < dot && !is_alnum(s[b])) ++b;
  if (b == dot) return false;
  const std::string word = to_lower(s.substr(b, dot - b));
  return std::any_of(abbreviations.begin(), abbreviations.end(),
                     [&](const std::string& a) { return to_lower(a) == word; });
}

void push_trimmed(std::vector<CharRange>& out, std::string_view s, std::size_t b, std::size_t e) {
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  if (e > b) out.push_back({b, e});
}

}  // namespace

std::vector<CharRange> split_sentences(std::string_view s,
                                       const std::vector<std::string>& abbreviations) {
  std::vector<CharRange> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const char c = s[i];
    if (c != '.' && c != '!' && c != '?') continue;
    if (!is_space(s[i + 1])) continue;
    std::size_t j = i + 1;
    while (j < s.size() && is_space(s[j])) ++j;
    if (j == s.size() || !(is_upper(s[j]) || is_digit(s[j]))) continue;
    if (c == '.' && is_abbreviation(s, i, abbreviations)) continue;
    push_trimmed(out, s, start, i + 1);
    start = j;
    i = j - 1;
  }
  push_trimmed(out, s, start, s.size());
  return out;
}

std::vector<CharRange> split_sentences(std::string_view s) {
  return split_sentences(s, default_abbreviations());
}

}  // namespace halueval::text
