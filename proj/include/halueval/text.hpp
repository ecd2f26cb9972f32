#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace halueval {

/// Half-open byte range [begin, end) into some source text.
struct CharRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool operator==(const CharRange&) const = default;
};

struct Token {
  std::string text;  // lowercased
  CharRange span;
};

namespace text {

// Tokens are maximal runs of ASCII alphanumerics, lowercased. Everything else,
// including non-ASCII bytes, separates tokens.
std::vector<std::string> tokenize(std::string_view s);
std::vector<Token> tokenize_spans(std::string_view s);

// Whitespace-delimited words, as views into `s`.
std::vector<std::string_view> words(std::string_view s);
std::size_t word_count(std::string_view s);

std::string_view trim(std::string_view s) noexcept;
std::string normalize_whitespace(std::string_view s);
std::string to_lower(std::string_view s);

bool is_alnum(char c) noexcept;
bool is_space(char c) noexcept;
bool is_upper(char c) noexcept;
bool is_digit(char c) noexcept;

/// The built-in abbreviation stop-list for sentence splitting.
const std::vector<std::string>& default_abbreviations();

/// Sentence ranges, trimmed of surrounding whitespace. A boundary falls after
/// '.', '!' or '?' when the next characters are whitespace followed by an
/// uppercase letter or digit, unless the word ending in '.' is in
/// `abbreviations` (compared case-insensitively, without the final '.').
std::vector<CharRange> split_sentences(std::string_view s,
                                       const std::vector<std::string>& abbreviations);
std::vector<CharRange> split_sentences(std::string_view s);

}  // namespace text
}  // namespace halueval
