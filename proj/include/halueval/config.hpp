#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "halueval/corpus.hpp"
#include "halueval/score.hpp"

namespace halueval {

struct RunConfig {
  std::filesystem::path dataset;
  Task task = Task::QA;

  std::string scorer = "baseline";  // baseline | remote
  std::string endpoint;
  std::size_t batch_size = 16;
  std::size_t timeout_ms = 30000;

  JudgeConfig judge;
  std::string decomposer = "rule";  // rule | external
  std::filesystem::path decomposer_file;

  std::optional<std::size_t> limit;
  std::optional<std::size_t> head;
  std::uint64_t seed = 0;

  std::size_t workers = 1;
  std::filesystem::path out = "out";

  /// Throws Error(Config) when a value is out of range or inconsistent.
  void validate() const;
};

/// Flat `key = value` lines; '#' starts a comment. Values may be quoted;
/// lists are written `[a, b, c]`. Throws Error(Config) with the line number.
std::map<std::string, std::string> parse_config_text(std::string_view content);

/// Applies parsed keys onto `config`. Keys use the long flag names with '_' or
/// '-' (`batch_size`, `non-fabrication`) plus dotted groups such as
/// `retriever.k`, `retriever.k1`, `retriever.b`, `retriever.window_sentences`,
/// `knowledge.form`, `knowledge.budget`, `abbreviations`, `verbs`.
/// Unknown keys are an error.
void apply_config(RunConfig& config, const std::map<std::string, std::string>& values);

void load_config_file(RunConfig& config, const std::filesystem::path& path);

/// Splits "[a, b]" or "a, b" into trimmed, unquoted items.
std::vector<std::string> parse_list(std::string_view value);

}  // namespace halueval
