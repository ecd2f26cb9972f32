#include "halueval/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "halueval/error.hpp"
#include "halueval/text.hpp"

namespace halueval {

namespace {

std::string unquote(std::string_view v) {
  v = text::trim(v);
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) {
    v = v.substr(1, v.size() - 2);
  }
  return std::string(v);
}

std::string normalize_key(std::string_view key) {
  std::string k = text::to_lower(text::trim(key));
  for (auto& c : k) {
    if (c == '-') c = '_';
  }
  return k;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw Error(Errc::Config, "invalid value '" + value + "'", key);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) bad_value(key, value);
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, value);
  }
}

std::uint64_t to_uint(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc{} || ptr != end) bad_value(key, value);
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  const auto v = text::to_lower(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, value);
}

}  // namespace

std::vector<std::string> parse_list(std::string_view value) {
  value = text::trim(value);
  if (value.size() >= 2 && value.front() == '[' && value.back() == ']') {
    value = value.substr(1, value.size() - 2);
  }
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    auto comma = value.find(',', start);
    if (comma == std::string_view::npos) comma = value.size();
    auto item = unquote(value.substr(start, comma - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = comma + 1;
  }
  return out;
}

std::map<std::string, std::string> parse_config_text(std::string_view content) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view v = line;
    bool quoted = false;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] == '"') quoted = !quoted;
      if (v[i] == '#' && !quoted) {
        v = v.substr(0, i);
        break;
      }
    }
    v = text::trim(v);
    if (v.empty()) continue;
    const auto eq = v.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw Error(Errc::Config, "expected 'key = value'", "line " + std::to_string(number));
    }
    out[normalize_key(v.substr(0, eq))] = unquote(v.substr(eq + 1));
  }
  return out;
}

void apply_config(RunConfig& c, const std::map<std::string, std::string>& values) {
  for (const auto& [raw_key, value] : values) {
    const auto key = normalize_key(raw_key);
    auto& j = c.judge;
    try {
      if (key == "dataset") c.dataset = value;
      else if (key == "task") c.task = parse_task(value);
      else if (key == "scorer") c.scorer = text::to_lower(value);
      else if (key == "endpoint") c.endpoint = value;
      else if (key == "batch_size") c.batch_size = to_uint(key, value);
      else if (key == "timeout_ms") c.timeout_ms = to_uint(key, value);
      else if (key == "threshold") j.threshold = to_double(key, value);
      else if (key == "segmented") j.segmented = to_bool(key, value);
      else if (key == "non_fabrication") j.non_fabrication = to_bool(key, value);
      else if (key == "segment_threshold") j.segment_threshold = to_double(key, value);
      else if (key == "halving_factor") j.halving_factor = to_double(key, value);
      else if (key == "decomposer") c.decomposer = text::to_lower(value);
      else if (key == "decomposer.file" || key == "decomposer_file") c.decomposer_file = value;
      else if (key == "limit") c.limit = to_uint(key, value);
      else if (key == "head") c.head = to_uint(key, value);
      else if (key == "seed") c.seed = to_uint(key, value);
      else if (key == "workers") c.workers = to_uint(key, value);
      else if (key == "out") c.out = value;
      else if (key == "retriever.k") j.retriever.k = to_uint(key, value);
      else if (key == "retriever.k1") j.retriever.bm25.k1 = to_double(key, value);
      else if (key == "retriever.b") j.retriever.bm25.b = to_double(key, value);
      else if (key == "retriever.window_sentences") j.retriever.window_sentences = to_uint(key, value);
      else if (key == "knowledge.form") j.knowledge_form = parse_knowledge_form(value);
      else if (key == "knowledge.budget") j.knowledge_budget = to_uint(key, value);
      else if (key == "abbreviations") j.retriever.abbreviations = parse_list(value);
      else if (key == "verbs") {
        for (auto& v : parse_list(value)) j.retriever.verb_lexicon.push_back(text::to_lower(v));
      } else {
        throw Error(Errc::Config, "unknown configuration key", key);
      }
    } catch (const Error& e) {
      if (e.code() == Errc::Config) throw;
      throw Error(Errc::Config, e.what(), key);
    }
  }
}

void load_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Config, "cannot read config file", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  apply_config(config, parse_config_text(ss.str()));
}

void RunConfig::validate() const {
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(Errc::Config, "must lie in [0, 1]", name);
  };
  unit(judge.threshold, "threshold");
  unit(judge.segment_threshold, "segment_threshold");
  unit(judge.halving_factor, "halving_factor");
  if (workers < 1) throw Error(Errc::Config, "must be >= 1", "workers");
  if (batch_size < 1) throw Error(Errc::Config, "must be >= 1", "batch_size");
  if (judge.retriever.k < 1) throw Error(Errc::Config, "must be >= 1", "retriever.k");
  if (judge.retriever.window_sentences < 1) {
    throw Error(Errc::Config, "must be >= 1", "retriever.window_sentences");
  }
  if (judge.retriever.bm25.k1 < 0.0) throw Error(Errc::Config, "must be >= 0", "retriever.k1");
  unit(judge.retriever.bm25.b, "retriever.b");
  if (judge.knowledge_budget < 1) throw Error(Errc::Config, "must be >= 1", "knowledge.budget");
  if (scorer != "baseline" && scorer != "remote") {
    throw Error(Errc::Config, "expected 'baseline' or 'remote'", "scorer");
  }
  if (scorer == "remote" && endpoint.empty()) {
    throw Error(Errc::Config, "remote scorer needs --endpoint", "endpoint");
  }
  if (decomposer != "rule" && decomposer != "external") {
    throw Error(Errc::Config, "expected 'rule' or 'external'", "decomposer");
  }
  if (decomposer == "external" && decomposer_file.empty()) {
    throw Error(Errc::Config, "external decomposer needs decomposer.file", "decomposer");
  }
  if (limit && head) throw Error(Errc::Config, "--limit and --head are exclusive", "limit");
}

}  // namespace halueval
