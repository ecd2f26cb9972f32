#include "halueval/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "halueval/error.hpp"
#include "halueval/text.hpp"

namespace halueval {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Task task) noexcept {
  return task == Task::QA ? "qa" : "summarization";
}

std::string_view to_string(GoldLabel label) noexcept {
  return label == GoldLabel::Hallucinated ? "hallucinated" : "faithful";
}

Task parse_task(std::string_view s) {
  const auto v = text::to_lower(s);
  if (v == "qa") return Task::QA;
  if (v == "summarization" || v == "summary") return Task::Summarization;
  throw Error(Errc::InvalidArgument, "unknown task '" + std::string(s) + "'");
}

std::optional<GoldLabel> parse_gold_label(std::string_view s) {
  const auto v = text::to_lower(text::trim(s));
  if (v == "hallucinated") return GoldLabel::Hallucinated;
  if (v == "faithful") return GoldLabel::Faithful;
  return std::nullopt;
}

bool Dataset::has_gold_labels() const noexcept {
  return std::any_of(samples.begin(), samples.end(),
                     [](const Sample& s) { return s.gold_label.has_value(); });
}

namespace {

std::string padded_line(std::size_t line) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", line);
  return buf;
}

[[noreturn]] void malformed(std::size_t line, const std::string& why) {
  throw Error(Errc::MalformedRecord, why, std::to_string(line));
}

std::optional<std::string> string_field(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) malformed(line, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

Sample parse_record(const json& obj, Task task, std::size_t line) {
  if (!obj.is_object()) malformed(line, "record is not an object");
  Sample s;
  s.task = task;

  if (auto it = obj.find("id"); it != obj.end() && !it->is_null()) {
    if (it->is_string()) {
      s.id = it->get<std::string>();
    } else if (it->is_number_integer()) {
      s.id = it->dump();
    } else {
      malformed(line, "field 'id' must be a string or integer");
    }
    if (s.id.empty()) malformed(line, "field 'id' is empty");
  } else {
    s.id = padded_line(line);
  }

  auto knowledge = string_field(obj, "knowledge", line);
  if (!knowledge) malformed(line, "missing field 'knowledge'");
  if (text::trim(*knowledge).empty()) malformed(line, "field 'knowledge' is empty");
  s.knowledge = std::move(*knowledge);

  if (task == Task::QA) {
    auto question = string_field(obj, "question", line);
    if (!question) malformed(line, "missing field 'question'");
    if (text::trim(*question).empty()) malformed(line, "field 'question' is empty");
    s.question = std::move(question);
  }

  auto generation = string_field(obj, "generation", line);
  if (!generation) malformed(line, "missing field 'generation'");
  s.generation = std::move(*generation);

  if (auto label = string_field(obj, "gold_label", line)) {
    s.gold_label = parse_gold_label(*label);
    if (!s.gold_label) malformed(line, "unknown gold_label '" + *label + "'");
  }
  return s;
}

template <typename F>
void for_each_line(std::string_view content, F&& f) {
  std::size_t line = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    ++line;
    auto raw = content.substr(pos, nl - pos);
    if (!text::trim(raw).empty()) f(raw, line);
    pos = nl + 1;
  }
}

json parse_line(std::string_view raw, std::size_t line) {
  try {
    return json::parse(raw);
  } catch (const json::parse_error& e) {
    malformed(line, e.what());
  }
}

void check_unique(const std::vector<Sample>& samples) {
  std::unordered_set<std::string> seen;
  for (const auto& s : samples) {
    if (!seen.insert(s.id).second) throw Error(Errc::DuplicateId, "duplicate sample id", s.id);
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(Errc::MissingFile, "no such file", path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::MissingFile, "cannot open", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool id_less(const Sample& a, const Sample& b) { return a.id < b.id; }

}  // namespace

Dataset parse_dataset(std::string_view content, Task task, std::string origin) {
  Dataset ds;
  ds.task = task;
  ds.origin = std::move(origin);
  for_each_line(content, [&](std::string_view raw, std::size_t line) {
    ds.samples.push_back(parse_record(parse_line(raw, line), task, line));
  });
  check_unique(ds.samples);
  return ds;
}

Dataset ingest_dataset(const std::filesystem::path& path, Task task) {
  return parse_dataset(read_file(path), task, path.string());
}

std::string serialize_sample(const Sample& s) {
  ordered_json j;
  j["id"] = s.id;
  j["knowledge"] = s.knowledge;
  if (s.question) j["question"] = *s.question;
  j["generation"] = s.generation;
  if (s.gold_label) j["gold_label"] = std::string(to_string(*s.gold_label));
  return j.dump();
}

std::string serialize_dataset(const Dataset& dataset) {
  std::string out;
  for (const auto& s : dataset.samples) {
    out += serialize_sample(s);
    out += '\n';
  }
  return out;
}

Dataset subsample(const Dataset& dataset, std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Lcg64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  order.resize(std::min(n, order.size()));

  Dataset out;
  out.task = dataset.task;
  out.origin = dataset.origin;
  out.samples.reserve(order.size());
  for (auto idx : order) out.samples.push_back(dataset.samples[idx]);
  std::sort(out.samples.begin(), out.samples.end(), id_less);
  return out;
}

Dataset head(const Dataset& dataset, std::size_t n) {
  Dataset out;
  out.task = dataset.task;
  out.origin = dataset.origin;
  const auto count = std::min(n, dataset.size());
  out.samples.assign(dataset.samples.begin(), dataset.samples.begin() + count);
  return out;
}

Dataset convert_halueval(std::string_view content, Task task, std::string origin) {
  Dataset ds;
  ds.task = task;
  ds.origin = std::move(origin);
  for_each_line(content, [&](std::string_view raw, std::size_t line) {
    const json obj = parse_line(raw, line);
    if (!obj.is_object()) malformed(line, "record is not an object");
    const char* knowledge_key = task == Task::QA ? "knowledge" : "document";
    const char* right_key = task == Task::QA ? "right_answer" : "right_summary";
    const char* wrong_key = task == Task::QA ? "hallucinated_answer" : "hallucinated_summary";

    auto knowledge = string_field(obj, knowledge_key, line);
    if (!knowledge || text::trim(*knowledge).empty()) {
      malformed(line, std::string("missing field '") + knowledge_key + "'");
    }
    std::optional<std::string> question;
    if (task == Task::QA) {
      question = string_field(obj, "question", line);
      if (!question || text::trim(*question).empty()) malformed(line, "missing field 'question'");
    }
    auto right = string_field(obj, right_key, line);
    auto wrong = string_field(obj, wrong_key, line);
    if (!right) malformed(line, std::string("missing field '") + right_key + "'");
    if (!wrong) malformed(line, std::string("missing field '") + wrong_key + "'");

    const auto base = padded_line(line);
    ds.samples.push_back({base + "-f", task, *knowledge, question, *right, GoldLabel::Faithful});
    ds.samples.push_back({base + "-h", task, *knowledge, question, *wrong, GoldLabel::Hallucinated});
  });
  return ds;
}

}  // namespace halueval
