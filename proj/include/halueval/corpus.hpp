#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace halueval {

enum class Task { QA, Summarization };
enum class GoldLabel { Hallucinated, Faithful };

std::string_view to_string(Task task) noexcept;
std::string_view to_string(GoldLabel label) noexcept;
Task parse_task(std::string_view s);                         // "qa" | "summarization"
std::optional<GoldLabel> parse_gold_label(std::string_view s);  // case-insensitive

struct Sample {
  std::string id;
  Task task = Task::QA;
  std::string knowledge;
  std::optional<std::string> question;
  std::string generation;
  std::optional<GoldLabel> gold_label;

  bool operator==(const Sample&) const = default;
};

struct Dataset {
  std::vector<Sample> samples;
  Task task = Task::QA;
  std::string origin;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  bool has_gold_labels() const noexcept;
};

/// Reads a line-delimited JSON dataset. Field names are `id`, `knowledge`,
/// `question`, `generation`, `gold_label`; unknown fields are ignored and a
/// missing `id` becomes the zero-padded line number. Blank lines are skipped
/// but still count toward line numbering.
///
/// Throws Error with MissingFile, MalformedRecord (subject = 1-based line) or
/// DuplicateId (subject = id).
Dataset ingest_dataset(const std::filesystem::path& path, Task task);
Dataset parse_dataset(std::string_view content, Task task, std::string origin = {});

/// One canonical JSON line per sample, keys in a fixed order.
std::string serialize_dataset(const Dataset& dataset);
std::string serialize_sample(const Sample& sample);

/// 64-bit LCG with Knuth's MMIX constants. Draws use the high 32 bits of the
/// state after each step.
class Lcg64 {
 public:
  static constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;
  static constexpr std::uint64_t kIncrement = 1442695040888963407ULL;

  explicit Lcg64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint32_t next() noexcept {
    state_ = state_ * kMultiplier + kIncrement;
    return static_cast<std::uint32_t>(state_ >> 32);
  }
  /// Uniform-ish index in [0, bound) by modulo reduction; bound >= 1.
  std::size_t below(std::size_t bound) noexcept { return next() % bound; }

 private:
  std::uint64_t state_;
};

/// Seeded Fisher-Yates shuffle (i from size-1 down to 1, j = below(i + 1)),
/// first n kept, result sorted by id.
Dataset subsample(const Dataset& dataset, std::size_t n, std::uint64_t seed);

/// First n samples in file order.
Dataset head(const Dataset& dataset, std::size_t n);

/// Converts HaluEval's native records into canonical samples, two per record:
///   qa:            knowledge, question, right_answer -> faithful,
///                  hallucinated_answer -> hallucinated
///   summarization: document -> knowledge, right_summary -> faithful,
///                  hallucinated_summary -> hallucinated
/// Ids are "<line>-f" / "<line>-h" with the line number zero-padded.
Dataset convert_halueval(std::string_view content, Task task, std::string origin = {});

}  // namespace halueval
