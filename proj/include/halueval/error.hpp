#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace halueval {

enum class Errc {
  MissingFile,
  MalformedRecord,
  DuplicateId,
  EmptyQuestion,
  EmptyCorpus,
  EmptyDocument,
  DuplicateDocId,
  EmptyHypothesis,
  Unreachable,
  Timeout,
  MalformedResponse,
  OutOfRangeScore,
  MissingGoldLabel,
  EmptyInput,
  InvalidArgument,
  Config,
};

std::string_view errc_name(Errc code) noexcept;

/// All library failures surface as this exception. `subject()` carries the
/// offending entity when there is one: a line number, sample id, doc id or
/// chunk index, rendered as text.
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message, std::string subject = {});

  Errc code() const noexcept { return code_; }
  const std::string& subject() const noexcept { return subject_; }

 private:
  Errc code_;
  std::string subject_;
};

}  // namespace halueval
