#include "halueval/error.hpp"

namespace halueval {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::MissingFile: return "MissingFile";
    case Errc::MalformedRecord: return "MalformedRecord";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::EmptyQuestion: return "EmptyQuestion";
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::EmptyDocument: return "EmptyDocument";
    case Errc::DuplicateDocId: return "DuplicateDocId";
    case Errc::EmptyHypothesis: return "EmptyHypothesis";
    case Errc::Unreachable: return "Unreachable";
    case Errc::Timeout: return "Timeout";
    case Errc::MalformedResponse: return "MalformedResponse";
    case Errc::OutOfRangeScore: return "OutOfRangeScore";
    case Errc::MissingGoldLabel: return "MissingGoldLabel";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Config: return "Config";
  }
  return "Unknown";
}

namespace {
std::string compose(Errc code, const std::string& message, const std::string& subject) {
  std::string out(errc_name(code));
  if (!subject.empty()) out += "(" + subject + ")";
  if (!message.empty()) out += ": " + message;
  return out;
}
}  // namespace

Error::Error(Errc code, std::string message, std::string subject)
    : std::runtime_error(compose(code, message, subject)),
      code_(code),
      subject_(std::move(subject)) {}

}  // namespace halueval
