#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ctp {

/// Base of every exception thrown by the library. `kind()` is a stable short
/// tag ("CorruptFile", "LengthMismatch", ...) used in CLI diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message);

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define CTP_DECLARE_ERROR(Name)                                      \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

CTP_DECLARE_ERROR(InvalidArgument);
CTP_DECLARE_ERROR(IoError);

// linkage
CTP_DECLARE_ERROR(AmbiguousLink);

// corpus
CTP_DECLARE_ERROR(EmptyCorpus);
CTP_DECLARE_ERROR(SingleClassCorpus);

// embed
CTP_DECLARE_ERROR(RemoteUnavailable);
CTP_DECLARE_ERROR(DimensionMismatch);
CTP_DECLARE_ERROR(IndexOutOfRange);

// forest
CTP_DECLARE_ERROR(EmptyNode);
CTP_DECLARE_ERROR(EmptyDataset);
CTP_DECLARE_ERROR(FormatVersionMismatch);
CTP_DECLARE_ERROR(CorruptFile);

// llm
CTP_DECLARE_ERROR(ServiceUnavailable);
CTP_DECLARE_ERROR(AuthMissing);
CTP_DECLARE_ERROR(NotRecorded);

// eval
CTP_DECLARE_ERROR(LengthMismatch);
CTP_DECLARE_ERROR(EmptyEvaluation);

// synthetic corpus
CTP_DECLARE_ERROR(InvalidSpec);

#undef CTP_DECLARE_ERROR

/// A fine-tune export line failed local validation. `line` is 1-based.
class InvalidTrainingFile : public Error {
 public:
  InvalidTrainingFile(std::size_t line, const std::string& reason);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace ctp
