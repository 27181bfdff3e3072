#include "ctp/error.hpp"

namespace ctp {

Error::Error(std::string kind, const std::string& message)
    : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

InvalidTrainingFile::InvalidTrainingFile(std::size_t line, const std::string& reason)
    : Error("InvalidTrainingFile", "line " + std::to_string(line) + ": " + reason), line_(line) {}

}  // namespace ctp
