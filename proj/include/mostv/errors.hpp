#ifndef MOSTV_ERRORS_HPP_
#define MOSTV_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace mostv {

// Exit-code groups used by the C API and the CLI.
enum class ErrorCode : int {
  Other = 1,
  Config = 2,
  StageDependency = 3,
  Numeric = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorCode::Config, w) {}
};

struct StageDependencyError : Error {
  explicit StageDependencyError(const std::string& w)
      : Error(ErrorCode::StageDependency, w) {}
};

// Scene placement ran out of rejection-sampling retries.
struct PlacementFailure : Error {
  explicit PlacementFailure(const std::string& w)
      : Error(ErrorCode::Numeric, w) {}
};

struct DataError : Error {
  explicit DataError(const std::string& w) : Error(ErrorCode::Other, w) {}
};

struct CheckpointError : Error {
  explicit CheckpointError(const std::string& w) : Error(ErrorCode::Other, w) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error(ErrorCode::Numeric, w) {}
};

struct FitError : Error {
  explicit FitError(const std::string& w) : Error(ErrorCode::Numeric, w) {}
};

// Carries the offending term name.
struct SeparationError : Error {
  SeparationError(const std::string& term, const std::string& w)
      : Error(ErrorCode::Numeric, w), term(term) {}
  std::string term;
};

struct RankError : Error {
  explicit RankError(const std::string& w) : Error(ErrorCode::Numeric, w) {}
};

struct EmptyDataError : Error {
  explicit EmptyDataError(const std::string& w) : Error(ErrorCode::Numeric, w) {}
};

}  // namespace mostv

#endif  // MOSTV_ERRORS_HPP_
