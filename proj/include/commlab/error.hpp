#pragma once

#include <stdexcept>
#include <string>

namespace commlab {

enum class ErrorCode {
  kInvalidArgument = 1,
  kSpecMismatch = 2,
  kNonFinite = 3,
  kNotConverged = 4,
  kIo = 5,
  kParse = 6,
  kUnsupported = 7,
};

/// Every failure raised by the library carries one of the codes above; the C
/// API maps them one to one onto its integer status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const char* what) {
  if (!cond) [[unlikely]] throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) [[unlikely]] throw Error(code, what);
}

}  // namespace commlab
