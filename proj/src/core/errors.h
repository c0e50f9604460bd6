// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <stdexcept>
#include <string>

namespace past {

// Error classes surfaced through the C API as distinct status codes.
enum class ErrorKind {
  kArgument,
  kConfig,
  kData,
  kState,
  kIo,
  kTraining,
  kWav,
  kCheckpoint,
};

const char* ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace past

#define PAST_REQUIRE(cond, kind, msg)                     \
  do {                                                    \
    if (!(cond)) ::past::Fail(::past::ErrorKind::kind, msg); \
  } while (0)
