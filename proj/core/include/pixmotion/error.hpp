#pragma once

#include <stdexcept>
#include <string>

namespace pixmotion {

enum class ErrorKind {
  kInvalidArgument,
  kDimensionMismatch,
  kInvalidDepth,
  kBehindCamera,
  kDegenerate,
  kIo,
  kFormat,
  kConfig,
};

// Every failure raised by the library carries a kind so callers (the CLI in
// particular) can map it onto a stable exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace pixmotion
