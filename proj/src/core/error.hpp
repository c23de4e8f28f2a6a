#pragma once

#include <stdexcept>
#include <string>

namespace chunkseam {

// Error taxonomy shared by the whole library. The C API and the CLI map
// these onto status/exit codes, so every throw site picks the category the
// caller can actually act on.
enum class ErrorCode {
  invalid_argument,  // caller violated an operation contract
  config,            // malformed or unknown run configuration
  capability,        // input lacks data the requested analysis needs
  io,                // file read/write or parse failure
  runner,            // an experiment could not produce a result
  internal,          // bug guard
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void throw_error(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace chunkseam
