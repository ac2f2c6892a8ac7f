// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace stopaudit {

// Coarse failure category. The CLI maps these onto process exit codes.
enum class ErrorKind {
  kIo,      // file missing / unreadable / unwritable
  kSchema,  // header or config does not match what was asked for
  kData,    // malformed input content
  kDomain,  // analytic precondition violated (zero denominators, bad ranges)
  kUsage,   // caller passed nonsense arguments
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace stopaudit
