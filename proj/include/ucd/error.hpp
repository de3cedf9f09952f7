// Copyright 2026 The UCD Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace ucd {

// Coarse classification used by the CLI to pick an exit code.
enum class ErrorKind {
  kUsage,     // bad arguments or invalid configuration values
  kData,      // malformed input files, vocabulary mismatches, bad corpora
  kIo,        // filesystem failures
  kRemote,    // transport or protocol failures talking to a remote provider
  kInternal,  // broken invariant
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Remote failures that may succeed when retried (timeouts, refused
// connections).
class RetryableError : public Error {
 public:
  explicit RetryableError(const std::string& what)
      : Error(ErrorKind::kRemote, what) {}
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace ucd
