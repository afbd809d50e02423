// Copyright 2026 The privbound Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PRIVBOUND_ERRORS_H_
#define PRIVBOUND_ERRORS_H_

#include <stdexcept>
#include <string>

namespace privbound {

enum class ErrorCode {
  kInvalidArgument,
  kSchema,            // malformed input document
  kInvariant,         // well-formed but violates a model invariant
  kAlphabetMismatch,  // mechanism does not fit the problem
  kRegime,            // operation called outside its epsilon regime
  kSizeCap,           // dense tensor would exceed the configured cap
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace privbound

#endif  // PRIVBOUND_ERRORS_H_
