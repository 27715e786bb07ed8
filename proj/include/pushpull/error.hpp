/* Copyright 2026 The pushpull Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef PUSHPULL_ERROR_HPP_
#define PUSHPULL_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace pushpull {

enum class ErrorCode {
  kShapeMismatch,
  kInvalidArgument,
  kOutOfRange,
  kFormat,
  kIo,
  kMissingContext,
  kDiverged,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library. The message names the operation and
// the offending values; code() lets callers branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace pushpull

#endif  // PUSHPULL_ERROR_HPP_
