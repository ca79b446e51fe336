// Copyright 2026 The TAMIS Authors
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

#ifndef TAMIS_ERROR_HPP_
#define TAMIS_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace tamis {

// Error categories surfaced by the library. The CLI reports them by name in
// its machine-readable error output.
enum class ErrorCode {
  kParse,
  kSchemaViolation,
  kConfiguration,
  kEstimation,
  kParameter,
  kSelection,
  kBounds,
  kUndefinedMetric,
  kBudget,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tamis

#endif  // TAMIS_ERROR_HPP_
