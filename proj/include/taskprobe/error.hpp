/*
 * Copyright 2026 The TaskProbe Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace taskprobe {

enum class ErrorKind {
  kParameter,
  kInsufficientData,
  kDimension,
  kSingular,
  kDegenerateInput,
  kDivergence,
  kParse,
  kConfig,
  kIo,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParameter: return "parameter error";
    case ErrorKind::kInsufficientData: return "insufficient data";
    case ErrorKind::kDimension: return "dimension error";
    case ErrorKind::kSingular: return "singular matrix";
    case ErrorKind::kDegenerateInput: return "degenerate input";
    case ErrorKind::kDivergence: return "training diverged";
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kIo: return "i/o error";
  }
  return "error";
}

// Every failure raised by the library carries a kind so callers (and tests)
// can branch on the category without matching message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

namespace detail {

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) throw Error(kind, what);
}

}  // namespace detail
}  // namespace taskprobe
