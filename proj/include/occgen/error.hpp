// Copyright 2026 The occgen Authors. All Rights Reserved.
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

namespace occgen {

/// Broad failure class; decides the CLI exit code.
enum class ErrorCategory {
  kValidation,  // bad configuration or arguments (exit 2)
  kData,        // malformed or inconsistent input data (exit 3)
  kInternal,    // broken invariant inside the library (exit 4)
};

enum class ErrorKind {
  kSpecValidation,
  kTrackMismatch,
  kNoAnnotation,
  kUnknownTrack,
  kMissingTrack,
  kInsufficientReference,
  kIndexOutOfRange,
  kSpecMismatch,
  kMissingPayload,
  kCorruptPayload,
  kSchemaViolation,
  kChecksumMismatch,
  kMagicMismatch,
  kDimensionOverflow,
  kSizeMismatch,
  kIo,
  kInvariant,
};

ErrorCategory category_of(ErrorKind kind);
const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  ErrorCategory category() const { return category_of(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace occgen
