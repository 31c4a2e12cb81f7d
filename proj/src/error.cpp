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

#include "occgen/error.hpp"

namespace occgen {

ErrorCategory category_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSpecValidation:
    case ErrorKind::kIndexOutOfRange:
    case ErrorKind::kSpecMismatch:
      return ErrorCategory::kValidation;
    case ErrorKind::kInvariant:
      return ErrorCategory::kInternal;
    default:
      return ErrorCategory::kData;
  }
}

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSpecValidation: return "spec-validation";
    case ErrorKind::kTrackMismatch: return "track-mismatch";
    case ErrorKind::kNoAnnotation: return "no-annotation";
    case ErrorKind::kUnknownTrack: return "unknown-track";
    case ErrorKind::kMissingTrack: return "missing-track";
    case ErrorKind::kInsufficientReference: return "insufficient-reference";
    case ErrorKind::kIndexOutOfRange: return "index-out-of-range";
    case ErrorKind::kSpecMismatch: return "spec-mismatch";
    case ErrorKind::kMissingPayload: return "missing-payload";
    case ErrorKind::kCorruptPayload: return "corrupt-payload";
    case ErrorKind::kSchemaViolation: return "schema-violation";
    case ErrorKind::kChecksumMismatch: return "checksum-mismatch";
    case ErrorKind::kMagicMismatch: return "magic-mismatch";
    case ErrorKind::kDimensionOverflow: return "dimension-overflow";
    case ErrorKind::kSizeMismatch: return "size-mismatch";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kInvariant: return "invariant";
  }
  return "unknown";
}

}  // namespace occgen
