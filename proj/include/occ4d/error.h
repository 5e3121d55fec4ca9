/* Copyright 2026 The Occ4D Authors. All Rights Reserved.

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
#ifndef OCC4D_ERROR_H_
#define OCC4D_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace occ4d {

enum class ErrorCode {
  kInvalidArgument,
  kSingularPose,
  kBadMagic,
  kTruncatedPayload,
  kInvariantViolation,
  kParseError,
  kIoError,
  kFrameMismatch,
  kSpecMismatch,
  kMissingClassTableEntry,
  kNonFiniteWeight,
  kWeightOutOfRange,
  kEmptyAccumulator,
  kClassTableMismatch,
  kTrackClassConflict,
  kUnknownTrackId,
  kActorOutOfBounds,
  kMissingFrame,
  kMissingScores,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported through this exception. The message is
// prefixed with the code name so a one-line CLI diagnostic is self-describing.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace occ4d

#endif  // OCC4D_ERROR_H_
