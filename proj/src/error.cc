// Copyright 2026 The qdfit Authors
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

#include "qdfit/error.h"

namespace qdfit {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
    case ErrorCode::kSupportMismatch:
      return "SupportMismatch";
    case ErrorCode::kNotADivergence:
      return "NotADivergence";
    case ErrorCode::kDegenerateInput:
      return "DegenerateInput";
    case ErrorCode::kImpossible:
      return "Impossible";
    case ErrorCode::kNumeric:
      return "NumericError";
    case ErrorCode::kCapacity:
      return "CapacityExceeded";
    case ErrorCode::kUnsupported:
      return "Unsupported";
    case ErrorCode::kExtrapolationRefused:
      return "ExtrapolationRefused";
    case ErrorCode::kEmptyDistribution:
      return "EmptyDistribution";
    case ErrorCode::kEmptyCorpus:
      return "EmptyCorpus";
    case ErrorCode::kIo:
      return "IoError";
  }
  return "Unknown";
}

}  // namespace qdfit
