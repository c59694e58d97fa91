// Copyright 2026 The stellarsim Authors
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

#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>

namespace stellar {

enum class ErrorCode {
  NonSymmetric,
  NonSquare,
  DimensionTooLarge,
  DimensionMismatch,
  InvalidArgument,
  CutoffTooSmall,
  ZeroProjection,
  NormalizationError,
  UnderflowRisk,
  PlanMismatch,
  PhotonNumberMismatch,
  EnvelopeFailure,
  RankBudgetTooSmall,
  ParseError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonSymmetric: return "NonSymmetric";
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::CutoffTooSmall: return "CutoffTooSmall";
    case ErrorCode::ZeroProjection: return "ZeroProjection";
    case ErrorCode::NormalizationError: return "NormalizationError";
    case ErrorCode::UnderflowRisk: return "UnderflowRisk";
    case ErrorCode::PlanMismatch: return "PlanMismatch";
    case ErrorCode::PhotonNumberMismatch: return "PhotonNumberMismatch";
    case ErrorCode::EnvelopeFailure: return "EnvelopeFailure";
    case ErrorCode::RankBudgetTooSmall: return "RankBudgetTooSmall";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Shortest round-trip decimal text of a double.
inline std::string format_number(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace stellar
