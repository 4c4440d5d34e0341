// Copyright 2026 The dpexp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace dpexp {

// Every typed failure the library can report. Some of these (Bottom-style
// outcomes such as NoBinSurvived) are ordinary results of a randomized
// mechanism rather than programming errors.
enum class ErrorCode {
  kInvalidScale,
  kEmptyDataset,
  kBadSplit,
  kBudgetExhausted,
  kInvalidRate,
  kInvalidRatio,
  kInvalidShape,
  kEmptyRequest,
  kInvalidArgument,
  kOutOfRegime,
  kTooFewSamples,
  kGridExhausted,
  kNonpositiveMean,
  kRangeEstimationFailed,
  kSearchExhausted,
  kCoarseFailed,
  kNoBinSurvived,
  kEmptyTail,
  kScaleViolation,
  kIncompleteInputs,
  kRegimeViolation,
  kDegenerateBounds,
  kInputError,
};

constexpr std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidScale: return "InvalidScale";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kBadSplit: return "BadSplit";
    case ErrorCode::kBudgetExhausted: return "BudgetExhausted";
    case ErrorCode::kInvalidRate: return "InvalidRate";
    case ErrorCode::kInvalidRatio: return "InvalidRatio";
    case ErrorCode::kInvalidShape: return "InvalidShape";
    case ErrorCode::kEmptyRequest: return "EmptyRequest";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kOutOfRegime: return "OutOfRegime";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kGridExhausted: return "GridExhausted";
    case ErrorCode::kNonpositiveMean: return "NonpositiveMean";
    case ErrorCode::kRangeEstimationFailed: return "RangeEstimationFailed";
    case ErrorCode::kSearchExhausted: return "SearchExhausted";
    case ErrorCode::kCoarseFailed: return "CoarseFailed";
    case ErrorCode::kNoBinSurvived: return "NoBinSurvived";
    case ErrorCode::kEmptyTail: return "EmptyTail";
    case ErrorCode::kScaleViolation: return "ScaleViolation";
    case ErrorCode::kIncompleteInputs: return "IncompleteInputs";
    case ErrorCode::kRegimeViolation: return "RegimeViolation";
    case ErrorCode::kDegenerateBounds: return "DegenerateBounds";
    case ErrorCode::kInputError: return "InputError";
  }
  return "Unknown";
}

struct Error {
  ErrorCode code;
  std::string message;

  std::string_view name() const { return error_name(code); }
};

inline Error make_error(ErrorCode code, std::string message = {}) {
  return Error{code, std::move(message)};
}

// Value-or-error, modeled after StatusOr. Accessing value() on an error
// result is a programming error and throws std::bad_variant_access.
template <typename T>
class Result {
 public:
  Result(T value) : state_(std::move(value)) {}
  Result(Error error) : state_(std::move(error)) {}

  bool ok() const { return std::holds_alternative<T>(state_); }
  explicit operator bool() const { return ok(); }

  const T& value() const& { return std::get<T>(state_); }
  T& value() & { return std::get<T>(state_); }
  T&& value() && { return std::get<T>(std::move(state_)); }

  const T& operator*() const& { return value(); }
  T& operator*() & { return value(); }
  T&& operator*() && { return std::move(*this).value(); }
  const T* operator->() const { return &value(); }
  T* operator->() { return &value(); }

  const Error& error() const { return std::get<Error>(state_); }
  ErrorCode code() const { return error().code; }

 private:
  std::variant<T, Error> state_;
};

}  // namespace dpexp
