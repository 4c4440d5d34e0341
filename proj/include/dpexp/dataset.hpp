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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpexp/result.hpp"

namespace dpexp {

// Immutable sample P. Values are finite and nonnegative; a sorted copy is kept
// so counting queries run in O(log n).
class Dataset {
 public:
  static Result<Dataset> make(std::vector<double> values) {
    if (values.empty()) {
      return make_error(ErrorCode::kEmptyDataset, "dataset has no values");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i]) || values[i] < 0.0) {
        return make_error(ErrorCode::kInvalidArgument,
                          "value at index " + std::to_string(i) +
                              " is negative or not finite");
      }
    }
    return Dataset(std::move(values));
  }

  std::size_t size() const { return values_.size(); }
  double n() const { return static_cast<double>(values_.size()); }

  std::span<const double> values() const { return values_; }
  std::span<const double> sorted() const { return sorted_; }

  // #{x : x < threshold}
  std::size_t count_below(double threshold) const {
    return static_cast<std::size_t>(
        std::lower_bound(sorted_.begin(), sorted_.end(), threshold) -
        sorted_.begin());
  }

  double fraction_below(double threshold) const {
    return static_cast<double>(count_below(threshold)) / n();
  }

  double min() const { return sorted_.front(); }
  double max() const { return sorted_.back(); }

 private:
  explicit Dataset(std::vector<double> values)
      : values_(std::move(values)), sorted_(values_) {
    std::sort(sorted_.begin(), sorted_.end());
  }

  std::vector<double> values_;
  std::vector<double> sorted_;
};

}  // namespace dpexp
