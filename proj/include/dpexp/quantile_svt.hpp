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
#include <vector>

#include "dpexp/dataset.hpp"
#include "dpexp/privacy.hpp"
#include "dpexp/result.hpp"

namespace dpexp {

// Prior bounds on the rate: 0 < lambda_min < lambda_max.
class RateBounds {
 public:
  static Result<RateBounds> make(double lambda_min, double lambda_max) {
    if (!(lambda_min > 0.0) || !std::isfinite(lambda_max) ||
        !(lambda_min < lambda_max)) {
      return make_error(ErrorCode::kInvalidArgument,
                        "rate bounds need 0 < lambda_min < lambda_max");
    }
    return RateBounds(lambda_min, lambda_max);
  }

  double lambda_min() const { return lambda_min_; }
  double lambda_max() const { return lambda_max_; }
  double ratio() const { return lambda_max_ / lambda_min_; }

  friend bool operator==(const RateBounds&, const RateBounds&) = default;

 private:
  RateBounds(double lo, double hi) : lambda_min_(lo), lambda_max_(hi) {}
  double lambda_min_;
  double lambda_max_;
};

struct QuantileResult {
  double quantile_value;  // exactly a grid point
  int grid_index;
  double threshold_used;  // noisy threshold
};

// Approximation factor of the dyadic scan, used for the clipping constant.
inline constexpr double kQuantileApproxFactor = 6.0;

// Dyadic grid g_i = 2^i / lambda_max, i = 0..last_index. The top index
// covers the (1 - theta)-quantile range [ln(1/theta)/lambda_max,
// ln(1/theta)/lambda_min] with two points of slack.
struct DyadicGrid {
  double lambda_max;
  int last_index;

  static DyadicGrid for_bounds(const RateBounds& bounds, double theta) {
    const int span = static_cast<int>(std::ceil(std::log2(bounds.ratio())));
    const double spread = std::max(1.0, std::log(1.0 / theta));
    const int extra = static_cast<int>(std::ceil(std::log2(spread)));
    return DyadicGrid{bounds.lambda_max(), span + extra + 2};
  }

  double point(int i) const { return std::ldexp(1.0, i) / lambda_max; }
  std::size_t size() const { return static_cast<std::size_t>(last_index) + 1; }
};

inline bool theta_in_regime(double theta) {
  return theta >= 0.1 && theta <= 0.9;
}

// Sparse-vector scan for a constant-factor (1 - theta)-quantile. One noisy
// threshold, one fresh query per inspected grid point, halts at the first
// noisy CDF value >= threshold. GridExhausted is the bottom outcome.
inline Result<QuantileResult> svt_quantile(const Dataset& data,
                                           const RateBounds& bounds, double theta,
                                           PrivacyAccount account,
                                           NoiseSource& noise) {
  if (!theta_in_regime(theta)) {
    return make_error(ErrorCode::kOutOfRegime, "theta must lie in [1/10, 9/10]");
  }
  if (!account.budget().pure()) {
    return make_error(ErrorCode::kInvalidArgument, "quantile scan needs delta = 0");
  }
  auto budget = account.spend("svt_quantile");
  if (!budget) return budget.error();
  const double eps = budget->epsilon();
  const double n = data.n();

  auto threshold_noise = noise.laplace(NoiseScale{2.0 / (eps * n)});
  if (!threshold_noise) return threshold_noise.error();
  const double threshold = (1.0 - theta) + *threshold_noise;

  const auto grid = DyadicGrid::for_bounds(bounds, theta);
  const NoiseScale query_scale{4.0 / (eps * n)};
  for (int i = 0; i <= grid.last_index; ++i) {
    const double g = grid.point(i);
    auto answer = noisy_fraction_below(data, g, query_scale, noise);
    if (!answer) return answer.error();
    if (*answer >= threshold) return QuantileResult{g, i, threshold};
  }
  return make_error(ErrorCode::kGridExhausted, "no grid point passed the threshold");
}

inline Result<QuantileResult> svt_quantile(const Dataset& data,
                                           const RateBounds& bounds, double theta,
                                           PrivacyAccount account, RngStream& rng,
                                           bool noiseless) {
  NoiseSource noise(rng, noiseless);
  return svt_quantile(data, bounds, theta, account, noise);
}

// C = (c0 / ln(1/theta)) (1 + ln(1/beta) / ln n), R = C Q ln n.
inline Result<double> clipping_range(const QuantileResult& q, double n, double theta,
                                     double beta) {
  if (!(n >= 2.0)) {
    return make_error(ErrorCode::kTooFewSamples, "clipping range needs n >= 2");
  }
  if (!(theta > 0.0 && theta < 1.0) || !(beta > 0.0 && beta <= 1.0)) {
    return make_error(ErrorCode::kInvalidArgument, "theta in (0,1), beta in (0,1]");
  }
  const double log_n = std::log(n);
  const double c = kQuantileApproxFactor / std::log(1.0 / theta) *
                   (1.0 + std::log(1.0 / beta) / log_n);
  return c * q.quantile_value * log_n;
}

}  // namespace dpexp
