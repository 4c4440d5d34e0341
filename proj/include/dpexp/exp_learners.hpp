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

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string_view>

#include "dpexp/dataset.hpp"
#include "dpexp/privacy.hpp"
#include "dpexp/quantile_svt.hpp"
#include "dpexp/result.hpp"

namespace dpexp {

struct LearnerConfig {
  double alpha;  // target multiplicative error
  double beta;   // failure probability
  RateBounds bounds;
  bool noiseless = false;
};

inline Result<LearnerConfig> validate(const LearnerConfig& config) {
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    return make_error(ErrorCode::kInvalidArgument, "alpha must lie in (0, 1)");
  }
  if (!(config.beta > 0.0 && config.beta < 1.0)) {
    return make_error(ErrorCode::kInvalidArgument, "beta must lie in (0, 1)");
  }
  return config;
}

enum class Route { kMle, kQuantile };

constexpr std::string_view route_name(Route r) {
  return r == Route::kMle ? "MleRoute" : "QuantileRoute";
}

struct Estimate {
  double lambda_hat;
  Route route;
  std::optional<double> coarse_estimate;
  PrivacyBudget budget_spent;
};

// Clip to [0, R], release the mean with Lap(R/(eps n)), invert.
inline Result<double> private_mle(const Dataset& data, double clip_R,
                                  PrivacyAccount account, NoiseSource& noise) {
  if (!(clip_R > 0.0) || !std::isfinite(clip_R)) {
    return make_error(ErrorCode::kInvalidArgument, "clip range must be positive");
  }
  auto budget = account.spend("private_mle");
  if (!budget) return budget.error();
  double clipped_sum = 0.0;
  for (double x : data.values()) clipped_sum += std::min(x, clip_R);
  const double n = data.n();
  auto z = noise.laplace(NoiseScale{clip_R / (budget->epsilon() * n)});
  if (!z) return z.error();
  const double noisy_mean = clipped_sum / n + *z;
  if (!(noisy_mean > 0.0)) {
    return make_error(ErrorCode::kNonpositiveMean,
                      "noisy clipped mean is not positive; n too small for budget");
  }
  return 1.0 / noisy_mean;
}

inline Result<double> private_mle(const Dataset& data, double clip_R,
                                  PrivacyAccount account, RngStream& rng,
                                  bool noiseless) {
  NoiseSource noise(rng, noiseless);
  return private_mle(data, clip_R, account, noise);
}

// Range estimation at eps/2 with theta = 1/10, then the clipped private MLE
// at eps/2.
inline constexpr double kRangeTheta = 0.1;

inline Result<Estimate> mle_learning(const Dataset& data, const LearnerConfig& config,
                                     PrivacyAccount account, NoiseSource& noise) {
  if (auto v = validate(config); !v) return v.error();
  auto halves = account.split({0.5, 0.5});
  if (!halves) return halves.error();
  auto& stages = *halves;

  auto q = svt_quantile(data, config.bounds, kRangeTheta, stages[0], noise);
  if (!q) {
    if (q.code() == ErrorCode::kGridExhausted) {
      return make_error(ErrorCode::kRangeEstimationFailed, q.error().message);
    }
    return q.error();
  }
  auto clip = clipping_range(*q, data.n(), kRangeTheta, config.beta);
  if (!clip) return clip.error();
  auto lambda = private_mle(data, *clip, stages[1], noise);
  if (!lambda) return lambda.error();
  return Estimate{*lambda, Route::kMle, std::nullopt, account.spent()};
}

// Geometric checkpoints q_j = (1/lambda_max) (1/(1 - alpha/2))^j for
// j = 0..J, spanning [1/lambda_max, 1/lambda_min].
struct QuantileCheckpoints {
  double lambda_max;
  double growth;  // 1 / (1 - alpha/2)
  int last_index;

  static QuantileCheckpoints make(const RateBounds& bounds, double alpha) {
    const double growth = 1.0 / (1.0 - alpha / 2.0);
    const int last =
        static_cast<int>(std::ceil(std::log(bounds.ratio()) / std::log(growth)));
    return QuantileCheckpoints{bounds.lambda_max(), growth, last};
  }

  double position(int j) const { return std::pow(growth, j) / lambda_max; }

  // Iteration cap and noise multiplier: ceil(log2(J + 1)).
  int iterations() const {
    return static_cast<int>(std::ceil(std::log2(static_cast<double>(last_index) + 1.0)));
  }
};

inline constexpr double kOneMinusInvE = 1.0 - 1.0 / std::numbers::e;

// Binary search for a checkpoint whose noisy CDF lands in the band
// 1 - 1/e +- alpha/(2e); returns the reciprocal of that position.
inline Result<Estimate> quantile_learning(const Dataset& data,
                                          const LearnerConfig& config,
                                          PrivacyAccount account, NoiseSource& noise) {
  if (auto v = validate(config); !v) return v.error();
  auto budget = account.spend("quantile_learning");
  if (!budget) return budget.error();

  const auto grid = QuantileCheckpoints::make(config.bounds, config.alpha);
  const int iterations = grid.iterations();
  const NoiseScale scale{iterations / (budget->epsilon() * data.n())};
  const double half_band = config.alpha / (2.0 * std::numbers::e);
  const double upper = kOneMinusInvE + half_band;
  const double lower = kOneMinusInvE - half_band;

  int lo = 0;
  int hi = grid.last_index;
  for (int t = 0; t < iterations; ++t) {
    const int mid = (lo + hi) / 2;
    const double position = grid.position(mid);
    auto answer = noisy_fraction_below(data, position, scale, noise);
    if (!answer) return answer.error();
    if (*answer > upper) {
      hi = mid;
    } else if (*answer < lower) {
      lo = mid;
    } else {
      return Estimate{1.0 / position, Route::kQuantile, std::nullopt,
                      account.spent()};
    }
  }
  return make_error(ErrorCode::kSearchExhausted,
                    "binary search ended without a checkpoint in the band");
}

inline constexpr double kCoarseAlpha = 0.5;
inline constexpr double kMleSwitch = 2.0;

// Coarse quantile estimate at eps/3 picks the route for the remaining 2eps/3.
inline Result<Estimate> best_of_both(const Dataset& data, const LearnerConfig& config,
                                     PrivacyAccount account, NoiseSource& noise) {
  if (auto v = validate(config); !v) return v.error();
  auto parts = account.split({1.0 / 3.0, 2.0 / 3.0});
  if (!parts) return parts.error();
  auto& stages = *parts;

  LearnerConfig coarse_config = config;
  coarse_config.alpha = kCoarseAlpha;
  auto coarse = quantile_learning(data, coarse_config, stages[0], noise);
  if (!coarse) {
    return make_error(ErrorCode::kCoarseFailed, coarse.error().message);
  }
  const double coarse_lambda = coarse->lambda_hat;

  auto fine = coarse_lambda >= kMleSwitch
                  ? mle_learning(data, config, stages[1], noise)
                  : quantile_learning(data, config, stages[1], noise);
  if (!fine) return fine.error();
  return Estimate{fine->lambda_hat, fine->route, coarse_lambda, account.spent()};
}

// RngStream entry points; the config's noiseless flag drives the noise.
inline Result<Estimate> mle_learning(const Dataset& data, const LearnerConfig& config,
                                     PrivacyAccount account, RngStream& rng) {
  NoiseSource noise(rng, config.noiseless);
  return mle_learning(data, config, account, noise);
}

inline Result<Estimate> quantile_learning(const Dataset& data,
                                          const LearnerConfig& config,
                                          PrivacyAccount account, RngStream& rng) {
  NoiseSource noise(rng, config.noiseless);
  return quantile_learning(data, config, account, noise);
}

inline Result<Estimate> best_of_both(const Dataset& data, const LearnerConfig& config,
                                     PrivacyAccount account, RngStream& rng) {
  NoiseSource noise(rng, config.noiseless);
  return best_of_both(data, config, account, noise);
}

}  // namespace dpexp
