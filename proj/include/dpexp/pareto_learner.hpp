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
#include <optional>
#include <vector>

#include "dpexp/dataset.hpp"
#include "dpexp/exp_learners.hpp"
#include "dpexp/privacy.hpp"
#include "dpexp/quantile_svt.hpp"
#include "dpexp/result.hpp"

namespace dpexp {

// 1 / (4 ln 7)
inline const double kDefaultParetoTau = 1.0 / (4.0 * std::log(7.0));

struct ParetoConfig {
  LearnerConfig learner;  // alpha = gamma; bounds are on the shape alpha_p
  double tau = kDefaultParetoTau;
  // Grid bounds for the low-quantile scan; defaults to learner.bounds.
  std::optional<RateBounds> pivot_bounds;
};

struct ParetoEstimate {
  double shape_hat;
  double scale_hat;
  double tail_quantile_tau;
  std::size_t tail_count;
  double pivot;  // q^_tau, or x_m when the scale is known
  Estimate shape_estimate;
};

// { ln(x / pivot) : x in data, x >= pivot }
inline Result<Dataset> log_transform(const Dataset& data, double pivot) {
  if (!(pivot > 0.0) || !std::isfinite(pivot)) {
    return make_error(ErrorCode::kInvalidArgument, "pivot must be positive");
  }
  std::vector<double> tail;
  for (double x : data.values()) {
    if (x >= pivot) tail.push_back(std::log(x / pivot));
  }
  if (tail.empty()) {
    return make_error(ErrorCode::kEmptyTail, "no value at or above the pivot");
  }
  return Dataset::make(std::move(tail));
}

// x_m = q_tau (1 - tau)^(1/alpha_p)
inline double recover_scale(double quantile, double tau, double shape) {
  return quantile * std::pow(1.0 - tau, 1.0 / shape);
}

inline Result<ParetoEstimate> learn_pareto_known_scale(const Dataset& data,
                                                       double scale,
                                                       const LearnerConfig& config,
                                                       PrivacyAccount account,
                                                       RngStream& rng) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    return make_error(ErrorCode::kInvalidArgument, "scale must be positive");
  }
  if (data.min() < scale) {
    return make_error(ErrorCode::kScaleViolation, "datum below the known scale");
  }
  auto logged = log_transform(data, scale);
  if (!logged) return logged.error();
  auto shape = mle_learning(*logged, config, account, rng);
  if (!shape) return shape.error();
  return ParetoEstimate{shape->lambda_hat, scale, 0.0, logged->size(), scale, *shape};
}

// Private low quantile at eps/2 as the tail pivot, best-of-both on the
// log-exceedances at eps/2, then scale recovery.
inline Result<ParetoEstimate> learn_pareto(const Dataset& data,
                                           const ParetoConfig& config,
                                           PrivacyAccount account, RngStream& rng) {
  if (auto v = validate(config.learner); !v) return v.error();
  if (!(config.tau > 0.0 && config.tau < 1.0)) {
    return make_error(ErrorCode::kInvalidArgument, "tau must lie in (0, 1)");
  }
  auto stages = account.split({0.5, 0.5});
  if (!stages) return stages.error();

  NoiseSource noise(rng, config.learner.noiseless);
  const RateBounds& pivot_bounds = config.pivot_bounds.value_or(config.learner.bounds);
  auto q = svt_quantile(data, pivot_bounds, 1.0 - config.tau, (*stages)[0], noise);
  if (!q) {
    if (q.code() == ErrorCode::kGridExhausted) {
      return make_error(ErrorCode::kRangeEstimationFailed, q.error().message);
    }
    return q.error();
  }
  const double pivot = q->quantile_value;
  auto tail = log_transform(data, pivot);
  if (!tail) return tail.error();

  auto shape = best_of_both(*tail, config.learner, (*stages)[1], noise);
  if (!shape) return shape.error();
  Estimate shape_estimate = *shape;
  shape_estimate.budget_spent = account.spent();
  return ParetoEstimate{shape->lambda_hat,
                        recover_scale(pivot, config.tau, shape->lambda_hat),
                        config.tau,
                        tail->size(),
                        pivot,
                        shape_estimate};
}

}  // namespace dpexp
