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
#include <numbers>
#include <vector>

#include "dpexp/dataset.hpp"
#include "dpexp/privacy.hpp"
#include "dpexp/result.hpp"

namespace dpexp {

// Exponential law with rate lambda: f(x) = lambda exp(-lambda x), x >= 0.
class ExpModel {
 public:
  static Result<ExpModel> make(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) {
      return make_error(ErrorCode::kInvalidRate, "rate must be positive and finite");
    }
    return ExpModel(rate);
  }

  double rate() const { return rate_; }
  double mean() const { return 1.0 / rate_; }
  double median() const { return std::numbers::ln2 / rate_; }

  double pdf(double x) const { return x < 0.0 ? 0.0 : rate_ * std::exp(-rate_ * x); }
  double cdf(double x) const { return x <= 0.0 ? 0.0 : -std::expm1(-rate_ * x); }
  double quantile(double p) const { return -std::log1p(-p) / rate_; }

  double draw(RngStream& rng) const { return quantile(rng.uniform_open()); }

 private:
  explicit ExpModel(double rate) : rate_(rate) {}
  double rate_;
};

// Pareto law with scale x_m and shape alpha_p, support [x_m, inf).
class ParetoModel {
 public:
  static Result<ParetoModel> make(double scale, double shape) {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
      return make_error(ErrorCode::kInvalidArgument, "scale must be positive");
    }
    if (!(shape > 0.0) || !std::isfinite(shape)) {
      return make_error(ErrorCode::kInvalidShape, "shape must be positive");
    }
    return ParetoModel(scale, shape);
  }

  double scale() const { return scale_; }
  double shape() const { return shape_; }

  double pdf(double x) const {
    if (x < scale_) return 0.0;
    return shape_ * std::pow(scale_, shape_) / std::pow(x, shape_ + 1.0);
  }
  double cdf(double x) const {
    if (x <= scale_) return 0.0;
    return -std::expm1(shape_ * std::log(scale_ / x));
  }
  // x_m / (1 - tau)^(1/alpha_p)
  double quantile(double tau) const {
    return scale_ * std::exp(-std::log1p(-tau) / shape_);
  }

  double draw(RngStream& rng) const { return quantile(rng.uniform_open()); }

 private:
  ParetoModel(double scale, double shape) : scale_(scale), shape_(shape) {}
  double scale_;
  double shape_;
};

// Point where two exponential densities cross.
struct TvCrossing {
  double crossing_a;
};

inline Result<TvCrossing> tv_crossing(double rate1, double rate2) {
  if (!(rate1 > 0.0) || !(rate2 > 0.0) || !std::isfinite(rate1) ||
      !std::isfinite(rate2)) {
    return make_error(ErrorCode::kInvalidRate, "rates must be positive and finite");
  }
  if (rate1 == rate2) {
    return make_error(ErrorCode::kInvalidArgument, "equal rates never cross");
  }
  return TvCrossing{(std::log(rate1) - std::log(rate2)) / (rate1 - rate2)};
}

// Exact TV(Exp(rate1), Exp(rate2)) = exp(-lo a) - exp(-hi a).
inline Result<double> exp_tv(double rate1, double rate2) {
  if (!(rate1 > 0.0) || !(rate2 > 0.0) || !std::isfinite(rate1) ||
      !std::isfinite(rate2)) {
    return make_error(ErrorCode::kInvalidRate, "rates must be positive and finite");
  }
  const double hi = std::max(rate1, rate2);
  const double lo = std::min(rate1, rate2);
  if (hi - lo < 1e-12 * hi) return 0.0;
  // In terms of r = hi/lo: lo*a = ln r/(r-1), hi*a = r ln r/(r-1).
  const double r = hi / lo;
  const double lo_a = std::log(r) / (r - 1.0);
  const double hi_a = r * lo_a;
  return std::exp(-lo_a) - std::exp(-hi_a);
}

// T(r) = TV(Exp(r lambda), Exp(lambda)) = r^(-1/(r-1)) (1 - 1/r).
inline Result<double> separation_T(double r) {
  if (!(r >= 1.0) || !std::isfinite(r)) {
    return make_error(ErrorCode::kInvalidRatio, "ratio must be >= 1");
  }
  if (r == 1.0) return 0.0;
  return std::exp(-std::log(r) / (r - 1.0)) * (1.0 - 1.0 / r);
}

// KL(Pareto(x, a2) || Pareto(x, a1)) = u - 1 - ln u with u = a1/a2.
inline Result<double> pareto_kl_equal_scale(double shape1, double shape2) {
  if (!(shape1 > 0.0) || !(shape2 > 0.0) || !std::isfinite(shape1) ||
      !std::isfinite(shape2)) {
    return make_error(ErrorCode::kInvalidShape, "shapes must be positive");
  }
  const double u = shape1 / shape2;
  return u - 1.0 - std::log(u);
}

// Upper bound on TV between two Pareto laws: the exact equal-shape scale gap
// at the larger shape plus a Pinsker term for the shape gap. May exceed 1.
inline double pareto_tv_bound(const ParetoModel& a, const ParetoModel& b) {
  const double scale_gap = std::fabs(std::log(b.scale() / a.scale()));
  const double shape_max = std::max(a.shape(), b.shape());
  const double shape_min = std::min(a.shape(), b.shape());
  const double kl = *pareto_kl_equal_scale(shape_max, shape_min);
  return -std::expm1(-shape_max * scale_gap) + std::sqrt(0.5 * kl);
}

template <typename Model>
Result<Dataset> sample(const Model& model, std::size_t n, RngStream& rng) {
  if (n == 0) return make_error(ErrorCode::kEmptyRequest, "n must be >= 1");
  std::vector<double> values(n);
  for (auto& v : values) v = model.draw(rng);
  return Dataset::make(std::move(values));
}

}  // namespace dpexp
