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
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dpexp/distributions.hpp"
#include "dpexp/quantile_svt.hpp"
#include "dpexp/result.hpp"

namespace dpexp {

// Geometric family lambda_min (1 + 8 alpha)^i, all <= lambda_max.
struct PackingFamily {
  std::vector<double> rates;
  double alpha;
  RateBounds bounds;

  double growth() const { return 1.0 + 8.0 * alpha; }
};

inline Result<PackingFamily> build_packing(const RateBounds& bounds, double alpha) {
  if (!(alpha > 0.0 && alpha < 0.5)) {
    return make_error(ErrorCode::kOutOfRegime, "alpha must lie in (0, 1/2)");
  }
  PackingFamily family{{}, alpha, bounds};
  const double growth = family.growth();
  // Relative slack so lambda_max itself is kept when it lands on the grid.
  const double ceiling = bounds.lambda_max() * (1.0 + 1e-12);
  for (double rate = bounds.lambda_min(); rate <= ceiling; rate *= growth) {
    family.rates.push_back(rate);
  }
  return family;
}

// Smallest adjacent TV in the family (1.0 for a single-rate family).
inline double min_adjacent_tv(const PackingFamily& family) {
  double smallest = 1.0;
  for (std::size_t i = 0; i + 1 < family.rates.size(); ++i) {
    smallest = std::min(smallest, *exp_tv(family.rates[i + 1], family.rates[i]));
  }
  return smallest;
}

enum class TheoremId {
  kLem32,
  kLem36,
  kThm34,
  kLem39,
  kThm310,
  kThm311,
  kLem61,
  kThm62,
  kLowerBound52,
  kParetoB6,
};

constexpr std::string_view theorem_name(TheoremId id) {
  switch (id) {
    case TheoremId::kLem32: return "Lem32";
    case TheoremId::kLem36: return "Lem36";
    case TheoremId::kThm34: return "Thm34";
    case TheoremId::kLem39: return "Lem39";
    case TheoremId::kThm310: return "Thm310";
    case TheoremId::kThm311: return "Thm311";
    case TheoremId::kLem61: return "Lem61";
    case TheoremId::kThm62: return "Thm62";
    case TheoremId::kLowerBound52: return "LowerBound52";
    case TheoremId::kParetoB6: return "ParetoB6";
  }
  return "Unknown";
}

inline std::optional<TheoremId> parse_theorem(std::string_view name) {
  for (auto id : {TheoremId::kLem32, TheoremId::kLem36, TheoremId::kThm34,
                  TheoremId::kLem39, TheoremId::kThm310, TheoremId::kThm311,
                  TheoremId::kLem61, TheoremId::kThm62, TheoremId::kLowerBound52,
                  TheoremId::kParetoB6}) {
    if (theorem_name(id) == name) return id;
  }
  return std::nullopt;
}

// Inputs for the calculators; each theorem reads the subset it needs.
struct SampleSizeInputs {
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> epsilon;
  std::optional<double> delta;
  std::optional<double> lambda;       // true rate (or Pareto shape for ParetoB6)
  std::optional<double> bound_ratio;  // lambda_max / lambda_min
  std::optional<double> clip_range;   // R, for Lem36
  std::optional<double> tau;          // ParetoB6
};

struct SampleSizeReport {
  TheoremId theorem_id;
  std::uint64_t n_required;
  double value;           // expression value before the ceiling
  bool up_to_constants;   // big-O statement evaluated with constant 1
  SampleSizeInputs inputs;
};

namespace internal {

inline std::uint64_t ceil_count(double value) {
  if (!(value > 1.0)) return 1;
  return static_cast<std::uint64_t>(std::ceil(value));
}

// Solves n = max(a ln n, floor_value) by fixed-point iteration.
inline double solve_log_fixed_point(double a, double floor_value) {
  double n = std::max({floor_value, std::numbers::e, 1.0});
  for (int i = 0; i < 200; ++i) {
    const double next = std::max(a * std::log(n), floor_value);
    if (std::fabs(next - n) <= 1e-12 * n) return next;
    n = std::max(next, std::numbers::e);
  }
  return n;
}

inline Error missing(std::string_view what) {
  return make_error(ErrorCode::kIncompleteInputs, std::string("missing input: ") +
                                                      std::string(what));
}

struct Unpacked {
  double alpha, beta, epsilon, ratio;
};

}  // namespace internal

// ceil((1/(6 eps alpha)) ln((ln(ratio)/(16 alpha)) / beta)), at least 1.
inline Result<std::uint64_t> lower_bound_n(double alpha, double beta, double epsilon,
                                           const RateBounds& bounds) {
  if (!(alpha > 0.0 && alpha < 0.5) || !(beta > 0.0 && beta < 0.5) ||
      !(epsilon > 0.0)) {
    return make_error(ErrorCode::kOutOfRegime,
                      "need alpha, beta in (0, 1/2) and epsilon > 0");
  }
  if (!(bounds.ratio() > 1.0)) {
    return make_error(ErrorCode::kDegenerateBounds, "lambda_max must exceed lambda_min");
  }
  const double value = 1.0 / (6.0 * epsilon * alpha) *
                       std::log(std::log(bounds.ratio()) / (16.0 * alpha) / beta);
  return internal::ceil_count(value);
}

// Evaluates the theorem's printed bound with natural logs and the ceiling
// applied last. Big-O statements use constant 1.
inline Result<SampleSizeReport> required_n(TheoremId id, const SampleSizeInputs& in) {
  using std::log;
  const auto need = [&](const std::optional<double>& v) { return v.has_value(); };
  SampleSizeReport report{id, 1, 0.0, false, in};
  auto finish = [&](double value, bool big_o) -> Result<SampleSizeReport> {
    report.value = value;
    report.up_to_constants = big_o;
    report.n_required = internal::ceil_count(value);
    return report;
  };

  switch (id) {
    case TheoremId::kLem32: {
      if (!need(in.epsilon)) return internal::missing("epsilon");
      if (!need(in.beta)) return internal::missing("beta");
      if (!need(in.bound_ratio)) return internal::missing("bound_ratio");
      const double eps = *in.epsilon, beta = *in.beta;
      const double a = 5.0 / eps * log(4.0 * log(*in.bound_ratio) / beta);
      const double b = 200.0 * log(4.0 / beta);
      return finish(std::max(a, b), false);
    }
    case TheoremId::kLem36: {
      if (!need(in.epsilon)) return internal::missing("epsilon");
      if (!need(in.alpha)) return internal::missing("alpha");
      if (!need(in.beta)) return internal::missing("beta");
      if (!need(in.clip_range)) return internal::missing("clip_range");
      if (!need(in.lambda)) return internal::missing("lambda");
      const double eps = *in.epsilon, alpha = *in.alpha, beta = *in.beta;
      const double r = *in.clip_range;
      const double tail = std::exp(-*in.lambda * r);
      if (!(alpha > tail)) {
        return make_error(ErrorCode::kRegimeViolation,
                          "alpha must exceed the clipped tail mass exp(-lambda R)");
      }
      const double a = r * log(1.0 / beta) / (eps * (alpha - tail));
      const double b = log(1.0 / beta) / (alpha * alpha);
      return finish(std::max(a, b), true);
    }
    case TheoremId::kThm34: {
      if (!need(in.epsilon)) return internal::missing("epsilon");
      if (!need(in.alpha)) return internal::missing("alpha");
      if (!need(in.beta)) return internal::missing("beta");
      if (!need(in.lambda)) return internal::missing("lambda");
      if (!need(in.bound_ratio)) return internal::missing("bound_ratio");
      const double eps = *in.epsilon, alpha = *in.alpha, beta = *in.beta;
      const double slope =
          log(1.0 / alpha) * log(1.0 / beta) / (*in.lambda * eps * alpha);
      const double sampling = log(1.0 / beta) / (alpha * alpha);
      const double range = log(log(*in.bound_ratio) / beta) / eps;
      return finish(internal::solve_log_fixed_point(slope, std::max(sampling, range)),
                    true);
    }
    case TheoremId::kLem39: {
      if (!need(in.epsilon)) return internal::missing("epsilon");
      if (!need(in.alpha)) return internal::missing("alpha");
      if (!need(in.beta)) return internal::missing("beta");
      if (!need(in.bound_ratio)) return internal::missing("bound_ratio");
      const double eps = *in.epsilon, alpha = *in.alpha, beta = *in.beta;
      const double t =
          std::max(1.0, std::ceil(std::log2(log(*in.bound_ratio) / alpha)));
      const double a = 2.0 * std::numbers::e * t / (eps * alpha) * log(2.0 * t / beta);
      const double b = 2.0 / (alpha * alpha) * log(2.0 * t / beta);
      return finish(std::max(a, b), false);
    }
    case TheoremId::kThm310: {
      if (!need(in.epsilon)) return internal::missing("epsilon");
      if (!need(in.alpha)) return internal::missing("alpha");
      if (!need(in.beta)) return internal::missing("beta");
      if (!need(in.bound_ratio)) return internal::missing("bound_ratio");
      const double eps = *in.epsilon, alpha = *in.alpha, beta = *in.beta;
      const double k = log(*in.bound_ratio) / alpha;
      const double a = log(k) / (eps * alpha) * log(k / beta);
      const double b = 1.0 / (alpha * alpha) * log(k / beta);
      return finish(std::max(a, b), true);
    }
    case TheoremId::kThm311: {
      // Coarse stage at alpha = 1/2 plus the route the learner takes for this
      // lambda (MLE from the switch point up, quantile below).
      if (!need(in.lambda)) return internal::missing("lambda");
      SampleSizeInputs coarse_in = in;
      coarse_in.alpha = 0.5;
      auto coarse = required_n(TheoremId::kThm310, coarse_in);
      if (!coarse) return coarse.error();
      auto branch = required_n(
          *in.lambda >= 2.0 ? TheoremId::kThm34 : TheoremId::kThm310, in);
      if (!branch) return branch.error();
      return finish(std::max(coarse->value, branch->value), true);
    }
    case TheoremId::kLem61: {
      if (!need(in.epsilon)) return internal::missing("epsilon");
      if (!need(in.beta)) return internal::missing("beta");
      if (!need(in.delta)) return internal::missing("delta");
      const double eps = *in.epsilon, beta = *in.beta, delta = *in.delta;
      const double a = 800.0 / eps * log(2.0 / (delta * beta));
      const double b = 5000.0 * log(2.0 / beta);
      return finish(std::max(a, b), false);
    }
    case TheoremId::kThm62: {
      if (!need(in.epsilon)) return internal::missing("epsilon");
      if (!need(in.alpha)) return internal::missing("alpha");
      if (!need(in.beta)) return internal::missing("beta");
      if (!need(in.delta)) return internal::missing("delta");
      const double eps = *in.epsilon, alpha = *in.alpha, beta = *in.beta;
      const double delta = *in.delta;
      const double l = log(1.0 / alpha);
      const double quantile_term = l / (eps * alpha) * log(l / beta);
      const double floor_value =
          std::max({1.0 / (alpha * alpha) * log(l / beta),
                    log(1.0 / beta) / (alpha * alpha), log(1.0 / (delta * beta)) / eps});
      if (!in.lambda) return finish(std::max(quantile_term, floor_value), true);
      const double slope = l * log(1.0 / beta) / (*in.lambda * eps * alpha);
      // max{min{q, s ln n}, f}: solve with the MLE term, then cap by q.
      const double with_mle = internal::solve_log_fixed_point(slope, floor_value);
      return finish(std::max(std::min(quantile_term, with_mle), floor_value), true);
    }
    case TheoremId::kLowerBound52: {
      if (!need(in.epsilon)) return internal::missing("epsilon");
      if (!need(in.alpha)) return internal::missing("alpha");
      if (!need(in.beta)) return internal::missing("beta");
      if (!need(in.bound_ratio)) return internal::missing("bound_ratio");
      if (!(*in.bound_ratio > 1.0)) {
        return make_error(ErrorCode::kDegenerateBounds, "bound ratio must exceed 1");
      }
      auto bounds = RateBounds::make(1.0, *in.bound_ratio);
      auto n = lower_bound_n(*in.alpha, *in.beta, *in.epsilon, *bounds);
      if (!n) return n.error();
      const double value = 1.0 / (6.0 * *in.epsilon * *in.alpha) *
                           log(log(*in.bound_ratio) / (16.0 * *in.alpha) / *in.beta);
      report.value = value;
      report.n_required = *n;
      return report;
    }
    case TheoremId::kParetoB6: {
      if (!need(in.epsilon)) return internal::missing("epsilon");
      if (!need(in.alpha)) return internal::missing("alpha (gamma)");
      if (!need(in.beta)) return internal::missing("beta");
      if (!need(in.bound_ratio)) return internal::missing("bound_ratio");
      if (!need(in.lambda)) return internal::missing("lambda (shape)");
      const double eps = *in.epsilon, gamma = *in.alpha, beta = *in.beta;
      const double tau = in.tau.value_or(1.0 / (4.0 * log(7.0)));
      const double ratio_log = log(*in.bound_ratio);
      const double lk = log(ratio_log / gamma);
      const double quantile_term = lk / (eps * gamma) * log(lk / beta);
      const double mle_term =
          log(1.0 / gamma) * log(1.0 / beta) / (*in.lambda * eps * gamma);
      const double sampling = log(lk / beta) / (gamma * gamma);
      const double range = log(ratio_log / beta) / eps;
      const double inner =
          std::max({std::min(quantile_term, mle_term), sampling, range});
      return finish(inner / (1.0 - tau), true);
    }
  }
  return make_error(ErrorCode::kInvalidArgument, "unknown theorem");
}

}  // namespace dpexp
