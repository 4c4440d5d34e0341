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
#include <map>
#include <numbers>
#include <set>

#include "dpexp/dataset.hpp"
#include "dpexp/exp_learners.hpp"
#include "dpexp/privacy.hpp"
#include "dpexp/quantile_svt.hpp"
#include "dpexp/result.hpp"

namespace dpexp {

inline constexpr int kLowestBin = -1074;

// Bin k holds [2^k, 2^(k+1)); zero goes to the lowest bin.
inline int dyadic_bin(double x) {
  if (x == 0.0) return kLowestBin;
  int exponent = 0;
  std::frexp(x, &exponent);  // x = m 2^exponent, m in [0.5, 1)
  return exponent - 1;
}

struct DyadicHistogram {
  std::map<int, double> bins;        // c_k, nonempty bins only
  std::map<int, double> noisy_bins;  // c^_k; zero exactly where c_k is zero
  std::set<int> survivor_set;
  double threshold = 0.0;

  double noisy(int k) const {
    auto it = noisy_bins.find(k);
    return it == noisy_bins.end() ? 0.0 : it->second;
  }
};

inline DyadicHistogram exact_histogram(const Dataset& data) {
  std::map<int, std::size_t> counts;
  for (double x : data.values()) ++counts[dyadic_bin(x)];
  DyadicHistogram h;
  for (const auto& [k, count] : counts) {
    h.bins[k] = static_cast<double>(count) / data.n();
  }
  return h;
}

// Stability-based noisy histogram; empty bins stay at exactly zero. Noise is
// drawn for nonempty bins in increasing k.
inline Result<DyadicHistogram> noisy_dyadic_histogram(const Dataset& data,
                                                      const PrivacyBudget& budget,
                                                      NoiseSource& noise) {
  auto h = exact_histogram(data);
  const double n = data.n();
  const double eps = budget.epsilon();
  const NoiseScale scale{2.0 / (eps * n)};
  for (const auto& [k, c] : h.bins) {
    auto z = noise.laplace(scale);
    if (!z) return z.error();
    h.noisy_bins[k] = c + *z;
  }
  h.threshold = 2.0 / (eps * n) * std::log(2.0 / budget.delta()) + 1.0 / n;
  for (const auto& [k, c] : h.noisy_bins) {
    if (c >= h.threshold) h.survivor_set.insert(k);
  }
  return h;
}

// lambda_min = ln2 / 2^(k+1), lambda_max = ln2 / 2^(k-1); ratio exactly 4.
inline RateBounds bounds_from_bin(int k) {
  return *RateBounds::make(std::ldexp(std::numbers::ln2, -(k + 1)),
                           std::ldexp(std::numbers::ln2, -(k - 1)));
}

inline Result<RateBounds> find_bounds(const Dataset& data, PrivacyAccount account,
                                      NoiseSource& noise,
                                      DyadicHistogram* trace = nullptr) {
  if (account.budget().pure()) {
    return make_error(ErrorCode::kInvalidArgument, "bounds finder needs delta > 0");
  }
  auto budget = account.spend("find_bounds");
  if (!budget) return budget.error();
  auto h = noisy_dyadic_histogram(data, *budget, noise);
  if (!h) return h.error();
  if (trace) *trace = *h;
  if (h->survivor_set.empty()) {
    return make_error(ErrorCode::kNoBinSurvived, "no bin cleared the threshold");
  }
  // Ascending scan with strict > keeps the smallest k on ties.
  int best = *h->survivor_set.begin();
  for (int k : h->survivor_set) {
    if (h->noisy(k) > h->noisy(best)) best = k;
  }
  return bounds_from_bin(best);
}

inline Result<RateBounds> find_bounds(const Dataset& data, PrivacyAccount account,
                                      RngStream& rng, bool noiseless) {
  NoiseSource noise(rng, noiseless);
  return find_bounds(data, account, noise);
}

// (eps/2, delta) for the bounds, (eps/2, 0) for best-of-both.
inline Result<Estimate> learn_without_bounds(const Dataset& data, double alpha,
                                             double beta, PrivacyAccount account,
                                             RngStream& rng, bool noiseless = false) {
  if (account.budget().pure()) {
    return make_error(ErrorCode::kInvalidArgument, "needs delta > 0");
  }
  const double eps_fractions[] = {0.5, 0.5};
  const double delta_fractions[] = {1.0, 0.0};
  auto stages = account.split(eps_fractions, delta_fractions);
  if (!stages) return stages.error();

  NoiseSource noise(rng, noiseless);
  auto bounds = find_bounds(data, (*stages)[0], noise);
  if (!bounds) return bounds.error();
  const LearnerConfig config{alpha, beta, *bounds, noiseless};
  auto estimate = best_of_both(data, config, (*stages)[1], noise);
  if (!estimate) return estimate.error();
  estimate.value().budget_spent = account.spent();
  return estimate;
}

}  // namespace dpexp
