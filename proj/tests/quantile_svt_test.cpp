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

#include "dpexp/quantile_svt.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "dpexp/analysis.hpp"
#include "dpexp/distributions.hpp"
#include "gtest/gtest.h"
#include "oracles.hpp"

namespace dpexp {
namespace {

Dataset make_data(std::vector<double> xs) { return *Dataset::make(std::move(xs)); }

struct Run {
  Result<QuantileResult> result;
  std::size_t draws;
};

Run run_svt(const Dataset& data, const RateBounds& bounds, double theta, double eps,
            RngStream& rng, bool noiseless) {
  BudgetLedger ledger;
  NoiseSource noise(rng, noiseless);
  auto r = svt_quantile(data, bounds, theta, ledger.open(*PrivacyBudget::make(eps)), noise);
  return {r, noise.draws()};
}

TEST(SvtQuantileTest, HandTraceReturnsTwo) {
  auto data = make_data({0.5, 1.5, 2.5, 3.5});
  auto bounds = *RateBounds::make(1.0 / 64.0, 1.0);
  RngStream rng(0, 0);
  auto run = run_svt(data, bounds, 0.5, 1.0, rng, true);
  ASSERT_TRUE(run.result.ok());
  EXPECT_EQ(run.result->quantile_value, 2.0);
  EXPECT_EQ(run.result->grid_index, 1);
  EXPECT_EQ(run.result->threshold_used, 0.5);
}

TEST(SvtQuantileTest, AllZerosReturnsFirstGridPoint) {
  auto data = make_data(std::vector<double>(17, 0.0));
  auto bounds = *RateBounds::make(0.1, 10.0);
  RngStream rng(0, 0);
  for (double theta : {0.1, 0.5, 0.9}) {
    auto run = run_svt(data, bounds, theta, 1.0, rng, true);
    ASSERT_TRUE(run.result.ok());
    EXPECT_EQ(run.result->grid_index, 0);
    EXPECT_EQ(run.result->quantile_value, 0.1);
  }
}

TEST(SvtQuantileTest, RejectsThetaOutsideRegimeAndApproximateBudget) {
  auto data = make_data({1.0});
  auto bounds = *RateBounds::make(0.1, 10.0);
  RngStream rng(0, 0);
  EXPECT_EQ(run_svt(data, bounds, 0.05, 1.0, rng, true).result.code(),
            ErrorCode::kOutOfRegime);
  EXPECT_EQ(run_svt(data, bounds, 0.95, 1.0, rng, true).result.code(),
            ErrorCode::kOutOfRegime);
  BudgetLedger ledger;
  auto r = svt_quantile(data, bounds, 0.5, ledger.open(*PrivacyBudget::make(1.0, 1e-6)),
                        rng, true);
  EXPECT_EQ(r.code(), ErrorCode::kInvalidArgument);
}

TEST(SvtQuantileTest, GridExhaustionIsBottom) {
  auto data = make_data({1e9, 1e9});
  auto bounds = *RateBounds::make(0.5, 1.0);
  RngStream rng(0, 0);
  auto run = run_svt(data, bounds, 0.5, 1.0, rng, true);
  EXPECT_EQ(run.result.code(), ErrorCode::kGridExhausted);
  EXPECT_EQ(run.draws, 1 + DyadicGrid::for_bounds(bounds, 0.5).size());
}

TEST(SvtQuantileTest, OneThresholdDrawPlusOnePerInspectedPoint) {
  std::mt19937_64 gen(3);
  auto bounds = *RateBounds::make(0.01, 100.0);
  for (int trial = 0; trial < 300; ++trial) {
    auto data = make_data(oracle::random_small_dataset(gen, 50));
    RngStream rng(77, static_cast<std::uint64_t>(trial));
    auto run = run_svt(data, bounds, 0.3, 1.0, rng, false);
    if (run.result.ok()) {
      ASSERT_EQ(run.draws, 1 + static_cast<std::size_t>(run.result->grid_index) + 1);
    } else {
      ASSERT_EQ(run.result.code(), ErrorCode::kGridExhausted);
      ASSERT_EQ(run.draws, 1 + DyadicGrid::for_bounds(bounds, 0.3).size());
    }
  }
}

TEST(SvtQuantileTest, NoiselessMatchesDirectScanOracle) {
  std::mt19937_64 gen(1000);
  std::uniform_real_distribution<double> theta_dist(0.1, 0.9);
  std::uniform_real_distribution<double> log_lo(std::log(1e-3), std::log(1.0));
  std::uniform_real_distribution<double> log_span(std::log(2.0), std::log(1e5));
  for (int trial = 0; trial < 1000; ++trial) {
    const auto xs = oracle::random_small_dataset(gen, 50);
    const double theta = theta_dist(gen);
    const double lo = std::exp(log_lo(gen));
    const double hi = lo * std::exp(log_span(gen));
    RngStream rng(0, 0);
    auto run = run_svt(make_data(xs), *RateBounds::make(lo, hi), theta, 1.0, rng, true);
    auto expected = oracle::svt_noiseless(xs, lo, hi, theta);
    if (expected) {
      ASSERT_TRUE(run.result.ok());
      ASSERT_EQ(run.result->quantile_value, *expected);
    } else {
      ASSERT_EQ(run.result.code(), ErrorCode::kGridExhausted);
    }
  }
}

TEST(SvtQuantileTest, AddingLargeElementNeverLowersResult) {
  std::mt19937_64 gen(41);
  auto bounds = *RateBounds::make(0.01, 100.0);
  for (int trial = 0; trial < 500; ++trial) {
    auto xs = oracle::random_small_dataset(gen, 50);
    RngStream rng(0, 0);
    auto before = run_svt(make_data(xs), bounds, 0.2, 1.0, rng, true).result;
    if (!before) continue;
    xs.push_back(before->quantile_value * 3.0);
    auto after = run_svt(make_data(xs), bounds, 0.2, 1.0, rng, true).result;
    if (!after) continue;  // exhausting the grid is "larger" still
    ASSERT_GE(after->quantile_value, before->quantile_value);
  }
}

TEST(SvtQuantileTest, SpendsExactlyItsBudget) {
  BudgetLedger ledger;
  auto root = ledger.open(*PrivacyBudget::make(0.7));
  RngStream rng(1, 1);
  auto data = make_data({0.5, 1.0, 2.0});
  ASSERT_TRUE(svt_quantile(data, *RateBounds::make(0.1, 10.0), 0.5, root, rng, false).ok());
  ASSERT_EQ(ledger.spends().size(), 1u);
  EXPECT_EQ(ledger.total_spent().epsilon(), 0.7);
  EXPECT_EQ(ledger.spends()[0].mechanism, "svt_quantile");
}

TEST(SvtQuantileTest, SixApproximationAtCalculatedSampleSize) {
  SampleSizeInputs in;
  in.epsilon = 1.0;
  in.beta = 0.1;
  in.bound_ratio = 1e4;
  const auto n = required_n(TheoremId::kLem32, in)->n_required;
  const auto bounds = *RateBounds::make(0.01, 100.0);
  const auto model = *ExpModel::make(1.0);
  const double target = std::log(10.0);
  int hits = 0;
  for (std::uint64_t t = 0; t < 200; ++t) {
    RngStream rng(2024, t);
    auto data = *sample(model, n, rng);
    auto run = run_svt(data, bounds, 0.1, 1.0, rng, false);
    if (run.result && run.result->quantile_value >= target / 6.0 &&
        run.result->quantile_value <= 6.0 * target) {
      ++hits;
    }
  }
  EXPECT_GE(hits, 180);
}

TEST(ClippingRangeTest, Examples) {
  const double e2 = std::exp(2.0);
  auto r = clipping_range(QuantileResult{1.0, 0, 0.0}, e2, std::exp(-2.0), 1.0);
  ASSERT_TRUE(r.ok());
  EXPECT_NEAR(*r, 6.0, 1e-12);

  const double ln10 = std::log(10.0), ln1e4 = std::log(1e4);
  const double c = 6.0 / ln10 * (1.0 + ln10 / ln1e4);
  EXPECT_NEAR(*clipping_range(QuantileResult{2.3, 0, 0.0}, 1e4, 0.1, 0.1),
              c * 2.3 * ln1e4, 1e-12);

  EXPECT_EQ(clipping_range(QuantileResult{1.0, 0, 0.0}, 1.0, 0.1, 0.1).code(),
            ErrorCode::kTooFewSamples);
}

TEST(ClippingRangeTest, CoversAllSamples) {
  const auto bounds = *RateBounds::make(0.01, 100.0);
  const auto model = *ExpModel::make(1.0);
  int covered = 0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    RngStream rng(555, t);
    auto data = *sample(model, 10000, rng);
    auto q = run_svt(data, bounds, 0.1, 1.0, rng, false).result;
    if (!q) continue;
    const double r = *clipping_range(*q, data.n(), 0.1, 0.1);
    if (data.max() <= r) ++covered;
  }
  EXPECT_GE(covered, 95);
}

}  // namespace
}  // namespace dpexp
