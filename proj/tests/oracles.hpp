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

// Test-only reference computations. Nothing here calls into the library's
// algorithm code; datasets are plain vectors and every quantity is recomputed
// by direct scans, brute-force binning or numerical quadrature.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace dpexp::oracle {

// Gauss-Kronrod on [a, b] with shallow adaptivity; callers cut the range into
// pieces on which the integrand is smooth.
template <typename F>
double integrate(F f, double a, double b) {
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 6,
                                                                       1e-13, &err);
}

// Root of g on [a, b] by plain bisection; g(a) and g(b) must differ in sign.
template <typename G>
double bisect(G g, double a, double b) {
  double ga = g(a);
  for (int i = 0; i < 300; ++i) {
    const double mid = 0.5 * (a + b);
    if (mid == a || mid == b) break;
    const double gm = g(mid);
    if ((gm < 0) == (ga < 0)) {
      a = mid;
      ga = gm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

// 1/2 int_0^{50/min} |f1 - f2| dx by quadrature, split at the numerically
// located density crossing and at a few multiples of each mean.
inline double numeric_exp_tv(double l1, double l2) {
  if (l1 == l2) return 0.0;
  auto f = [&](double x) {
    return std::fabs(l1 * std::exp(-l1 * x) - l2 * std::exp(-l2 * x));
  };
  const double hi = std::max(l1, l2), lo = std::min(l1, l2);
  const double end = 50.0 / lo;
  // log-density difference changes sign exactly once on (0, end)
  auto g = [&](double x) { return (std::log(hi) - hi * x) - (std::log(lo) - lo * x); };
  const double cross = bisect(g, 0.0, end);
  // Geometric cuts from the faster decay scale out to the end keep every
  // piece smooth and short relative to its local scale.
  std::vector<double> cuts{0.0, cross, end};
  for (double m = 0.125 / hi; m < end; m *= 2.0) cuts.push_back(m);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += integrate(f, cuts[i], cuts[i + 1]);
  }
  return 0.5 * total;
}

inline double pareto_pdf(double xm, double a, double x) {
  return x < xm ? 0.0 : a * std::pow(xm / x, a) / x;
}

// 1/2 int |p - q| on [min scale, 1e6 max scale], in u = ln x.
inline double numeric_pareto_tv(double xm1, double a1, double xm2, double a2) {
  auto f = [&](double u) {
    const double x = std::exp(u);
    return std::fabs(pareto_pdf(xm1, a1, x) - pareto_pdf(xm2, a2, x)) * x;
  };
  const double u0 = std::log(std::min(xm1, xm2));
  const double u1 = std::log(std::max(xm1, xm2));
  const double u_end = std::log(1e6 * std::max(xm1, xm2));
  std::vector<double> cuts{u0, u1, u_end};
  for (double step = 0.25; u1 + step < u_end; step *= 2.0) cuts.push_back(u1 + step);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += integrate(f, cuts[i], cuts[i + 1]);
  }
  return 0.5 * total;
}

// int p ln(p/q) over [xm, 1e6 xm] for equal-scale Paretos.
inline double numeric_pareto_kl(double a1, double a2, double xm = 1.0) {
  auto f = [&](double u) {
    const double x = xm * std::exp(u);
    const double p = pareto_pdf(xm, a1, x), q = pareto_pdf(xm, a2, x);
    return p == 0.0 ? 0.0 : p * std::log(p / q) * x;
  };
  // In u = ln(x/xm) the first law is Exp(a1); stop where its mass is e^{-50}.
  double total = 0.0;
  const double u_end = 50.0 / a1;
  const double step = 1.0 / a1;
  for (double a = 0.0; a < u_end; a += step) total += integrate(f, a, std::min(a + step, u_end));
  return total;
}

inline std::size_t count_below(std::span<const double> xs, double t) {
  std::size_t c = 0;
  for (double x : xs) c += x < t ? 1 : 0;
  return c;
}

// Sparse-vector scan with zero noise: first grid point 2^i/lambda_max whose
// empirical CDF reaches 1 - theta.
inline std::optional<double> svt_noiseless(std::span<const double> xs,
                                           double lambda_min, double lambda_max,
                                           double theta) {
  int last = 0;
  while (std::pow(2.0, last) < lambda_max / lambda_min) ++last;
  int extra = 0;
  const double spread = std::max(1.0, std::log(1.0 / theta));
  while (std::pow(2.0, extra) < spread) ++extra;
  last += extra + 2;
  const double n = static_cast<double>(xs.size());
  for (int i = 0; i <= last; ++i) {
    const double g = std::pow(2.0, i) / lambda_max;
    if (static_cast<double>(count_below(xs, g)) / n >= 1.0 - theta) return g;
  }
  return std::nullopt;
}

inline double clipped_mean(std::span<const double> xs, double r) {
  double s = 0.0;
  for (double x : xs) s += x < r ? x : r;
  return s / static_cast<double>(xs.size());
}

inline std::optional<double> mle_learning_noiseless(std::span<const double> xs,
                                                    double lambda_min,
                                                    double lambda_max, double beta) {
  auto q = svt_noiseless(xs, lambda_min, lambda_max, 0.1);
  if (!q || xs.size() < 2) return std::nullopt;
  const double ln_n = std::log(static_cast<double>(xs.size()));
  const double c = 6.0 / std::log(1.0 / 0.1) * (1.0 + std::log(1.0 / beta) / ln_n);
  const double mean = clipped_mean(xs, c * *q * ln_n);
  if (!(mean > 0.0)) return std::nullopt;
  return 1.0 / mean;
}

// Noiseless binary search over q_j = (1/(1 - alpha/2))^j / lambda_max.
inline std::optional<double> quantile_learning_noiseless(std::span<const double> xs,
                                                         double lambda_min,
                                                         double lambda_max,
                                                         double alpha) {
  const double growth = 1.0 / (1.0 - alpha / 2.0);
  const int last = static_cast<int>(
      std::ceil(std::log(lambda_max / lambda_min) / std::log(growth)));
  int iterations = 0;
  while (std::pow(2.0, iterations) < last + 1.0) ++iterations;
  const double target = 1.0 - 1.0 / std::numbers::e;
  const double half = alpha / (2.0 * std::numbers::e);
  const double n = static_cast<double>(xs.size());
  int lo = 0, hi = last;
  for (int t = 0; t < iterations; ++t) {
    const int mid = (lo + hi) / 2;
    const double q = std::pow(growth, mid) / lambda_max;
    const double cdf = static_cast<double>(count_below(xs, q)) / n;
    if (cdf > target + half) {
      hi = mid;
    } else if (cdf < target - half) {
      lo = mid;
    } else {
      return 1.0 / q;
    }
  }
  return std::nullopt;
}

struct BestOfBothTrace {
  double coarse;
  double lambda;
  bool mle;
};

inline std::optional<BestOfBothTrace> best_of_both_noiseless(
    std::span<const double> xs, double lambda_min, double lambda_max, double alpha,
    double beta) {
  auto coarse = quantile_learning_noiseless(xs, lambda_min, lambda_max, 0.5);
  if (!coarse) return std::nullopt;
  const bool mle = *coarse >= 2.0;
  auto fine = mle ? mle_learning_noiseless(xs, lambda_min, lambda_max, beta)
                  : quantile_learning_noiseless(xs, lambda_min, lambda_max, alpha);
  if (!fine) return std::nullopt;
  return BestOfBothTrace{*coarse, *fine, mle};
}

// Bin index by repeated doubling/halving: 2^k <= x < 2^(k+1).
inline int bin_of(double x) {
  if (x == 0.0) return -1074;
  int k = 0;
  while (std::ldexp(1.0, k) > x) --k;
  while (std::ldexp(1.0, k + 1) <= x) ++k;
  return k;
}

// Noiseless bounds finder: argmax bin (smallest on ties) among bins whose
// fraction clears (2/(eps n)) ln(2/delta) + 1/n.
inline std::optional<std::pair<double, double>> find_bounds_noiseless(
    std::span<const double> xs, double eps, double delta) {
  std::map<int, std::size_t> counts;
  for (double x : xs) ++counts[bin_of(x)];
  const double n = static_cast<double>(xs.size());
  const double threshold = 2.0 / (eps * n) * std::log(2.0 / delta) + 1.0 / n;
  std::optional<int> best;
  double best_c = -1.0;
  for (const auto& [k, c] : counts) {
    const double frac = static_cast<double>(c) / n;
    if (frac >= threshold && frac > best_c) {
      best = k;
      best_c = frac;
    }
  }
  if (!best) return std::nullopt;
  return std::pair{std::ldexp(std::numbers::ln2, -(*best + 1)),
                   std::ldexp(std::numbers::ln2, -(*best - 1))};
}

// Kolmogorov-Smirnov statistic of a sample against a continuous CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

// Random small dataset for property tests: mixture of exponential scales so
// every learner branch gets exercised.
inline std::vector<double> random_small_dataset(std::mt19937_64& gen, std::size_t max_n) {
  std::uniform_int_distribution<std::size_t> size(2, max_n);
  std::uniform_real_distribution<double> log_rate(std::log(0.05), std::log(20.0));
  std::exponential_distribution<double> unit(1.0);
  const double rate = std::exp(log_rate(gen));
  std::vector<double> xs(size(gen));
  for (auto& x : xs) x = unit(gen) / rate;
  return xs;
}

}  // namespace dpexp::oracle
