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
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "dpexp/analysis.hpp"
#include "dpexp/bounds_finder.hpp"
#include "dpexp/distributions.hpp"
#include "dpexp/exp_learners.hpp"
#include "dpexp/pareto_learner.hpp"
#include "dpexp/privacy.hpp"
#include "dpexp/result.hpp"

namespace dpexp {

enum class LearnerKind {
  kMleLearning,
  kQuantileLearning,
  kBestOfBoth,
  kBoundsFinder,
  kParetoFull,
  kParetoKnownScale,
};

constexpr std::string_view learner_name(LearnerKind k) {
  switch (k) {
    case LearnerKind::kMleLearning: return "MleLearning";
    case LearnerKind::kQuantileLearning: return "QuantileLearning";
    case LearnerKind::kBestOfBoth: return "BestOfBoth";
    case LearnerKind::kBoundsFinder: return "BoundsFinder";
    case LearnerKind::kParetoFull: return "ParetoFull";
    case LearnerKind::kParetoKnownScale: return "ParetoKnownScale";
  }
  return "Unknown";
}

inline std::optional<LearnerKind> parse_learner(std::string_view name) {
  for (auto k : {LearnerKind::kMleLearning, LearnerKind::kQuantileLearning,
                 LearnerKind::kBestOfBoth, LearnerKind::kBoundsFinder,
                 LearnerKind::kParetoFull, LearnerKind::kParetoKnownScale}) {
    if (learner_name(k) == name) return k;
  }
  return std::nullopt;
}

inline bool is_pareto(LearnerKind k) {
  return k == LearnerKind::kParetoFull || k == LearnerKind::kParetoKnownScale;
}

// Exponential rate, or Pareto (scale, shape).
struct TrueParams {
  double rate = 1.0;
  double scale = 1.0;
  double shape = 1.0;
};

struct ExperimentSpec {
  LearnerKind learner = LearnerKind::kBestOfBoth;
  TrueParams truth;
  LearnerConfig config;
  PrivacyBudget budget;
  std::uint64_t n = 0;  // 0: size from the calculator times safety_factor
  std::uint64_t trials = 1;
  std::uint64_t base_seed = 0;
  double safety_factor = 4.0;
  unsigned threads = 1;
  double pareto_tau = kDefaultParetoTau;
};

enum class Outcome { kSuccess, kMissedTolerance, kTypedFailure };

constexpr std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::kSuccess: return "Success";
    case Outcome::kMissedTolerance: return "MissedTolerance";
    case Outcome::kTypedFailure: return "TypedFailure";
  }
  return "Unknown";
}

struct TrialRecord {
  std::uint64_t trial_id = 0;
  Outcome outcome = Outcome::kTypedFailure;
  std::string failure;             // error name for TypedFailure
  std::vector<double> estimate;    // rate; (shape, scale); or (lambda_min, lambda_max)
  std::optional<Route> route;
  std::int64_t wall_time_us = 0;   // not serialized, so outputs stay reproducible

  friend bool operator==(const TrialRecord& a, const TrialRecord& b) {
    return a.trial_id == b.trial_id && a.outcome == b.outcome &&
           a.failure == b.failure && a.estimate == b.estimate && a.route == b.route;
  }
};

struct ExperimentSummary {
  std::uint64_t n = 0;
  std::uint64_t trials = 0;
  double success_rate = 0.0;
  std::map<std::string, std::uint64_t> failure_breakdown;
  std::map<std::string, std::uint64_t> route_histogram;
  std::optional<double> mean_estimate;
  std::optional<double> median_estimate;
  std::vector<TrialRecord> records;
};

// Scale-recovery tolerance exp(2 ln 7 (gamma / alpha_p) tau).
inline double pareto_scale_tolerance(double gamma, double shape, double tau) {
  return std::exp(2.0 * std::log(7.0) * (gamma / shape) * tau);
}

inline bool in_band(double estimate, double truth, double alpha) {
  return estimate >= (1.0 - alpha) * truth && estimate <= (1.0 + alpha) * truth;
}

inline Result<SampleSizeReport> calculator_for(const ExperimentSpec& spec) {
  SampleSizeInputs in;
  in.alpha = spec.config.alpha;
  in.beta = spec.config.beta;
  in.epsilon = spec.budget.epsilon();
  in.bound_ratio = spec.config.bounds.ratio();
  switch (spec.learner) {
    case LearnerKind::kMleLearning:
      in.lambda = spec.truth.rate;
      return required_n(TheoremId::kThm34, in);
    case LearnerKind::kQuantileLearning:
      return required_n(TheoremId::kThm310, in);
    case LearnerKind::kBestOfBoth:
      in.lambda = spec.truth.rate;
      return required_n(TheoremId::kThm311, in);
    case LearnerKind::kBoundsFinder:
      in.delta = spec.budget.delta();
      return required_n(TheoremId::kLem61, in);
    case LearnerKind::kParetoFull:
      in.lambda = spec.truth.shape;
      in.tau = spec.pareto_tau;
      return required_n(TheoremId::kParetoB6, in);
    case LearnerKind::kParetoKnownScale:
      in.lambda = spec.truth.shape;
      return required_n(TheoremId::kThm34, in);
  }
  return make_error(ErrorCode::kInvalidArgument, "unknown learner");
}

inline Result<std::uint64_t> resolve_n(const ExperimentSpec& spec) {
  if (spec.n > 0) return spec.n;
  auto report = calculator_for(spec);
  if (!report) return report.error();
  return static_cast<std::uint64_t>(
      std::ceil(spec.safety_factor * static_cast<double>(report->n_required)));
}

namespace internal {

inline TrialRecord failed(std::uint64_t id, const Error& e) {
  TrialRecord r;
  r.trial_id = id;
  r.outcome = Outcome::kTypedFailure;
  r.failure = std::string(e.name());
  return r;
}

inline TrialRecord classify_rate(std::uint64_t id, const Estimate& e, double truth,
                                 double alpha) {
  TrialRecord r;
  r.trial_id = id;
  r.estimate = {e.lambda_hat};
  r.route = e.route;
  r.outcome = in_band(e.lambda_hat, truth, alpha) ? Outcome::kSuccess
                                                  : Outcome::kMissedTolerance;
  return r;
}

}  // namespace internal

// One trial: stream (base_seed, trial_id) generates the data and then drives
// the learner's noise.
inline TrialRecord run_trial(const ExperimentSpec& spec, std::uint64_t n,
                             std::uint64_t trial_id) {
  RngStream rng(spec.base_seed, trial_id);
  BudgetLedger ledger;
  auto account = ledger.open(spec.budget);
  const auto& cfg = spec.config;

  if (is_pareto(spec.learner)) {
    auto model = ParetoModel::make(spec.truth.scale, spec.truth.shape);
    if (!model) return internal::failed(trial_id, model.error());
    auto data = sample(*model, n, rng);
    if (!data) return internal::failed(trial_id, data.error());
    Result<ParetoEstimate> est =
        spec.learner == LearnerKind::kParetoFull
            ? learn_pareto(*data, ParetoConfig{cfg, spec.pareto_tau, std::nullopt},
                           account, rng)
            : learn_pareto_known_scale(*data, spec.truth.scale, cfg, account, rng);
    if (!est) return internal::failed(trial_id, est.error());
    TrialRecord r;
    r.trial_id = trial_id;
    r.estimate = {est->shape_hat, est->scale_hat};
    r.route = est->shape_estimate.route;
    bool ok = in_band(est->shape_hat, spec.truth.shape, cfg.alpha);
    if (spec.learner == LearnerKind::kParetoFull) {
      ok = ok && est->scale_hat / spec.truth.scale <=
                     pareto_scale_tolerance(cfg.alpha, spec.truth.shape,
                                            spec.pareto_tau);
    }
    r.outcome = ok ? Outcome::kSuccess : Outcome::kMissedTolerance;
    return r;
  }

  auto model = ExpModel::make(spec.truth.rate);
  if (!model) return internal::failed(trial_id, model.error());
  auto data = sample(*model, n, rng);
  if (!data) return internal::failed(trial_id, data.error());

  switch (spec.learner) {
    case LearnerKind::kMleLearning: {
      auto e = mle_learning(*data, cfg, account, rng);
      if (!e) return internal::failed(trial_id, e.error());
      return internal::classify_rate(trial_id, *e, spec.truth.rate, cfg.alpha);
    }
    case LearnerKind::kQuantileLearning: {
      auto e = quantile_learning(*data, cfg, account, rng);
      if (!e) return internal::failed(trial_id, e.error());
      return internal::classify_rate(trial_id, *e, spec.truth.rate, cfg.alpha);
    }
    case LearnerKind::kBestOfBoth: {
      auto e = best_of_both(*data, cfg, account, rng);
      if (!e) return internal::failed(trial_id, e.error());
      return internal::classify_rate(trial_id, *e, spec.truth.rate, cfg.alpha);
    }
    case LearnerKind::kBoundsFinder: {
      auto b = find_bounds(*data, account, rng, cfg.noiseless);
      if (!b) return internal::failed(trial_id, b.error());
      TrialRecord r;
      r.trial_id = trial_id;
      r.estimate = {b->lambda_min(), b->lambda_max()};
      const bool covered =
          b->lambda_min() < spec.truth.rate && spec.truth.rate < b->lambda_max();
      r.outcome = covered ? Outcome::kSuccess : Outcome::kMissedTolerance;
      return r;
    }
    default:
      break;
  }
  return internal::failed(trial_id, make_error(ErrorCode::kInvalidArgument, "learner"));
}

inline Result<ExperimentSummary> run_experiment(const ExperimentSpec& spec) {
  if (spec.trials == 0) {
    return make_error(ErrorCode::kInvalidArgument, "trials must be >= 1");
  }
  if (auto v = validate(spec.config); !v) return v.error();
  auto n = resolve_n(spec);
  if (!n) return n.error();

  ExperimentSummary summary;
  summary.n = *n;
  summary.trials = spec.trials;
  summary.records.resize(spec.trials);

  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t i = next++; i < spec.trials; i = next++) {
      const auto start = std::chrono::steady_clock::now();
      TrialRecord r = run_trial(spec, *n, i);
      r.wall_time_us = std::chrono::duration_cast<std::chrono::microseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
      summary.records[i] = std::move(r);
    }
  };
  const unsigned threads = std::max(1u, spec.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::uint64_t successes = 0;
  std::vector<double> primary;
  for (const auto& r : summary.records) {
    if (r.outcome == Outcome::kSuccess) ++successes;
    if (r.outcome == Outcome::kTypedFailure) ++summary.failure_breakdown[r.failure];
    if (r.outcome == Outcome::kMissedTolerance) {
      ++summary.failure_breakdown["MissedTolerance"];
    }
    if (r.route) ++summary.route_histogram[std::string(route_name(*r.route))];
    if (!r.estimate.empty()) primary.push_back(r.estimate.front());
  }
  summary.success_rate =
      static_cast<double>(successes) / static_cast<double>(spec.trials);
  if (!primary.empty()) {
    double total = 0.0;
    for (double v : primary) total += v;
    summary.mean_estimate = total / static_cast<double>(primary.size());
    std::sort(primary.begin(), primary.end());
    const std::size_t mid = primary.size() / 2;
    summary.median_estimate = primary.size() % 2 == 1
                                  ? primary[mid]
                                  : 0.5 * (primary[mid - 1] + primary[mid]);
  }
  return summary;
}

struct SweepRow {
  std::uint64_t n;
  double success_rate;
  std::uint64_t trials;
  std::uint64_t seed;
};

inline Result<std::vector<SweepRow>> sweep(const ExperimentSpec& templ,
                                           const std::vector<std::uint64_t>& n_values) {
  if (n_values.empty()) {
    return make_error(ErrorCode::kInvalidArgument, "n_values must be nonempty");
  }
  if (!std::is_sorted(n_values.begin(), n_values.end()) || n_values.front() == 0) {
    return make_error(ErrorCode::kInvalidArgument,
                      "n_values must be positive and ascending");
  }
  std::vector<SweepRow> rows;
  for (auto n : n_values) {
    ExperimentSpec spec = templ;
    spec.n = n;
    auto summary = run_experiment(spec);
    if (!summary) return summary.error();
    rows.push_back(SweepRow{n, summary->success_rate, spec.trials, spec.base_seed});
  }
  return rows;
}

// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "n,success_rate,trials,seed\n";
  for (const auto& r : rows) {
    out += std::to_string(r.n) + "," + format_double(r.success_rate) + "," +
           std::to_string(r.trials) + "," + std::to_string(r.seed) + "\n";
  }
  return out;
}

inline std::string records_csv(const std::vector<TrialRecord>& records) {
  std::string out = "trial_id,outcome,failure,route,estimate\n";
  for (const auto& r : records) {
    out += std::to_string(r.trial_id) + "," + std::string(outcome_name(r.outcome)) +
           "," + r.failure + "," +
           (r.route ? std::string(route_name(*r.route)) : std::string()) + ",";
    for (std::size_t i = 0; i < r.estimate.size(); ++i) {
      if (i) out += ";";
      out += format_double(r.estimate[i]);
    }
    out += "\n";
  }
  return out;
}

// Newline-delimited decimal floats; lines starting with '#' and blank lines
// are skipped.
inline Result<std::vector<double>> parse_values(std::istream& in) {
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t");
    const char* begin = line.data() + first;
    const char* end = line.data() + last + 1;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end) {
      return make_error(ErrorCode::kInputError,
                        "line " + std::to_string(line_no) + ": not a number");
    }
    if (!std::isfinite(v)) {
      return make_error(ErrorCode::kInputError,
                        "line " + std::to_string(line_no) + ": not finite");
    }
    values.push_back(v);
  }
  if (values.empty()) {
    return make_error(ErrorCode::kInputError, "no values in input");
  }
  return values;
}

inline Result<std::vector<double>> read_values_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return make_error(ErrorCode::kInputError, "cannot open " + path);
  return parse_values(in);
}

}  // namespace dpexp
