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

// dpexp command-line harness: data generation, single estimates, Monte Carlo
// experiments, sample-size sweeps and the closed-form calculators.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "dpexp/analysis.hpp"
#include "dpexp/bounds_finder.hpp"
#include "dpexp/distributions.hpp"
#include "dpexp/exp_learners.hpp"
#include "dpexp/harness.hpp"
#include "dpexp/pareto_learner.hpp"
#include "json.hpp"

namespace {

using Json = nlohmann::ordered_json;
using namespace dpexp;

struct Options {
  double alpha = 0.2;
  double beta = 0.1;
  double epsilon = 1.0;
  double delta = 0.0;
  double lambda_min = 0.01;
  double lambda_max = 100.0;
  std::uint64_t n = 0;
  std::vector<std::uint64_t> n_values;
  std::uint64_t trials = 200;
  std::uint64_t seed = 0;
  std::string learner = "BestOfBoth";
  bool noiseless = false;
  double safety_factor = 4.0;
  std::string out;
  unsigned threads = 1;
  std::string format = "json";

  // truth / generation
  std::string dist = "exp";
  double lambda = 1.0;
  double scale = 1.0;
  double shape = 1.0;
  double tau = kDefaultParetoTau;

  // estimate
  std::string file;
  std::optional<double> clip;
  std::optional<double> known_scale;

  // calc
  std::string theorem;
  std::optional<double> clip_range;
};

class Failure : public std::runtime_error {
 public:
  explicit Failure(const Error& e)
      : std::runtime_error(std::string(e.name()) + ": " + e.message) {}
};

template <typename T>
T unwrap(Result<T> r) {
  if (!r) throw Failure(r.error());
  return std::move(r.value());
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw Failure(make_error(ErrorCode::kInputError, "cannot write " + o.out));
  f << text;
}

Json budget_json(const PrivacyBudget& b) {
  return Json{{"epsilon", b.epsilon()}, {"delta", b.delta()}};
}

LearnerKind learner_kind(const Options& o) {
  auto k = parse_learner(o.learner);
  if (!k) {
    throw Failure(make_error(ErrorCode::kInvalidArgument, "unknown learner " + o.learner));
  }
  return *k;
}

LearnerConfig learner_config(const Options& o) {
  return LearnerConfig{o.alpha, o.beta, unwrap(RateBounds::make(o.lambda_min, o.lambda_max)),
                       o.noiseless};
}

int run_gen(const Options& o) {
  if (o.n == 0) throw Failure(make_error(ErrorCode::kEmptyRequest, "--n must be >= 1"));
  RngStream rng(o.seed, 0);
  Dataset data = o.dist == "pareto"
                     ? unwrap(sample(unwrap(ParetoModel::make(o.scale, o.shape)), o.n, rng))
                     : unwrap(sample(unwrap(ExpModel::make(o.lambda)), o.n, rng));
  std::string text = "# seed=" + std::to_string(o.seed) + "\n";
  text += o.dist == "pareto" ? "# dist=pareto scale=" + format_double(o.scale) +
                                   " shape=" + format_double(o.shape) + "\n"
                             : "# dist=exp lambda=" + format_double(o.lambda) + "\n";
  for (double x : data.values()) text += format_double(x) + "\n";
  emit(o, text);
  return 0;
}

int run_estimate(const Options& o) {
  auto values = unwrap(read_values_file(o.file));
  const auto kind = learner_kind(o);
  if (is_pareto(kind)) {
    for (double v : values) {
      if (!(v > 0.0)) {
        throw Failure(make_error(ErrorCode::kInputError, "Pareto data must be positive"));
      }
    }
  }
  const Dataset data = unwrap(Dataset::make(std::move(values)));
  const auto budget = unwrap(PrivacyBudget::make(o.epsilon, o.delta));
  BudgetLedger ledger;
  auto account = ledger.open(budget);
  RngStream rng(o.seed, 0);
  Json out;

  if (o.clip) {
    // Debug mode: the clipped private mean alone, with a caller-fixed range.
    const double lambda = unwrap(private_mle(data, *o.clip, account, rng, o.noiseless));
    out["estimate"] = lambda;
    out["route"] = route_name(Route::kMle);
  } else {
    const auto cfg = learner_config(o);
    switch (kind) {
      case LearnerKind::kMleLearning:
      case LearnerKind::kQuantileLearning:
      case LearnerKind::kBestOfBoth: {
        auto e = kind == LearnerKind::kMleLearning ? mle_learning(data, cfg, account, rng)
                 : kind == LearnerKind::kQuantileLearning
                     ? quantile_learning(data, cfg, account, rng)
                     : best_of_both(data, cfg, account, rng);
        const auto est = unwrap(std::move(e));
        out["estimate"] = est.lambda_hat;
        out["route"] = route_name(est.route);
        if (est.coarse_estimate) out["coarse_estimate"] = *est.coarse_estimate;
        break;
      }
      case LearnerKind::kBoundsFinder: {
        if (budget.pure()) {
          throw Failure(
              make_error(ErrorCode::kInvalidArgument, "BoundsFinder needs --delta > 0"));
        }
        const auto est =
            unwrap(learn_without_bounds(data, o.alpha, o.beta, account, rng, o.noiseless));
        out["estimate"] = est.lambda_hat;
        out["route"] = route_name(est.route);
        break;
      }
      case LearnerKind::kParetoFull:
      case LearnerKind::kParetoKnownScale: {
        const auto est =
            kind == LearnerKind::kParetoFull
                ? unwrap(learn_pareto(data, ParetoConfig{cfg, o.tau, std::nullopt},
                                      account, rng))
                : unwrap(learn_pareto_known_scale(data, o.known_scale.value_or(data.min()),
                                                  cfg, account, rng));
        out["estimate"] = Json{{"shape", est.shape_hat}, {"scale", est.scale_hat}};
        out["route"] = route_name(est.shape_estimate.route);
        out["tail_count"] = est.tail_count;
        break;
      }
    }
  }
  out["budget_spent"] = budget_json(ledger.total_spent());
  out["n"] = data.size();
  emit(o, out.dump(2) + "\n");
  return 0;
}

ExperimentSpec experiment_spec(const Options& o) {
  return ExperimentSpec{.learner = learner_kind(o),
                        .truth = TrueParams{.rate = o.lambda, .scale = o.scale,
                                            .shape = o.shape},
                        .config = learner_config(o),
                        .budget = unwrap(PrivacyBudget::make(o.epsilon, o.delta)),
                        .n = o.n,
                        .trials = o.trials,
                        .base_seed = o.seed,
                        .safety_factor = o.safety_factor,
                        .threads = o.threads,
                        .pareto_tau = o.tau};
}

Json counts_json(const std::map<std::string, std::uint64_t>& m) {
  Json j = Json::object();
  for (const auto& [k, v] : m) j[k] = v;
  return j;
}

int run_experiment_cmd(const Options& o) {
  const auto spec = experiment_spec(o);
  const auto summary = unwrap(run_experiment(spec));
  if (o.format == "csv") {
    emit(o, records_csv(summary.records));
    return 0;
  }
  Json out;
  out["learner"] = learner_name(spec.learner);
  out["n"] = summary.n;
  out["trials"] = summary.trials;
  out["seed"] = spec.base_seed;
  out["success_rate"] = summary.success_rate;
  out["failure_breakdown"] = counts_json(summary.failure_breakdown);
  out["route_histogram"] = counts_json(summary.route_histogram);
  out["mean_estimate"] = summary.mean_estimate ? Json(*summary.mean_estimate) : Json();
  out["median_estimate"] = summary.median_estimate ? Json(*summary.median_estimate) : Json();
  emit(o, out.dump(2) + "\n");
  return 0;
}

int run_sweep(const Options& o) {
  auto spec = experiment_spec(o);
  std::vector<std::uint64_t> ns = o.n_values;
  if (ns.empty()) {
    // Doubling ladder around the calculator's value.
    const auto base = unwrap(calculator_for(spec)).n_required;
    for (int i = -2; i <= 3; ++i) ns.push_back(i < 0 ? std::max<std::uint64_t>(1, base >> -i)
                                                     : base << i);
  }
  emit(o, sweep_csv(unwrap(sweep(spec, ns))));
  return 0;
}

int run_calc(const Options& o, const CLI::App& cmd) {
  auto id = parse_theorem(o.theorem);
  if (!id) {
    throw Failure(make_error(ErrorCode::kInvalidArgument, "unknown theorem " + o.theorem));
  }
  auto given = [&](const char* flag) { return cmd.count(flag) > 0; };
  SampleSizeInputs in;
  if (given("--alpha")) in.alpha = o.alpha;
  if (given("--beta")) in.beta = o.beta;
  if (given("--epsilon")) in.epsilon = o.epsilon;
  if (given("--delta")) in.delta = o.delta;
  if (given("--lambda")) in.lambda = o.lambda;
  if (given("--lambda-min") || given("--lambda-max")) {
    in.bound_ratio = unwrap(RateBounds::make(o.lambda_min, o.lambda_max)).ratio();
  }
  if (o.clip_range) in.clip_range = *o.clip_range;
  if (given("--tau")) in.tau = o.tau;
  const auto report = unwrap(required_n(*id, in));
  Json out;
  out["theorem"] = theorem_name(report.theorem_id);
  out["n_required"] = report.n_required;
  out["value"] = report.value;
  out["up_to_constants"] = report.up_to_constants;
  emit(o, out.dump(2) + "\n");
  return 0;
}

int run_lowerbound(const Options& o) {
  const auto bounds = unwrap(RateBounds::make(o.lambda_min, o.lambda_max));
  const auto lower = unwrap(lower_bound_n(o.alpha, o.beta, o.epsilon, bounds));
  SampleSizeInputs in;
  in.alpha = o.alpha;
  in.beta = o.beta;
  in.epsilon = o.epsilon;
  in.bound_ratio = bounds.ratio();
  const auto upper = unwrap(required_n(TheoremId::kThm310, in));
  Json out;
  out["lower_bound_n"] = lower;
  out["quantile_upper_n"] = upper.n_required;
  out["ratio"] = static_cast<double>(upper.n_required) / static_cast<double>(lower);
  emit(o, out.dump(2) + "\n");
  return 0;
}

int run_packing(const Options& o) {
  const auto family =
      unwrap(build_packing(unwrap(RateBounds::make(o.lambda_min, o.lambda_max)), o.alpha));
  std::string text = "index,rate,tv_to_next\n";
  for (std::size_t i = 0; i < family.rates.size(); ++i) {
    text += std::to_string(i) + "," + format_double(family.rates[i]) + ",";
    if (i + 1 < family.rates.size()) {
      text += format_double(*exp_tv(family.rates[i + 1], family.rates[i]));
    }
    text += "\n";
  }
  emit(o, text);
  return 0;
}

void add_privacy_flags(CLI::App* c, Options& o) {
  c->add_option("--alpha", o.alpha, "target multiplicative error (gamma for Pareto)");
  c->add_option("--beta", o.beta, "failure probability");
  c->add_option("--epsilon", o.epsilon, "privacy budget epsilon");
  c->add_option("--delta", o.delta, "privacy budget delta");
  c->add_option("--lambda-min", o.lambda_min, "lower rate bound");
  c->add_option("--lambda-max", o.lambda_max, "upper rate bound");
}

void add_run_flags(CLI::App* c, Options& o) {
  add_privacy_flags(c, o);
  c->add_option("--learner", o.learner,
                "MleLearning|QuantileLearning|BestOfBoth|BoundsFinder|ParetoFull|"
                "ParetoKnownScale");
  c->add_option("--seed", o.seed, "base seed");
  c->add_flag("--noiseless", o.noiseless, "zero all privacy noise");
  c->add_option("--tau", o.tau, "Pareto tail quantile");
}

void add_truth_flags(CLI::App* c, Options& o) {
  c->add_option("--lambda", o.lambda, "true exponential rate");
  c->add_option("--scale", o.scale, "true Pareto scale x_m");
  c->add_option("--shape", o.shape, "true Pareto shape");
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Differentially private exponential and Pareto learners"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "sample a data file");
  gen->add_option("--dist", o.dist, "exp|pareto")->check(CLI::IsMember({"exp", "pareto"}));
  add_truth_flags(gen, o);
  gen->add_option("--n", o.n, "number of values")->required();
  gen->add_option("--seed", o.seed, "generator seed");
  gen->add_option("--out", o.out, "output path (default stdout)");

  auto* est = app.add_subcommand("estimate", "run one learner on a data file");
  est->add_option("--file", o.file, "newline-delimited values")->required();
  add_run_flags(est, o);
  est->add_option("--clip", o.clip, "debug: clipped private mean with this fixed range");
  est->add_option("--scale", o.known_scale, "known Pareto scale (ParetoKnownScale)");
  est->add_option("--out", o.out, "output path (default stdout)");

  auto* exp = app.add_subcommand("experiment", "Monte Carlo success rate");
  auto* swp = app.add_subcommand("sweep", "success rate across sample sizes");
  for (auto* c : {exp, swp}) {
    add_run_flags(c, o);
    add_truth_flags(c, o);
    c->add_option("--trials", o.trials, "trials per sample size");
    c->add_option("--safety-factor", o.safety_factor, "multiplier on the calculator's n");
    c->add_option("--threads", o.threads, "worker threads");
    c->add_option("--out", o.out, "output path (default stdout)");
  }
  exp->add_option("--n", o.n, "sample size (0: calculator x safety factor)");
  exp->add_option("--format", o.format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
  swp->add_option("--n", o.n_values, "sample sizes, ascending")->delimiter(',');

  auto* calc = app.add_subcommand("calc", "sample-size calculator for one theorem");
  calc->add_option("--theorem", o.theorem,
                   "Lem32|Lem36|Thm34|Lem39|Thm310|Thm311|Lem61|Thm62|LowerBound52|ParetoB6")
      ->required();
  add_privacy_flags(calc, o);
  calc->add_option("--lambda", o.lambda, "true rate (or Pareto shape)");
  calc->add_option("--clip", o.clip_range, "clipping range R");
  calc->add_option("--tau", o.tau, "Pareto tail quantile");
  calc->add_option("--out", o.out, "output path (default stdout)");

  auto* lower = app.add_subcommand("lowerbound", "packing lower bound vs quantile upper bound");
  add_privacy_flags(lower, o);
  lower->add_option("--out", o.out, "output path (default stdout)");

  auto* packing = app.add_subcommand("packing", "geometric packing family");
  packing->add_option("--alpha", o.alpha, "separation");
  packing->add_option("--lambda-min", o.lambda_min, "first rate");
  packing->add_option("--lambda-max", o.lambda_max, "rate cap");
  packing->add_option("--out", o.out, "output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return run_gen(o);
    if (*est) return run_estimate(o);
    if (*exp) return run_experiment_cmd(o);
    if (*swp) return run_sweep(o);
    if (*calc) return run_calc(o, *calc);
    if (*lower) return run_lowerbound(o);
    if (*packing) return run_packing(o);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.what() << "\n";
    return 1;
  }
  return 1;
}
