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
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dpexp/dataset.hpp"
#include "dpexp/result.hpp"

namespace dpexp {

// (epsilon, delta) pair. delta == 0 is pure DP.
class PrivacyBudget {
 public:
  static Result<PrivacyBudget> make(double epsilon, double delta = 0.0) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      return make_error(ErrorCode::kInvalidArgument,
                        "epsilon must be positive and finite");
    }
    if (!(delta >= 0.0 && delta < 1.0)) {
      return make_error(ErrorCode::kInvalidArgument, "delta must lie in [0, 1)");
    }
    return PrivacyBudget(epsilon, delta);
  }

  double epsilon() const { return epsilon_; }
  double delta() const { return delta_; }
  bool pure() const { return delta_ == 0.0; }

  friend bool operator==(const PrivacyBudget&, const PrivacyBudget&) = default;

 private:
  PrivacyBudget(double epsilon, double delta)
      : epsilon_(epsilon), delta_(delta) {}

  friend Result<std::vector<PrivacyBudget>> split_budget(
      const PrivacyBudget&, std::span<const double>, std::span<const double>);
  friend class BudgetLedger;

  double epsilon_;
  double delta_;
};

// Laplace scale b = sensitivity / epsilon.
struct NoiseScale {
  double b;

  static NoiseScale for_query(double sensitivity, double epsilon) {
    return NoiseScale{sensitivity / epsilon};
  }
  // Scale for a 1/n counting query.
  static NoiseScale for_fraction(double n, double epsilon) {
    return NoiseScale{1.0 / (epsilon * n)};
  }
};

// Reproducible random stream keyed by (seed, stream_id). Copying a stream
// replays the same draws from the copy point.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  static std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

namespace internal {

// Inverse CDF on u in (-1/2, 1/2): z = -b sign(u) ln(1 - 2|u|).
inline double laplace_from_uniform(double u, double b) {
  const double magnitude = -b * std::log1p(-2.0 * std::fabs(u));
  return u < 0.0 ? -magnitude : magnitude;
}

inline bool valid_scale(double b) { return std::isfinite(b) && b > 0.0; }

}  // namespace internal

inline Result<double> sample_laplace(NoiseScale scale, RngStream& rng,
                                     bool noiseless = false) {
  if (noiseless) return 0.0;
  if (!internal::valid_scale(scale.b)) {
    return make_error(ErrorCode::kInvalidScale,
                      "Laplace scale must be positive and finite");
  }
  return internal::laplace_from_uniform(rng.uniform_open() - 0.5, scale.b);
}

// Noise source threaded through every mechanism. Counts logical draws even in
// noiseless mode so tests can check how many queries a mechanism answered.
class NoiseSource {
 public:
  NoiseSource(RngStream& rng, bool noiseless) : rng_(&rng), noiseless_(noiseless) {}

  bool noiseless() const { return noiseless_; }
  std::size_t draws() const { return draws_; }
  RngStream& rng() { return *rng_; }

  Result<double> laplace(NoiseScale scale) {
    ++draws_;
    return sample_laplace(scale, *rng_, noiseless_);
  }

 private:
  RngStream* rng_;
  bool noiseless_;
  std::size_t draws_ = 0;
};

// (#{x in data : x < threshold}) / n + Lap(scale). Not clamped to [0, 1].
inline Result<double> noisy_fraction_below(const Dataset& data, double threshold,
                                           NoiseScale scale, NoiseSource& noise) {
  if (data.size() == 0) {
    return make_error(ErrorCode::kEmptyDataset, "counting query on empty data");
  }
  auto z = noise.laplace(scale);
  if (!z) return z.error();
  return data.fraction_below(threshold) + *z;
}

inline Result<double> noisy_fraction_below(const Dataset& data, double threshold,
                                           NoiseScale scale, RngStream& rng,
                                           bool noiseless) {
  NoiseSource noise(rng, noiseless);
  return noisy_fraction_below(data, threshold, scale, noise);
}

namespace internal {

inline bool fractions_sum_to_one(std::span<const double> fractions) {
  double total = 0.0;
  for (double f : fractions) total += f;
  return std::fabs(total - 1.0) <= std::numeric_limits<double>::epsilon();
}

}  // namespace internal

// Pure split with separate epsilon and delta fractions. Epsilon fractions must
// be positive; delta fractions may be zero (a pure-DP child). Each list sums
// to one within one ulp of 1.0.
inline Result<std::vector<PrivacyBudget>> split_budget(
    const PrivacyBudget& parent, std::span<const double> eps_fractions,
    std::span<const double> delta_fractions) {
  if (eps_fractions.empty() || eps_fractions.size() != delta_fractions.size()) {
    return make_error(ErrorCode::kBadSplit, "fraction lists must be nonempty and aligned");
  }
  for (std::size_t i = 0; i < eps_fractions.size(); ++i) {
    if (!(eps_fractions[i] > 0.0) || !std::isfinite(eps_fractions[i]) ||
        !(delta_fractions[i] >= 0.0) || !std::isfinite(delta_fractions[i])) {
      return make_error(ErrorCode::kBadSplit, "fractions must be positive");
    }
  }
  if (!internal::fractions_sum_to_one(eps_fractions) ||
      (parent.delta_ > 0.0 && !internal::fractions_sum_to_one(delta_fractions))) {
    return make_error(ErrorCode::kBadSplit, "fractions must sum to 1");
  }
  std::vector<PrivacyBudget> children;
  children.reserve(eps_fractions.size());
  for (std::size_t i = 0; i < eps_fractions.size(); ++i) {
    children.push_back(PrivacyBudget(eps_fractions[i] * parent.epsilon_,
                                     delta_fractions[i] * parent.delta_));
  }
  return children;
}

// Proportional split: each child gets the same fraction of epsilon and delta.
inline Result<std::vector<PrivacyBudget>> split_budget(
    const PrivacyBudget& parent, std::span<const double> fractions) {
  return split_budget(parent, fractions, fractions);
}

class PrivacyAccount;

// Audit trail for one learner invocation. Every budget node is consume-once:
// it is either split into children or spent by exactly one mechanism.
class BudgetLedger {
 public:
  enum class NodeState { kAvailable, kSplit, kSpent };

  struct Node {
    PrivacyBudget budget;
    std::optional<std::size_t> parent;
    NodeState state;
    std::vector<double> fractions;  // epsilon fractions, set when split
  };

  struct Spend {
    std::size_t node;
    std::string mechanism;
    PrivacyBudget budget;
  };

  PrivacyAccount open(const PrivacyBudget& root);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Spend>& spends() const { return spends_; }

  // Budget spent at or below `node`. A fully consumed subtree reports the
  // node's own budget, so rounding in the split fractions does not accumulate.
  PrivacyBudget spent_under(std::size_t node) const {
    if (consumed(node)) return nodes_[node].budget;
    double eps = 0.0;
    double delta = 0.0;
    if (nodes_[node].state == NodeState::kSplit) {
      for (std::size_t child : children_of(node)) {
        const auto part = spent_under(child);
        eps += part.epsilon();
        delta += part.delta();
      }
    }
    return PrivacyBudget(eps, delta);
  }

  PrivacyBudget total_spent() const {
    double eps = 0.0;
    double delta = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].parent) continue;
      const auto part = spent_under(i);
      eps += part.epsilon();
      delta += part.delta();
    }
    return PrivacyBudget(eps, delta);
  }

  // Split fractions recorded at a node, in child order.
  const std::vector<double>& split_fractions(std::size_t node) const {
    return nodes_.at(node).fractions;
  }

  std::vector<std::size_t> children_of(std::size_t node) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].parent == node) out.push_back(i);
    }
    return out;
  }

 private:
  friend class PrivacyAccount;

  bool consumed(std::size_t node) const {
    const auto state = nodes_[node].state;
    if (state != NodeState::kSplit) return state == NodeState::kSpent;
    for (std::size_t child : children_of(node)) {
      if (!consumed(child)) return false;
    }
    return true;
  }

  std::size_t add_node(PrivacyBudget budget, std::optional<std::size_t> parent) {
    nodes_.push_back(Node{budget, parent, NodeState::kAvailable, {}});
    return nodes_.size() - 1;
  }

  std::vector<Node> nodes_;
  std::vector<Spend> spends_;
};

// Handle to one node of a BudgetLedger. The ledger must outlive the handle.
class PrivacyAccount {
 public:
  const PrivacyBudget& budget() const { return ledger_->nodes_[node_].budget; }
  std::size_t node() const { return node_; }
  BudgetLedger& ledger() const { return *ledger_; }

  Result<std::vector<PrivacyAccount>> split(std::span<const double> eps_fractions,
                                             std::span<const double> delta_fractions) {
    auto& self = ledger_->nodes_[node_];
    if (self.state != BudgetLedger::NodeState::kAvailable) {
      return make_error(ErrorCode::kBudgetExhausted,
                        "budget was already split or spent");
    }
    auto parts = split_budget(self.budget, eps_fractions, delta_fractions);
    if (!parts) return parts.error();
    self.state = BudgetLedger::NodeState::kSplit;
    self.fractions.assign(eps_fractions.begin(), eps_fractions.end());
    std::vector<PrivacyAccount> children;
    for (const auto& part : *parts) {
      children.push_back(PrivacyAccount(ledger_, ledger_->add_node(part, node_)));
    }
    return children;
  }

  Result<std::vector<PrivacyAccount>> split(std::span<const double> fractions) {
    return split(fractions, fractions);
  }

  Result<std::vector<PrivacyAccount>> split(std::initializer_list<double> fractions) {
    return split(std::span<const double>(fractions.begin(), fractions.size()));
  }

  // Consumes the whole node for one mechanism.
  Result<PrivacyBudget> spend(std::string_view mechanism) {
    auto& self = ledger_->nodes_[node_];
    if (self.state != BudgetLedger::NodeState::kAvailable) {
      return make_error(ErrorCode::kBudgetExhausted,
                        "budget was already split or spent");
    }
    self.state = BudgetLedger::NodeState::kSpent;
    ledger_->spends_.push_back(
        BudgetLedger::Spend{node_, std::string(mechanism), self.budget});
    return self.budget;
  }

  PrivacyBudget spent() const { return ledger_->spent_under(node_); }

 private:
  friend class BudgetLedger;
  PrivacyAccount(BudgetLedger* ledger, std::size_t node)
      : ledger_(ledger), node_(node) {}

  BudgetLedger* ledger_;
  std::size_t node_;
};

inline PrivacyAccount BudgetLedger::open(const PrivacyBudget& root) {
  return PrivacyAccount(this, add_node(root, std::nullopt));
}

}  // namespace dpexp
