#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "caps/error.hpp"
#include "caps/rng.hpp"
#include "caps/types.hpp"

namespace caps {

/// One branch of a transition distribution.
struct Outcome {
  StateId next;
  double prob = 0.0;
  double reward = 0.0;
};

/// Result of sampling one environment step.
struct Step {
  StateId next;
  double reward = 0.0;
};

/// A finite MDP that can be both sampled (for learners) and enumerated
/// exactly (for the value-iteration oracle).
template <class M>
concept TabularMdp = requires(const M& m, StateId s, ActionId a, Rng& rng) {
  { m.num_states() } -> std::convertible_to<std::size_t>;
  { m.num_actions() } -> std::convertible_to<std::size_t>;
  { m.is_terminal(s) } -> std::convertible_to<bool>;
  { m.initial_distribution() } -> std::convertible_to<std::span<const double>>;
  { m.sample_step(s, a, rng) } -> std::same_as<Step>;
  { m.outcomes(s, a) } -> std::convertible_to<std::vector<Outcome>>;
  { m.reward_bound() } -> std::convertible_to<double>;
};

template <TabularMdp M>
StateId sample_initial_state(const M& m, Rng& rng) {
  return StateId{rng.categorical(m.initial_distribution())};
}

/// Exact probability P(next | s, a), summed over outcome branches.
template <TabularMdp M>
double transition_probability(const M& m, StateId s, ActionId a, StateId next) {
  double p = 0.0;
  for (const Outcome& o : m.outcomes(s, a))
    if (o.next == next) p += o.prob;
  return p;
}

inline void check_probability_vector(std::span<const double> probs, const std::string& what) {
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError(what + ": negative or non-finite probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError(what + ": probabilities sum to " + std::to_string(total));
}

/// MDP given by explicit outcome lists, used for small hand-built and random
/// test problems.
class ExplicitMdp {
 public:
  ExplicitMdp(std::size_t num_states, std::size_t num_actions)
      : num_states_(num_states),
        num_actions_(num_actions),
        table_(num_states * num_actions),
        terminal_(num_states, false),
        initial_(num_states, num_states ? 1.0 / static_cast<double>(num_states) : 0.0) {
    if (num_states == 0 || num_actions == 0) throw ConfigError("ExplicitMdp: empty state or action space");
  }

  void add_outcome(StateId s, ActionId a, StateId next, double prob, double reward) {
    check_indices(s, a);
    if (next.index >= num_states_) throw UsageError("ExplicitMdp: next state out of range");
    table_[slot(s, a)].push_back({next, prob, reward});
  }

  void set_terminal(StateId s, bool terminal = true) {
    check_indices(s, ActionId{0});
    terminal_[s.index] = terminal;
  }

  void set_initial_distribution(std::vector<double> probs) {
    if (probs.size() != num_states_) throw ConfigError("ExplicitMdp: initial distribution has wrong size");
    check_probability_vector(probs, "ExplicitMdp initial distribution");
    initial_ = std::move(probs);
  }

  /// Checks every non-terminal (s, a) row is a probability vector.
  void validate() const {
    for (std::size_t s = 0; s < num_states_; ++s) {
      if (terminal_[s]) continue;
      for (std::size_t a = 0; a < num_actions_; ++a) {
        std::vector<double> probs;
        for (const Outcome& o : table_[s * num_actions_ + a]) probs.push_back(o.prob);
        check_probability_vector(probs, "ExplicitMdp row (" + std::to_string(s) + "," + std::to_string(a) + ")");
      }
    }
  }

  std::size_t num_states() const { return num_states_; }
  std::size_t num_actions() const { return num_actions_; }
  bool is_terminal(StateId s) const { return terminal_.at(s.index); }
  std::span<const double> initial_distribution() const { return initial_; }

  const std::vector<Outcome>& outcomes(StateId s, ActionId a) const {
    check_indices(s, a);
    return table_[slot(s, a)];
  }

  Step sample_step(StateId s, ActionId a, Rng& rng) const {
    if (is_terminal(s)) throw UsageError("ExplicitMdp: step from terminal state " + std::to_string(s.index));
    const auto& row = outcomes(s, a);
    if (row.empty()) throw UsageError("ExplicitMdp: no outcomes for state-action pair");
    if (row.size() == 1) return {row.front().next, row.front().reward};
    std::vector<double> probs;
    probs.reserve(row.size());
    for (const Outcome& o : row) probs.push_back(o.prob);
    const Outcome& o = row[rng.categorical(probs)];
    return {o.next, o.reward};
  }

  double reward_bound() const {
    double bound = 0.0;
    for (const auto& row : table_)
      for (const Outcome& o : row) bound = std::max(bound, std::abs(o.reward));
    return bound;
  }

 private:
  std::size_t slot(StateId s, ActionId a) const { return s.index * num_actions_ + a.index; }

  void check_indices(StateId s, ActionId a) const {
    if (s.index >= num_states_ || a.index >= num_actions_) throw UsageError("ExplicitMdp: index out of range");
  }

  std::size_t num_states_;
  std::size_t num_actions_;
  std::vector<std::vector<Outcome>> table_;
  std::vector<bool> terminal_;
  std::vector<double> initial_;
};

static_assert(TabularMdp<ExplicitMdp>);

}  // namespace caps
