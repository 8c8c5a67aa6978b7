#pragma once

#include <chrono>
#include <cstddef>
#include <vector>

#include "caps/learner.hpp"
#include "caps/mdp.hpp"
#include "caps/metrics.hpp"
#include "caps/value_table.hpp"

namespace caps {

struct QLearnerState {
  QTable q;
  std::size_t episode_count = 0;
  Rng rng;
};

inline QLearnerState make_q_learner_state(std::size_t num_states, std::size_t num_actions, const LearnerConfig& cfg) {
  cfg.validate();
  return {QTable(num_states, num_actions, cfg.q_init), 0, Rng(cfg.seed)};
}

/// One epsilon-greedy Q-learning episode. Random draws happen in the same
/// order as a CAPS episode whose options all terminate with probability one.
template <TabularMdp M>
EpisodeResult q_learning_episode(QLearnerState& st, const M& env, const LearnerConfig& cfg) {
  if (cfg.horizon <= 0) throw ConfigError("horizon must be positive");
  if (env.num_states() != st.q.num_states() || env.num_actions() != st.q.num_columns())
    throw UsageError("Q-table and environment disagree on state or action count");
  const double eps = cfg.epsilon(st.episode_count + 1);

  EpisodeResult res;
  StateId s = sample_initial_state(env, st.rng);
  ActionId a{0};
  if (!env.is_terminal(s)) a = epsilon_greedy_select(st.q, s, eps, st.rng);
  double discount = 1.0;
  for (int t = 0; t < cfg.horizon && !env.is_terminal(s); ++t) {
    const Step step = env.sample_step(s, a, st.rng);
    const bool terminal = env.is_terminal(step.next);
    const double target = step.reward + cfg.gamma * (terminal ? 0.0 : st.q.max(step.next));
    double& cell = st.q(s, a);
    cell = (1.0 - cfg.alpha_q) * cell + cfg.alpha_q * target;
    res.discounted_return += discount * step.reward;
    discount *= cfg.gamma;
    res.trajectory.push_back({s, OptionId{a.index}, a, step.reward, step.next, true});
    s = step.next;
    ++res.steps;
    if (!terminal) a = epsilon_greedy_select(st.q, s, eps, st.rng);
  }
  res.reached_terminal = env.is_terminal(s);
  ++st.episode_count;
  return res;
}

struct QLearningResult {
  QLearnerState state;
  RunMetrics metrics;
};

template <TabularMdp M>
QLearningResult q_learning_train(const M& env, const LearnerConfig& cfg, std::size_t num_episodes) {
  if (num_episodes == 0) throw ConfigError("number of episodes must be at least 1");
  QLearningResult out{make_q_learner_state(env.num_states(), env.num_actions(), cfg), {}};
  const auto start = std::chrono::steady_clock::now();
  out.metrics.seed = cfg.seed;
  for (std::size_t i = 0; i < num_episodes; ++i) {
    const EpisodeResult ep = q_learning_episode(out.state, env, cfg);
    out.metrics.returns.push_back(ep.discounted_return);
    out.metrics.steps.push_back(ep.steps);
  }
  out.metrics.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

/// Greedy action per state, ties to the lowest action index.
inline DeterministicPolicy greedy_policy(const QTable& q) {
  std::vector<ActionId> actions;
  for (std::size_t s = 0; s < q.num_states(); ++s) actions.push_back(q.argmax(StateId{s}));
  return DeterministicPolicy(std::move(actions));
}

/// CAPS with every termination probability pinned to `beta_fixed` and no
/// termination learning.
template <TabularMdp M>
TrainResult caps_fixed_beta_train(const M& env, const std::vector<DeterministicPolicy>& sources,
                                  const LearnerConfig& cfg, double beta_fixed, std::size_t num_episodes,
                                  const std::vector<std::size_t>& checkpoint_episodes = {}) {
  const TerminationRule rule = TerminationRule::fixed(beta_fixed);
  if (num_episodes == 0) throw ConfigError("number of episodes must be at least 1");
  TrainResult out{make_learner_state(sources, env.num_states(), env.num_actions(), cfg), {}};
  out.metrics = continue_training(out.state, env, cfg, num_episodes, checkpoint_episodes, rule);
  // Snapshots report the probabilities actually used.
  for (Snapshot& snap : out.metrics.snapshots)
    for (auto& row : snap.betas) row.assign(row.size(), beta_fixed);
  return out;
}

}  // namespace caps
