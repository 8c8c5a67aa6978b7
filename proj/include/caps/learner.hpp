#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "caps/error.hpp"
#include "caps/mdp.hpp"
#include "caps/metrics.hpp"
#include "caps/options.hpp"
#include "caps/rng.hpp"
#include "caps/types.hpp"
#include "caps/value_table.hpp"

namespace caps {

/// Exploration rate as a function of the 1-based episode number k.
struct EpsilonSchedule {
  enum class Kind { Hyperbolic, Constant };

  Kind kind = Kind::Hyperbolic;
  /// Hyperbolic: eps(k) = 1 - k / (k + value). Constant: eps(k) = value.
  double value = 800.0;

  static EpsilonSchedule hyperbolic(double scale) { return {Kind::Hyperbolic, scale}; }
  static EpsilonSchedule constant(double eps) { return {Kind::Constant, eps}; }

  double operator()(std::size_t episode) const {
    if (kind == Kind::Constant) return value;
    // Same quantity as 1 - k/(k+c), written so it stays positive for every k.
    return value / (static_cast<double>(episode) + value);
  }

  void validate() const {
    if (kind == Kind::Constant && !(value > 0.0 && value <= 1.0))
      throw ConfigError("epsilon: constant rate must lie in (0, 1]");
    if (kind == Kind::Hyperbolic && !(value > 0.0 && std::isfinite(value)))
      throw ConfigError("epsilon: hyperbolic scale must be positive");
  }

  friend bool operator==(const EpsilonSchedule&, const EpsilonSchedule&) = default;
};

/// Learner hyperparameters. Defaults are the grid-navigation settings.
struct LearnerConfig {
  double alpha_q = 0.5;
  double alpha_beta = 0.2;
  double gamma = 0.95;
  EpsilonSchedule epsilon = EpsilonSchedule::hyperbolic(800.0);
  int horizon = 100;
  double q_init = 0.0;
  double rho = 0.0;
  double theta_init = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(alpha_q >= 0.0 && alpha_q <= 1.0)) throw ConfigError("alpha_q must lie in [0, 1]");
    if (!(alpha_beta >= 0.0 && std::isfinite(alpha_beta))) throw ConfigError("alpha_beta must be nonnegative");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
    if (horizon <= 0) throw ConfigError("horizon must be positive");
    if (!std::isfinite(q_init)) throw ConfigError("q_init must be finite");
    if (!(rho >= 0.0 && std::isfinite(rho))) throw ConfigError("rho must be nonnegative");
    if (!std::isfinite(theta_init)) throw ConfigError("theta_init must be finite");
    epsilon.validate();
  }

  friend bool operator==(const LearnerConfig&, const LearnerConfig&) = default;
};

/// Everything a CAPS learner carries between episodes.
struct LearnerState {
  OptionValueTable q;
  OptionLibrary library;
  std::size_t episode_count = 0;
  Rng rng;
  std::vector<std::uint64_t> state_visits;    // actions executed from each state
  std::vector<std::uint64_t> option_arrivals;  // [state * options + option]: o executing on arrival at s

  std::uint64_t arrivals(StateId s, OptionId o) const { return option_arrivals[s.index * library.size() + o.index]; }
};

inline LearnerState make_learner_state(const std::vector<DeterministicPolicy>& sources, std::size_t num_states,
                                       std::size_t num_actions, const LearnerConfig& cfg) {
  cfg.validate();
  LearnerState st{
      .q = {},
      .library = make_library(sources, num_actions, num_states, cfg.theta_init),
      .episode_count = 0,
      .rng = Rng(cfg.seed),
      .state_visits = std::vector<std::uint64_t>(num_states, 0),
      .option_arrivals = {},
  };
  st.q = OptionValueTable(num_states, st.library.size(), cfg.q_init);
  st.option_arrivals.assign(num_states * st.library.size(), 0);
  return st;
}

/// Source of termination probabilities: the learned sigmoids, or a constant
/// shared by every option with learning switched off.
struct TerminationRule {
  std::optional<double> fixed_beta;

  static TerminationRule learned() { return {}; }
  static TerminationRule fixed(double beta) {
    if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("fixed termination probability must lie in (0, 1]");
    return {beta};
  }

  bool learns() const { return !fixed_beta; }
  double beta(const Option& o, StateId s) const { return fixed_beta ? *fixed_beta : o.termination_prob(s); }
};

/// One environment transition as seen by the learner.
struct Transition {
  StateId state;
  ActionId action;
  double reward = 0.0;
  StateId next;
  bool terminal = false;
};

/// Call-and-return backup (1 - beta) q(s', o) + beta max_o' q(s', o').
inline double call_and_return_backup(const OptionValueTable& q, StateId s_next, OptionId o, double beta) {
  return (1.0 - beta) * q(s_next, o) + beta * q.max(s_next);
}

/// Backup value U(s', o) using the option's own termination probability.
inline double compute_u(const OptionValueTable& q, const OptionLibrary& lib, StateId s_next, OptionId o) {
  return call_and_return_backup(q, s_next, o, lib[o].termination_prob(s_next));
}

/// Updates q(s, o) for every option whose policy picks the executed action at
/// s. Targets are computed from the table as it was before this call, so the
/// result does not depend on the order options are visited in.
inline void update_q_options(LearnerState& st, const Transition& tr, const LearnerConfig& cfg,
                             const TerminationRule& rule = TerminationRule::learned()) {
  const double best_next = tr.terminal ? 0.0 : st.q.max(tr.next);
  const std::size_t n = st.library.size();
  for (std::size_t i = 0; i < n; ++i) {
    const OptionId o{i};
    const Option& opt = st.library[o];
    if (opt.action(tr.state) != tr.action) continue;
    double u = 0.0;
    if (!tr.terminal) {
      const double beta = rule.beta(opt, tr.next);
      u = (1.0 - beta) * st.q(tr.next, o) + beta * best_next;
    }
    double& cell = st.q(tr.state, o);
    cell = (1.0 - cfg.alpha_q) * cell + cfg.alpha_q * (tr.reward + cfg.gamma * u);
  }
}

/// Termination-gradient step for the executing option at the post-transition
/// state: theta -= alpha_beta * beta(1 - beta) * (A + rho), with advantage
/// A = q(s', o) - max_o' q(s', o') <= 0.
inline void update_termination(LearnerState& st, OptionId o, StateId s_next, const LearnerConfig& cfg) {
  Option& opt = st.library[o];
  const double advantage = st.q(s_next, o) - st.q.max(s_next);
  const double step = cfg.alpha_beta * opt.termination_grad(s_next) * (advantage + cfg.rho);
  if (step != 0.0) opt.set_theta(s_next, opt.theta(s_next) - step);
}

struct TrajectoryStep {
  StateId state;
  OptionId option;
  ActionId action;
  double reward = 0.0;
  StateId next;
  bool option_terminated = false;
};

struct EpisodeResult {
  double discounted_return = 0.0;
  std::size_t steps = 0;
  bool reached_terminal = false;
  std::vector<TrajectoryStep> trajectory;
};

template <TabularMdp M>
void check_compatible(const LearnerState& st, const M& env) {
  if (env.num_states() != st.q.num_states() || env.num_actions() != st.library.num_actions())
    throw UsageError("learner and environment disagree on state or action count");
}

/// One call-and-return episode: pick an option epsilon-greedily, follow it,
/// update option values and the executing option's termination after every
/// step, and re-select whenever the option terminates.
template <TabularMdp M>
EpisodeResult run_episode(LearnerState& st, const M& env, const LearnerConfig& cfg,
                          const TerminationRule& rule = TerminationRule::learned()) {
  if (cfg.horizon <= 0) throw ConfigError("horizon must be positive");
  check_compatible(st, env);
  const double eps = cfg.epsilon(st.episode_count + 1);
  const std::size_t n_opt = st.library.size();

  EpisodeResult res;
  StateId s = sample_initial_state(env, st.rng);
  OptionId o{0};
  if (!env.is_terminal(s)) o = epsilon_greedy_select(st.q, s, eps, st.rng);
  double discount = 1.0;
  for (int t = 0; t < cfg.horizon && !env.is_terminal(s); ++t) {
    const ActionId a = st.library[o].action(s);
    const Step step = env.sample_step(s, a, st.rng);
    const bool terminal = env.is_terminal(step.next);
    ++st.state_visits[s.index];

    update_q_options(st, {s, a, step.reward, step.next, terminal}, cfg, rule);
    res.discounted_return += discount * step.reward;
    discount *= cfg.gamma;

    TrajectoryStep rec{s, o, a, step.reward, step.next, false};
    if (!terminal) {
      ++st.option_arrivals[step.next.index * n_opt + o.index];
      if (rule.learns()) update_termination(st, o, step.next, cfg);
      if (st.rng.bernoulli(rule.beta(st.library[o], step.next))) {
        rec.option_terminated = true;
        o = epsilon_greedy_select(st.q, step.next, eps, st.rng);
      }
    }
    res.trajectory.push_back(rec);
    s = step.next;
    ++res.steps;
  }
  res.reached_terminal = env.is_terminal(s);
  ++st.episode_count;
  return res;
}

inline Snapshot take_snapshot(const LearnerState& st) {
  Snapshot snap;
  snap.episode = st.episode_count;
  snap.selection = greedy_selection(st.q);
  for (const Option& o : st.library.options()) {
    std::vector<double> betas;
    betas.reserve(o.thetas().size());
    for (double th : o.thetas()) betas.push_back(termination_prob(th));
    snap.betas.push_back(std::move(betas));
  }
  return snap;
}

/// Runs `num_episodes` more episodes on an existing learner, snapshotting
/// after each listed (absolute) episode number.
template <TabularMdp M>
RunMetrics continue_training(LearnerState& st, const M& env, const LearnerConfig& cfg, std::size_t num_episodes,
                             const std::vector<std::size_t>& checkpoint_episodes = {},
                             const TerminationRule& rule = TerminationRule::learned()) {
  cfg.validate();
  if (num_episodes == 0) throw ConfigError("number of episodes must be at least 1");
  const auto start = std::chrono::steady_clock::now();
  RunMetrics metrics;
  metrics.seed = cfg.seed;
  metrics.returns.reserve(num_episodes);
  metrics.steps.reserve(num_episodes);
  std::size_t next_cp = 0;
  while (next_cp < checkpoint_episodes.size() && checkpoint_episodes[next_cp] <= st.episode_count) ++next_cp;
  for (std::size_t i = 0; i < num_episodes; ++i) {
    const EpisodeResult ep = run_episode(st, env, cfg, rule);
    metrics.returns.push_back(ep.discounted_return);
    metrics.steps.push_back(ep.steps);
    if (next_cp < checkpoint_episodes.size() && checkpoint_episodes[next_cp] == st.episode_count) {
      metrics.snapshots.push_back(take_snapshot(st));
      ++next_cp;
    }
  }
  metrics.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return metrics;
}

struct TrainResult {
  LearnerState state;
  RunMetrics metrics;
};

/// Fresh CAPS learner over `sources` plus primitive options, trained for
/// `num_episodes` episodes.
template <TabularMdp M>
TrainResult train(const M& env, const std::vector<DeterministicPolicy>& sources, const LearnerConfig& cfg,
                  std::size_t num_episodes, const std::vector<std::size_t>& checkpoint_episodes = {}) {
  if (num_episodes == 0) throw ConfigError("number of episodes must be at least 1");
  TrainResult out{make_learner_state(sources, env.num_states(), env.num_actions(), cfg), {}};
  out.metrics = continue_training(out.state, env, cfg, num_episodes, checkpoint_episodes);
  return out;
}

/// Target policy: at each state, the action of the greedy option (ties to
/// the lowest option id).
inline DeterministicPolicy extract_target_policy(const LearnerState& st) {
  std::vector<ActionId> actions;
  actions.reserve(st.q.num_states());
  for (std::size_t s = 0; s < st.q.num_states(); ++s) {
    const StateId sid{s};
    actions.push_back(st.library[st.q.argmax(sid)].action(sid));
  }
  return DeterministicPolicy(std::move(actions));
}

}  // namespace caps
