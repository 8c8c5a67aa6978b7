#include <gtest/gtest.h>

#include "caps/caps.hpp"

using namespace caps;

TEST(QLearning, CorridorLearnsOptimalPolicy) {
  const GridWorld g = load_gridworld("G.\n", 0.0);
  const auto res = q_learning_train(g, LearnerConfig{}, 1000);
  const auto oracle = value_iteration(g, 0.95);
  EXPECT_TRUE(oracle.is_optimal(StateId{1}, greedy_policy(res.state.q)(StateId{1})));
  EXPECT_EQ(res.metrics.returns.size(), 1000u);
}

TEST(QLearning, ZeroStepSizeFreezesTable) {
  const GridWorld g = load_gridworld("...\n..G\n", 0.2);
  LearnerConfig cfg;
  cfg.alpha_q = 0.0;
  cfg.q_init = 0.25;
  const auto res = q_learning_train(g, cfg, 50);
  for (double v : res.state.q.values()) EXPECT_EQ(v, 0.25);
}

TEST(QLearning, Deterministic) {
  const GridWorld g = load_gridworld_file(std::string(CAPS_ASSET_DIR) + "/four_rooms.map");
  LearnerConfig cfg;
  cfg.seed = 9;
  const auto a = q_learning_train(g, cfg, 200);
  const auto b = q_learning_train(g, cfg, 200);
  EXPECT_EQ(a.metrics.returns, b.metrics.returns);
  EXPECT_EQ(a.state.q, b.state.q);
}

// A primitive-only CAPS learner whose options always terminate consumes the
// random stream exactly like Q-learning, so every episode and every cell agree.
TEST(QLearning, PrimitiveOnlyCapsReduction) {
  const GridWorld g = load_gridworld_file(std::string(CAPS_ASSET_DIR) + "/four_rooms.map");
  LearnerConfig cfg;
  cfg.seed = 21;
  cfg.theta_init = kThetaBound;
  LearnerState caps_state = make_learner_state({}, g.num_states(), 4, cfg);
  QLearnerState q_state = make_q_learner_state(g.num_states(), 4, cfg);
  for (int k = 0; k < 300; ++k) {
    const auto a = run_episode(caps_state, g, cfg);
    const auto b = q_learning_episode(q_state, g, cfg);
    ASSERT_EQ(a.discounted_return, b.discounted_return) << "episode " << k;
    ASSERT_EQ(a.steps, b.steps);
  }
  for (std::size_t i = 0; i < caps_state.q.values().size(); ++i)
    EXPECT_EQ(caps_state.q.values()[i], q_state.q.values()[i]);
}

TEST(FixedBeta, CertainTerminationWithoutSourcesIsQLearning) {
  const GridWorld g = load_gridworld_file(std::string(CAPS_ASSET_DIR) + "/four_rooms.map");
  LearnerConfig cfg;
  cfg.seed = 4;
  const auto fixed = caps_fixed_beta_train(g, {}, cfg, 1.0, 300);
  const auto q = q_learning_train(g, cfg, 300);
  EXPECT_EQ(fixed.metrics.returns, q.metrics.returns);
  EXPECT_EQ(fixed.state.q.values(), q.state.q.values());
}

TEST(FixedBeta, ThetaNeverMovesAndSnapshotsReportFixedBeta) {
  const GridWorld g = load_gridworld_file(std::string(CAPS_ASSET_DIR) + "/four_rooms.map");
  std::vector<DeterministicPolicy> sources(2, DeterministicPolicy::constant(g.num_states(), ActionId{0}));
  const auto res = caps_fixed_beta_train(g, sources, LearnerConfig{}, 0.5, 100, {100});
  for (const Option& o : res.state.library.options())
    for (double th : o.thetas()) EXPECT_EQ(th, 0.0);
  for (const auto& row : res.metrics.snapshots.at(0).betas)
    for (double b : row) EXPECT_EQ(b, 0.5);
  EXPECT_THROW(caps_fixed_beta_train(g, sources, LearnerConfig{}, 0.0, 10), ConfigError);
}

TEST(FixedBeta, EpisodesEndAtTheGoal) {
  const GridWorld g = load_gridworld_file(std::string(CAPS_ASSET_DIR) + "/four_rooms.map");
  LearnerConfig cfg;
  std::vector<DeterministicPolicy> sources(2, DeterministicPolicy::constant(g.num_states(), ActionId{1}));
  LearnerState st = make_learner_state(sources, g.num_states(), 4, cfg);
  int reached = 0;
  for (int k = 0; k < 200; ++k) {
    const auto ep = run_episode(st, g, cfg, TerminationRule::fixed(0.5));
    if (ep.reached_terminal) {
      ++reached;
      EXPECT_EQ(ep.trajectory.back().next, g.goal_state());
      EXPECT_EQ(ep.trajectory.back().reward, 1.0);
      EXPECT_GT(ep.discounted_return, 0.0);
    } else {
      EXPECT_EQ(ep.steps, 100u);
    }
    for (std::size_t t = 0; t + 1 < ep.trajectory.size(); ++t) EXPECT_NE(ep.trajectory[t].next, g.goal_state());
  }
  EXPECT_GT(reached, 0);
}
