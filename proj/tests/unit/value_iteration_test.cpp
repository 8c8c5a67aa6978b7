#include <gtest/gtest.h>

#include "caps/gridworld.hpp"
#include "caps/value_iteration.hpp"

using namespace caps;

TEST(ValueIteration, SelfLoopGeometricSeries) {
  ExplicitMdp m(1, 1);
  m.add_outcome(StateId{0}, ActionId{0}, StateId{0}, 1.0, 1.0);
  const auto sol = value_iteration(m, 0.5);
  EXPECT_NEAR(sol.v_star[0], 2.0, 1e-9);
}

TEST(ValueIteration, CorridorValues) {
  const GridWorld g = load_gridworld("..G\n", 0.0);
  const auto sol = value_iteration(g, 0.95);
  EXPECT_NEAR(sol.v_star[1], 1.0, 1e-9);
  EXPECT_NEAR(sol.v_star[0], 0.95, 1e-9);
  EXPECT_EQ(sol.v_star[2], 0.0);
  EXPECT_EQ(sol.optimal_action_sets[0], std::vector<ActionId>{action_of(Move::Right)});
}

TEST(ValueIteration, RejectsBadDiscount) {
  const GridWorld g = load_gridworld(".G\n", 0.0);
  EXPECT_THROW(value_iteration(g, 1.0), ConfigError);
  EXPECT_THROW(value_iteration(g, -0.1), ConfigError);
}

TEST(ValueIteration, FourRoomSolutionIsConsistent) {
  const GridWorld g = load_gridworld_file(std::string(CAPS_ASSET_DIR) + "/four_rooms.map");
  const auto sol = value_iteration(g, 0.95);
  EXPECT_LT(sol.bellman_residual, 1e-9);
  for (std::size_t s = 0; s < g.num_states(); ++s) {
    const StateId sid{s};
    if (g.is_terminal(sid)) continue;
    ASSERT_FALSE(sol.optimal_action_sets[s].empty());
    double best = sol.q(sid, ActionId{0});
    for (std::size_t a = 1; a < g.num_actions(); ++a) best = std::max(best, sol.q(sid, ActionId{a}));
    EXPECT_EQ(sol.v_star[s], best);
    // Bellman optimality recomputed from the exact outcome lists.
    double again = -1.0;
    for (std::size_t a = 0; a < g.num_actions(); ++a) {
      double total = 0.0;
      for (const Outcome& o : g.outcomes(sid, ActionId{a}))
        total += o.prob * (o.reward + 0.95 * (g.is_terminal(o.next) ? 0.0 : sol.v_star[o.next.index]));
      again = std::max(again, total);
    }
    EXPECT_NEAR(again, sol.v_star[s], 1e-9);
  }
}

// Without noise the optimal value is gamma^(d-1) for shortest path length d.
TEST(ValueIteration, DeterministicValuesMatchShortestPaths) {
  const GridWorld g = load_gridworld_file(std::string(CAPS_ASSET_DIR) + "/four_rooms.map", 0.0);
  const auto sol = value_iteration(g, 0.95);
  const auto dist = goal_distances(g);
  for (std::size_t s = 0; s < g.num_states(); ++s) {
    if (g.is_terminal(StateId{s})) continue;
    EXPECT_NEAR(sol.v_star[s], std::pow(0.95, dist[s] - 1), 1e-9);
  }
}
