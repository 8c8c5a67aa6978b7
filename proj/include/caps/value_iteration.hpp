#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "caps/error.hpp"
#include "caps/mdp.hpp"
#include "caps/types.hpp"

namespace caps {

/// Exact optimal values of a finite MDP, used as ground truth in tests.
struct OptimalSolution {
  std::size_t num_actions = 0;
  std::vector<double> v_star;
  std::vector<double> q_star;  // row-major (state, action)
  /// Actions within 1e-9 of the best Q* per state; empty at terminal states.
  std::vector<std::vector<ActionId>> optimal_action_sets;
  double bellman_residual = 0.0;
  std::size_t iterations = 0;

  double q(StateId s, ActionId a) const { return q_star[s.index * num_actions + a.index]; }

  bool is_optimal(StateId s, ActionId a) const {
    const auto& set = optimal_action_sets[s.index];
    return std::find(set.begin(), set.end(), a) != set.end();
  }

  /// Lowest-index optimal action; action 0 at terminal states.
  ActionId greedy_action(StateId s) const {
    const auto& set = optimal_action_sets[s.index];
    return set.empty() ? ActionId{0} : set.front();
  }
};

inline constexpr double kOptimalActionTolerance = 1e-9;

namespace detail {

template <TabularMdp M>
double backup(const M& m, StateId s, ActionId a, double gamma, const std::vector<double>& v) {
  double total = 0.0;
  for (const Outcome& o : m.outcomes(s, a)) {
    const double cont = m.is_terminal(o.next) ? 0.0 : v[o.next.index];
    total += o.prob * (o.reward + gamma * cont);
  }
  return total;
}

}  // namespace detail

/// Jacobi value iteration until the sup-norm Bellman residual of the returned
/// values is below `tol`. Terminal states have value 0.
template <TabularMdp M>
OptimalSolution value_iteration(const M& m, double gamma, double tol = 1e-10, std::size_t max_iterations = 1'000'000) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("value_iteration: gamma must lie in [0, 1)");
  if (!(tol > 0.0)) throw ConfigError("value_iteration: tolerance must be positive");

  const std::size_t ns = m.num_states();
  const std::size_t na = m.num_actions();
  std::vector<double> v(ns, 0.0);
  std::vector<double> next(ns, 0.0);

  auto sweep = [&](std::vector<double>& out) {
    double residual = 0.0;
    for (std::size_t s = 0; s < ns; ++s) {
      if (m.is_terminal(StateId{s})) {
        out[s] = 0.0;
        continue;
      }
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < na; ++a) best = std::max(best, detail::backup(m, StateId{s}, ActionId{a}, gamma, v));
      out[s] = best;
      residual = std::max(residual, std::abs(best - v[s]));
    }
    return residual;
  };

  OptimalSolution sol;
  sol.num_actions = na;
  for (;;) {
    const double residual = sweep(next);
    v.swap(next);
    ++sol.iterations;
    // The new iterate's residual is at most gamma times the old one.
    if (residual * gamma < tol || residual == 0.0) break;
    if (sol.iterations >= max_iterations) throw Error("value_iteration: no convergence within iteration limit");
  }

  sol.v_star = v;
  sol.q_star.assign(ns * na, 0.0);
  sol.optimal_action_sets.assign(ns, {});
  double residual = 0.0;
  for (std::size_t s = 0; s < ns; ++s) {
    if (m.is_terminal(StateId{s})) continue;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < na; ++a) {
      const double q = detail::backup(m, StateId{s}, ActionId{a}, gamma, v);
      sol.q_star[s * na + a] = q;
      best = std::max(best, q);
    }
    for (std::size_t a = 0; a < na; ++a)
      if (sol.q_star[s * na + a] >= best - kOptimalActionTolerance) sol.optimal_action_sets[s].push_back(ActionId{a});
    residual = std::max(residual, std::abs(best - v[s]));
    sol.v_star[s] = best;
  }
  sol.bellman_residual = residual;
  return sol;
}

}  // namespace caps
