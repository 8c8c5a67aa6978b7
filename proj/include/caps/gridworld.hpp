#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstddef>
#include <deque>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "caps/error.hpp"
#include "caps/mdp.hpp"
#include "caps/rng.hpp"
#include "caps/types.hpp"

namespace caps {

enum class Cell : char { Wall = '#', Free = '.', Goal = 'G' };

/// The four grid moves, in action-index order.
enum class Move : std::size_t { Up = 0, Down = 1, Left = 2, Right = 3 };

inline constexpr std::size_t kGridActions = 4;
inline constexpr double kDefaultNoise = 0.2;

inline constexpr ActionId action_of(Move m) { return ActionId{static_cast<std::size_t>(m)}; }

inline const char* action_name(ActionId a) {
  static constexpr std::array<const char*, kGridActions> names{"up", "down", "left", "right"};
  return a.index < names.size() ? names[a.index] : "?";
}

struct Position {
  int row = 0;
  int col = 0;

  friend constexpr bool operator==(Position, Position) = default;
};

/// Stochastic navigation grid. States are the non-wall cells, numbered
/// row-major; the episode ends when the agent reaches the goal cell.
///
/// A step first applies the intended move (blocked moves stay put), then with
/// probability `noise` displaces the agent one more cell in a uniformly random
/// direction (again blocked by walls and the boundary).
class GridWorld {
 public:
  int width() const { return width_; }
  int height() const { return height_; }
  double noise() const { return noise_; }
  double step_reward() const { return step_reward_; }
  double goal_reward() const { return goal_reward_; }
  StateId goal_state() const { return goal_state_; }
  Position goal_position() const { return position_of(goal_state_); }

  Cell cell(Position p) const { return cells_[flat(p)]; }
  bool in_bounds(Position p) const { return p.row >= 0 && p.col >= 0 && p.row < height_ && p.col < width_; }
  bool is_wall(Position p) const { return !in_bounds(p) || cell(p) == Cell::Wall; }

  std::optional<StateId> state_at(Position p) const {
    if (is_wall(p)) return std::nullopt;
    return StateId{static_cast<std::size_t>(state_of_cell_[flat(p)])};
  }

  Position position_of(StateId s) const { return cell_of_state_.at(s.index); }

  /// Deterministic one-cell move; blocked moves leave the agent in place.
  StateId move(StateId s, ActionId a) const {
    static constexpr std::array<int, kGridActions> drow{-1, 1, 0, 0};
    static constexpr std::array<int, kGridActions> dcol{0, 0, -1, 1};
    const Position p = position_of(s);
    const Position q{p.row + drow[a.index], p.col + dcol[a.index]};
    if (is_wall(q)) return s;
    return StateId{static_cast<std::size_t>(state_of_cell_[flat(q)])};
  }

  // TabularMdp interface.
  std::size_t num_states() const { return cell_of_state_.size(); }
  std::size_t num_actions() const { return kGridActions; }
  bool is_terminal(StateId s) const { return s == goal_state_; }
  std::span<const double> initial_distribution() const { return initial_; }
  double reward_bound() const { return std::max(std::abs(step_reward_), std::abs(goal_reward_)); }

  double reward_on_entering(StateId next) const { return next == goal_state_ ? goal_reward_ : step_reward_; }

  Step sample_step(StateId s, ActionId a, Rng& rng) const {
    check_action(a);
    if (s.index >= num_states()) throw UsageError("GridWorld: state out of range");
    if (is_terminal(s)) throw UsageError("GridWorld: step from terminal state " + std::to_string(s.index));
    StateId next = move(s, a);
    if (noise_ > 0.0 && rng.uniform01() < noise_) next = move(next, ActionId{rng.index(kGridActions)});
    return {next, reward_on_entering(next)};
  }

  /// Exact outcome distribution, duplicate destinations merged.
  std::vector<Outcome> outcomes(StateId s, ActionId a) const {
    check_action(a);
    std::vector<Outcome> out;
    auto add = [&](StateId next, double p) {
      if (p <= 0.0) return;
      for (Outcome& o : out)
        if (o.next == next) {
          o.prob += p;
          return;
        }
      out.push_back({next, p, reward_on_entering(next)});
    };
    const StateId intended = move(s, a);
    add(intended, 1.0 - noise_);
    for (std::size_t d = 0; d < kGridActions; ++d) add(move(intended, ActionId{d}), noise_ / kGridActions);
    return out;
  }

  /// Same layout and rewards with the goal placed at `p`.
  GridWorld with_goal(Position p) const {
    if (is_wall(p)) throw UsageError("GridWorld::with_goal: target cell is a wall");
    GridWorld g = *this;
    g.cells_[flat(goal_position())] = Cell::Free;
    g.cells_[flat(p)] = Cell::Goal;
    g.goal_state_ = *state_at(p);
    g.reset_initial_distribution();
    return g;
  }

  GridWorld with_noise(double noise) const {
    GridWorld g = *this;
    g.set_noise(noise);
    return g;
  }

  GridWorld with_rewards(double step_reward, double goal_reward) const {
    GridWorld g = *this;
    g.step_reward_ = step_reward;
    g.goal_reward_ = goal_reward;
    return g;
  }

  /// Map text in the loader's format, including the noise header.
  std::string to_text() const {
    std::ostringstream out;
    out << "noise=" << noise_ << '\n';
    for (int r = 0; r < height_; ++r) {
      for (int c = 0; c < width_; ++c) out << static_cast<char>(cell({r, c}));
      out << '\n';
    }
    return out.str();
  }

  friend GridWorld load_gridworld(std::string_view text, std::optional<double> noise);

 private:
  GridWorld() = default;

  std::size_t flat(Position p) const { return static_cast<std::size_t>(p.row) * width_ + p.col; }

  void check_action(ActionId a) const {
    if (a.index >= kGridActions) throw UsageError("GridWorld: action out of range");
  }

  void set_noise(double noise) {
    if (!(noise >= 0.0 && noise <= 1.0)) throw ConfigError("GridWorld: noise must lie in [0, 1]");
    noise_ = noise;
  }

  // Episodes start uniformly at any non-goal cell.
  void reset_initial_distribution() {
    initial_.assign(num_states(), 0.0);
    if (num_states() == 1) {
      initial_[0] = 1.0;
      return;
    }
    const double p = 1.0 / static_cast<double>(num_states() - 1);
    for (std::size_t s = 0; s < num_states(); ++s)
      if (StateId{s} != goal_state_) initial_[s] = p;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<Cell> cells_;
  std::vector<int> state_of_cell_;
  std::vector<Position> cell_of_state_;
  StateId goal_state_;
  double noise_ = kDefaultNoise;
  double step_reward_ = 0.0;
  double goal_reward_ = 1.0;
  std::vector<double> initial_;
};

static_assert(TabularMdp<GridWorld>);

/// Parses an ASCII map: '#' wall, '.' free, 'G' the single goal. An optional
/// first line `noise=<float>` sets the noise; `noise` overrides it when given.
inline GridWorld load_gridworld(std::string_view text, std::optional<double> noise = std::nullopt) {
  std::vector<std::string> rows;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    rows.push_back(std::move(line));
  }
  std::optional<double> header_noise;
  if (!rows.empty() && rows.front().starts_with("noise=")) {
    const std::string& line = rows.front();
    double v = 0.0;
    const char* e = line.data() + line.size();
    auto [ptr, ec] = std::from_chars(line.data() + 6, e, v);
    if (ec != std::errc{} || ptr != e) throw LoadError("map: malformed noise header '" + line + "'");
    header_noise = v;
    rows.erase(rows.begin());
  }
  while (!rows.empty() && rows.back().empty()) rows.pop_back();
  for (std::size_t r = 0; r < rows.size(); ++r)
    if (rows[r].empty()) throw LoadError("map: blank line inside grid at row " + std::to_string(r));
  if (rows.empty()) throw LoadError("map: empty grid");

  GridWorld g;
  g.height_ = static_cast<int>(rows.size());
  g.width_ = static_cast<int>(rows.front().size());
  g.cells_.reserve(rows.size() * rows.front().size());
  std::optional<Position> goal;
  for (int r = 0; r < g.height_; ++r) {
    const std::string& line = rows[r];
    if (static_cast<int>(line.size()) != g.width_)
      throw LoadError("map: non-rectangular grid (row " + std::to_string(r) + " has width " +
                      std::to_string(line.size()) + ", expected " + std::to_string(g.width_) + ")");
    for (int c = 0; c < g.width_; ++c) {
      switch (line[c]) {
        case '#': g.cells_.push_back(Cell::Wall); break;
        case '.': g.cells_.push_back(Cell::Free); break;
        case 'G':
          if (goal) throw LoadError("map: multiple goals (second at row " + std::to_string(r) + ", col " + std::to_string(c) + ")");
          goal = Position{r, c};
          g.cells_.push_back(Cell::Goal);
          break;
        default:
          throw LoadError(std::string("map: unknown character '") + line[c] + "' at row " + std::to_string(r) +
                          ", col " + std::to_string(c));
      }
    }
  }
  if (!goal) throw LoadError("map: no goal");

  g.state_of_cell_.assign(g.cells_.size(), -1);
  for (int r = 0; r < g.height_; ++r)
    for (int c = 0; c < g.width_; ++c)
      if (g.cells_[g.flat({r, c})] != Cell::Wall) {
        g.state_of_cell_[g.flat({r, c})] = static_cast<int>(g.cell_of_state_.size());
        g.cell_of_state_.push_back({r, c});
      }
  g.goal_state_ = *g.state_at(*goal);

  // Every free cell must reach the goal by deterministic moves.
  std::vector<bool> seen(g.num_states(), false);
  std::deque<StateId> frontier{g.goal_state_};
  seen[g.goal_state_.index] = true;
  while (!frontier.empty()) {
    const StateId s = frontier.front();
    frontier.pop_front();
    for (std::size_t a = 0; a < kGridActions; ++a) {
      const StateId n = g.move(s, ActionId{a});
      if (!seen[n.index]) {
        seen[n.index] = true;
        frontier.push_back(n);
      }
    }
  }
  for (std::size_t s = 0; s < seen.size(); ++s)
    if (!seen[s]) {
      const Position p = g.cell_of_state_[s];
      throw LoadError("map: goal unreachable from row " + std::to_string(p.row) + ", col " + std::to_string(p.col));
    }

  g.set_noise(noise.value_or(header_noise.value_or(kDefaultNoise)));
  g.reset_initial_distribution();
  return g;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline GridWorld load_gridworld_file(const std::string& path, std::optional<double> noise = std::nullopt) {
  try {
    return load_gridworld(read_text_file(path), noise);
  } catch (const LoadError& e) {
    throw LoadError(path + ": " + e.what());
  }
}

/// Shortest deterministic path length (in moves) from every state to the goal.
inline std::vector<int> goal_distances(const GridWorld& g) {
  std::vector<int> dist(g.num_states(), -1);
  std::deque<StateId> frontier{g.goal_state()};
  dist[g.goal_state().index] = 0;
  // Moves are reversible on a grid, so BFS outward from the goal suffices.
  while (!frontier.empty()) {
    const StateId s = frontier.front();
    frontier.pop_front();
    for (std::size_t a = 0; a < kGridActions; ++a) {
      const StateId n = g.move(s, ActionId{a});
      if (dist[n.index] < 0) {
        dist[n.index] = dist[s.index] + 1;
        frontier.push_back(n);
      }
    }
  }
  return dist;
}

}  // namespace caps
