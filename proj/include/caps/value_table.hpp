#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "caps/error.hpp"
#include "caps/rng.hpp"
#include "caps/types.hpp"

namespace caps {

/// Dense row-major table of values indexed by (state, column), where the
/// column is an option (CAPS) or an action (Q-learning).
template <class ColumnId>
class DenseTable {
 public:
  DenseTable() = default;
  DenseTable(std::size_t num_states, std::size_t num_columns, double init)
      : num_states_(num_states), num_columns_(num_columns), values_(num_states * num_columns, init) {}

  std::size_t num_states() const { return num_states_; }
  std::size_t num_columns() const { return num_columns_; }

  double operator()(StateId s, ColumnId c) const { return values_[s.index * num_columns_ + c.index]; }
  double& operator()(StateId s, ColumnId c) { return values_[s.index * num_columns_ + c.index]; }

  std::span<const double> row(StateId s) const {
    return std::span<const double>(values_).subspan(s.index * num_columns_, num_columns_);
  }

  double max(StateId s) const {
    const auto r = row(s);
    double best = r[0];
    for (double v : r) best = v > best ? v : best;
    return best;
  }

  /// Maximizing column; ties go to the lowest id.
  ColumnId argmax(StateId s) const {
    const auto r = row(s);
    std::size_t best = 0;
    for (std::size_t i = 1; i < r.size(); ++i)
      if (r[i] > r[best]) best = i;
    return ColumnId{best};
  }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  friend bool operator==(const DenseTable&, const DenseTable&) = default;

 private:
  std::size_t num_states_ = 0;
  std::size_t num_columns_ = 0;
  std::vector<double> values_;
};

using OptionValueTable = DenseTable<OptionId>;
using QTable = DenseTable<ActionId>;

/// With probability eps a uniformly random index; otherwise a maximizer,
/// uniform among exact ties.
inline std::size_t epsilon_greedy_index(std::span<const double> values, double eps, Rng& rng) {
  if (values.empty()) throw UsageError("epsilon_greedy: no choices");
  if (rng.uniform01() < eps) return rng.index(values.size());
  double best = values[0];
  std::size_t ties = 0;
  for (double v : values) {
    if (v > best) {
      best = v;
      ties = 1;
    } else if (v == best) {
      ++ties;
    }
  }
  std::size_t pick = ties > 1 ? rng.index(ties) : 0;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] == best && pick-- == 0) return i;
  return 0;
}

template <class ColumnId>
ColumnId epsilon_greedy_select(const DenseTable<ColumnId>& table, StateId s, double eps, Rng& rng) {
  return ColumnId{epsilon_greedy_index(table.row(s), eps, rng)};
}

/// Greedy inter-option policy read off an option-value table.
struct GreedySelection {
  std::vector<OptionId> best_option_of;
  std::vector<double> best_value_of;

  friend bool operator==(const GreedySelection&, const GreedySelection&) = default;
};

inline GreedySelection greedy_selection(const OptionValueTable& q) {
  GreedySelection sel;
  sel.best_option_of.reserve(q.num_states());
  sel.best_value_of.reserve(q.num_states());
  for (std::size_t s = 0; s < q.num_states(); ++s) {
    const OptionId o = q.argmax(StateId{s});
    sel.best_option_of.push_back(o);
    sel.best_value_of.push_back(q(StateId{s}, o));
  }
  return sel;
}

}  // namespace caps
