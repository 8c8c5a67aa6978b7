#pragma once

#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "caps/csv.hpp"
#include "caps/error.hpp"
#include "caps/gridworld.hpp"
#include "caps/learner.hpp"

namespace caps {

/// A height x width matrix over grid cells; wall cells hold no value.
template <class T>
struct GridLayer {
  int width = 0;
  int height = 0;
  std::vector<std::optional<T>> cells;

  GridLayer() = default;
  GridLayer(int w, int h) : width(w), height(h), cells(static_cast<std::size_t>(w) * h) {}

  std::optional<T>& at(Position p) { return cells[static_cast<std::size_t>(p.row) * width + p.col]; }
  const std::optional<T>& at(Position p) const { return cells[static_cast<std::size_t>(p.row) * width + p.col]; }

  friend bool operator==(const GridLayer&, const GridLayer&) = default;
};

/// Greedy option per cell, its action, and whether it is a
/// primitive option.
struct SelectionMap {
  GridLayer<long long> option;
  GridLayer<long long> action;
  GridLayer<long long> primitive;
};

/// Termination probability and action of one option per cell.
struct TerminationMap {
  OptionId option;
  GridLayer<double> beta;
  GridLayer<long long> action;
};

template <class T>
std::string format_layer(const GridLayer<T>& layer) {
  std::ostringstream out;
  out << "row";
  for (int c = 0; c < layer.width; ++c) out << ",c" << c;
  out << '\n';
  for (int r = 0; r < layer.height; ++r) {
    out << r;
    for (int c = 0; c < layer.width; ++c) {
      out << ',';
      if (const auto& v = layer.at({r, c})) {
        if constexpr (std::is_floating_point_v<T>)
          out << csv::format_double(*v);
        else
          out << *v;
      }
    }
    out << '\n';
  }
  return out.str();
}

template <class T>
GridLayer<T> parse_layer(const std::string& text) {
  const auto t = csv::parse(text);
  if (t.header.empty() || t.header.front() != "row") throw LoadError("grid layer: bad header");
  GridLayer<T> layer(static_cast<int>(t.header.size()) - 1, static_cast<int>(t.rows.size()));
  for (int r = 0; r < layer.height; ++r) {
    const auto& row = t.rows[r];
    if (csv::parse_integer(row[0]) != r) throw LoadError("grid layer: rows out of order");
    for (int c = 0; c < layer.width; ++c) {
      const std::string& f = row[c + 1];
      if (f.empty()) continue;
      if constexpr (std::is_floating_point_v<T>)
        layer.at({r, c}) = csv::parse_double(f);
      else
        layer.at({r, c}) = static_cast<T>(csv::parse_integer(f));
    }
  }
  return layer;
}

namespace detail {

inline void check_grid_matches(const OptionLibrary& lib, const GridWorld& grid) {
  if (lib.num_states() != grid.num_states() || lib.num_actions() != grid.num_actions())
    throw UsageError("map export: learner has " + std::to_string(lib.num_states()) + " states but grid has " +
                     std::to_string(grid.num_states()));
}

}  // namespace detail

inline SelectionMap selection_map_from(const GreedySelection& sel, const OptionLibrary& lib, const GridWorld& grid) {
  detail::check_grid_matches(lib, grid);
  if (sel.best_option_of.size() != grid.num_states()) throw UsageError("map export: selection has wrong size");
  SelectionMap m{GridLayer<long long>(grid.width(), grid.height()), GridLayer<long long>(grid.width(), grid.height()),
                 GridLayer<long long>(grid.width(), grid.height())};
  for (std::size_t s = 0; s < grid.num_states(); ++s) {
    const StateId sid{s};
    const Position p = grid.position_of(sid);
    const OptionId o = sel.best_option_of[s];
    m.option.at(p) = static_cast<long long>(o.index);
    m.action.at(p) = static_cast<long long>(lib[o].action(sid).index);
    m.primitive.at(p) = lib[o].kind() == OptionKind::Primitive ? 1 : 0;
  }
  return m;
}

inline SelectionMap export_selection_map(const LearnerState& st, const GridWorld& grid) {
  return selection_map_from(greedy_selection(st.q), st.library, grid);
}

inline TerminationMap termination_map_from(const std::vector<double>& betas, const OptionLibrary& lib, OptionId o,
                                           const GridWorld& grid) {
  detail::check_grid_matches(lib, grid);
  if (o.index >= lib.size()) throw UsageError("map export: invalid option id " + std::to_string(o.index));
  if (betas.size() != grid.num_states()) throw UsageError("map export: termination table has wrong size");
  TerminationMap m{o, GridLayer<double>(grid.width(), grid.height()), GridLayer<long long>(grid.width(), grid.height())};
  for (std::size_t s = 0; s < grid.num_states(); ++s) {
    const Position p = grid.position_of(StateId{s});
    m.beta.at(p) = betas[s];
    m.action.at(p) = static_cast<long long>(lib[o].action(StateId{s}).index);
  }
  return m;
}

inline TerminationMap export_termination_map(const LearnerState& st, const GridWorld& grid, OptionId o) {
  if (o.index >= st.library.size()) throw UsageError("map export: invalid option id " + std::to_string(o.index));
  std::vector<double> betas;
  for (std::size_t s = 0; s < grid.num_states() && s < st.library.num_states(); ++s)
    betas.push_back(st.library[o].termination_prob(StateId{s}));
  return termination_map_from(betas, st.library, o, grid);
}

/// Per-cell count of actions executed from that cell.
inline GridLayer<long long> export_visit_map(const LearnerState& st, const GridWorld& grid) {
  detail::check_grid_matches(st.library, grid);
  GridLayer<long long> layer(grid.width(), grid.height());
  for (std::size_t s = 0; s < grid.num_states(); ++s)
    layer.at(grid.position_of(StateId{s})) = static_cast<long long>(st.state_visits[s]);
  return layer;
}

/// Writes selection_{option,action,primitive}.csv and
/// termination_o<id>_{beta,action}.csv into `dir`.
inline void write_selection_map(const std::string& dir, const SelectionMap& m) {
  csv::write_file(dir + "/selection_option.csv", format_layer(m.option));
  csv::write_file(dir + "/selection_action.csv", format_layer(m.action));
  csv::write_file(dir + "/selection_primitive.csv", format_layer(m.primitive));
}

inline void write_termination_map(const std::string& dir, const TerminationMap& m) {
  const std::string stem = dir + "/termination_o" + std::to_string(m.option.index);
  csv::write_file(stem + "_beta.csv", format_layer(m.beta));
  csv::write_file(stem + "_action.csv", format_layer(m.action));
}

}  // namespace caps
