#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "caps/error.hpp"
#include "caps/types.hpp"

namespace caps {

/// Termination parameters are kept inside this range; the sigmoid is within
/// 2e-22 of 0 or 1 at the bounds.
inline constexpr double kThetaBound = 50.0;

/// Termination probability beta = 1 / (1 + exp(-theta)).
inline double termination_prob(double theta) { return 1.0 / (1.0 + std::exp(-theta)); }

/// d beta / d theta = beta (1 - beta), evaluated in a form that is exactly
/// symmetric in theta and keeps precision when beta is near 1.
inline double termination_grad(double theta) {
  const double e = std::exp(-std::abs(theta));
  const double d = 1.0 + e;
  return e / (d * d);
}

inline double clip_theta(double theta) { return std::clamp(theta, -kThetaBound, kThetaBound); }

/// A total map from states to actions.
class DeterministicPolicy {
 public:
  DeterministicPolicy() = default;

  explicit DeterministicPolicy(std::vector<ActionId> actions) : actions_(std::move(actions)) {}

  static DeterministicPolicy constant(std::size_t num_states, ActionId a) {
    return DeterministicPolicy(std::vector<ActionId>(num_states, a));
  }

  /// Builds from (state, action) pairs; every state in [0, num_states) must
  /// appear exactly once.
  static DeterministicPolicy from_assignments(const std::vector<std::pair<StateId, ActionId>>& pairs,
                                              std::size_t num_states, std::size_t num_actions) {
    std::vector<std::optional<ActionId>> slots(num_states);
    for (const auto& [s, a] : pairs) {
      if (s.index >= num_states) throw LoadError("policy: state " + std::to_string(s.index) + " out of range");
      if (a.index >= num_actions)
        throw LoadError("policy: action " + std::to_string(a.index) + " out of range at state " + std::to_string(s.index));
      if (slots[s.index]) throw LoadError("policy: duplicate entry for state " + std::to_string(s.index));
      slots[s.index] = a;
    }
    std::vector<ActionId> actions;
    actions.reserve(num_states);
    for (std::size_t s = 0; s < num_states; ++s) {
      if (!slots[s]) throw LoadError("policy: missing action for state " + std::to_string(s));
      actions.push_back(*slots[s]);
    }
    return DeterministicPolicy(std::move(actions));
  }

  ActionId operator()(StateId s) const { return actions_[s.index]; }
  std::size_t size() const { return actions_.size(); }
  const std::vector<ActionId>& actions() const { return actions_; }

  friend bool operator==(const DeterministicPolicy&, const DeterministicPolicy&) = default;

 private:
  std::vector<ActionId> actions_;
};

/// Parses `state_index action_index` lines. Blank lines and `#` comments are
/// ignored. The result must be total over `num_states`.
inline DeterministicPolicy parse_policy(const std::string& text, std::size_t num_states, std::size_t num_actions) {
  std::vector<std::pair<StateId, ActionId>> pairs;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    long long s = -1;
    long long a = -1;
    std::string extra;
    if (!(fields >> s >> a) || (fields >> extra) || s < 0 || a < 0)
      throw LoadError("policy: malformed line " + std::to_string(line_no) + ": '" + line + "'");
    pairs.emplace_back(StateId{static_cast<std::size_t>(s)}, ActionId{static_cast<std::size_t>(a)});
  }
  return DeterministicPolicy::from_assignments(pairs, num_states, num_actions);
}

inline std::string format_policy(const DeterministicPolicy& policy) {
  std::ostringstream out;
  for (std::size_t s = 0; s < policy.size(); ++s) out << s << ' ' << policy(StateId{s}).index << '\n';
  return out.str();
}

inline DeterministicPolicy load_policy_file(const std::string& path, std::size_t num_states, std::size_t num_actions) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open policy file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_policy(buf.str(), num_states, num_actions);
  } catch (const LoadError& e) {
    throw LoadError(path + ": " + e.what());
  }
}

inline void save_policy_file(const std::string& path, const DeterministicPolicy& policy) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write policy file '" + path + "'");
  out << format_policy(policy);
}

enum class OptionKind { Source, Primitive };

/// A reusable policy with a learnable per-state sigmoid termination function.
/// The initiation set is the whole state space.
class Option {
 public:
  Option(OptionId id, OptionKind kind, DeterministicPolicy policy, double theta_init)
      : id_(id), kind_(kind), policy_(std::move(policy)), theta_(policy_.size(), clip_theta(theta_init)) {}

  OptionId id() const { return id_; }
  OptionKind kind() const { return kind_; }
  const DeterministicPolicy& policy() const { return policy_; }
  ActionId action(StateId s) const { return policy_(s); }

  double theta(StateId s) const { return theta_[s.index]; }
  void set_theta(StateId s, double theta) { theta_[s.index] = clip_theta(theta); }
  const std::vector<double>& thetas() const { return theta_; }

  double termination_prob(StateId s) const { return caps::termination_prob(theta_[s.index]); }
  double termination_grad(StateId s) const { return caps::termination_grad(theta_[s.index]); }

 private:
  OptionId id_;
  OptionKind kind_;
  DeterministicPolicy policy_;
  std::vector<double> theta_;
};

/// Source options followed by one primitive option per action. Option ids are
/// list positions.
class OptionLibrary {
 public:
  std::size_t size() const { return options_.size(); }
  std::size_t num_source() const { return num_source_; }
  std::size_t num_states() const { return num_states_; }
  std::size_t num_actions() const { return num_actions_; }

  const Option& operator[](OptionId o) const { return options_[o.index]; }
  Option& operator[](OptionId o) { return options_[o.index]; }
  const std::vector<Option>& options() const { return options_; }

  OptionId primitive(ActionId a) const { return OptionId{num_source_ + a.index}; }

  friend OptionLibrary make_library(const std::vector<DeterministicPolicy>& sources, std::size_t num_actions,
                                    std::size_t num_states, double theta_init);

 private:
  std::vector<Option> options_;
  std::size_t num_source_ = 0;
  std::size_t num_states_ = 0;
  std::size_t num_actions_ = 0;
};

inline OptionLibrary make_library(const std::vector<DeterministicPolicy>& sources, std::size_t num_actions,
                                  std::size_t num_states, double theta_init = 0.0) {
  if (num_actions == 0) throw ConfigError("make_library: need at least one action");
  if (!std::isfinite(theta_init)) throw ConfigError("make_library: theta_init must be finite");
  OptionLibrary lib;
  lib.num_source_ = sources.size();
  lib.num_states_ = num_states;
  lib.num_actions_ = num_actions;
  lib.options_.reserve(sources.size() + num_actions);
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const DeterministicPolicy& p = sources[i];
    if (p.size() < num_states)
      throw ConfigError("make_library: source policy " + std::to_string(i) + " has no action for state " +
                        std::to_string(p.size()));
    if (p.size() > num_states)
      throw ConfigError("make_library: source policy " + std::to_string(i) + " covers more states than the MDP");
    for (std::size_t s = 0; s < num_states; ++s)
      if (p(StateId{s}).index >= num_actions)
        throw ConfigError("make_library: source policy " + std::to_string(i) + " has out-of-range action at state " +
                          std::to_string(s));
    lib.options_.emplace_back(OptionId{i}, OptionKind::Source, p, theta_init);
  }
  for (std::size_t a = 0; a < num_actions; ++a)
    lib.options_.emplace_back(OptionId{sources.size() + a}, OptionKind::Primitive,
                              DeterministicPolicy::constant(num_states, ActionId{a}), theta_init);
  return lib;
}

}  // namespace caps
