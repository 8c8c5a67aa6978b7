#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "caps/csv.hpp"
#include "caps/error.hpp"
#include "caps/learner.hpp"

namespace caps {

inline constexpr const char* kCheckpointFormat = "caps-checkpoint";
inline constexpr int kCheckpointVersion = 1;

/// Structured-text dump of a learner: option policies, option values,
/// termination parameters, counters and the random engine state. Doubles are
/// written in shortest round-trip form, so load(save(x)) == x exactly.
inline nlohmann::json checkpoint_to_json(const LearnerState& st) {
  using nlohmann::json;
  json sources = json::array();
  for (std::size_t i = 0; i < st.library.num_source(); ++i) {
    json actions = json::array();
    for (ActionId a : st.library[OptionId{i}].policy().actions()) actions.push_back(a.index);
    sources.push_back(std::move(actions));
  }
  json theta = json::array();
  for (const Option& o : st.library.options()) theta.push_back(o.thetas());
  return json{
      {"format", kCheckpointFormat},
      {"version", kCheckpointVersion},
      {"num_states", st.q.num_states()},
      {"num_actions", st.library.num_actions()},
      {"source_policies", std::move(sources)},
      {"q", st.q.values()},
      {"theta", std::move(theta)},
      {"episode_count", st.episode_count},
      {"rng", st.rng.serialize()},
      {"state_visits", st.state_visits},
      {"option_arrivals", st.option_arrivals},
  };
}

inline LearnerState checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kCheckpointFormat) throw LoadError("checkpoint: unknown format");
    if (j.at("version").get<int>() != kCheckpointVersion)
      throw LoadError("checkpoint: unsupported version " + std::to_string(j.at("version").get<int>()));
    const auto ns = j.at("num_states").get<std::size_t>();
    const auto na = j.at("num_actions").get<std::size_t>();
    std::vector<DeterministicPolicy> sources;
    for (const auto& p : j.at("source_policies")) {
      std::vector<ActionId> actions;
      for (const auto& a : p) actions.emplace_back(a.get<std::size_t>());
      sources.emplace_back(std::move(actions));
    }
    LearnerConfig cfg;
    LearnerState st = make_learner_state(sources, ns, na, cfg);
    const auto q = j.at("q").get<std::vector<double>>();
    if (q.size() != st.q.values().size()) throw LoadError("checkpoint: q table has wrong size");
    st.q.values() = q;
    const auto& theta = j.at("theta");
    if (theta.size() != st.library.size()) throw LoadError("checkpoint: theta table has wrong option count");
    for (std::size_t o = 0; o < st.library.size(); ++o) {
      const auto row = theta[o].get<std::vector<double>>();
      if (row.size() != ns) throw LoadError("checkpoint: theta row has wrong size");
      for (std::size_t s = 0; s < ns; ++s) st.library[OptionId{o}].set_theta(StateId{s}, row[s]);
    }
    st.episode_count = j.at("episode_count").get<std::size_t>();
    st.rng = Rng::deserialize(j.at("rng").get<std::string>());
    st.state_visits = j.at("state_visits").get<std::vector<std::uint64_t>>();
    st.option_arrivals = j.at("option_arrivals").get<std::vector<std::uint64_t>>();
    if (st.state_visits.size() != ns || st.option_arrivals.size() != ns * st.library.size())
      throw LoadError("checkpoint: visit counters have wrong size");
    return st;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("checkpoint: ") + e.what());
  } catch (const ConfigError& e) {
    throw LoadError(std::string("checkpoint: ") + e.what());
  }
}

inline void save_checkpoint(const std::string& path, const LearnerState& st) {
  csv::write_file(path, checkpoint_to_json(st).dump(1) + "\n");
}

inline LearnerState load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open checkpoint '" + path + "'");
  try {
    return checkpoint_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(path + ": " + e.what());
  }
}

inline nlohmann::json q_table_to_json(const QTable& q) {
  return {{"format", "q-table"}, {"version", 1}, {"num_states", q.num_states()},
          {"num_actions", q.num_columns()}, {"q", q.values()}};
}

}  // namespace caps
