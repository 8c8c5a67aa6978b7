#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "caps/baselines.hpp"
#include "caps/checkpoint.hpp"
#include "caps/csv.hpp"
#include "caps/error.hpp"
#include "caps/gridworld.hpp"
#include "caps/learner.hpp"
#include "caps/maps.hpp"
#include "caps/metrics.hpp"
#include "caps/options.hpp"

namespace caps {

enum class Algorithm { Caps, CapsFixedBeta, QLearning };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Caps: return "caps";
    case Algorithm::CapsFixedBeta: return "caps_fixed_beta";
    case Algorithm::QLearning: return "q_learning";
  }
  return "?";
}

inline Algorithm parse_algorithm(const std::string& name) {
  if (name == "caps") return Algorithm::Caps;
  if (name == "caps_fixed_beta") return Algorithm::CapsFixedBeta;
  if (name == "q_learning") return Algorithm::QLearning;
  throw ConfigError("unknown algorithm '" + name + "' (expected caps, caps_fixed_beta or q_learning)");
}

struct ExperimentConfig {
  std::string map_path;
  std::optional<double> noise;  // overrides the map header when set
  std::vector<std::string> source_policy_paths;
  Algorithm algorithm = Algorithm::Caps;
  std::vector<Algorithm> compare_algorithms{Algorithm::Caps, Algorithm::CapsFixedBeta, Algorithm::QLearning};
  LearnerConfig learner;  // learner.seed is the base seed; run i uses seed + i
  double beta_fixed = 0.5;
  std::size_t num_episodes = 2000;
  std::size_t num_runs = 10;
  std::vector<std::size_t> checkpoint_episodes;
  ReportOptions report;
  std::string output_dir = "out";
  unsigned jobs = 1;

  std::uint64_t run_seed(std::size_t run) const { return learner.seed + run; }

  void validate() const {
    if (map_path.empty()) throw ConfigError("config: map_path is required");
    if (noise && !(*noise >= 0.0 && *noise <= 1.0)) throw ConfigError("config: noise must lie in [0, 1]");
    learner.validate();
    if (!(beta_fixed > 0.0 && beta_fixed <= 1.0)) throw ConfigError("config: beta_fixed must lie in (0, 1]");
    if (num_episodes == 0) throw ConfigError("config: num_episodes must be at least 1");
    if (num_runs == 0) throw ConfigError("config: num_runs must be at least 1");
    if (!std::is_sorted(checkpoint_episodes.begin(), checkpoint_episodes.end()) ||
        std::adjacent_find(checkpoint_episodes.begin(), checkpoint_episodes.end()) != checkpoint_episodes.end())
      throw ConfigError("config: checkpoint_episodes must be strictly increasing");
    for (std::size_t e : checkpoint_episodes)
      if (e == 0 || e > num_episodes) throw ConfigError("config: checkpoint episode " + std::to_string(e) + " out of range");
    if (compare_algorithms.empty()) throw ConfigError("config: compare needs at least one algorithm");
    if (report.window == 0) throw ConfigError("config: window must be positive");
    if (!(report.threshold_fraction > 0.0 && report.threshold_fraction <= 1.0))
      throw ConfigError("config: threshold_fraction must lie in (0, 1]");
    if (!(report.final_fraction > 0.0 && report.final_fraction <= 1.0))
      throw ConfigError("config: final_fraction must lie in (0, 1]");
    if (jobs == 0) throw ConfigError("config: jobs must be at least 1");
  }
};

// JSON encoding. output_dir and jobs do not affect results and are left out,
// so a manifest is identical wherever and however it was produced.

inline nlohmann::json epsilon_to_json(const EpsilonSchedule& e) {
  if (e.kind == EpsilonSchedule::Kind::Constant) return {{"kind", "constant"}, {"value", e.value}};
  return {{"kind", "hyperbolic"}, {"scale", e.value}};
}

inline EpsilonSchedule epsilon_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "constant") return EpsilonSchedule::constant(j.at("value").get<double>());
  if (kind == "hyperbolic") return EpsilonSchedule::hyperbolic(j.at("scale").get<double>());
  throw ConfigError("config: unknown epsilon kind '" + kind + "'");
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  using nlohmann::json;
  json algs = json::array();
  for (Algorithm a : c.compare_algorithms) algs.push_back(to_string(a));
  json j{
      {"map_path", c.map_path},
      {"source_policy_paths", c.source_policy_paths},
      {"algorithm", to_string(c.algorithm)},
      {"compare_algorithms", algs},
      {"learner",
       {{"alpha_q", c.learner.alpha_q},
        {"alpha_beta", c.learner.alpha_beta},
        {"gamma", c.learner.gamma},
        {"epsilon", epsilon_to_json(c.learner.epsilon)},
        {"horizon", c.learner.horizon},
        {"q_init", c.learner.q_init},
        {"rho", c.learner.rho},
        {"theta_init", c.learner.theta_init},
        {"seed", c.learner.seed}}},
      {"beta_fixed", c.beta_fixed},
      {"num_episodes", c.num_episodes},
      {"num_runs", c.num_runs},
      {"checkpoint_episodes", c.checkpoint_episodes},
      {"report",
       {{"curve", c.report.curve == CurveKind::Cumulative ? "cumulative" : "window"},
        {"window", c.report.window},
        {"threshold_fraction", c.report.threshold_fraction},
        {"final_fraction", c.report.final_fraction}}},
  };
  j["noise"] = c.noise ? json(*c.noise) : json(nullptr);
  return j;
}

/// Applies the keys present in `j` on top of `base`. Accepts either a bare
/// config object or a manifest (whose "config" member is used).
inline ExperimentConfig config_from_json(const nlohmann::json& input, ExperimentConfig base = {}) {
  const nlohmann::json& j = input.contains("config") ? input.at("config") : input;
  try {
    auto get = [&](const nlohmann::json& obj, const char* key, auto& field) {
      if (obj.contains(key)) field = obj.at(key).get<std::remove_reference_t<decltype(field)>>();
    };
    get(j, "map_path", base.map_path);
    if (j.contains("noise")) {
      if (j.at("noise").is_null())
        base.noise.reset();
      else
        base.noise = j.at("noise").get<double>();
    }
    get(j, "source_policy_paths", base.source_policy_paths);
    if (j.contains("algorithm")) base.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    if (j.contains("compare_algorithms")) {
      base.compare_algorithms.clear();
      for (const auto& a : j.at("compare_algorithms")) base.compare_algorithms.push_back(parse_algorithm(a.get<std::string>()));
    }
    if (j.contains("learner")) {
      const auto& l = j.at("learner");
      get(l, "alpha_q", base.learner.alpha_q);
      get(l, "alpha_beta", base.learner.alpha_beta);
      get(l, "gamma", base.learner.gamma);
      if (l.contains("epsilon")) base.learner.epsilon = epsilon_from_json(l.at("epsilon"));
      get(l, "horizon", base.learner.horizon);
      get(l, "q_init", base.learner.q_init);
      get(l, "rho", base.learner.rho);
      get(l, "theta_init", base.learner.theta_init);
      get(l, "seed", base.learner.seed);
    }
    get(j, "beta_fixed", base.beta_fixed);
    get(j, "num_episodes", base.num_episodes);
    get(j, "num_runs", base.num_runs);
    get(j, "checkpoint_episodes", base.checkpoint_episodes);
    if (j.contains("report")) {
      const auto& r = j.at("report");
      if (r.contains("curve")) {
        const auto curve = r.at("curve").get<std::string>();
        if (curve == "cumulative")
          base.report.curve = CurveKind::Cumulative;
        else if (curve == "window")
          base.report.curve = CurveKind::Window;
        else
          throw ConfigError("config: unknown curve '" + curve + "'");
      }
      get(r, "window", base.report.window);
      get(r, "threshold_fraction", base.report.threshold_fraction);
      get(r, "final_fraction", base.report.final_fraction);
    }
    get(j, "output_dir", base.output_dir);
    get(j, "jobs", base.jobs);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return base;
}

inline ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  try {
    return config_from_json(nlohmann::json::parse(in), std::move(base));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

/// 64-bit FNV-1a; stable across platforms, used to fingerprint configs.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[i] = digits[v & 0xf];
  return s;
}

inline nlohmann::json make_manifest(const ExperimentConfig& cfg, const std::vector<Algorithm>& algorithms) {
  const nlohmann::json config = config_to_json(cfg);
  nlohmann::json seeds = nlohmann::json::array();
  for (std::size_t r = 0; r < cfg.num_runs; ++r) seeds.push_back(cfg.run_seed(r));
  nlohmann::json algs = nlohmann::json::array();
  for (Algorithm a : algorithms) algs.push_back(to_string(a));
  return {{"config", config}, {"config_hash", hex64(fnv1a64(config.dump()))}, {"seeds", seeds}, {"algorithms", algs}};
}

/// Map and source policies, loaded and validated before any run starts.
struct ExperimentInputs {
  GridWorld grid;
  std::vector<DeterministicPolicy> sources;
};

inline ExperimentInputs load_inputs(const ExperimentConfig& cfg) {
  cfg.validate();
  GridWorld grid = load_gridworld_file(cfg.map_path, cfg.noise);
  std::vector<DeterministicPolicy> sources;
  for (const auto& path : cfg.source_policy_paths)
    sources.push_back(load_policy_file(path, grid.num_states(), grid.num_actions()));
  return {std::move(grid), std::move(sources)};
}

struct RunOutput {
  RunMetrics metrics;
  std::optional<LearnerState> learner;  // CAPS variants
  std::optional<QTable> q_table;        // Q-learning
};

inline RunOutput run_single(const ExperimentConfig& cfg, const ExperimentInputs& in, Algorithm alg, std::size_t run) {
  LearnerConfig lc = cfg.learner;
  lc.seed = cfg.run_seed(run);
  RunOutput out;
  switch (alg) {
    case Algorithm::Caps: {
      auto r = train(in.grid, in.sources, lc, cfg.num_episodes, cfg.checkpoint_episodes);
      out.metrics = std::move(r.metrics);
      out.learner = std::move(r.state);
      break;
    }
    case Algorithm::CapsFixedBeta: {
      auto r = caps_fixed_beta_train(in.grid, in.sources, lc, cfg.beta_fixed, cfg.num_episodes, cfg.checkpoint_episodes);
      out.metrics = std::move(r.metrics);
      out.learner = std::move(r.state);
      break;
    }
    case Algorithm::QLearning: {
      auto r = q_learning_train(in.grid, lc, cfg.num_episodes);
      out.metrics = std::move(r.metrics);
      out.q_table = std::move(r.state.q);
      break;
    }
  }
  return out;
}

/// All runs of one algorithm, up to cfg.jobs at a time. Results are ordered
/// by run index regardless of completion order.
inline std::vector<RunOutput> run_all(const ExperimentConfig& cfg, const ExperimentInputs& in, Algorithm alg) {
  std::vector<RunOutput> outputs(cfg.num_runs);
  for (std::size_t begin = 0; begin < cfg.num_runs; begin += cfg.jobs) {
    const std::size_t end = std::min<std::size_t>(cfg.num_runs, begin + cfg.jobs);
    if (end - begin == 1) {
      outputs[begin] = run_single(cfg, in, alg, begin);
      continue;
    }
    std::vector<std::future<RunOutput>> batch;
    for (std::size_t r = begin; r < end; ++r)
      batch.push_back(std::async(std::launch::async, [&cfg, &in, alg, r] { return run_single(cfg, in, alg, r); }));
    for (std::size_t r = begin; r < end; ++r) outputs[r] = batch[r - begin].get();
  }
  return outputs;
}

inline std::string run_dir_name(std::size_t run) {
  std::string n = std::to_string(run);
  return "run_" + std::string(n.size() < 3 ? 3 - n.size() : 0, '0') + n;
}

inline std::string episode_dir_name(std::size_t episode) {
  std::string n = std::to_string(episode);
  return "episode_" + std::string(n.size() < 6 ? 6 - n.size() : 0, '0') + n;
}

/// Writes runs/, aggregate.csv and summary.csv for one algorithm under `dir`.
inline AggregateReport write_algorithm_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                                               const ExperimentInputs& in, const std::vector<RunOutput>& outputs) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<RunMetrics> metrics;
  for (std::size_t r = 0; r < outputs.size(); ++r) {
    const RunOutput& out = outputs[r];
    const fs::path run_dir = dir / "runs" / run_dir_name(r);
    fs::create_directories(run_dir);
    csv::write_file((run_dir / "returns.csv").string(), format_returns_csv(out.metrics));
    if (out.learner) {
      save_checkpoint((run_dir / "checkpoint.json").string(), *out.learner);
      for (const Snapshot& snap : out.metrics.snapshots) {
        const fs::path map_dir = run_dir / "maps" / episode_dir_name(snap.episode);
        fs::create_directories(map_dir);
        write_selection_map(map_dir.string(), selection_map_from(snap.selection, out.learner->library, in.grid));
        for (std::size_t o = 0; o < snap.betas.size(); ++o)
          write_termination_map(map_dir.string(),
                                termination_map_from(snap.betas[o], out.learner->library, OptionId{o}, in.grid));
      }
    }
    if (out.q_table) csv::write_file((run_dir / "q_table.json").string(), q_table_to_json(*out.q_table).dump(1) + "\n");
    metrics.push_back(out.metrics);
  }
  AggregateReport rep = aggregate(metrics, cfg.report);
  csv::write_file((dir / "aggregate.csv").string(), format_aggregate_csv(rep));
  csv::write_file((dir / "summary.csv").string(), format_summary_csv(rep));
  return rep;
}

inline void write_manifest(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                           const std::vector<Algorithm>& algorithms) {
  std::filesystem::create_directories(dir);
  csv::write_file((dir / "manifest.json").string(), make_manifest(cfg, algorithms).dump(2) + "\n");
}

struct ExperimentResult {
  AggregateReport report;
  std::vector<RunOutput> runs;
};

/// `num_runs` seeded runs of cfg.algorithm; writes the manifest, per-run
/// metrics and checkpoints, and the aggregate into cfg.output_dir.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const ExperimentInputs in = load_inputs(cfg);
  ExperimentResult res;
  res.runs = run_all(cfg, in, cfg.algorithm);
  write_manifest(cfg.output_dir, cfg, {cfg.algorithm});
  res.report = write_algorithm_outputs(cfg.output_dir, cfg, in, res.runs);
  return res;
}

struct ComparisonResult {
  std::vector<std::pair<Algorithm, AggregateReport>> reports;

  const AggregateReport& at(Algorithm a) const {
    for (const auto& [alg, rep] : reports)
      if (alg == a) return rep;
    throw UsageError("comparison has no results for " + to_string(a));
  }
};

/// Every algorithm in cfg.compare_algorithms on the same map and seeds, one
/// subdirectory each, plus column-aligned comparison files.
inline ComparisonResult run_comparison(const ExperimentConfig& cfg) {
  const ExperimentInputs in = load_inputs(cfg);
  const std::filesystem::path root(cfg.output_dir);
  write_manifest(root, cfg, cfg.compare_algorithms);
  ComparisonResult res;
  for (Algorithm alg : cfg.compare_algorithms) {
    const auto outputs = run_all(cfg, in, alg);
    res.reports.emplace_back(alg, write_algorithm_outputs(root / to_string(alg), cfg, in, outputs));
  }

  std::ostringstream curves;
  curves << "episode";
  for (const auto& [alg, rep] : res.reports) curves << ',' << to_string(alg) << "_mean," << to_string(alg) << "_stderr";
  curves << '\n';
  for (std::size_t e = 0; e < cfg.num_episodes; ++e) {
    curves << (e + 1);
    for (const auto& [alg, rep] : res.reports)
      curves << ',' << csv::format_double(rep.mean[e]) << ',' << csv::format_double(rep.std_error[e]);
    curves << '\n';
  }
  csv::write_file((root / "comparison.csv").string(), curves.str());

  std::ostringstream summary;
  summary << "algorithm,final_mean_return,median_episodes_to_threshold\n";
  for (const auto& [alg, rep] : res.reports) {
    summary << to_string(alg) << ',' << csv::format_double(rep.final_mean_return) << ',';
    if (const auto m = rep.median_episodes_to_threshold()) summary << csv::format_double(*m);
    summary << '\n';
  }
  csv::write_file((root / "comparison_summary.csv").string(), summary.str());
  return res;
}

}  // namespace caps
