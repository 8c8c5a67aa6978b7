// Command-line front end: train, compare, export-maps, oracle.

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "caps/caps.hpp"

namespace {

using namespace caps;

// Flag values are kept separately from the config so that only flags the
// user actually passed override what a config file provides.
struct ConfigFlags {
  std::string config_path;
  std::string map_path;
  double noise = 0.0;
  std::vector<std::string> sources;
  std::string algorithm;
  std::vector<std::string> algorithms;
  double alpha_q = 0, alpha_beta = 0, gamma = 0, epsilon_scale = 0, epsilon_constant = 0;
  int horizon = 0;
  double q_init = 0, rho = 0, theta_init = 0, beta_fixed = 0;
  std::uint64_t seed = 0;
  std::size_t episodes = 0, runs = 0, window = 0;
  std::vector<std::size_t> checkpoints;
  std::string curve;
  double threshold_fraction = 0, final_fraction = 0;
  std::string out;
  unsigned jobs = 0;

  std::vector<std::pair<std::string, CLI::Option*>> opts;

  template <class T>
  void add(CLI::App& app, const std::string& name, T& field, const std::string& help) {
    opts.emplace_back(name, app.add_option(name, field, help));
  }

  bool given(const std::string& name) const {
    for (const auto& [n, o] : opts)
      if (n == name) return o->count() > 0;
    return false;
  }

  void attach(CLI::App& app, bool compare) {
    add(app, "--config", config_path, "JSON config or manifest; flags override its values");
    add(app, "--map", map_path, "map file");
    add(app, "--noise", noise, "transition noise, overrides the map header");
    add(app, "--source", sources, "source policy file (repeatable)");
    if (compare)
      add(app, "--algorithms", algorithms, "algorithms to compare (caps, caps_fixed_beta, q_learning)");
    else
      add(app, "--algorithm", algorithm, "caps, caps_fixed_beta or q_learning");
    add(app, "--alpha-q", alpha_q, "option-value step size");
    add(app, "--alpha-beta", alpha_beta, "termination step size");
    add(app, "--gamma", gamma, "discount factor");
    add(app, "--epsilon-scale", epsilon_scale, "hyperbolic exploration scale c in c/(k+c)");
    add(app, "--epsilon-constant", epsilon_constant, "constant exploration rate");
    add(app, "--horizon", horizon, "maximum steps per episode");
    add(app, "--q-init", q_init, "initial option value");
    add(app, "--rho", rho, "termination regularizer");
    add(app, "--theta-init", theta_init, "initial termination logit");
    add(app, "--beta-fixed", beta_fixed, "termination probability for caps_fixed_beta");
    add(app, "--seed", seed, "base seed; run i uses seed + i");
    add(app, "--episodes", episodes, "episodes per run");
    add(app, "--runs", runs, "number of seeded runs");
    add(app, "--checkpoints", checkpoints, "episodes after which maps are exported");
    add(app, "--curve", curve, "cumulative or window");
    add(app, "--window", window, "window length for the window curve");
    add(app, "--threshold-fraction", threshold_fraction, "fraction of the final level for episodes-to-threshold");
    add(app, "--final-fraction", final_fraction, "trailing fraction of episodes used as the final level");
    add(app, "--out", out, "output directory");
    add(app, "--jobs", jobs, "runs executed concurrently");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig c;
    if (!config_path.empty()) c = load_config_file(config_path, c);
    if (given("--map")) c.map_path = map_path;
    if (given("--noise")) c.noise = noise;
    if (given("--source")) c.source_policy_paths = sources;
    if (given("--algorithm")) c.algorithm = parse_algorithm(algorithm);
    if (given("--algorithms")) {
      c.compare_algorithms.clear();
      for (const auto& a : algorithms) c.compare_algorithms.push_back(parse_algorithm(a));
    }
    if (given("--alpha-q")) c.learner.alpha_q = alpha_q;
    if (given("--alpha-beta")) c.learner.alpha_beta = alpha_beta;
    if (given("--gamma")) c.learner.gamma = gamma;
    if (given("--epsilon-scale") && given("--epsilon-constant"))
      throw UsageError("--epsilon-scale and --epsilon-constant are mutually exclusive");
    if (given("--epsilon-scale")) c.learner.epsilon = EpsilonSchedule::hyperbolic(epsilon_scale);
    if (given("--epsilon-constant")) c.learner.epsilon = EpsilonSchedule::constant(epsilon_constant);
    if (given("--horizon")) c.learner.horizon = horizon;
    if (given("--q-init")) c.learner.q_init = q_init;
    if (given("--rho")) c.learner.rho = rho;
    if (given("--theta-init")) c.learner.theta_init = theta_init;
    if (given("--beta-fixed")) c.beta_fixed = beta_fixed;
    if (given("--seed")) c.learner.seed = seed;
    if (given("--episodes")) c.num_episodes = episodes;
    if (given("--runs")) c.num_runs = runs;
    if (given("--checkpoints")) c.checkpoint_episodes = checkpoints;
    if (given("--curve")) {
      if (curve == "cumulative")
        c.report.curve = CurveKind::Cumulative;
      else if (curve == "window")
        c.report.curve = CurveKind::Window;
      else
        throw ConfigError("unknown curve '" + curve + "' (expected cumulative or window)");
    }
    if (given("--window")) c.report.window = window;
    if (given("--threshold-fraction")) c.report.threshold_fraction = threshold_fraction;
    if (given("--final-fraction")) c.report.final_fraction = final_fraction;
    if (given("--out")) c.output_dir = out;
    if (given("--jobs")) c.jobs = jobs;
    c.validate();
    return c;
  }
};

void print_report(const std::string& label, const AggregateReport& rep) {
  std::cout << label << ": final mean return " << csv::format_double(rep.final_mean_return);
  if (const auto m = rep.median_episodes_to_threshold())
    std::cout << ", median episodes to threshold " << csv::format_double(*m);
  else
    std::cout << ", threshold not reached in every run";
  std::cout << '\n';
}

std::optional<Position> parse_position(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto parts = csv::split(text);
  if (parts.size() != 2) throw UsageError("expected ROW,COL but got '" + text + "'");
  return Position{static_cast<int>(csv::parse_integer(parts[0])), static_cast<int>(csv::parse_integer(parts[1]))};
}

int run(int argc, char** argv) {
  CLI::App app{"Context-aware policy reuse on tabular gridworlds"};
  app.require_subcommand(1);

  ConfigFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "seeded runs of one algorithm");
  train_flags.attach(*train_cmd, false);

  ConfigFlags compare_flags;
  auto* compare_cmd = app.add_subcommand("compare", "several algorithms on the same map and seeds");
  compare_flags.attach(*compare_cmd, true);

  std::string cp_path, em_map, em_out;
  double em_noise = 0.0;
  std::vector<std::size_t> em_options;
  auto* export_cmd = app.add_subcommand("export-maps", "selection, termination and visit maps from a checkpoint");
  export_cmd->add_option("--checkpoint", cp_path, "checkpoint.json written by train")->required();
  export_cmd->add_option("--map", em_map, "map the checkpoint was trained on")->required();
  auto* em_noise_opt = export_cmd->add_option("--noise", em_noise, "transition noise");
  export_cmd->add_option("--option", em_options, "option ids for termination maps (default: all)");
  export_cmd->add_option("--out", em_out, "output directory")->required();

  std::string or_map, or_goal, or_policy, or_values;
  double or_noise = 0.0, or_gamma = 0.95;
  auto* oracle_cmd = app.add_subcommand("oracle", "value-iteration solution of a map");
  oracle_cmd->add_option("--map", or_map, "map file")->required();
  auto* or_noise_opt = oracle_cmd->add_option("--noise", or_noise, "transition noise");
  oracle_cmd->add_option("--goal", or_goal, "ROW,COL replacing the map's goal");
  oracle_cmd->add_option("--gamma", or_gamma, "discount factor");
  oracle_cmd->add_option("--policy-out", or_policy, "write the greedy optimal policy here");
  oracle_cmd->add_option("--values-out", or_values, "write state,row,col,value,optimal_actions CSV here");

  CLI11_PARSE(app, argc, argv);

  if (*train_cmd) {
    const ExperimentConfig cfg = train_flags.resolve();
    const auto res = run_experiment(cfg);
    print_report(to_string(cfg.algorithm), res.report);
    double wall = 0.0;
    for (const auto& r : res.runs) wall += r.metrics.wall_seconds;
    std::cout << "training time " << wall << " s, output in " << cfg.output_dir << '\n';
  } else if (*compare_cmd) {
    const ExperimentConfig cfg = compare_flags.resolve();
    const auto res = run_comparison(cfg);
    for (const auto& [alg, rep] : res.reports) print_report(to_string(alg), rep);
    std::cout << "output in " << cfg.output_dir << '\n';
  } else if (*export_cmd) {
    const GridWorld grid =
        load_gridworld_file(em_map, em_noise_opt->count() ? std::optional<double>(em_noise) : std::nullopt);
    const LearnerState st = load_checkpoint(cp_path);
    std::filesystem::create_directories(em_out);
    write_selection_map(em_out, export_selection_map(st, grid));
    if (em_options.empty())
      for (std::size_t o = 0; o < st.library.size(); ++o) em_options.push_back(o);
    for (std::size_t o : em_options) write_termination_map(em_out, export_termination_map(st, grid, OptionId{o}));
    csv::write_file(em_out + "/visits.csv", format_layer(export_visit_map(st, grid)));
    std::cout << "maps written to " << em_out << '\n';
  } else if (*oracle_cmd) {
    GridWorld grid =
        load_gridworld_file(or_map, or_noise_opt->count() ? std::optional<double>(or_noise) : std::nullopt);
    if (const auto goal = parse_position(or_goal)) grid = grid.with_goal(*goal);
    const OptimalSolution sol = value_iteration(grid, or_gamma);
    std::vector<ActionId> greedy;
    for (std::size_t s = 0; s < grid.num_states(); ++s) greedy.push_back(sol.greedy_action(StateId{s}));
    const DeterministicPolicy policy(std::move(greedy));
    if (!or_policy.empty()) save_policy_file(or_policy, policy);
    if (!or_values.empty()) {
      std::ostringstream out;
      out << "state,row,col,value,optimal_actions\n";
      for (std::size_t s = 0; s < grid.num_states(); ++s) {
        const Position p = grid.position_of(StateId{s});
        out << s << ',' << p.row << ',' << p.col << ',' << csv::format_double(sol.v_star[s]) << ',';
        for (std::size_t k = 0; k < sol.optimal_action_sets[s].size(); ++k)
          out << (k ? " " : "") << action_name(sol.optimal_action_sets[s][k]);
        out << '\n';
      }
      csv::write_file(or_values, out.str());
    }
    std::cout << grid.num_states() << " states, " << sol.iterations << " sweeps, Bellman residual "
              << sol.bellman_residual << '\n';
    if (or_policy.empty() && or_values.empty()) std::cout << format_policy(policy);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const caps::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
