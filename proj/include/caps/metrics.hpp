#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "caps/csv.hpp"
#include "caps/error.hpp"
#include "caps/value_table.hpp"

namespace caps {

/// Learner state captured at the end of a checkpoint episode.
struct Snapshot {
  std::size_t episode = 0;
  GreedySelection selection;
  std::vector<std::vector<double>> betas;  // [option][state]
};

/// Everything recorded for one training run.
struct RunMetrics {
  std::uint64_t seed = 0;
  std::vector<double> returns;     // discounted return per episode
  std::vector<std::size_t> steps;  // episode lengths
  std::vector<Snapshot> snapshots;
  double wall_seconds = 0.0;  // not part of any exported file
};

enum class CurveKind { Cumulative, Window };

struct ReportOptions {
  CurveKind curve = CurveKind::Cumulative;
  std::size_t window = 100;
  double threshold_fraction = 0.8;
  double final_fraction = 0.1;
};

/// Running mean of returns from episode 1.
inline std::vector<double> cumulative_average(std::span<const double> returns) {
  std::vector<double> out(returns.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < returns.size(); ++i) {
    sum += returns[i];
    out[i] = sum / static_cast<double>(i + 1);
  }
  return out;
}

/// Trailing mean over the last `window` episodes (fewer at the start).
inline std::vector<double> window_average(std::span<const double> returns, std::size_t window) {
  if (window == 0) throw ConfigError("window_average: window must be positive");
  std::vector<double> out(returns.size());
  for (std::size_t i = 0; i < returns.size(); ++i) {
    const std::size_t lo = i + 1 >= window ? i + 1 - window : 0;
    double sum = 0.0;
    for (std::size_t j = lo; j <= i; ++j) sum += returns[j];
    out[i] = sum / static_cast<double>(i + 1 - lo);
  }
  return out;
}

inline std::vector<double> return_curve(std::span<const double> returns, const ReportOptions& opt) {
  return opt.curve == CurveKind::Cumulative ? cumulative_average(returns) : window_average(returns, opt.window);
}

/// Mean raw return over the final `fraction` of episodes (at least one).
inline double final_mean_return(std::span<const double> returns, double fraction) {
  if (returns.empty()) throw UsageError("final_mean_return: no episodes");
  const auto n = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(returns.size())));
  const std::size_t count = std::clamp<std::size_t>(n, 1, returns.size());
  double sum = 0.0;
  for (std::size_t i = returns.size() - count; i < returns.size(); ++i) sum += returns[i];
  return sum / static_cast<double>(count);
}

/// First 1-based episode whose curve value reaches `threshold`.
inline std::optional<std::size_t> episodes_to_threshold(std::span<const double> curve, double threshold) {
  for (std::size_t i = 0; i < curve.size(); ++i)
    if (curve[i] >= threshold) return i + 1;
  return std::nullopt;
}

struct RunSummary {
  std::uint64_t seed = 0;
  double final_mean_return = 0.0;
  std::optional<std::size_t> episodes_to_threshold;
};

inline RunSummary summarize_run(const RunMetrics& run, const ReportOptions& opt) {
  RunSummary s;
  s.seed = run.seed;
  s.final_mean_return = final_mean_return(run.returns, opt.final_fraction);
  // The threshold is relative to the level the curve itself settles at, so
  // a cumulative curve is compared against its own tail rather than raw returns.
  const auto curve = return_curve(run.returns, opt);
  const double level = final_mean_return(curve, opt.final_fraction);
  s.episodes_to_threshold = episodes_to_threshold(curve, opt.threshold_fraction * level);
  return s;
}

/// Cross-run statistics of the return curve. Per-episode statistics are
/// computed over sorted values so the result does not depend on run order.
struct AggregateReport {
  ReportOptions options;
  std::vector<double> mean;
  std::vector<double> std_error;
  std::vector<double> min;
  std::vector<double> max;
  std::vector<RunSummary> runs;
  double final_mean_return = 0.0;

  std::optional<double> median_episodes_to_threshold() const {
    std::vector<double> v;
    for (const auto& r : runs) {
      if (!r.episodes_to_threshold) return std::nullopt;
      v.push_back(static_cast<double>(*r.episodes_to_threshold));
    }
    if (v.empty()) return std::nullopt;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  }
};

namespace detail {

inline double sorted_sum(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  return std::accumulate(v.begin(), v.end(), 0.0);
}

}  // namespace detail

inline AggregateReport aggregate(std::span<const RunMetrics> runs, const ReportOptions& opt = {}) {
  if (runs.empty()) throw UsageError("aggregate: no runs");
  const std::size_t n_ep = runs.front().returns.size();
  for (const auto& r : runs)
    if (r.returns.size() != n_ep) throw UsageError("aggregate: runs have different episode counts");

  AggregateReport rep;
  rep.options = opt;
  std::vector<std::vector<double>> curves;
  curves.reserve(runs.size());
  for (const auto& r : runs) {
    curves.push_back(return_curve(r.returns, opt));
    rep.runs.push_back(summarize_run(r, opt));
  }

  const auto n = static_cast<double>(runs.size());
  rep.mean.resize(n_ep);
  rep.std_error.resize(n_ep);
  rep.min.resize(n_ep);
  rep.max.resize(n_ep);
  std::vector<double> column(runs.size());
  for (std::size_t e = 0; e < n_ep; ++e) {
    for (std::size_t r = 0; r < runs.size(); ++r) column[r] = curves[r][e];
    const double mean = detail::sorted_sum(column) / n;
    // column is now sorted
    rep.min[e] = column.front();
    rep.max[e] = column.back();
    rep.mean[e] = std::clamp(mean, rep.min[e], rep.max[e]);
    if (runs.size() > 1) {
      std::vector<double> sq(runs.size());
      for (std::size_t r = 0; r < runs.size(); ++r) sq[r] = (column[r] - mean) * (column[r] - mean);
      const double var = detail::sorted_sum(sq) / (n - 1.0);
      rep.std_error[e] = std::sqrt(var / n);
    }
  }
  std::vector<double> finals;
  for (const auto& s : rep.runs) finals.push_back(s.final_mean_return);
  rep.final_mean_return = detail::sorted_sum(finals) / n;
  return rep;
}

// CSV encodings.

inline std::string format_returns_csv(const RunMetrics& run) {
  std::ostringstream out;
  out << "episode,return,steps\n";
  for (std::size_t i = 0; i < run.returns.size(); ++i)
    out << (i + 1) << ',' << csv::format_double(run.returns[i]) << ',' << (i < run.steps.size() ? run.steps[i] : 0)
        << '\n';
  return out.str();
}

inline RunMetrics parse_returns_csv(const std::string& text) {
  const auto t = csv::parse(text);
  if (t.header != std::vector<std::string>{"episode", "return", "steps"}) throw LoadError("returns csv: bad header");
  RunMetrics run;
  for (const auto& row : t.rows) {
    if (csv::parse_integer(row[0]) != static_cast<long long>(run.returns.size() + 1))
      throw LoadError("returns csv: episodes out of order");
    run.returns.push_back(csv::parse_double(row[1]));
    run.steps.push_back(static_cast<std::size_t>(csv::parse_integer(row[2])));
  }
  return run;
}

inline std::string format_aggregate_csv(const AggregateReport& rep) {
  std::ostringstream out;
  out << "episode,mean,stderr,min,max\n";
  for (std::size_t i = 0; i < rep.mean.size(); ++i)
    out << (i + 1) << ',' << csv::format_double(rep.mean[i]) << ',' << csv::format_double(rep.std_error[i]) << ','
        << csv::format_double(rep.min[i]) << ',' << csv::format_double(rep.max[i]) << '\n';
  return out.str();
}

inline void parse_aggregate_csv(const std::string& text, AggregateReport& rep) {
  const auto t = csv::parse(text);
  if (t.header != std::vector<std::string>{"episode", "mean", "stderr", "min", "max"})
    throw LoadError("aggregate csv: bad header");
  rep.mean.clear();
  rep.std_error.clear();
  rep.min.clear();
  rep.max.clear();
  for (const auto& row : t.rows) {
    rep.mean.push_back(csv::parse_double(row[1]));
    rep.std_error.push_back(csv::parse_double(row[2]));
    rep.min.push_back(csv::parse_double(row[3]));
    rep.max.push_back(csv::parse_double(row[4]));
  }
}

/// One row per run; an empty episodes_to_threshold field means never reached.
inline std::string format_summary_csv(const AggregateReport& rep) {
  std::ostringstream out;
  out << "run,seed,final_mean_return,episodes_to_threshold\n";
  for (std::size_t i = 0; i < rep.runs.size(); ++i) {
    const auto& r = rep.runs[i];
    out << i << ',' << r.seed << ',' << csv::format_double(r.final_mean_return) << ',';
    if (r.episodes_to_threshold) out << *r.episodes_to_threshold;
    out << '\n';
  }
  return out.str();
}

inline std::vector<RunSummary> parse_summary_csv(const std::string& text) {
  const auto t = csv::parse(text);
  if (t.header != std::vector<std::string>{"run", "seed", "final_mean_return", "episodes_to_threshold"})
    throw LoadError("summary csv: bad header");
  std::vector<RunSummary> out;
  for (const auto& row : t.rows) {
    RunSummary s;
    s.seed = static_cast<std::uint64_t>(csv::parse_integer(row[1]));
    s.final_mean_return = csv::parse_double(row[2]);
    if (!row[3].empty()) s.episodes_to_threshold = static_cast<std::size_t>(csv::parse_integer(row[3]));
    out.push_back(s);
  }
  return out;
}

}  // namespace caps
