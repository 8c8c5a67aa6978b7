#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "caps/metrics.hpp"
#include "caps/rng.hpp"

using namespace caps;

namespace {

std::vector<RunMetrics> random_runs(std::size_t n, std::size_t episodes, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<RunMetrics> runs(n);
  for (std::size_t i = 0; i < n; ++i) {
    runs[i].seed = i;
    for (std::size_t e = 0; e < episodes; ++e) {
      runs[i].returns.push_back(rng.uniform01() * static_cast<double>(e) / static_cast<double>(episodes));
      runs[i].steps.push_back(rng.index(100));
    }
  }
  return runs;
}

}  // namespace

TEST(Curves, CumulativeAndWindow) {
  const std::vector<double> r{1, 2, 3, 4};
  EXPECT_EQ(cumulative_average(r), (std::vector<double>{1, 1.5, 2, 2.5}));
  EXPECT_EQ(window_average(r, 2), (std::vector<double>{1, 1.5, 2.5, 3.5}));
  EXPECT_THROW(window_average(r, 0), ConfigError);
}

TEST(Curves, FinalMeanUsesTrailingFraction) {
  const std::vector<double> r{0, 0, 0, 0, 0, 0, 0, 0, 2, 4};
  EXPECT_EQ(final_mean_return(r, 0.2), 3.0);
  EXPECT_EQ(final_mean_return(r, 0.01), 4.0);
  EXPECT_THROW(final_mean_return(std::vector<double>{}, 0.1), UsageError);
}

TEST(Threshold, FirstCrossingIsOneBased) {
  const std::vector<double> c{0.1, 0.5, 0.7, 0.9};
  EXPECT_EQ(episodes_to_threshold(c, 0.7), 3u);
  EXPECT_EQ(episodes_to_threshold(c, 0.05), 1u);
  EXPECT_FALSE(episodes_to_threshold(c, 1.0).has_value());
}

TEST(Threshold, MonotoneUnderDomination) {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> low(50), high(50);
    for (std::size_t i = 0; i < 50; ++i) {
      low[i] = rng.uniform01();
      high[i] = low[i] + rng.uniform01() * 0.3;
    }
    const double th = rng.uniform01();
    const auto a = episodes_to_threshold(high, th);
    const auto b = episodes_to_threshold(low, th);
    if (b) {
      ASSERT_TRUE(a.has_value());
      EXPECT_LE(*a, *b);
    }
  }
}

TEST(Aggregate, SingleRunIsIdentity) {
  const auto runs = random_runs(1, 30, 1);
  const auto rep = aggregate(runs);
  EXPECT_EQ(rep.mean, cumulative_average(runs[0].returns));
  for (double se : rep.std_error) EXPECT_EQ(se, 0.0);
  EXPECT_EQ(rep.final_mean_return, final_mean_return(runs[0].returns, 0.1));
}

TEST(Aggregate, OrderIndependentAndBounded) {
  auto runs = random_runs(10, 200, 2);
  ReportOptions opt;
  opt.curve = CurveKind::Window;
  opt.window = 7;
  const auto ref = aggregate(runs, opt);
  std::mt19937 shuffle_engine(3);
  for (int k = 0; k < 5; ++k) {
    std::shuffle(runs.begin(), runs.end(), shuffle_engine);
    const auto rep = aggregate(runs, opt);
    EXPECT_EQ(rep.mean, ref.mean);
    EXPECT_EQ(rep.std_error, ref.std_error);
    EXPECT_EQ(rep.final_mean_return, ref.final_mean_return);
  }
  for (std::size_t e = 0; e < ref.mean.size(); ++e) {
    EXPECT_LE(ref.min[e], ref.mean[e]);
    EXPECT_LE(ref.mean[e], ref.max[e]);
  }
}

TEST(Aggregate, RejectsMismatchedRuns) {
  auto runs = random_runs(2, 10, 4);
  runs[1].returns.pop_back();
  EXPECT_THROW(aggregate(runs), UsageError);
  EXPECT_THROW(aggregate(std::vector<RunMetrics>{}), UsageError);
}

TEST(Aggregate, MedianEpisodesToThreshold) {
  AggregateReport rep;
  for (std::size_t v : {5u, 1u, 9u, 3u}) rep.runs.push_back({0, 0.0, v});
  EXPECT_EQ(rep.median_episodes_to_threshold(), 4.0);
  rep.runs.push_back({0, 0.0, std::nullopt});
  EXPECT_FALSE(rep.median_episodes_to_threshold().has_value());
}

TEST(Summary, ThresholdIsRelativeToCurveLevel) {
  RunMetrics run;
  run.returns.assign(100, 0.0);
  for (std::size_t i = 50; i < 100; ++i) run.returns[i] = 1.0;
  ReportOptions opt;  // cumulative curve, final level is its last 10 values
  const RunSummary s = summarize_run(run, opt);
  EXPECT_EQ(s.final_mean_return, 1.0);
  ASSERT_TRUE(s.episodes_to_threshold.has_value());
  const auto curve = cumulative_average(run.returns);
  EXPECT_GE(curve[*s.episodes_to_threshold - 1], 0.8 * final_mean_return(curve, 0.1));
  EXPECT_LT(curve[*s.episodes_to_threshold - 2], 0.8 * final_mean_return(curve, 0.1));
}

TEST(Csv, ReturnsRoundTripExactly) {
  const auto runs = random_runs(1, 40, 5);
  const RunMetrics back = parse_returns_csv(format_returns_csv(runs[0]));
  EXPECT_EQ(back.returns, runs[0].returns);
  EXPECT_EQ(back.steps, runs[0].steps);
}

TEST(Csv, AggregateAndSummaryRoundTrip) {
  const auto rep = aggregate(random_runs(4, 25, 6));
  AggregateReport back;
  parse_aggregate_csv(format_aggregate_csv(rep), back);
  EXPECT_EQ(back.mean, rep.mean);
  EXPECT_EQ(back.std_error, rep.std_error);
  EXPECT_EQ(back.min, rep.min);
  EXPECT_EQ(back.max, rep.max);
  const auto summary = parse_summary_csv(format_summary_csv(rep));
  ASSERT_EQ(summary.size(), rep.runs.size());
  for (std::size_t i = 0; i < summary.size(); ++i) {
    EXPECT_EQ(summary[i].seed, rep.runs[i].seed);
    EXPECT_EQ(summary[i].final_mean_return, rep.runs[i].final_mean_return);
    EXPECT_EQ(summary[i].episodes_to_threshold, rep.runs[i].episodes_to_threshold);
  }
}

TEST(Csv, FormatDoubleRoundTrips) {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double v = (rng.uniform01() - 0.5) * std::pow(10.0, static_cast<double>(rng.index(20)) - 10.0);
    EXPECT_EQ(csv::parse_double(csv::format_double(v)), v);
  }
  EXPECT_THROW(csv::parse_double("1.5x"), LoadError);
  EXPECT_THROW(csv::parse("a,b\n1\n"), LoadError);
}
