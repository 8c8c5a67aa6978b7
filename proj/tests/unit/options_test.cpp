#include <gtest/gtest.h>

#include <cmath>

#include "caps/options.hpp"
#include "caps/rng.hpp"

using namespace caps;

TEST(TerminationProb, KnownValues) {
  EXPECT_EQ(termination_prob(0.0), 0.5);
  EXPECT_GT(termination_prob(20.0), 0.9999);
  // 1 / (1 + e^3) evaluated in extended precision.
  EXPECT_NEAR(termination_prob(-3.0), 0.04742587317756678, 1e-16);
}

// Above about 36.7 the sigmoid rounds to exactly 1 in double precision; the
// lower tail stays representable across the whole clip range.
TEST(TerminationProb, StrictlyInsideUnitInterval) {
  for (double th = -kThetaBound; th <= kThetaBound; th += 0.5) EXPECT_GT(termination_prob(th), 0.0);
  for (double th = -36.0; th <= 36.0; th += 0.5) EXPECT_LT(termination_prob(th), 1.0);
  EXPECT_EQ(termination_prob(kThetaBound), 1.0);
}

TEST(TerminationGrad, KnownValuesAndSymmetry) {
  EXPECT_EQ(termination_grad(0.0), 0.25);
  EXPECT_LT(termination_grad(20.0), 1e-8);
  EXPECT_LT(termination_grad(-20.0), 1e-8);
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const double th = -60.0 + 120.0 * rng.uniform01();
    EXPECT_EQ(termination_grad(th), termination_grad(-th));
    const double b = termination_prob(th);
    EXPECT_NEAR(termination_grad(th), b * (1.0 - b), 1e-15);
  }
}

TEST(TerminationGrad, MatchesCentralDifferences) {
  Rng rng(8);
  const double h = 1e-5;
  for (int i = 0; i < 1000; ++i) {
    const double th = -10.0 + 20.0 * rng.uniform01();
    const double fd = (termination_prob(th + h) - termination_prob(th - h)) / (2 * h);
    EXPECT_NEAR(termination_grad(th), fd, 1e-6);
  }
}

TEST(Library, SourcesThenPrimitives) {
  std::vector<DeterministicPolicy> sources(4, DeterministicPolicy::constant(5, ActionId{1}));
  const OptionLibrary lib = make_library(sources, 4, 5, 0.0);
  ASSERT_EQ(lib.size(), 8u);
  EXPECT_EQ(lib.num_source(), 4u);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(lib[OptionId{i}].id(), OptionId{i});
    EXPECT_EQ(lib[OptionId{i}].kind(), i < 4 ? OptionKind::Source : OptionKind::Primitive);
  }
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t s = 0; s < 5; ++s) EXPECT_EQ(lib[lib.primitive(ActionId{a})].action(StateId{s}), ActionId{a});
  for (const Option& o : lib.options())
    for (std::size_t s = 0; s < 5; ++s) EXPECT_EQ(o.termination_prob(StateId{s}), 0.5);
}

TEST(Library, EmptySourceListGivesPlainActions) {
  const OptionLibrary lib = make_library({}, 4, 3);
  EXPECT_EQ(lib.size(), 4u);
  EXPECT_EQ(lib.num_source(), 0u);
}

TEST(Library, EveryActionAvailableEverywhere) {
  Rng rng(2);
  std::vector<DeterministicPolicy> sources;
  for (int k = 0; k < 3; ++k) {
    std::vector<ActionId> acts;
    for (int s = 0; s < 10; ++s) acts.push_back(ActionId{rng.index(4)});
    sources.emplace_back(acts);
  }
  const OptionLibrary lib = make_library(sources, 4, 10);
  for (std::size_t s = 0; s < 10; ++s)
    for (std::size_t a = 0; a < 4; ++a) {
      bool found = false;
      for (const Option& o : lib.options()) found = found || o.action(StateId{s}) == ActionId{a};
      EXPECT_TRUE(found);
    }
}

TEST(Library, PartialSourceNamesMissingState) {
  std::vector<DeterministicPolicy> sources{DeterministicPolicy::constant(3, ActionId{0})};
  try {
    make_library(sources, 4, 5);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("state 3"), std::string::npos);
  }
  EXPECT_THROW(make_library({}, 0, 5), ConfigError);
}

TEST(Option, ThetaIsClipped) {
  OptionLibrary lib = make_library({}, 2, 2);
  lib[OptionId{0}].set_theta(StateId{1}, 1e6);
  EXPECT_EQ(lib[OptionId{0}].theta(StateId{1}), kThetaBound);
  lib[OptionId{0}].set_theta(StateId{1}, -1e6);
  EXPECT_EQ(lib[OptionId{0}].theta(StateId{1}), -kThetaBound);
}

TEST(PolicyFile, RoundTripAndComments) {
  const DeterministicPolicy p(std::vector<ActionId>{ActionId{3}, ActionId{0}, ActionId{2}});
  EXPECT_EQ(parse_policy(format_policy(p), 3, 4), p);
  EXPECT_EQ(parse_policy("# header\n2 2\n\n0 3\n1 0  # trailing\n", 3, 4), p);
}

TEST(PolicyFile, TotalityErrors) {
  auto message = [](const std::string& text) {
    try {
      parse_policy(text, 3, 4);
    } catch (const LoadError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("0 1\n2 1\n").find("missing action for state 1"), std::string::npos);
  EXPECT_NE(message("0 1\n0 2\n1 1\n2 1\n").find("duplicate entry for state 0"), std::string::npos);
  EXPECT_NE(message("0 1\n1 9\n2 1\n").find("out of range"), std::string::npos);
  EXPECT_NE(message("0 1\n1 x\n2 1\n").find("line 2"), std::string::npos);
}
