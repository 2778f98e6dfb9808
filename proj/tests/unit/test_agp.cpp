// Copyright 2026 The gtpar Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "gtpar/agp.hpp"
#include "gtpar/errors.hpp"
#include "gtpar/graph_gen.hpp"
#include "json.hpp"

namespace gtpar {
namespace {

CostProfile flat_profile(double alpha, double beta, int max_gpus) {
  CostProfile p;
  p.hidden = 16;
  p.alpha_1 = alpha;
  for (int i = 2; i <= max_gpus; ++i) {
    p.set_beta(StrategyKind::kGpAg, i, beta);
    p.set_beta(StrategyKind::kGpA2a, i, beta);
  }
  return p;
}

TEST(EstimateIterTime, SingleGpuIsComputeOnly) {
  const CostProfile p = flat_profile(2e-9, 1e-9, 2);
  EXPECT_EQ(estimate_iter_time(p, StrategyKind::kGpAg, 1, 100000, 1000000), 2e-9 * 1e6);
}

TEST(EstimateIterTime, TwoGpusAddCommunication) {
  const CostProfile p = flat_profile(2e-9, 1e-9, 2);
  EXPECT_NEAR(estimate_iter_time(p, StrategyKind::kGpAg, 2, 100000, 1000000), 1.1e-3, 1e-15);
}

TEST(EstimateIterTime, LinearInEdges) {
  const CostProfile p = flat_profile(3e-9, 1e-9, 4);
  const double base = estimate_iter_time(p, StrategyKind::kGpA2a, 4, 1000, 0);
  const double t1 = estimate_iter_time(p, StrategyKind::kGpA2a, 4, 1000, 5000) - base;
  const double t2 = estimate_iter_time(p, StrategyKind::kGpA2a, 4, 1000, 10000) - base;
  EXPECT_NEAR(t2, 2 * t1, 1e-18);
}

TEST(EstimateIterTime, MissingCoefficientNamesTheGap) {
  const CostProfile p = flat_profile(1e-9, 1e-9, 2);
  try {
    estimate_iter_time(p, StrategyKind::kGpA2a, 4, 10, 10);
    FAIL();
  } catch (const ProfileError& e) {
    EXPECT_NE(std::string(e.what()).find("(gp-a2a, 4)"), std::string::npos);
  }
}

TEST(SpeedupCondition, ConstantBetaAlwaysScales) {
  const CostProfile p = flat_profile(1e-9, 5e-6, 8);
  EXPECT_TRUE(speedup_condition(p, StrategyKind::kGpAg, 2, 4, 0.0));
}

TEST(SpeedupCondition, FromOneGpuReducesToScore) {
  CostProfile p = flat_profile(1e-9, 1e-9, 4);
  p.set_beta(StrategyKind::kGpAg, 4, 3e-9);
  const double score = 4 * 3e-9 / 3;
  EXPECT_TRUE(speedup_condition(p, StrategyKind::kGpAg, 1, 4, score));
  EXPECT_FALSE(speedup_condition(p, StrategyKind::kGpAg, 1, 4, score * 0.999));
}

TEST(SpeedupCondition, DoublingBetaWithSmallBudgetFails) {
  CostProfile p = flat_profile(1e-9, 1e-6, 4);
  p.set_beta(StrategyKind::kGpA2a, 4, 2e-6);
  // LHS = 4 * (2e-6 - 1e-6) / 1 = 4e-6.
  EXPECT_FALSE(speedup_condition(p, StrategyKind::kGpA2a, 2, 2, 1e-6));
  EXPECT_TRUE(speedup_condition(p, StrategyKind::kGpA2a, 2, 2, 5e-6));
  EXPECT_THROW(speedup_condition(p, StrategyKind::kGpA2a, 2, 1, 1.0), ArgumentError);
}

TEST(AgpSelect, OneGpuIsSingleWorker) {
  const Selection s = agp_select({100, 1000}, 1, 1.0, CostProfile{});
  EXPECT_EQ(s.plan.strategy, StrategyKind::kSingleWorker);
  EXPECT_EQ(s.plan.gpus, 1);
  EXPECT_TRUE(s.candidates.empty());
}

TEST(AgpSelect, CheaperAllToAllWinsAtEight) {
  CostProfile p;
  p.alpha_1 = 1e-9;
  for (int i = 2; i <= 8; ++i) {
    p.set_beta(StrategyKind::kGpAg, i, 1e-6 * i);
    p.set_beta(StrategyKind::kGpA2a, i, 2e-6 / i);
  }
  const Selection s = agp_select({10000, 1000000}, 8, 1.0, p);
  EXPECT_EQ(s.plan.strategy, StrategyKind::kGpA2a);
  EXPECT_EQ(s.plan.gpus, 8);
  // Brute force over all candidates.
  double best = INFINITY;
  for (int i = 2; i <= 8; ++i) {
    for (StrategyKind c : {StrategyKind::kGpAg, StrategyKind::kGpA2a}) {
      best = std::min(best, i * p.beta(c, i) / (i - 1));
    }
  }
  EXPECT_EQ(s.plan.score, best);
  EXPECT_EQ(s.candidates.size(), 14u);
}

TEST(AgpSelect, InfeasibleEverywhereFallsBack) {
  const CostProfile p = flat_profile(1e-9, 1.0, 4);
  const Selection s = agp_select({1000, 5000}, 4, 1e-3, p);
  EXPECT_EQ(s.plan.strategy, StrategyKind::kSingleWorker);
  EXPECT_EQ(s.plan.gpus, 1);
  EXPECT_EQ(s.plan.predicted_iter_time, 1e-3);
  ASSERT_FALSE(s.warnings.empty());
}

TEST(AgpSelect, TiesPreferFewerGpusThenGpAg) {
  CostProfile p;
  p.alpha_1 = 1e-9;
  p.set_beta(StrategyKind::kGpAg, 2, 1e-9);
  p.set_beta(StrategyKind::kGpA2a, 2, 1e-9);
  p.set_beta(StrategyKind::kGpAg, 3, 2e-9 * 2 / 3);  // same score as i=2
  p.set_beta(StrategyKind::kGpA2a, 3, 2e-9 * 2 / 3);
  const Selection s = agp_select({100, 1000}, 3, 1.0, p);
  EXPECT_EQ(s.plan.strategy, StrategyKind::kGpAg);
  EXPECT_EQ(s.plan.gpus, 2);
}

TEST(AgpSelect, SkipsAllToAllWhenHeadsDoNotDivide) {
  CostProfile p;
  p.alpha_1 = 1e-9;
  p.set_beta(StrategyKind::kGpAg, 2, 1e-6);
  p.set_beta(StrategyKind::kGpA2a, 2, 1e-9);
  p.set_beta(StrategyKind::kGpAg, 3, 1e-6);
  const Selection s = agp_select({100, 1000, 0, 4}, 3, 1.0, p);
  EXPECT_EQ(s.plan.strategy, StrategyKind::kGpA2a);
  EXPECT_EQ(s.plan.gpus, 2);
  EXPECT_EQ(s.candidates[3].note, "heads not divisible by gpus");
}

TEST(AgpSelect, RejectsMismatchedHiddenDimension) {
  CostProfile p = flat_profile(1e-9, 1e-9, 2);
  EXPECT_THROW(agp_select({100, 1000, 32, 0}, 2, 1.0, p), ProfileError);
}

TEST(AgpSelect, WarnsWhenTimeModelDisagrees) {
  CostProfile p;
  p.alpha_1 = 1e-9;
  // Score 2*b/1 at i=2 vs 8*b/7 at i=8: with b8 slightly larger the score
  // prefers i=2, while the compute term favours i=8.
  p.set_beta(StrategyKind::kGpAg, 2, 1.0e-6);
  p.set_beta(StrategyKind::kGpA2a, 2, 1.0e-6);
  for (int i = 3; i <= 8; ++i) {
    p.set_beta(StrategyKind::kGpAg, i, 1.9e-6);
    p.set_beta(StrategyKind::kGpA2a, i, 1.9e-6);
  }
  const Selection s = agp_select({1000, 100000}, 8, 1.0, p);
  EXPECT_EQ(s.plan.gpus, 2);
  EXPECT_FALSE(s.warnings.empty());
}

TEST(AgpSelect, DatasetProfilesLeadToDifferentPlans) {
  // Dense protein-like graph: the all-gather path is cheap relative to compute.
  CostProfile proteins;
  proteins.alpha_1 = 1e-9;
  // Sparse product-like graph: re-sharding by head moves less.
  CostProfile products;
  products.alpha_1 = 1e-9;
  for (int i = 2; i <= 8; ++i) {
    proteins.set_beta(StrategyKind::kGpAg, i, 1e-9 * (i - 1) / i);
    proteins.set_beta(StrategyKind::kGpA2a, i, 4e-9);
    products.set_beta(StrategyKind::kGpAg, i, 4e-9);
    products.set_beta(StrategyKind::kGpA2a, i, 1e-9 * (i - 1) / i);
  }
  // Scores above equal 1e-9 for every i; a smaller eight-worker coefficient
  // makes i = 8 the unique minimum.
  proteins.set_beta(StrategyKind::kGpAg, 8, 0.9e-9 * 7 / 8);
  products.set_beta(StrategyKind::kGpA2a, 8, 0.9e-9 * 7 / 8);
  const Selection a = agp_select({132534, 79122504, 0, 8}, 8, 1e-9 * 79122504, proteins);
  const Selection b = agp_select({2449029, 123718280, 0, 8}, 8, 1e-9 * 123718280, products);
  EXPECT_EQ(a.plan.strategy, StrategyKind::kGpAg);
  EXPECT_EQ(a.plan.gpus, 8);
  EXPECT_EQ(b.plan.strategy, StrategyKind::kGpA2a);
  EXPECT_EQ(b.plan.gpus, 8);
}

TEST(ProfileBeta, ExactLinearDataRecoversCoefficient) {
  const double b = 3.7e-10;
  std::vector<TimingSample> samples;
  for (Index n : {100, 1000, 10000, 100000}) samples.push_back({n, b * static_cast<double>(n)});
  const BetaFit fit = profile_beta(samples, 16);
  EXPECT_NEAR(fit.per_element / b, 1.0, 1e-12);
  EXPECT_NEAR(fit.per_node, b * 16, b * 16 * 1e-12);
  EXPECT_NEAR(fit.free_slope, 1.0, 1e-9);
}

TEST(ProfileBeta, LatencyOffsetWithinFivePercent) {
  const double b = 1e-9;
  const double latency = 1e-7;  // L/b = 100 elements
  std::vector<TimingSample> samples;
  for (Index n : {100000, 300000, 1000000, 3000000, 10000000, 100000000}) {
    samples.push_back({n, latency + b * static_cast<double>(n)});
  }
  EXPECT_NEAR(profile_beta(samples, 1).per_element / b, 1.0, 0.05);
}

TEST(ProfileBeta, RejectsBadData) {
  const std::vector<TimingSample> one{{10, 1.0}};
  EXPECT_THROW(profile_beta(one, 1), DataError);
  const std::vector<TimingSample> negative{{10, -1.0}, {10000, 1.0}};
  EXPECT_THROW(profile_beta(negative, 1), DataError);
  const std::vector<TimingSample> decreasing{{10, 2.0}, {10000, 1.0}};
  EXPECT_THROW(profile_beta(decreasing, 1), DataError);
  const std::vector<TimingSample> narrow{{10, 1.0}, {500, 2.0}};
  EXPECT_THROW(profile_beta(narrow, 1), DataError);
}

TEST(ProfileBeta, SingleGpuBetaIsZero) {
  EXPECT_EQ(CostProfile{}.beta(StrategyKind::kGpAg, 1), 0.0);
}

TEST(TimingTable, ParsesAndBuildsProfile) {
  std::istringstream csv(
      "collective,gpus,elements,seconds\n"
      "gp-ag,2,100,1e-7\n"
      "gp-ag,2,100000,1e-4\n"
      "all_to_all,2,100,2e-7\n"
      "all_to_all,2,100000,2e-4\n"
      "gp-ag,1,100,0.5\n");
  const TimingTable table = read_timing_table(csv);
  EXPECT_EQ(table.size(), 3u);
  const CostProfile p = build_profile(table, 8, 8, 1e-9);
  EXPECT_NEAR(p.beta(StrategyKind::kGpAg, 2), 8e-9, 1e-20);
  EXPECT_NEAR(p.beta(StrategyKind::kGpA2a, 2), 16e-9, 1e-20);
  std::ostringstream os;
  write_timing_table(os, table);
  std::istringstream again(os.str());
  EXPECT_EQ(read_timing_table(again).size(), 3u);
}

TEST(TimingTable, MalformedRowsAreDataErrors) {
  std::istringstream bad_name("nccl,2,100,1.0\n");
  EXPECT_THROW(read_timing_table(bad_name), DataError);
  std::istringstream bad_num("gp-ag,2,abc,1.0\n");
  EXPECT_THROW(read_timing_table(bad_num), DataError);
  std::istringstream short_row("gp-ag,2,100\n");
  EXPECT_THROW(read_timing_table(short_row), DataError);
}

TEST(SimulatedTimings, FitRecoversBandwidthCoefficient) {
  const BandwidthModel model{0.0, 1e9};
  const std::vector<Index> nodes{8, 80, 800, 8000};
  for (StrategyKind c : {StrategyKind::kGpAg, StrategyKind::kGpA2a}) {
    const auto samples = simulate_strategy_timings(model, c, 4, 8, nodes);
    const BetaFit fit = profile_beta(samples, 8);
    // Per element of the node-feature block: GP-AG moves 4(p-1)/p of it,
    // GP-A2A 8(p-1)/p^2, each at 1 ns per element.
    const double expected = c == StrategyKind::kGpAg ? 4.0 * 3 / 4 : 8.0 * 3 / 16;
    EXPECT_NEAR(fit.per_element / 1e-9, expected, 1e-9);
  }
}

TEST(MeasureAlpha, MockTimer) {
  int calls = 0;
  const AlphaMeasurement m = measure_alpha(
      500,
      [&] {
        ++calls;
        return 2.0;
      },
      10, 2);
  EXPECT_EQ(calls, 12);
  EXPECT_EQ(m.alpha_1, 2.0 / 500);
  EXPECT_FALSE(m.low_confidence);
  const AlphaMeasurement quick = measure_alpha(500, [] { return 1.0; }, 1, 0);
  EXPECT_TRUE(quick.low_confidence);
  EXPECT_THROW(measure_alpha(0, [] { return 1.0; }), ArgumentError);
}

TEST(MeasureAlpha, TimesRealGraph) {
  const CsrGraph g = generate_erdos_renyi(200, 8, 1);
  const AlphaMeasurement m = measure_alpha(g, 8, 2, 3, 3, 1);
  EXPECT_GT(m.alpha_1, 0.0);
  EXPECT_LE(m.min_seconds, m.mean_seconds);
}

TEST(ProfileJson, RoundTrip) {
  CostProfile p = flat_profile(2e-9, 3e-9, 3);
  p.set_beta(StrategyKind::kGpA2a, 3, 4.5e-9);
  std::stringstream ss;
  write_profile_json(ss, p);
  const CostProfile q = read_profile_json(ss);
  EXPECT_EQ(q.hidden, p.hidden);
  EXPECT_EQ(q.alpha_1, p.alpha_1);
  EXPECT_EQ(q.beta_table(), p.beta_table());
}

TEST(ProfileJson, InvalidInputIsProfileError) {
  std::istringstream not_json("{");
  EXPECT_THROW(read_profile_json(not_json), ProfileError);
  std::istringstream missing(R"({"d": 4})");
  EXPECT_THROW(read_profile_json(missing), ProfileError);
  std::istringstream negative(R"({"d": 4, "alpha_1": 1e-9, "beta": [{"collective": "gp-ag", "gpus": 2, "coeff": -1}]})");
  EXPECT_THROW(read_profile_json(negative), ProfileError);
}

TEST(PlanJson, ContainsPlanFields) {
  const CostProfile p = flat_profile(1e-9, 1e-9, 2);
  const Selection s = agp_select({100, 1000}, 2, 1.0, p);
  std::ostringstream os;
  write_plan_json(os, s);
  const auto j = nlohmann::json::parse(os.str());
  EXPECT_EQ(j.at("strategy"), "gp-ag");
  EXPECT_EQ(j.at("gpus"), 2);
  EXPECT_TRUE(j.contains("score"));
  EXPECT_TRUE(j.contains("predicted_iter_time_s"));
  EXPECT_EQ(j.at("candidates").size(), 2u);
}

}  // namespace
}  // namespace gtpar
