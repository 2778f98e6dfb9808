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

#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gtpar/strategies.hpp"
#include "gtpar/types.hpp"

namespace gtpar {

// Compute and communication coefficients of the iteration-time model
//   t_iter(p) = alpha_1 * E / p + beta_c(p) * N.
// beta_c(p) is seconds per node for a d-wide feature block, measured per
// strategy end to end; beta_c(1) is 0.
class CostProfile {
 public:
  Index hidden = 0;
  int element_bytes = 8;
  double alpha_1 = 0.0;

  // Throws ProfileError naming the missing (strategy, gpus) entry.
  double beta(StrategyKind c, int gpus) const;
  bool has_beta(StrategyKind c, int gpus) const;
  void set_beta(StrategyKind c, int gpus, double coeff);
  const std::map<std::pair<StrategyKind, int>, double>& beta_table() const { return beta_; }

  // Throws ProfileError on non-positive or non-finite coefficients.
  void validate() const;

 private:
  std::map<std::pair<StrategyKind, int>, double> beta_;
};

double estimate_iter_time(const CostProfile& profile, StrategyKind c, int p, Index nodes,
                          Index edges);

// True iff scaling from p to s*p workers is predicted to pay off:
//   s*p * (beta_c(s*p) - beta_c(p)) / (s - 1) <= k,   k = t_iter(1) / N.
bool speedup_condition(const CostProfile& profile, StrategyKind c, int p, int s, double k);

struct GraphStats {
  Index nodes = 0;
  Index edges = 0;
  // Optional; 0 disables the corresponding check.
  Index hidden = 0;
  Index heads = 0;
};

struct StrategyPlan {
  StrategyKind strategy = StrategyKind::kSingleWorker;
  int gpus = 1;
  double score = 0.0;
  double predicted_iter_time = 0.0;
};

struct Candidate {
  StrategyKind strategy = StrategyKind::kGpAg;
  int gpus = 2;
  double score = 0.0;
  double predicted_iter_time = 0.0;
  bool feasible = false;
  std::string note;
};

struct Selection {
  StrategyPlan plan;
  std::vector<Candidate> candidates;
  std::vector<std::string> warnings;
};

// Scores every (strategy, i) for 2 <= i <= max_gpus by i*beta_c(i)/(i-1),
// keeps those not exceeding k = t_iter_1 / N, and returns the lowest score
// (ties: fewer workers, then GP-AG before GP-A2A). Falls back to a single
// worker when nothing qualifies. Candidates whose head count is not divisible
// by i are skipped for GP-A2A.
Selection agp_select(const GraphStats& stats, int max_gpus, double t_iter_1,
                     const CostProfile& profile);

struct TimingSample {
  Index elements = 0;
  double seconds = 0.0;
};

struct BetaFit {
  // Seconds per transferred element; the slope is fixed at 1 in log-log space.
  double per_element = 0.0;
  // per_element * d: seconds per node.
  double per_node = 0.0;
  // Unconstrained log-log fit, reported for diagnostics.
  double free_slope = 0.0;
  double free_intercept = 0.0;
};

// Least squares of log(seconds) against log(elements) with unit slope.
// Throws DataError on fewer than two samples, non-positive values, timings
// that decrease with size, or sizes spanning less than two decades.
BetaFit profile_beta(std::span<const TimingSample> samples, Index hidden);

// Timing table rows: collective,gpus,elements,seconds. The collective column
// names a strategy ("gp-ag", "gp-a2a"); "all_gather" and "all_to_all" are
// accepted as aliases.
using TimingTable = std::map<std::pair<StrategyKind, int>, std::vector<TimingSample>>;
TimingTable read_timing_table(std::istream& is);
void write_timing_table(std::ostream& os, const TimingTable& table);

// Fits every (strategy, gpus) group of the table; gpus = 1 rows are ignored.
CostProfile build_profile(const TimingTable& table, Index hidden, int element_bytes, double alpha_1);

// Linear transfer-time model for simulated collectives: every call costs
// latency per hop (p - 1 hops) plus received elements / bandwidth.
struct BandwidthModel {
  double latency_s = 5e-6;
  double elements_per_s = 1e9;
};

// Runs one attention block's communication pattern for `kind` on a p-worker
// group for each node count in `node_counts` (features of width `hidden`) and
// converts rank 0's ledger into seconds. Sample elements are nodes * hidden.
std::vector<TimingSample> simulate_strategy_timings(const BandwidthModel& model, StrategyKind kind,
                                                    int p, Index hidden,
                                                    std::span<const Index> node_counts);

struct AlphaMeasurement {
  double alpha_1 = 0.0;
  double mean_seconds = 0.0;
  double min_seconds = 0.0;
  int runs = 0;
  int warmup = 0;
  bool low_confidence = false;
};

inline constexpr int kDefaultRuns = 10;
inline constexpr int kDefaultWarmup = 2;

// alpha_1 = mean(timed_iteration()) / edges over `runs` calls after `warmup`
// discarded calls. timed_iteration returns the seconds one iteration took.
AlphaMeasurement measure_alpha(Index edges, const std::function<double()>& timed_iteration,
                               int runs = kDefaultRuns, int warmup = kDefaultWarmup);

// Times single-worker forward + backward of one attention block on g with
// seeded random features and weights.
AlphaMeasurement measure_alpha(const CsrGraph& g, Index hidden, Index heads, std::uint64_t seed,
                               int runs = kDefaultRuns, int warmup = kDefaultWarmup);

// {d, element_bytes, alpha_1, beta: [{collective, gpus, coeff}]}
void write_profile_json(std::ostream& os, const CostProfile& profile);
CostProfile read_profile_json(std::istream& is);
// {strategy, gpus, score, predicted_iter_time_s, candidates: [...], warnings: [...]}
void write_plan_json(std::ostream& os, const Selection& selection);

}  // namespace gtpar
