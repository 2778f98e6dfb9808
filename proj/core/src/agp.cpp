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

#include "gtpar/agp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "gtpar/random.hpp"
#include "json.hpp"

namespace gtpar {

namespace {

std::string key_name(StrategyKind c, int gpus) {
  return "(" + std::string(strategy_name(c)) + ", " + std::to_string(gpus) + ")";
}

void check_distributed_kind(StrategyKind c) {
  if (c == StrategyKind::kSingleWorker) {
    throw ArgumentError("communication coefficients exist only for gp-ag and gp-a2a");
  }
}

}  // namespace

double CostProfile::beta(StrategyKind c, int gpus) const {
  if (gpus < 1) throw ArgumentError("gpus must be >= 1");
  if (gpus == 1) return 0.0;
  auto it = beta_.find({c, gpus});
  if (it == beta_.end()) throw ProfileError("profile has no beta entry for " + key_name(c, gpus));
  return it->second;
}

bool CostProfile::has_beta(StrategyKind c, int gpus) const {
  return gpus == 1 || beta_.contains({c, gpus});
}

void CostProfile::set_beta(StrategyKind c, int gpus, double coeff) {
  check_distributed_kind(c);
  if (gpus < 2) throw ArgumentError("beta entries are defined for gpus >= 2");
  beta_[{c, gpus}] = coeff;
}

void CostProfile::validate() const {
  if (!(alpha_1 > 0.0) || !std::isfinite(alpha_1)) throw ProfileError("alpha_1 must be positive");
  if (hidden < 0) throw ProfileError("profile d must be non-negative");
  if (element_bytes <= 0) throw ProfileError("element_bytes must be positive");
  for (const auto& [key, coeff] : beta_) {
    if (!(coeff > 0.0) || !std::isfinite(coeff)) {
      throw ProfileError("beta " + key_name(key.first, key.second) + " must be positive");
    }
  }
}

double estimate_iter_time(const CostProfile& profile, StrategyKind c, int p, Index nodes,
                          Index edges) {
  if (p < 1) throw ArgumentError("p must be >= 1");
  if (nodes < 0 || edges < 0) throw ArgumentError("graph sizes must be non-negative");
  const double compute = profile.alpha_1 * static_cast<double>(edges) / static_cast<double>(p);
  return compute + profile.beta(c, p) * static_cast<double>(nodes);
}

bool speedup_condition(const CostProfile& profile, StrategyKind c, int p, int s, double k) {
  if (s <= 1) throw ArgumentError("scaling factor s must be > 1");
  if (p < 1) throw ArgumentError("p must be >= 1");
  const double sp = static_cast<double>(s) * p;
  const double lhs = sp * (profile.beta(c, s * p) - profile.beta(c, p)) / (s - 1);
  return lhs <= k;
}

Selection agp_select(const GraphStats& stats, int max_gpus, double t_iter_1,
                     const CostProfile& profile) {
  if (max_gpus < 1) throw ArgumentError("max_gpus must be >= 1");
  if (!(t_iter_1 > 0.0) || !std::isfinite(t_iter_1)) throw ArgumentError("t_iter_1 must be positive");
  if (stats.nodes <= 0) throw ArgumentError("graph must have at least one node");
  if (stats.hidden > 0 && profile.hidden > 0 && stats.hidden != profile.hidden) {
    throw ProfileError("profile was measured for d=" + std::to_string(profile.hidden) +
                       " but the model uses d=" + std::to_string(stats.hidden));
  }

  Selection sel;
  sel.plan = {StrategyKind::kSingleWorker, 1, 0.0, t_iter_1};
  const double n = static_cast<double>(stats.nodes);
  const double k = t_iter_1 / n;

  const Candidate* best = nullptr;
  const Candidate* fastest = nullptr;
  for (int i = 2; i <= max_gpus; ++i) {
    for (StrategyKind c : {StrategyKind::kGpAg, StrategyKind::kGpA2a}) {
      Candidate cand;
      cand.strategy = c;
      cand.gpus = i;
      if (c == StrategyKind::kGpA2a && stats.heads > 0 && stats.heads % i != 0) {
        cand.note = "heads not divisible by gpus";
        cand.score = std::numeric_limits<double>::infinity();
        cand.predicted_iter_time = std::numeric_limits<double>::infinity();
        sel.candidates.push_back(std::move(cand));
        continue;
      }
      if (stats.nodes < i) cand.note = "more gpus than nodes";
      const double b = profile.beta(c, i);
      cand.score = i * b / (i - 1);
      cand.predicted_iter_time = t_iter_1 / i + b * n;
      cand.feasible = cand.score <= k && stats.nodes >= i;
      sel.candidates.push_back(std::move(cand));
    }
  }
  // Candidates are generated in (i ascending, GP-AG first) order, so a strict
  // comparison keeps the tie-break rule.
  for (const Candidate& cand : sel.candidates) {
    if (!cand.feasible) continue;
    if (best == nullptr || cand.score < best->score) best = &cand;
    if (fastest == nullptr || cand.predicted_iter_time < fastest->predicted_iter_time) fastest = &cand;
  }
  if (best == nullptr) {
    if (max_gpus > 1) {
      sel.warnings.push_back("no (strategy, gpus) candidate satisfies the speedup condition; "
                             "falling back to a single worker");
    }
    return sel;
  }
  sel.plan = {best->strategy, best->gpus, best->score, best->predicted_iter_time};
  if (fastest->predicted_iter_time < best->predicted_iter_time) {
    sel.warnings.push_back("score ranking picks " + key_name(best->strategy, best->gpus) +
                           " but the iteration-time model prefers " +
                           key_name(fastest->strategy, fastest->gpus));
  }
  return sel;
}

BetaFit profile_beta(std::span<const TimingSample> samples, Index hidden) {
  if (samples.size() < 2) throw DataError("beta fit needs at least two timing samples");
  if (hidden <= 0) throw ArgumentError("beta fit needs d > 0");
  std::vector<TimingSample> sorted(samples.begin(), samples.end());
  for (const auto& s : sorted) {
    if (s.elements <= 0 || !(s.seconds > 0.0) || !std::isfinite(s.seconds)) {
      throw DataError("timing samples must have positive sizes and durations");
    }
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const TimingSample& a, const TimingSample& b) { return a.elements < b.elements; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].seconds < sorted[i - 1].seconds) {
      throw DataError("timings decrease with size (" + std::to_string(sorted[i - 1].elements) +
                      " -> " + std::to_string(sorted[i].elements) + " elements)");
    }
  }
  const double span = static_cast<double>(sorted.back().elements) /
                      static_cast<double>(sorted.front().elements);
  if (span < 100.0) throw DataError("timing sizes must span at least two decades");

  const double m = static_cast<double>(sorted.size());
  double sum_x = 0.0;
  double sum_y = 0.0;
  double sum_resid = 0.0;
  for (const auto& s : sorted) {
    const double x = std::log(static_cast<double>(s.elements));
    const double y = std::log(s.seconds);
    sum_x += x;
    sum_y += y;
    sum_resid += y - x;
  }
  BetaFit fit;
  fit.per_element = std::exp(sum_resid / m);
  fit.per_node = fit.per_element * static_cast<double>(hidden);

  const double mean_x = sum_x / m;
  const double mean_y = sum_y / m;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& s : sorted) {
    const double dx = std::log(static_cast<double>(s.elements)) - mean_x;
    sxx += dx * dx;
    sxy += dx * (std::log(s.seconds) - mean_y);
  }
  fit.free_slope = sxy / sxx;
  fit.free_intercept = mean_y - fit.free_slope * mean_x;
  return fit;
}

namespace {

StrategyKind parse_collective(const std::string& name) {
  if (name == "gp-ag" || name == "all_gather") return StrategyKind::kGpAg;
  if (name == "gp-a2a" || name == "all_to_all") return StrategyKind::kGpA2a;
  throw DataError("unknown collective '" + name + "'");
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

TimingTable read_timing_table(std::istream& is) {
  TimingTable table;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    auto f = split_csv(line);
    if (!header_seen) {
      header_seen = true;
      if (!f.empty() && f[0] == "collective") continue;
    }
    if (f.size() != 4) {
      throw DataError("timing table line " + std::to_string(line_no) + ": expected 4 fields");
    }
    try {
      std::size_t used = 0;
      const int gpus = std::stoi(f[1], &used);
      if (used != f[1].size()) throw std::invalid_argument("gpus");
      const long long elements = std::stoll(f[2], &used);
      if (used != f[2].size()) throw std::invalid_argument("elements");
      const double seconds = std::stod(f[3], &used);
      if (used != f[3].size()) throw std::invalid_argument("seconds");
      if (gpus < 1) throw DataError("timing table line " + std::to_string(line_no) + ": gpus < 1");
      table[{parse_collective(f[0]), gpus}].push_back({elements, seconds});
    } catch (const std::logic_error&) {
      throw DataError("timing table line " + std::to_string(line_no) + ": malformed number");
    }
  }
  return table;
}

void write_timing_table(std::ostream& os, const TimingTable& table) {
  os << "collective,gpus,elements,seconds\n";
  const auto old = os.precision(17);
  for (const auto& [key, samples] : table) {
    for (const auto& s : samples) {
      os << strategy_name(key.first) << ',' << key.second << ',' << s.elements << ',' << s.seconds
         << '\n';
    }
  }
  os.precision(old);
}

CostProfile build_profile(const TimingTable& table, Index hidden, int element_bytes, double alpha_1) {
  CostProfile profile;
  profile.hidden = hidden;
  profile.element_bytes = element_bytes;
  profile.alpha_1 = alpha_1;
  for (const auto& [key, samples] : table) {
    if (key.second == 1) continue;
    profile.set_beta(key.first, key.second, profile_beta(samples, hidden).per_node);
  }
  profile.validate();
  return profile;
}

namespace {

void run_pattern(WorkerGroup& group, int rank, StrategyKind kind, const PartitionPlan& plan,
                 Index hidden) {
  const int p = group.size();
  const Index n = plan.num_nodes();
  if (kind == StrategyKind::kGpAg) {
    const Matrix local(plan.size(rank), hidden);
    const Matrix full(n, hidden);
    group.all_gather(rank, local);
    group.all_gather(rank, local);
    group.reduce_scatter(rank, full, plan);
    group.reduce_scatter(rank, full, plan);
    return;
  }
  const Index cols = hidden / p;
  std::vector<Matrix> to_heads;
  std::vector<Matrix> to_nodes;
  for (int j = 0; j < p; ++j) {
    to_heads.emplace_back(plan.size(rank), cols);
    to_nodes.emplace_back(plan.size(j), cols);
  }
  // Forward: Q, K, V to head layout, Y back. Backward mirrors it.
  for (int i = 0; i < 3; ++i) group.all_to_all(rank, to_heads, ConcatAxis::kRows);
  group.all_to_all(rank, to_nodes, ConcatAxis::kCols);
  group.all_to_all(rank, to_heads, ConcatAxis::kRows);
  for (int i = 0; i < 3; ++i) group.all_to_all(rank, to_nodes, ConcatAxis::kCols);
}

}  // namespace

std::vector<TimingSample> simulate_strategy_timings(const BandwidthModel& model, StrategyKind kind,
                                                    int p, Index hidden,
                                                    std::span<const Index> node_counts) {
  check_distributed_kind(kind);
  if (p < 2) throw ArgumentError("simulated timings need p >= 2");
  if (hidden <= 0) throw ArgumentError("simulated timings need d > 0");
  if (!(model.latency_s >= 0.0) || !(model.elements_per_s > 0.0)) {
    throw ArgumentError("bandwidth model needs latency >= 0 and bandwidth > 0");
  }
  if (kind == StrategyKind::kGpA2a && hidden % p != 0) {
    throw ConfigError("gp-a2a timing needs d divisible by p");
  }
  std::vector<TimingSample> out;
  for (Index n : node_counts) {
    const PartitionPlan plan = plan_partition(n, p);
    WorkerGroup group(p);
    run_workers(group, [&](int rank) { run_pattern(group, rank, kind, plan, hidden); });
    const CommLedger& ledger = group.ledger();
    std::int64_t calls = 0;
    for (Primitive prim : {Primitive::kAllGather, Primitive::kReduceScatter, Primitive::kAllToAll}) {
      calls += ledger.at(0, prim).calls;
    }
    const auto received = ledger.received(
        0, {Primitive::kAllGather, Primitive::kReduceScatter, Primitive::kAllToAll});
    const double seconds = static_cast<double>(calls) * (p - 1) * model.latency_s +
                           static_cast<double>(received) / model.elements_per_s;
    out.push_back({n * hidden, seconds});
  }
  return out;
}

AlphaMeasurement measure_alpha(Index edges, const std::function<double()>& timed_iteration,
                               int runs, int warmup) {
  if (edges <= 0) throw ArgumentError("alpha needs a graph with at least one edge");
  if (runs < 1 || warmup < 0) throw ArgumentError("need runs >= 1 and warmup >= 0");
  for (int i = 0; i < warmup; ++i) timed_iteration();
  AlphaMeasurement m;
  m.runs = runs;
  m.warmup = warmup;
  m.min_seconds = std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (int i = 0; i < runs; ++i) {
    const double t = timed_iteration();
    total += t;
    m.min_seconds = std::min(m.min_seconds, t);
  }
  m.mean_seconds = total / runs;
  m.alpha_1 = m.mean_seconds / static_cast<double>(edges);
  m.low_confidence = runs < 3 || warmup == 0;
  return m;
}

AlphaMeasurement measure_alpha(const CsrGraph& g, Index hidden, Index heads, std::uint64_t seed,
                               int runs, int warmup) {
  Rng rng(seed);
  auto random = [&](Index r, Index c) {
    Matrix m(r, c);
    for (double& v : m.values()) v = rng.uniform(-1.0, 1.0);
    return m;
  };
  const Matrix x = random(g.num_nodes(), hidden);
  const SgaWeights w{random(hidden, hidden), random(hidden, hidden), random(hidden, hidden),
                     random(hidden, hidden)};
  const Matrix grad = random(g.num_nodes(), hidden);
  return measure_alpha(
      g.num_edges(),
      [&] {
        const auto start = std::chrono::steady_clock::now();
        SgaForward fwd = sga_forward(x, g, w, heads);
        SgaGradients gr = sga_backward(grad, fwd.cache);
        const auto stop = std::chrono::steady_clock::now();
        (void)gr;
        return std::chrono::duration<double>(stop - start).count();
      },
      runs, warmup);
}

void write_profile_json(std::ostream& os, const CostProfile& profile) {
  nlohmann::json j;
  j["d"] = profile.hidden;
  j["element_bytes"] = profile.element_bytes;
  j["alpha_1"] = profile.alpha_1;
  j["beta"] = nlohmann::json::array();
  for (const auto& [key, coeff] : profile.beta_table()) {
    j["beta"].push_back({{"collective", std::string(strategy_name(key.first))},
                         {"gpus", key.second},
                         {"coeff", coeff}});
  }
  os << j.dump(2) << '\n';
}

CostProfile read_profile_json(std::istream& is) {
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ProfileError(std::string("profile is not valid JSON: ") + e.what());
  }
  CostProfile profile;
  try {
    profile.hidden = j.at("d").get<Index>();
    profile.element_bytes = j.value("element_bytes", 8);
    profile.alpha_1 = j.at("alpha_1").get<double>();
    for (const auto& entry : j.at("beta")) {
      const auto name = entry.at("collective").get<std::string>();
      StrategyKind c;
      try {
        c = parse_collective(name);
      } catch (const DataError&) {
        throw ProfileError("profile names unknown collective '" + name + "'");
      }
      const int gpus = entry.at("gpus").get<int>();
      if (gpus < 2) continue;
      profile.set_beta(c, gpus, entry.at("coeff").get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ProfileError(std::string("profile JSON is missing fields: ") + e.what());
  }
  profile.validate();
  return profile;
}

void write_plan_json(std::ostream& os, const Selection& selection) {
  auto finite_or_null = [](double v) -> nlohmann::json {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  };
  nlohmann::json j;
  j["strategy"] = std::string(strategy_name(selection.plan.strategy));
  j["gpus"] = selection.plan.gpus;
  j["score"] = selection.plan.score;
  j["predicted_iter_time_s"] = selection.plan.predicted_iter_time;
  j["candidates"] = nlohmann::json::array();
  for (const auto& c : selection.candidates) {
    nlohmann::json row{{"strategy", std::string(strategy_name(c.strategy))},
                       {"gpus", c.gpus},
                       {"score", finite_or_null(c.score)},
                       {"predicted_iter_time_s", finite_or_null(c.predicted_iter_time)},
                       {"feasible", c.feasible}};
    if (!c.note.empty()) row["note"] = c.note;
    j["candidates"].push_back(std::move(row));
  }
  j["warnings"] = selection.warnings;
  os << j.dump(2) << '\n';
}

}  // namespace gtpar
