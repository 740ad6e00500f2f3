#include "rtsched/harness.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "rtsched/error.hpp"
#include "rtsched/registry.hpp"
#include "rtsched/simulator.hpp"

namespace rts {

namespace {

constexpr std::uint64_t kTrustworthyHorizon = 10'000;

std::string format_scale(double scale) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", scale);
  return buf;
}

}  // namespace

StabilityVerdict classify_stability(const RunMetrics& metrics, const StabilityParams& params) {
  StabilityVerdict verdict;
  verdict.short_horizon = metrics.horizon < kTrustworthyHorizon;
  const double early_len = static_cast<double>(metrics.early_window_length());
  const double late_len = static_cast<double>(metrics.late_window_length());
  const double cap = params.late_cap * static_cast<double>(metrics.horizon);
  for (int l = 0; l < metrics.link_count(); ++l) {
    const double early = early_len > 0 ? metrics.early_window_sum[l] / early_len : 0.0;
    const double late = late_len > 0 ? metrics.late_window_sum[l] / late_len : 0.0;
    double ratio = 1.0;
    if (early > 0.0) {
      ratio = late / early;
    } else if (late > 0.0) {
      ratio = std::numeric_limits<double>::infinity();
    }
    verdict.early_mean.push_back(early);
    verdict.late_mean.push_back(late);
    verdict.growth_ratio.push_back(ratio);
    const bool link_stable = late <= params.growth_floor || (ratio < 1.0 + params.tol && late < cap);
    if (!link_stable) verdict.stable = false;
  }
  return verdict;
}

RunResult run_episode(const ExperimentConfig& config, const std::string& policy, double scale,
                      std::uint64_t seed) {
  auto instance = make_policy(policy, *config.graph, config.params);
  SimulationSetup setup;
  setup.graph = config.graph.get();
  setup.chain = config.chain.get();
  setup.target_ratios = config.target_ratios(scale);
  setup.admission = config.admission;
  setup.channel = config.channel;
  setup.horizon = config.horizon;
  setup.seed = seed;
  setup.series_stride = config.series_stride;

  RunResult result;
  result.policy = policy;
  result.scale = scale;
  result.seed = seed;
  result.target_ratios = setup.target_ratios;
  Simulator sim(std::move(setup), *instance);
  result.metrics = sim.run();
  result.verdict = classify_stability(result.metrics, config.stability);
  result.stats = instance->stats();
  return result;
}

std::vector<std::uint64_t> replication_seeds(std::uint64_t master, int count) {
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < count; ++i) seeds.push_back(derive_seed(master, static_cast<std::uint64_t>(i)));
  return seeds;
}

SweepResult sweep_frontier(const ExperimentConfig& config, const std::string& policy, const ProgressSink& progress) {
  SweepResult result;
  result.policy = policy;
  const auto seeds = replication_seeds(config.seed, config.sweep.seeds);
  double lo = config.sweep.lo;
  double hi = config.sweep.hi;
  for (int step = 0; step < config.sweep.steps; ++step) {
    SweepProbe probe;
    probe.scale = 0.5 * (lo + hi);
    for (auto seed : seeds) {
      auto run = run_episode(config, policy, probe.scale, seed);
      run.metrics.deficit_series.clear();
      run.metrics.series_slots.clear();
      if (run.verdict.stable) ++probe.stable_votes;
      probe.runs.push_back(std::move(run));
    }
    probe.stable = 2 * probe.stable_votes > static_cast<int>(seeds.size());
    if (progress) {
      progress(policy + " scale " + format_scale(probe.scale) + ": " + std::to_string(probe.stable_votes) + "/" +
               std::to_string(seeds.size()) + " stable");
    }
    (probe.stable ? lo : hi) = probe.scale;
    result.probes.push_back(std::move(probe));
  }
  result.p_hat = lo;
  result.resolution = (config.sweep.hi - config.sweep.lo) / std::ldexp(1.0, config.sweep.steps);
  return result;
}

CompareResult compare_policies(const ExperimentConfig& config, const std::vector<std::string>& policies,
                               const ProgressSink& progress) {
  CompareResult result;
  std::optional<double> oracle;
  for (const auto& name : policies) {
    CompareRow row;
    row.policy = name;
    try {
      auto sweep = sweep_frontier(config, name, progress);
      row.p_hat = sweep.p_hat;
      if (name == "frame-optimal" && !oracle) oracle = sweep.p_hat;
      result.sweeps.push_back(std::move(sweep));
    } catch (const Error& e) {
      row.status = std::string(error_code_name(e.code())) + ": " + e.what();
      if (progress) progress(name + " failed: " + row.status);
    }
    result.rows.push_back(std::move(row));
  }
  if (oracle && *oracle > 0.0) {
    for (auto& row : result.rows)
      if (row.p_hat) row.ratio = *row.p_hat / *oracle;
  }
  return result;
}

}  // namespace rts
