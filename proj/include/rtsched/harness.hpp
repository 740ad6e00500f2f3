#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rtsched/config.hpp"
#include "rtsched/dynamics.hpp"
#include "rtsched/policies.hpp"

namespace rts {

struct StabilityVerdict {
  bool stable = true;
  /// Mean deficit per link over [T/2, 3T/4) and [3T/4, T).
  std::vector<double> early_mean;
  std::vector<double> late_mean;
  /// late / early; 1 when both are zero, infinity when only early is zero.
  std::vector<double> growth_ratio;
  /// Horizon below 10^4 slots: the verdict is computed but not trustworthy.
  bool short_horizon = false;
};

/// A link is stable when its late-window mean is at most growth_floor, or when
/// it grew by less than a factor 1 + tol between the windows and stays below
/// late_cap · T. The run is stable when every link is.
StabilityVerdict classify_stability(const RunMetrics& metrics, const StabilityParams& params = {});

struct RunResult {
  std::string policy;
  double scale = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> target_ratios;
  RunMetrics metrics;
  StabilityVerdict verdict;
  PolicyStats stats;
};

using ProgressSink = std::function<void(const std::string&)>;

/// One seeded episode of `policy` at p = scale · direction.
RunResult run_episode(const ExperimentConfig& config, const std::string& policy, double scale,
                      std::uint64_t seed);

/// Seeds used for the replications of every sweep probe. The same seeds are
/// shared by all policies so their runs see identical arrivals and channels.
std::vector<std::uint64_t> replication_seeds(std::uint64_t master, int count);

struct SweepProbe {
  double scale = 0.0;
  std::vector<RunResult> runs;
  int stable_votes = 0;
  bool stable = false;
};

struct SweepResult {
  std::string policy;
  /// Largest scale found stable; sweep.lo when no probe was.
  double p_hat = 0.0;
  double resolution = 0.0;
  std::vector<SweepProbe> probes;
};

/// Bisection on the scale over [lo, hi]. Each probe runs every replication
/// seed and is stable when a strict majority of them is.
SweepResult sweep_frontier(const ExperimentConfig& config, const std::string& policy,
                           const ProgressSink& progress = {});

struct CompareRow {
  std::string policy;
  std::optional<double> p_hat;
  /// p̂ / p̂(frame-optimal), present only when the oracle ran.
  std::optional<double> ratio;
  std::string status = "ok";
};

struct CompareResult {
  std::vector<CompareRow> rows;
  std::vector<SweepResult> sweeps;
};

/// Sweeps each policy with shared seeds. A policy that cannot run on the
/// instance (e.g. the oracle beyond its limits) gets a row with the error.
CompareResult compare_policies(const ExperimentConfig& config, const std::vector<std::string>& policies,
                               const ProgressSink& progress = {});

}  // namespace rts
