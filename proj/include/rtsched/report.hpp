#pragma once

#include <string>
#include <vector>

#include "rtsched/config.hpp"
#include "rtsched/harness.hpp"

namespace rts {

/// One row per run: policy, scale, seed, verdict, then per-link columns
/// (target, arrived, delivered, expired, dropped, delivery ratio, mean deficit,
/// growth ratio).
std::string summary_csv(const ExperimentConfig& config, const std::vector<const RunResult*>& runs);
/// Sampled deficit trajectory of one run (empty body without a series stride).
std::string deficits_csv(const RunResult& run);
/// One row per policy: p̂, resolution and each probe as scale:stable/replications.
std::string frontier_csv(const std::vector<SweepResult>& sweeps);
std::string compare_csv(const CompareResult& result);

/// JSON manifest: the command, the resolved configuration, produced files and
/// any warnings raised while running.
std::string manifest_json(const ExperimentConfig& config, const std::string& command,
                          const std::vector<std::string>& files, const std::vector<std::string>& warnings);

/// Warnings worth surfacing for a set of runs (short horizons, policy fallbacks).
std::vector<std::string> run_warnings(const std::vector<const RunResult*>& runs);

/// Writers create `out_dir` if needed and return the file names they wrote.
std::vector<std::string> write_run(const std::string& out_dir, const ExperimentConfig& config, const RunResult& run);
std::vector<std::string> write_sweep(const std::string& out_dir, const ExperimentConfig& config,
                                     const SweepResult& sweep);
std::vector<std::string> write_compare(const std::string& out_dir, const ExperimentConfig& config,
                                       const CompareResult& result);

}  // namespace rts
