#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rtsched/dynamics.hpp"
#include "rtsched/interference.hpp"
#include "rtsched/policies.hpp"
#include "rtsched/traffic_fading.hpp"

namespace rts {

/// Thresholds of the windowed stability test.
struct StabilityParams {
  /// Late-window mean may exceed the early-window mean by at most this factor minus one.
  double tol = 0.1;
  /// Late-window mean must stay below late_cap · T.
  double late_cap = 0.05;
  /// Links whose late-window mean deficit is at most this are stable outright.
  double growth_floor = 1.0;
};

struct SweepSpec {
  double lo = 0.0;
  double hi = 1.0;
  int steps = 6;
  int seeds = 5;
  std::vector<std::string> policies;
};

/// A fully resolved experiment: graph, traffic-fading chain, policy and run
/// parameters. Target ratios are p = clip(scale · direction, 0, 1).
struct ExperimentConfig {
  std::string name = "experiment";
  int links = 0;
  std::vector<InterferenceGraph::Edge> edges;
  std::shared_ptr<const InterferenceGraph> graph;
  std::shared_ptr<const TrafficFadingChain> chain;
  /// The chain section as written, kept for the run manifest.
  std::string chain_json;
  std::string policy = "mws";
  PolicyParams params;
  AdmissionMode admission = AdmissionMode::CoinToss;
  ChannelModel channel;
  std::vector<double> direction;
  double scale = 1.0;
  SweepSpec sweep;
  std::uint64_t horizon = 100'000;
  std::uint64_t seed = 1;
  StabilityParams stability;
  std::uint64_t series_stride = 0;

  /// Target ratios for a given scale.
  std::vector<double> target_ratios(double at_scale) const;
};

inline constexpr std::uint64_t kMinHorizon = 1000;

/// Parses a JSON experiment description. Throws Error{ConfigError} with the
/// offending key in the message.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

/// Checks cross-field consistency (policy name, sizes, ranges, T >= 1000).
void check_config(const ExperimentConfig& config);

/// Canonical JSON of the resolved configuration, chain included.
std::string config_to_json(const ExperimentConfig& config, int indent = 2);

const char* admission_name(AdmissionMode mode);

}  // namespace rts
