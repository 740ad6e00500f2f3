#include "rtsched/rtsched.h"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <exception>
#include <limits>
#include <memory>
#include <sstream>
#include <string>

#include "rtsched/config.hpp"
#include "rtsched/error.hpp"
#include "rtsched/harness.hpp"
#include "rtsched/interference.hpp"
#include "rtsched/registry.hpp"
#include "rtsched/report.hpp"
#include "rtsched/traffic_fading.hpp"

struct rts_experiment {
  rts::ExperimentConfig config;
  bool verbose = false;
  std::string last_table;
};

struct rts_graph {
  std::unique_ptr<rts::InterferenceGraph> graph;
};

namespace {

thread_local std::string last_error;

int status_of(rts::ErrorCode code) {
  using rts::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return RTS_ERR_INVALID_ARGUMENT;
    case ErrorCode::GraphTooLarge: return RTS_ERR_GRAPH_TOO_LARGE;
    case ErrorCode::SpecViolation: return RTS_ERR_SPEC_VIOLATION;
    case ErrorCode::StateSpaceTooLarge: return RTS_ERR_STATE_SPACE_TOO_LARGE;
    case ErrorCode::ScheduleInvalid: return RTS_ERR_SCHEDULE_INVALID;
    case ErrorCode::NoSchedule: return RTS_ERR_NO_SCHEDULE;
    case ErrorCode::AllWeightsZero: return RTS_ERR_ALL_WEIGHTS_ZERO;
    case ErrorCode::NotCollocatedUniform: return RTS_ERR_NOT_COLLOCATED_UNIFORM;
    case ErrorCode::ZeroQ: return RTS_ERR_ZERO_Q;
    case ErrorCode::StateSpaceExceeded: return RTS_ERR_STATE_SPACE_EXCEEDED;
    case ErrorCode::LookaheadUnavailable: return RTS_ERR_LOOKAHEAD_UNAVAILABLE;
    case ErrorCode::ChainInvalid: return RTS_ERR_CHAIN_INVALID;
    case ErrorCode::PolicyIncompatible: return RTS_ERR_POLICY_INCOMPATIBLE;
    case ErrorCode::ConfigError: return RTS_ERR_CONFIG;
    case ErrorCode::IoError: return RTS_ERR_IO;
  }
  return RTS_ERR_INTERNAL;
}

int fail(int status, std::string message) {
  last_error = std::move(message);
  return status;
}

/// Runs `body`, translating exceptions into status codes.
template <typename F>
int guarded(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const rts::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(RTS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(RTS_ERR_INTERNAL, e.what());
  }
}

int copy_out(const std::string& text, char* buf, size_t cap, size_t* needed) {
  if (needed != nullptr) *needed = text.size() + 1;
  if (buf == nullptr) return RTS_OK;
  if (cap < text.size() + 1) {
    if (cap > 0) buf[0] = '\0';
    return fail(RTS_ERR_BUFFER_TOO_SMALL, "buffer needs " + std::to_string(text.size() + 1) + " bytes");
  }
  std::memcpy(buf, text.c_str(), text.size() + 1);
  return RTS_OK;
}

rts::ProgressSink sink_for(const rts_experiment* e) {
  if (!e->verbose) return {};
  return [](const std::string& line) { std::fprintf(stderr, "%s\n", line.c_str()); };
}

int load(rts::ExperimentConfig config, rts_experiment** out) {
  auto* e = new rts_experiment;
  e->config = std::move(config);
  *out = e;
  return RTS_OK;
}

}  // namespace

extern "C" {

const char* rts_version(void) { return "1.0.0"; }

const char* rts_last_error(void) { return last_error.c_str(); }

const char* rts_status_name(int status) {
  switch (status) {
    case RTS_OK: return "ok";
    case RTS_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case RTS_ERR_GRAPH_TOO_LARGE: return "graph-too-large";
    case RTS_ERR_SPEC_VIOLATION: return "constraint-violation";
    case RTS_ERR_STATE_SPACE_TOO_LARGE: return "state-space-too-large";
    case RTS_ERR_SCHEDULE_INVALID: return "schedule-invalid";
    case RTS_ERR_NO_SCHEDULE: return "no-schedule";
    case RTS_ERR_ALL_WEIGHTS_ZERO: return "all-weights-zero";
    case RTS_ERR_NOT_COLLOCATED_UNIFORM: return "not-collocated-uniform";
    case RTS_ERR_ZERO_Q: return "zero-q";
    case RTS_ERR_STATE_SPACE_EXCEEDED: return "state-space-exceeded";
    case RTS_ERR_LOOKAHEAD_UNAVAILABLE: return "lookahead-unavailable";
    case RTS_ERR_CHAIN_INVALID: return "chain-invalid";
    case RTS_ERR_POLICY_INCOMPATIBLE: return "policy-incompatible";
    case RTS_ERR_CONFIG: return "config-error";
    case RTS_ERR_IO: return "io-error";
    case RTS_ERR_BUFFER_TOO_SMALL: return "buffer-too-small";
    default: return "internal-error";
  }
}

size_t rts_policy_count(void) { return rts::policy_names().size(); }

const char* rts_policy_name(size_t index) {
  const auto& names = rts::policy_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

int rts_experiment_load_file(const char* path, rts_experiment** out) {
  if (path == nullptr || out == nullptr) return fail(RTS_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&]() -> int { return load(rts::load_config(path), out); });
}

int rts_experiment_load_string(const char* json, rts_experiment** out) {
  if (json == nullptr || out == nullptr) return fail(RTS_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&]() -> int { return load(rts::parse_config(json), out); });
}

void rts_experiment_free(rts_experiment* experiment) { delete experiment; }

int rts_experiment_set_policy(rts_experiment* experiment, const char* name) {
  if (experiment == nullptr || name == nullptr) return fail(RTS_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&]() -> int {
    auto updated = experiment->config;
    if (updated.sweep.policies.size() == 1 && updated.sweep.policies.front() == updated.policy) {
      updated.sweep.policies = {name};
    }
    updated.policy = name;
    rts::check_config(updated);
    experiment->config = std::move(updated);
    return RTS_OK;
  });
}

int rts_experiment_set_seed(rts_experiment* experiment, uint64_t seed) {
  if (experiment == nullptr) return fail(RTS_ERR_INVALID_ARGUMENT, "null experiment");
  experiment->config.seed = seed;
  return RTS_OK;
}

int rts_experiment_set_horizon(rts_experiment* experiment, uint64_t horizon) {
  if (experiment == nullptr) return fail(RTS_ERR_INVALID_ARGUMENT, "null experiment");
  if (horizon < rts::kMinHorizon) {
    return fail(RTS_ERR_CONFIG, "horizon must be at least " + std::to_string(rts::kMinHorizon) + " slots");
  }
  experiment->config.horizon = horizon;
  return RTS_OK;
}

int rts_experiment_set_scale(rts_experiment* experiment, double scale) {
  if (experiment == nullptr) return fail(RTS_ERR_INVALID_ARGUMENT, "null experiment");
  return guarded([&]() -> int {
    auto updated = experiment->config;
    updated.scale = scale;
    rts::check_config(updated);
    experiment->config = std::move(updated);
    return RTS_OK;
  });
}

int rts_experiment_set_verbose(rts_experiment* experiment, int verbose) {
  if (experiment == nullptr) return fail(RTS_ERR_INVALID_ARGUMENT, "null experiment");
  experiment->verbose = verbose != 0;
  return RTS_OK;
}

int rts_experiment_set_compare_policies(rts_experiment* experiment, const char* names) {
  if (experiment == nullptr || names == nullptr) return fail(RTS_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&]() -> int {
    auto updated = experiment->config;
    updated.sweep.policies.clear();
    std::stringstream in(names);
    std::string name;
    while (std::getline(in, name, ',')) {
      if (!name.empty()) updated.sweep.policies.push_back(name);
    }
    if (updated.sweep.policies.empty()) return fail(RTS_ERR_INVALID_ARGUMENT, "empty policy list");
    rts::check_config(updated);
    experiment->config = std::move(updated);
    return RTS_OK;
  });
}

int rts_experiment_config_json(const rts_experiment* experiment, char* buf, size_t cap, size_t* needed) {
  if (experiment == nullptr) return fail(RTS_ERR_INVALID_ARGUMENT, "null experiment");
  return guarded([&]() -> int { return copy_out(rts::config_to_json(experiment->config), buf, cap, needed); });
}

int rts_validate(const rts_experiment* experiment, char* buf, size_t cap, size_t* needed) {
  if (experiment == nullptr) return fail(RTS_ERR_INVALID_ARGUMENT, "null experiment");
  return guarded([&]() -> int {
    const auto& chain = *experiment->config.chain;
    const auto report = rts::validate(chain);
    std::string text = "states: " + std::to_string(chain.state_count()) + "\n";
    text += "links: " + std::to_string(chain.link_count()) + "\n";
    text += "a_max: " + std::to_string(chain.a_max()) + "\n";
    text += "d_max: " + std::to_string(chain.d_max()) + "\n";
    if (report.ok()) {
      const auto rates = rts::mean_arrival_rates(chain);
      text += "mean arrival rates:";
      for (double r : rates) {
        char b[32];
        std::snprintf(b, sizeof b, " %.6f", r);
        text += b;
      }
      text += "\nchain: valid\n";
    } else {
      text += "chain: invalid\n" + report.message + "\n";
    }
    const int copied = copy_out(text, buf, cap, needed);
    if (copied != RTS_OK) return copied;
    if (!report.ok()) return fail(RTS_ERR_CHAIN_INVALID, report.message);
    return RTS_OK;
  });
}

int rts_run(rts_experiment* experiment, const char* out_dir, rts_run_summary* summary) {
  if (experiment == nullptr) return fail(RTS_ERR_INVALID_ARGUMENT, "null experiment");
  return guarded([&]() -> int {
    const auto& config = experiment->config;
    const auto run = rts::run_episode(config, config.policy, config.scale, config.seed);
    if (out_dir != nullptr) rts::write_run(out_dir, config, run);
    if (summary != nullptr) {
      summary->stable = run.verdict.stable ? 1 : 0;
      summary->slots = run.metrics.slots_run;
      summary->min_delivery_ratio = 1.0;
      summary->max_growth_ratio = 0.0;
      for (int l = 0; l < run.metrics.link_count(); ++l) {
        summary->min_delivery_ratio = std::min(summary->min_delivery_ratio, run.metrics.delivery_ratio(l));
        summary->max_growth_ratio = std::max(summary->max_growth_ratio, run.verdict.growth_ratio[l]);
      }
      summary->max_frame_drop = run.metrics.max_frame_drop;
    }
    return RTS_OK;
  });
}

int rts_sweep(rts_experiment* experiment, const char* out_dir, double* p_hat) {
  if (experiment == nullptr) return fail(RTS_ERR_INVALID_ARGUMENT, "null experiment");
  return guarded([&]() -> int {
    const auto& config = experiment->config;
    const auto sweep = rts::sweep_frontier(config, config.policy, sink_for(experiment));
    if (out_dir != nullptr) rts::write_sweep(out_dir, config, sweep);
    experiment->last_table = rts::frontier_csv({sweep});
    if (p_hat != nullptr) *p_hat = sweep.p_hat;
    return RTS_OK;
  });
}

int rts_compare(rts_experiment* experiment, const char* out_dir) {
  if (experiment == nullptr) return fail(RTS_ERR_INVALID_ARGUMENT, "null experiment");
  return guarded([&]() -> int {
    const auto& config = experiment->config;
    const auto result = rts::compare_policies(config, config.sweep.policies, sink_for(experiment));
    if (out_dir != nullptr) rts::write_compare(out_dir, config, result);
    experiment->last_table = rts::compare_csv(result);
    return RTS_OK;
  });
}

int rts_experiment_last_table(const rts_experiment* experiment, char* buf, size_t cap, size_t* needed) {
  if (experiment == nullptr) return fail(RTS_ERR_INVALID_ARGUMENT, "null experiment");
  return guarded([&]() -> int { return copy_out(experiment->last_table, buf, cap, needed); });
}

int rts_graph_create(int links, const int* edge_pairs, size_t edge_count, rts_graph** out) {
  if (out == nullptr || (edge_count > 0 && edge_pairs == nullptr)) {
    return fail(RTS_ERR_INVALID_ARGUMENT, "null argument");
  }
  *out = nullptr;
  return guarded([&]() -> int {
    std::vector<rts::InterferenceGraph::Edge> edges;
    for (size_t i = 0; i < edge_count; ++i) edges.emplace_back(edge_pairs[2 * i], edge_pairs[2 * i + 1]);
    auto g = std::make_unique<rts_graph>();
    g->graph = std::make_unique<rts::InterferenceGraph>(links, edges);
    *out = g.release();
    return RTS_OK;
  });
}

void rts_graph_free(rts_graph* graph) { delete graph; }

int rts_graph_mis(const rts_graph* graph, uint64_t* sets, size_t cap, size_t* count) {
  if (graph == nullptr || count == nullptr) return fail(RTS_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&]() -> int {
    const auto family = rts::enumerate_mis(*graph->graph);
    *count = family.size();
    if (sets != nullptr) {
      for (size_t i = 0; i < std::min(cap, family.size()); ++i) sets[i] = family[i].bits();
    }
    return RTS_OK;
  });
}

}  // extern "C"
