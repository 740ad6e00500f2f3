// Command-line front end over the C interface.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rtsched/rtsched.h"

namespace {

struct Common {
  std::string config;
  std::string policy;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> horizon;
  std::optional<double> scale;
  std::string out;
  bool verbose = false;
};

void add_common(CLI::App* cmd, Common& c, bool with_out = true) {
  cmd->add_option("--config", c.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--policy", c.policy, "Policy name (see `rtsched policies`)");
  cmd->add_option("--seed", c.seed, "Master seed");
  cmd->add_option("--horizon", c.horizon, "Slots per run (>= 1000)");
  cmd->add_option("--scale", c.scale, "Scale applied to the p direction");
  if (with_out) cmd->add_option("--out", c.out, "Output directory for CSV and manifest");
  cmd->add_flag("-v,--verbose", c.verbose, "Print progress to stderr");
}

int report(int status, const char* what) {
  if (status != RTS_OK) {
    std::fprintf(stderr, "rtsched: %s failed (%s): %s\n", what, rts_status_name(status), rts_last_error());
  }
  return status;
}

/// Loads the config and applies command-line overrides; null on failure.
rts_experiment* open(const Common& c) {
  rts_experiment* e = nullptr;
  if (report(rts_experiment_load_file(c.config.c_str(), &e), "loading config") != RTS_OK) return nullptr;
  int status = RTS_OK;
  if (!c.policy.empty()) status = report(rts_experiment_set_policy(e, c.policy.c_str()), "--policy");
  if (status == RTS_OK && c.seed) status = report(rts_experiment_set_seed(e, *c.seed), "--seed");
  if (status == RTS_OK && c.horizon) status = report(rts_experiment_set_horizon(e, *c.horizon), "--horizon");
  if (status == RTS_OK && c.scale) status = report(rts_experiment_set_scale(e, *c.scale), "--scale");
  if (status == RTS_OK) status = report(rts_experiment_set_verbose(e, c.verbose ? 1 : 0), "--verbose");
  if (status != RTS_OK) {
    rts_experiment_free(e);
    return nullptr;
  }
  return e;
}

const char* out_or_null(const Common& c) { return c.out.empty() ? nullptr : c.out.c_str(); }

void print_table(const rts_experiment* e) {
  size_t needed = 0;
  rts_experiment_last_table(e, nullptr, 0, &needed);
  std::vector<char> buf(needed);
  if (rts_experiment_last_table(e, buf.data(), buf.size(), &needed) == RTS_OK) std::printf("%s", buf.data());
}

int exit_code(int status) { return status == RTS_OK ? 0 : 1; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deadline-constrained link scheduling simulator"};
  app.require_subcommand(1);

  Common run_opts;
  auto* run = app.add_subcommand("run", "Simulate one episode");
  add_common(run, run_opts);

  Common sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "Locate the stability frontier of one policy");
  add_common(sweep, sweep_opts);

  Common compare_opts;
  std::string compare_list;
  auto* compare = app.add_subcommand("compare", "Frontier table for several policies");
  add_common(compare, compare_opts);
  compare->add_option("--policies", compare_list, "Comma-separated policy list (default: config sweep.policies)");

  Common validate_opts;
  auto* validate = app.add_subcommand("validate", "Check the traffic-fading chain");
  add_common(validate, validate_opts, false);

  app.add_subcommand("policies", "List policy names");

  CLI11_PARSE(app, argc, argv);

  if (app.got_subcommand("policies")) {
    for (size_t i = 0; i < rts_policy_count(); ++i) std::printf("%s\n", rts_policy_name(i));
    return 0;
  }

  if (run->parsed()) {
    rts_experiment* e = open(run_opts);
    if (e == nullptr) return 1;
    rts_run_summary s{};
    const int status = report(rts_run(e, out_or_null(run_opts), &s), "run");
    if (status == RTS_OK) {
      std::printf("verdict: %s\nslots: %llu\nmin delivery ratio: %.6f\nmax growth ratio: %.6f\n",
                  s.stable ? "stable" : "unstable", static_cast<unsigned long long>(s.slots), s.min_delivery_ratio,
                  s.max_growth_ratio);
    }
    rts_experiment_free(e);
    return exit_code(status);
  }

  if (sweep->parsed()) {
    rts_experiment* e = open(sweep_opts);
    if (e == nullptr) return 1;
    double p_hat = 0.0;
    const int status = report(rts_sweep(e, out_or_null(sweep_opts), &p_hat), "sweep");
    if (status == RTS_OK) {
      print_table(e);
      std::printf("p_hat: %.6f\n", p_hat);
    }
    rts_experiment_free(e);
    return exit_code(status);
  }

  if (compare->parsed()) {
    rts_experiment* e = open(compare_opts);
    if (e == nullptr) return 1;
    int status = RTS_OK;
    if (!compare_list.empty()) {
      status = report(rts_experiment_set_compare_policies(e, compare_list.c_str()), "--policies");
    }
    if (status == RTS_OK) status = report(rts_compare(e, out_or_null(compare_opts)), "compare");
    if (status == RTS_OK) print_table(e);
    rts_experiment_free(e);
    return exit_code(status);
  }

  if (validate->parsed()) {
    rts_experiment* e = open(validate_opts);
    if (e == nullptr) return 1;
    size_t needed = 0;
    rts_validate(e, nullptr, 0, &needed);
    std::vector<char> buf(needed);
    const int status = rts_validate(e, buf.data(), buf.size(), &needed);
    std::printf("%s", buf.data());
    if (status != RTS_OK && status != RTS_ERR_CHAIN_INVALID) report(status, "validate");
    rts_experiment_free(e);
    return exit_code(status);
  }
  return 0;
}
