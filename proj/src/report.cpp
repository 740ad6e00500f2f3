#include "rtsched/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "json.hpp"

#include "rtsched/error.hpp"

namespace rts {

namespace {

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string num(std::uint64_t v) { return std::to_string(v); }

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << body;
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

std::filesystem::path prepare(const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create '" + out_dir + "': " + ec.message());
  return std::filesystem::path(out_dir);
}

std::vector<const RunResult*> all_runs(const std::vector<SweepResult>& sweeps) {
  std::vector<const RunResult*> runs;
  for (const auto& s : sweeps)
    for (const auto& probe : s.probes)
      for (const auto& r : probe.runs) runs.push_back(&r);
  return runs;
}

}  // namespace

std::string summary_csv(const ExperimentConfig& config, const std::vector<const RunResult*>& runs) {
  std::string out = "policy,scale,seed,verdict,slots,idle_slots,max_frame_drop";
  for (int l = 0; l < config.links; ++l) {
    const std::string s = std::to_string(l);
    out += ",p_" + s + ",arrived_" + s + ",delivered_" + s + ",expired_" + s + ",dropped_" + s +
           ",delivery_ratio_" + s + ",mean_deficit_" + s + ",growth_" + s;
  }
  out += '\n';
  for (const RunResult* r : runs) {
    const auto& m = r->metrics;
    out += r->policy + ',' + num(r->scale) + ',' + num(r->seed) + ',' + (r->verdict.stable ? "stable" : "unstable") +
           ',' + num(m.slots_run) + ',' + num(m.idle_slots) + ',' + num(m.max_frame_drop);
    for (int l = 0; l < m.link_count(); ++l) {
      out += ',' + num(r->target_ratios[l]) + ',' + num(m.arrivals_total[l]) + ',' + num(m.delivered_total[l]) + ',' +
             num(m.expired_total[l]) + ',' + num(m.dropped_total[l]) + ',' + num(m.delivery_ratio(l)) + ',' +
             num(m.mean_deficit(l)) + ',' + num(r->verdict.growth_ratio[l]);
    }
    out += '\n';
  }
  return out;
}

std::string deficits_csv(const RunResult& run) {
  const auto& m = run.metrics;
  std::string out = "slot";
  for (int l = 0; l < m.link_count(); ++l) out += ",w_" + std::to_string(l);
  out += '\n';
  for (std::size_t i = 0; i < m.series_slots.size(); ++i) {
    out += num(m.series_slots[i]);
    for (double w : m.deficit_series[i]) out += ',' + num(w);
    out += '\n';
  }
  return out;
}

std::string frontier_csv(const std::vector<SweepResult>& sweeps) {
  std::string out = "policy,p_hat,resolution,probes\n";
  for (const auto& s : sweeps) {
    std::string probes;
    for (const auto& p : s.probes) {
      if (!probes.empty()) probes += ' ';
      probes += num(p.scale) + ':' + std::to_string(p.stable_votes) + '/' + std::to_string(p.runs.size());
    }
    out += s.policy + ',' + num(s.p_hat) + ',' + num(s.resolution) + ',' + probes + '\n';
  }
  return out;
}

std::string compare_csv(const CompareResult& result) {
  std::string out = "policy,p_hat,ratio_vs_frame_optimal,status\n";
  for (const auto& row : result.rows) {
    std::string status = row.status;
    for (char& c : status)
      if (c == ',' || c == '\n') c = ';';
    out += row.policy + ',' + (row.p_hat ? num(*row.p_hat) : "") + ',' + (row.ratio ? num(*row.ratio) : "") + ',' +
           status + '\n';
  }
  return out;
}

std::vector<std::string> run_warnings(const std::vector<const RunResult*>& runs) {
  std::set<std::string> warnings;
  for (const RunResult* r : runs) {
    if (r->verdict.short_horizon) {
      warnings.insert("horizon " + std::to_string(r->metrics.horizon) +
                      " is below 10^4 slots; stability verdicts are not trustworthy");
    }
    if (r->stats.uniform_fallbacks > 0) {
      warnings.insert(r->policy + ": all schedule weights were zero in some slots; used uniform selection");
    }
    if (r->stats.qmin_substitutions > 0) {
      warnings.insert(r->policy + ": unequal success probabilities; used q_min in some slots");
    }
    if (r->stats.zero_q_idles > 0) warnings.insert(r->policy + ": idled in slots with q = 0");
  }
  return {warnings.begin(), warnings.end()};
}

std::string manifest_json(const ExperimentConfig& config, const std::string& command,
                          const std::vector<std::string>& files, const std::vector<std::string>& warnings) {
  nlohmann::json j;
  j["command"] = command;
  j["config"] = nlohmann::json::parse(config_to_json(config, -1));
  j["outputs"] = files;
  j["warnings"] = warnings;
  return j.dump(2) + "\n";
}

std::vector<std::string> write_run(const std::string& out_dir, const ExperimentConfig& config, const RunResult& run) {
  const auto dir = prepare(out_dir);
  std::vector<std::string> files = {"summary.csv"};
  write_file(dir / "summary.csv", summary_csv(config, {&run}));
  if (!run.metrics.series_slots.empty()) {
    write_file(dir / "deficits.csv", deficits_csv(run));
    files.push_back("deficits.csv");
  }
  files.push_back("manifest.json");
  write_file(dir / "manifest.json", manifest_json(config, "run", files, run_warnings({&run})));
  return files;
}

std::vector<std::string> write_sweep(const std::string& out_dir, const ExperimentConfig& config,
                                     const SweepResult& sweep) {
  const auto dir = prepare(out_dir);
  const std::vector<SweepResult> sweeps = {sweep};
  write_file(dir / "sweep.csv", summary_csv(config, all_runs(sweeps)));
  write_file(dir / "frontier.csv", frontier_csv(sweeps));
  std::vector<std::string> files = {"sweep.csv", "frontier.csv", "manifest.json"};
  write_file(dir / "manifest.json", manifest_json(config, "sweep", files, run_warnings(all_runs(sweeps))));
  return files;
}

std::vector<std::string> write_compare(const std::string& out_dir, const ExperimentConfig& config,
                                       const CompareResult& result) {
  const auto dir = prepare(out_dir);
  write_file(dir / "compare.csv", compare_csv(result));
  write_file(dir / "sweep.csv", summary_csv(config, all_runs(result.sweeps)));
  write_file(dir / "frontier.csv", frontier_csv(result.sweeps));
  std::vector<std::string> files = {"compare.csv", "sweep.csv", "frontier.csv", "manifest.json"};
  auto warnings = run_warnings(all_runs(result.sweeps));
  for (const auto& row : result.rows)
    if (row.status != "ok") warnings.push_back(row.policy + ": " + row.status);
  write_file(dir / "manifest.json", manifest_json(config, "compare", files, warnings));
  return files;
}

}  // namespace rts
