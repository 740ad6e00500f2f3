// Exercises the shared library through its C header only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rtsched/rtsched.h"

namespace {

const char* kConfig = R"({
  "graph": {"links": 2, "complete": true},
  "chain": {"type": "pattern", "patterns": [
    [{"arrivals": [[2], [1]], "q": 0.6}, {"q": 0.6}],
    [{"arrivals": [[1], [2]], "q": 0.6}, {"q": 0.6}]], "anchor": 1},
  "policy": "gms",
  "p": {"direction": [1, 1], "scale": 0.4},
  "sweep": {"lo": 0, "hi": 1, "steps": 3, "seeds": 2, "policies": ["gms", "famix-nd"]},
  "horizon": 5000, "seed": 11
})";

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Experiment {
  rts_experiment* handle = nullptr;
  Experiment() { REQUIRE(rts_experiment_load_string(kConfig, &handle) == RTS_OK); }
  ~Experiment() { rts_experiment_free(handle); }
};

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("rtsched_capi_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("metadata") {
  CHECK(std::strlen(rts_version()) > 0);
  CHECK(std::string(rts_status_name(RTS_OK)) == "ok");
  CHECK(rts_policy_count() == 7);
  CHECK(std::string(rts_policy_name(0)) == "mws");
  CHECK(rts_policy_name(rts_policy_count()) == nullptr);
}

TEST_CASE("load errors are reported") {
  rts_experiment* e = nullptr;
  CHECK(rts_experiment_load_string("{", &e) == RTS_ERR_CONFIG);
  CHECK(e == nullptr);
  CHECK(std::strlen(rts_last_error()) > 0);
  CHECK(rts_experiment_load_file("/nonexistent/config.json", &e) == RTS_ERR_IO);
  CHECK(rts_experiment_load_string(kConfig, nullptr) == RTS_ERR_INVALID_ARGUMENT);
  rts_experiment_free(nullptr);
}

TEST_CASE("overrides") {
  Experiment x;
  CHECK(rts_experiment_set_policy(x.handle, "nope") == RTS_ERR_CONFIG);
  CHECK(rts_experiment_set_policy(x.handle, "mws") == RTS_OK);
  CHECK(rts_experiment_set_horizon(x.handle, 10) == RTS_ERR_CONFIG);
  CHECK(rts_experiment_set_horizon(x.handle, 3000) == RTS_OK);
  CHECK(rts_experiment_set_seed(x.handle, 42) == RTS_OK);
  CHECK(rts_experiment_set_scale(x.handle, -1.0) == RTS_ERR_CONFIG);
  CHECK(rts_experiment_set_compare_policies(x.handle, "mws,,gms") == RTS_OK);
  CHECK(rts_experiment_set_compare_policies(x.handle, "mws,bogus") == RTS_ERR_CONFIG);

  size_t needed = 0;
  REQUIRE(rts_experiment_config_json(x.handle, nullptr, 0, &needed) == RTS_OK);
  std::vector<char> small(4);
  CHECK(rts_experiment_config_json(x.handle, small.data(), small.size(), &needed) == RTS_ERR_BUFFER_TOO_SMALL);
  std::vector<char> buf(needed);
  REQUIRE(rts_experiment_config_json(x.handle, buf.data(), buf.size(), &needed) == RTS_OK);
  const std::string json(buf.data());
  CHECK(json.find("\"horizon\": 3000") != std::string::npos);
  CHECK(json.find("\"seed\": 42") != std::string::npos);
  CHECK(json.find("\"mws\"") != std::string::npos);
}

TEST_CASE("validate") {
  Experiment x;
  size_t needed = 0;
  CHECK(rts_validate(x.handle, nullptr, 0, &needed) == RTS_OK);
  std::vector<char> buf(needed);
  CHECK(rts_validate(x.handle, buf.data(), buf.size(), &needed) == RTS_OK);
  CHECK(std::string(buf.data()).find("chain: valid") != std::string::npos);

  rts_experiment* bad = nullptr;
  REQUIRE(rts_experiment_load_string(
              R"({"graph": {"links": 1}, "chain": {"type": "iid", "arrival_probs": [1], "q": [0]}, "horizon": 1000})",
              &bad) == RTS_OK);
  CHECK(rts_validate(bad, nullptr, 0, &needed) == RTS_ERR_CHAIN_INVALID);
  rts_experiment_free(bad);
}

TEST_CASE("run writes CSV and a manifest") {
  Experiment x;
  const auto dir = scratch("run");
  rts_run_summary s{};
  REQUIRE(rts_run(x.handle, dir.c_str(), &s) == RTS_OK);
  CHECK(s.slots == 5000);
  CHECK(s.min_delivery_ratio > 0.0);
  CHECK(std::filesystem::exists(dir / "summary.csv"));
  const auto manifest = slurp(dir / "manifest.json");
  CHECK(manifest.find("\"command\": \"run\"") != std::string::npos);
  CHECK(manifest.find("summary.csv") != std::string::npos);

  CHECK(rts_run(x.handle, nullptr, nullptr) == RTS_OK);
  CHECK(rts_run(nullptr, nullptr, nullptr) == RTS_ERR_INVALID_ARGUMENT);
}

TEST_CASE("sweep and compare tables") {
  Experiment x;
  double p_hat = -1.0;
  REQUIRE(rts_sweep(x.handle, nullptr, &p_hat) == RTS_OK);
  CHECK(p_hat >= 0.0);
  CHECK(p_hat < 1.0);
  size_t needed = 0;
  rts_experiment_last_table(x.handle, nullptr, 0, &needed);
  std::vector<char> table(needed);
  REQUIRE(rts_experiment_last_table(x.handle, table.data(), table.size(), &needed) == RTS_OK);
  CHECK(std::string(table.data()).rfind("policy,p_hat,resolution,probes\ngms,", 0) == 0);

  const auto dir = scratch("compare");
  REQUIRE(rts_compare(x.handle, dir.c_str()) == RTS_OK);
  for (const char* f : {"compare.csv", "sweep.csv", "frontier.csv", "manifest.json"})
    CHECK(std::filesystem::exists(dir / f));
  const auto compare = slurp(dir / "compare.csv");
  CHECK(compare.rfind("policy,p_hat,ratio_vs_frame_optimal,status\ngms,", 0) == 0);
  CHECK(compare.find("\nfamix-nd,") != std::string::npos);
}

TEST_CASE("graph helpers") {
  const int edges[] = {0, 1, 1, 2};
  rts_graph* g = nullptr;
  REQUIRE(rts_graph_create(3, edges, 2, &g) == RTS_OK);
  size_t count = 0;
  REQUIRE(rts_graph_mis(g, nullptr, 0, &count) == RTS_OK);
  REQUIRE(count == 2);
  std::uint64_t sets[2] = {};
  REQUIRE(rts_graph_mis(g, sets, 2, &count) == RTS_OK);
  CHECK(sets[0] == 0b101);
  CHECK(sets[1] == 0b010);
  rts_graph_free(g);

  const int loop[] = {1, 1};
  CHECK(rts_graph_create(2, loop, 1, &g) == RTS_ERR_INVALID_ARGUMENT);
}
