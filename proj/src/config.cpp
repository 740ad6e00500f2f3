#include "rtsched/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "rtsched/error.hpp"
#include "rtsched/registry.hpp"

namespace rts {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& message) { throw Error(ErrorCode::ConfigError, message); }

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(std::string("bad value for '") + key + "'");
  }
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) fail(where + ": missing '" + key + "'");
  return j.at(key);
}

std::vector<double> doubles(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) fail(where + ": expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

/// Per-link arrival lists: each entry is a deadline (one packet) or
/// {"count": c, "deadline": d}.
std::vector<std::vector<ArrivalGroup>> parse_arrivals(const json& j, int links, const std::string& where) {
  std::vector<std::vector<ArrivalGroup>> out(static_cast<std::size_t>(links));
  if (j.is_null()) return out;
  if (!j.is_array() || static_cast<int>(j.size()) != links) {
    fail(where + ": 'arrivals' needs one list per link");
  }
  for (int l = 0; l < links; ++l) {
    const auto& entry = j[static_cast<std::size_t>(l)];
    if (entry.is_number_integer()) {
      out[l].push_back({1, entry.get<int>()});
      continue;
    }
    if (!entry.is_array()) fail(where + ": arrivals of link " + std::to_string(l) + " must be a list");
    for (const auto& g : entry) {
      if (g.is_number_integer()) {
        out[l].push_back({1, g.get<int>()});
      } else if (g.is_object()) {
        out[l].push_back({get_or<int>(g, "count", 1), get_or<int>(g, "deadline", 1)});
      } else {
        fail(where + ": arrival group must be a deadline or {count, deadline}");
      }
    }
  }
  return out;
}

TrafficFadingState parse_state(const json& j, int links, const std::string& where) {
  TrafficFadingState state;
  state.arrivals = parse_arrivals(j.contains("arrivals") ? j.at("arrivals") : json(), links, where);
  const auto& q = require(j, "q", where);
  if (q.is_number()) {
    state.success_probs.assign(static_cast<std::size_t>(links), q.get<double>());
  } else {
    state.success_probs = doubles(q, where + ".q");
    if (static_cast<int>(state.success_probs.size()) != links) fail(where + ": 'q' needs one value per link");
  }
  return state;
}

void infer_limits(const std::vector<TrafficFadingState>& states, int& a_max, int& d_max) {
  for (const auto& s : states) {
    for (int l = 0; l < s.link_count(); ++l) {
      a_max = std::max(a_max, s.arrival_count(l));
      for (const auto& g : s.arrivals[l]) d_max = std::max(d_max, g.deadline);
    }
  }
}

std::shared_ptr<const TrafficFadingChain> parse_chain(const json& j, int links) {
  const std::string type = get_or<std::string>(j, "type", "pattern");
  std::shared_ptr<TrafficFadingChain> chain;
  if (type == "pattern") {
    PatternSpec spec;
    const auto& patterns = require(j, "patterns", "chain");
    if (!patterns.is_array() || patterns.empty()) fail("chain.patterns must be a nonempty list");
    std::vector<TrafficFadingState> all;
    for (std::size_t i = 0; i < patterns.size(); ++i) {
      std::vector<TrafficFadingState> slots;
      if (!patterns[i].is_array() || patterns[i].empty()) fail("chain.patterns[" + std::to_string(i) + "] is empty");
      for (std::size_t s = 0; s < patterns[i].size(); ++s) {
        slots.push_back(parse_state(patterns[i][s], links,
                                    "chain.patterns[" + std::to_string(i) + "][" + std::to_string(s) + "]"));
      }
      all.insert(all.end(), slots.begin(), slots.end());
      spec.patterns.push_back(std::move(slots));
    }
    spec.switch_prob = get_or<double>(j, "switch_prob", 1.0);
    int a_max = 1;
    int d_max = 1;
    infer_limits(all, a_max, d_max);
    spec.a_max = get_or<int>(j, "a_max", a_max);
    spec.d_max = get_or<int>(j, "d_max", d_max);
    chain = std::make_shared<TrafficFadingChain>(build_alternating_pattern(spec));
  } else if (type == "iid") {
    const auto probs = doubles(require(j, "arrival_probs", "chain"), "chain.arrival_probs");
    const auto& qj = require(j, "q", "chain");
    std::vector<double> q = qj.is_number() ? std::vector<double>(static_cast<std::size_t>(links), qj.get<double>())
                                           : doubles(qj, "chain.q");
    if (static_cast<int>(probs.size()) != links || static_cast<int>(q.size()) != links) {
      fail("chain: iid arrival_probs and q need one value per link");
    }
    chain = std::make_shared<TrafficFadingChain>(build_iid(probs, get_or<int>(j, "deadline", 1), q));
  } else if (type == "explicit") {
    const auto& sj = require(j, "states", "chain");
    if (!sj.is_array() || sj.empty()) fail("chain.states must be a nonempty list");
    std::vector<TrafficFadingState> states;
    for (std::size_t i = 0; i < sj.size(); ++i) {
      states.push_back(parse_state(sj[i], links, "chain.states[" + std::to_string(i) + "]"));
    }
    std::vector<std::vector<double>> matrix;
    const auto& mj = require(j, "matrix", "chain");
    if (!mj.is_array()) fail("chain.matrix must be a list of rows");
    for (std::size_t r = 0; r < mj.size(); ++r) matrix.push_back(doubles(mj[r], "chain.matrix"));
    int a_max = 1;
    int d_max = 1;
    infer_limits(states, a_max, d_max);
    chain = std::make_shared<TrafficFadingChain>(std::move(states), std::move(matrix), get_or<int>(j, "initial", 0),
                                                 get_or<int>(j, "a_max", a_max), get_or<int>(j, "d_max", d_max));
  } else {
    fail("chain.type must be 'pattern', 'iid' or 'explicit'");
  }
  if (j.contains("anchor")) chain->set_frame_anchor(get_or<int>(j, "anchor", 0));
  return chain;
}

void parse_policy(const json& j, ExperimentConfig& config) {
  if (j.is_string()) {
    config.policy = j.get<std::string>();
    return;
  }
  if (!j.is_object()) fail("'policy' must be a name or an object");
  auto& p = config.params;
  config.policy = get_or<std::string>(j, "name", config.policy);
  p.delta = get_or<double>(j, "delta", p.delta);
  if (j.contains("nu")) {
    const auto& nu = j.at("nu");
    p.timer_rates = nu.is_number() ? std::vector<double>(static_cast<std::size_t>(config.links), nu.get<double>())
                                   : doubles(nu, "policy.nu");
  }
  const auto order = get_or<std::string>(j, "coloring_order", "degree");
  if (order == "degree") {
    p.coloring_order = ColoringOrder::Degree;
  } else if (order == "natural") {
    p.coloring_order = ColoringOrder::Natural;
  } else {
    fail("policy.coloring_order must be 'degree' or 'natural'");
  }
  const auto search = get_or<std::string>(j, "nstar", "linear");
  if (search == "linear") {
    p.nstar_search = NStarSearch::Linear;
  } else if (search == "binary") {
    p.nstar_search = NStarSearch::Binary;
  } else {
    fail("policy.nstar must be 'linear' or 'binary'");
  }
  p.allow_qmin = get_or<bool>(j, "allow_qmin", p.allow_qmin);
  p.enumeration_cap = get_or<int>(j, "enumeration_cap", p.enumeration_cap);
  p.frame_cycles = get_or<int>(j, "frame_k", p.frame_cycles);
  p.frame_anchor = get_or<int>(j, "anchor", p.frame_anchor);
  p.max_return_time = get_or<std::uint64_t>(j, "max_return_time", p.max_return_time);
  if (j.contains("oracle")) {
    const auto& o = j.at("oracle");
    p.oracle.max_links = get_or<int>(o, "max_links", p.oracle.max_links);
    p.oracle.max_frame = get_or<int>(o, "max_frame", p.oracle.max_frame);
    p.oracle.max_deadline = get_or<int>(o, "max_deadline", p.oracle.max_deadline);
    p.oracle.max_arrivals = get_or<int>(o, "max_arrivals", p.oracle.max_arrivals);
    p.oracle.max_states = get_or<std::size_t>(o, "max_states", p.oracle.max_states);
  }
}

}  // namespace

const char* admission_name(AdmissionMode mode) {
  return mode == AdmissionMode::CoinToss ? "coin_toss" : "deterministic";
}

std::vector<double> ExperimentConfig::target_ratios(double at_scale) const {
  std::vector<double> p(direction.size());
  for (std::size_t l = 0; l < direction.size(); ++l) p[l] = std::clamp(at_scale * direction[l], 0.0, 1.0);
  return p;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("config must be a JSON object");

  ExperimentConfig config;
  config.name = get_or<std::string>(j, "name", config.name);

  const auto& graph = require(j, "graph", "config");
  config.links = get_or<int>(graph, "links", 0);
  if (config.links < 1) fail("graph.links must be a positive integer");
  if (get_or<bool>(graph, "complete", false)) {
    for (int a = 0; a < config.links; ++a)
      for (int b = a + 1; b < config.links; ++b) config.edges.emplace_back(a, b);
  } else if (graph.contains("edges")) {
    for (const auto& e : graph.at("edges")) {
      if (!e.is_array() || e.size() != 2) fail("graph.edges entries must be [a, b] pairs");
      config.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
  }
  try {
    config.graph = std::make_shared<InterferenceGraph>(config.links, config.edges);
  } catch (const Error& e) {
    fail(std::string("graph: ") + e.what());
  }

  const auto& chain = require(j, "chain", "config");
  try {
    config.chain = parse_chain(chain, config.links);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    fail(std::string("chain: ") + e.what());
  }
  config.chain_json = chain.dump();

  if (j.contains("policy")) parse_policy(j.at("policy"), config);

  const auto admission = get_or<std::string>(j, "admission", "coin_toss");
  if (admission == "coin_toss") {
    config.admission = AdmissionMode::CoinToss;
  } else if (admission == "deterministic") {
    config.admission = AdmissionMode::Deterministic;
  } else {
    fail("admission must be 'coin_toss' or 'deterministic'");
  }

  if (j.contains("channel")) {
    const auto& c = j.at("channel");
    const auto kind = get_or<std::string>(c, "kind", "independent");
    if (kind == "independent") {
      config.channel.kind = ChannelModel::Kind::Independent;
    } else if (kind == "common_shock") {
      config.channel.kind = ChannelModel::Kind::CommonShock;
    } else {
      fail("channel.kind must be 'independent' or 'common_shock'");
    }
    config.channel.rho = get_or<double>(c, "rho", 0.0);
  }

  config.direction.assign(static_cast<std::size_t>(config.links), 1.0);
  if (j.contains("p")) {
    const auto& p = j.at("p");
    if (p.is_array()) {
      config.direction = doubles(p, "p");
    } else if (p.is_object()) {
      if (p.contains("direction")) config.direction = doubles(p.at("direction"), "p.direction");
      config.scale = get_or<double>(p, "scale", config.scale);
    } else if (p.is_number()) {
      config.scale = p.get<double>();
    } else {
      fail("'p' must be a number, a list, or {direction, scale}");
    }
  }

  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    config.sweep.lo = get_or<double>(s, "lo", config.sweep.lo);
    config.sweep.hi = get_or<double>(s, "hi", config.sweep.hi);
    config.sweep.steps = get_or<int>(s, "steps", config.sweep.steps);
    config.sweep.seeds = get_or<int>(s, "seeds", config.sweep.seeds);
    config.sweep.policies = get_or<std::vector<std::string>>(s, "policies", {});
  }
  if (config.sweep.policies.empty()) config.sweep.policies = {config.policy};

  config.horizon = get_or<std::uint64_t>(j, "horizon", config.horizon);
  config.seed = get_or<std::uint64_t>(j, "seed", config.seed);
  config.series_stride = get_or<std::uint64_t>(j, "series_stride", config.series_stride);
  if (j.contains("stability")) {
    const auto& s = j.at("stability");
    config.stability.tol = get_or<double>(s, "tol", config.stability.tol);
    config.stability.late_cap = get_or<double>(s, "late_cap", config.stability.late_cap);
    config.stability.growth_floor = get_or<double>(s, "growth_floor", config.stability.growth_floor);
  }
  check_config(config);
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

void check_config(const ExperimentConfig& config) {
  const auto& names = policy_names();
  auto known = [&](const std::string& n) { return std::find(names.begin(), names.end(), n) != names.end(); };
  if (!known(config.policy)) fail("unknown policy '" + config.policy + "'");
  for (const auto& n : config.sweep.policies)
    if (!known(n)) fail("unknown policy '" + n + "' in sweep.policies");
  if (static_cast<int>(config.direction.size()) != config.links) fail("p direction needs one value per link");
  for (double d : config.direction)
    if (!(d >= 0.0)) fail("p direction entries must be nonnegative");
  if (!(config.scale >= 0.0)) fail("p scale must be nonnegative");
  for (double p : config.target_ratios(config.scale))
    if (p < 0.0 || p > 1.0) fail("target ratios must lie in [0, 1]");
  if (config.horizon < kMinHorizon) fail("horizon must be at least " + std::to_string(kMinHorizon) + " slots");
  if (!(config.sweep.lo >= 0.0 && config.sweep.lo < config.sweep.hi)) fail("sweep needs 0 <= lo < hi");
  if (config.sweep.steps < 1 || config.sweep.steps > 30) fail("sweep.steps must be in 1..30");
  if (config.sweep.seeds < 1) fail("sweep.seeds must be positive");
  if (!(config.stability.tol > 0.0) || !(config.stability.late_cap > 0.0) || config.stability.growth_floor < 0.0) {
    fail("stability thresholds must be positive");
  }
  if (!(config.channel.rho >= 0.0 && config.channel.rho <= 1.0)) fail("channel.rho must lie in [0, 1]");
  if (!(config.params.delta > 0.0 && config.params.delta < 1.0)) fail("policy.delta must lie in (0, 1)");
  if (config.chain == nullptr || config.chain->link_count() != config.links) {
    fail("chain link count does not match graph.links");
  }
}

std::string config_to_json(const ExperimentConfig& config, int indent) {
  json j;
  j["name"] = config.name;
  json edges = json::array();
  for (const auto& [a, b] : config.edges) edges.push_back({a, b});
  j["graph"] = {{"links", config.links}, {"edges", edges}};
  json chain = json::parse(config.chain_json);
  chain["resolved_states"] = config.chain->state_count();
  chain["resolved_anchor"] = config.chain->frame_anchor();
  j["chain"] = chain;
  const auto& p = config.params;
  j["policy"] = {
      {"name", config.policy},
      {"delta", p.delta},
      {"nu", p.timer_rates},
      {"coloring_order", p.coloring_order == ColoringOrder::Degree ? "degree" : "natural"},
      {"nstar", p.nstar_search == NStarSearch::Linear ? "linear" : "binary"},
      {"allow_qmin", p.allow_qmin},
      {"enumeration_cap", p.enumeration_cap},
      {"frame_k", p.frame_cycles},
      {"anchor", p.frame_anchor},
      {"max_return_time", p.max_return_time},
      {"oracle",
       {{"max_links", p.oracle.max_links},
        {"max_frame", p.oracle.max_frame},
        {"max_deadline", p.oracle.max_deadline},
        {"max_arrivals", p.oracle.max_arrivals},
        {"max_states", p.oracle.max_states}}},
  };
  j["admission"] = admission_name(config.admission);
  j["channel"] = {{"kind", config.channel.kind == ChannelModel::Kind::Independent ? "independent" : "common_shock"},
                  {"rho", config.channel.rho}};
  j["p"] = {{"direction", config.direction}, {"scale", config.scale}};
  j["sweep"] = {{"lo", config.sweep.lo},
                {"hi", config.sweep.hi},
                {"steps", config.sweep.steps},
                {"seeds", config.sweep.seeds},
                {"policies", config.sweep.policies}};
  j["horizon"] = config.horizon;
  j["seed"] = config.seed;
  j["series_stride"] = config.series_stride;
  j["stability"] = {{"tol", config.stability.tol},
                    {"late_cap", config.stability.late_cap},
                    {"growth_floor", config.stability.growth_floor}};
  return j.dump(indent);
}

}  // namespace rts
