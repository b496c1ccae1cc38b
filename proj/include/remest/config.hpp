#pragma once

// Experiment configuration: a single JSON file with explicit matrix
// literals. Unknown keys are rejected so that typos surface as errors
// instead of silently falling back to defaults.

#include "remest/channel.hpp"
#include "remest/process.hpp"
#include "remest/simulate.hpp"
#include "remest/stability.hpp"

#include <json.hpp>

#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace remest {

using Json = nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AnalysisSettings {
  int theorem = 1;
  LambdaSearchOptions search;
  double tolerance = 1e-10;
};

struct SimulationSettings {
  SchedulerKind policy = SchedulerKind::persistent_serial;
  std::optional<std::vector<ChannelSelectionVector>> period_table;
  long horizon = 100000;
  std::uint64_t seed = 1;
  int num_seeds = 1;
  bool redundant = false;
  StateKnowledge knowledge = StateKnowledge::previous;
  double divergence_guard = 1e4;
  bool record_slots = false;
};

struct ExperimentConfig {
  std::vector<LtiProcess> processes;
  MarkovChannelModel channel;
  // Per-frequency factors when the channel was declared as independent
  // two-state chains (needed for the Corollary-1 sweep column).
  std::optional<std::vector<TwoStateChain>> factors;
  std::optional<std::vector<MarkovChannelModel>> sensor_channels;  // theorem 5
  AnalysisSettings analysis;
  SimulationSettings simulation;

  ProcessSet process_set() const { return ProcessSet(processes); }
};

namespace cfg_detail {

inline void check_keys(const Json& obj, const std::string& where,
                       std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

inline Matrix parse_matrix(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw ConfigError(where + ": expected a matrix literal (array of rows)");
  }
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw ConfigError(where + ": ragged matrix rows");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) throw ConfigError(where + ": non-numeric entry");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

inline LtiProcess parse_process(const Json& j, const std::string& where) {
  check_keys(j, where, {"a", "c", "w", "v"});
  for (const char* key : {"a", "c", "w", "v"}) {
    if (!j.contains(key)) throw ConfigError(where + ": missing matrix '" + key + "'");
  }
  try {
    return make_process(parse_matrix(j["a"], where + ".a"), parse_matrix(j["c"], where + ".c"),
                        parse_matrix(j["w"], where + ".w"), parse_matrix(j["v"], where + ".v"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

inline MarkovChannelModel parse_channel(const Json& j, const std::string& where,
                                        std::optional<std::vector<TwoStateChain>>* factors_out) {
  if (!j.is_object() || !j.contains("type")) {
    throw ConfigError(where + ": channel needs a 'type' field");
  }
  const std::string type = j["type"].get<std::string>();
  MarkovChannelModel ch;
  if (type == "independent") {
    check_keys(j, where, {"type", "factors"});
    if (!j.contains("factors")) throw ConfigError(where + ": missing 'factors'");
    std::vector<TwoStateChain> factors;
    for (std::size_t i = 0; i < j["factors"].size(); ++i) {
      const Json& f = j["factors"][i];
      const std::string fw = where + ".factors[" + std::to_string(i) + "]";
      check_keys(f, fw, {"alpha00", "alpha11"});
      if (!f.contains("alpha00") || !f.contains("alpha11")) {
        throw ConfigError(fw + ": needs alpha00 and alpha11");
      }
      factors.push_back(TwoStateChain{f["alpha00"].get<double>(), f["alpha11"].get<double>()});
    }
    ch = compose_independent(factors);
    if (factors_out != nullptr) *factors_out = std::move(factors);
  } else if (type == "explicit") {
    check_keys(j, where, {"type", "kind", "states", "drop_probs", "transition"});
    if (!j.contains("transition")) throw ConfigError(where + ": missing 'transition'");
    ch.trans = parse_matrix(j["transition"], where + ".transition");
    const std::string kind = j.value("kind", std::string("binary"));
    if (kind == "binary") {
      ch.kind = ChannelKind::binary_onoff;
      if (!j.contains("states")) throw ConfigError(where + ": binary channel needs 'states'");
      for (const auto& row : j["states"]) {
        ch.on_bits.push_back(row.get<std::vector<int>>());
      }
      ch.num_freq = ch.on_bits.empty() ? 0 : static_cast<int>(ch.on_bits.front().size());
    } else if (kind == "multilevel") {
      ch.kind = ChannelKind::multilevel_hidden;
      if (!j.contains("drop_probs")) {
        throw ConfigError(where + ": multilevel channel needs 'drop_probs'");
      }
      for (const auto& row : j["drop_probs"]) {
        ch.drop_probs.push_back(row.get<std::vector<double>>());
      }
      ch.num_freq = ch.drop_probs.empty() ? 0 : static_cast<int>(ch.drop_probs.front().size());
    } else {
      throw ConfigError(where + ": kind must be 'binary' or 'multilevel'");
    }
  } else {
    throw ConfigError(where + ": type must be 'independent' or 'explicit'");
  }
  try {
    validate_channel(ch);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return ch;
}

}  // namespace cfg_detail

inline ExperimentConfig parse_config(const Json& root) {
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  cfg_detail::check_keys(root, "config",
                         {"processes", "channel", "sensor_channels", "analysis", "simulation"});
  ExperimentConfig cfg;

  if (!root.contains("processes") || !root["processes"].is_array() || root["processes"].empty()) {
    throw ConfigError("config: 'processes' must be a non-empty array");
  }
  for (std::size_t i = 0; i < root["processes"].size(); ++i) {
    cfg.processes.push_back(
        cfg_detail::parse_process(root["processes"][i], "processes[" + std::to_string(i) + "]"));
  }

  if (!root.contains("channel")) throw ConfigError("config: missing 'channel'");
  cfg.channel = cfg_detail::parse_channel(root["channel"], "channel", &cfg.factors);

  if (root.contains("sensor_channels")) {
    std::vector<MarkovChannelModel> per_sensor;
    for (std::size_t i = 0; i < root["sensor_channels"].size(); ++i) {
      per_sensor.push_back(cfg_detail::parse_channel(
          root["sensor_channels"][i], "sensor_channels[" + std::to_string(i) + "]", nullptr));
    }
    cfg.sensor_channels = std::move(per_sensor);
  }

  if (root.contains("analysis")) {
    const Json& a = root["analysis"];
    cfg_detail::check_keys(a, "analysis", {"theorem", "depth_max", "frontier_cap", "tolerance"});
    cfg.analysis.theorem = a.value("theorem", 1);
    if (cfg.analysis.theorem < 1 || cfg.analysis.theorem > 5) {
      throw ConfigError("analysis.theorem: must be in 1..5");
    }
    cfg.analysis.search.depth_max = a.value("depth_max", 6);
    cfg.analysis.search.frontier_cap = a.value("frontier_cap", std::size_t{20000});
    cfg.analysis.tolerance = a.value("tolerance", 1e-10);
  }

  if (root.contains("simulation")) {
    const Json& s = root["simulation"];
    cfg_detail::check_keys(s, "simulation",
                           {"policy", "period_table", "horizon", "seed", "num_seeds", "redundant",
                            "state_knowledge", "divergence_guard", "record_slots"});
    const std::string policy = s.value("policy", std::string("persistent-serial"));
    if (policy == "persistent-serial") {
      cfg.simulation.policy = SchedulerKind::persistent_serial;
    } else if (policy == "round-robin") {
      cfg.simulation.policy = SchedulerKind::round_robin;
    } else if (policy == "greedy-max-aoi") {
      cfg.simulation.policy = SchedulerKind::greedy_max_aoi;
    } else {
      throw ConfigError("simulation.policy: unknown policy '" + policy + "'");
    }
    if (s.contains("period_table")) {
      std::vector<ChannelSelectionVector> table;
      for (const auto& row : s["period_table"]) {
        ChannelSelectionVector v;
        v.choices = row.get<std::vector<int>>();
        check_selection(cfg.channel, v);
        table.push_back(std::move(v));
      }
      if (table.empty()) throw ConfigError("simulation.period_table: must be non-empty");
      cfg.simulation.period_table = std::move(table);
    }
    cfg.simulation.horizon = s.value("horizon", 100000L);
    cfg.simulation.seed = s.value("seed", std::uint64_t{1});
    cfg.simulation.num_seeds = s.value("num_seeds", 1);
    cfg.simulation.redundant = s.value("redundant", false);
    const std::string knowledge = s.value("state_knowledge", std::string("previous"));
    if (knowledge == "previous") {
      cfg.simulation.knowledge = StateKnowledge::previous;
    } else if (knowledge == "current") {
      cfg.simulation.knowledge = StateKnowledge::current;
    } else {
      throw ConfigError("simulation.state_knowledge: must be 'previous' or 'current'");
    }
    cfg.simulation.divergence_guard = s.value("divergence_guard", 1e4);
    cfg.simulation.record_slots = s.value("record_slots", false);
  }

  if (cfg.analysis.theorem == 5 && !cfg.sensor_channels) {
    throw ConfigError("config: theorem 5 requires 'sensor_channels'");
  }
  if (cfg.sensor_channels && cfg.sensor_channels->size() != cfg.processes.size()) {
    throw ConfigError("config: 'sensor_channels' length must equal the number of processes");
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  Json root;
  try {
    root = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());  // includes the byte offset
  }
  return parse_config(root);
}

}  // namespace remest
