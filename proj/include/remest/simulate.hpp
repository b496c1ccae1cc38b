#pragma once

// Discrete-time Monte-Carlo of the multi-sensor estimator: Markov channel
// draws, gateway scheduling, AoI bookkeeping, per-cycle statistics and the
// empirical time-averaged MSE.

#include "remest/channel.hpp"
#include "remest/process.hpp"
#include "remest/stability.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace remest {

enum class SchedulerKind { persistent_serial, round_robin, greedy_max_aoi };
enum class StateKnowledge { previous, current };

struct SchedulerPolicy {
  SchedulerKind kind = SchedulerKind::persistent_serial;
  PeriodicSelectionRule channel_rule;  // per-AoI selection table, shared by all sensors
};

inline SchedulerPolicy make_persistent_serial(std::vector<ChannelSelectionVector> period_table) {
  require(!period_table.empty(), "make_persistent_serial: empty period table");
  return SchedulerPolicy{SchedulerKind::persistent_serial,
                         PeriodicSelectionRule{std::move(period_table)}};
}

struct SimConfig {
  ProcessSet procs;
  MarkovChannelModel channel;
  SchedulerPolicy policy;
  long horizon = 100000;
  std::uint64_t seed = 1;
  bool redundant_mode = false;  // scheduled packet uses every frequency at once
  StateKnowledge knowledge = StateKnowledge::previous;
  double divergence_guard = 1e4;  // AoI ceiling; crossing it flags divergence
  bool record_slots = false;      // keep the per-slot log (memory-heavy for long runs)
  bool simulate_noise_paths = false;  // drive local KFs with sampled noise (demo only)
};

struct SlotRecord {
  long t = 0;
  int sensor = -1;  // scheduled sensor (0-based), -1 if none
  int freq = 0;     // 1-based; 0 in redundant mode (all frequencies)
  int channel_state = 0;
  bool success = false;
  std::vector<long> aoi;
};

struct CycleRecord {
  int sensor = 0;  // 0-based
  long index = 0;  // k, per sensor
  long length = 0;     // T_k
  double cost = 0.0;   // C_k = g(T_k)
};

struct SimulationTrace {
  std::vector<std::vector<long>> final_aoi_history;  // only filled via record_slots
  std::vector<SlotRecord> slots;
  std::vector<std::vector<CycleRecord>> cycles;  // per sensor
  std::vector<double> empirical_j;               // per sensor time-averaged c(aoi)
  double empirical_j_sum = 0.0;
  bool diverged = false;
  long slots_run = 0;
};

namespace detail {

inline int rule_freq(const PeriodicSelectionRule& rule, long aoi, int state) {
  return rule.at_aoi(aoi).choices[static_cast<std::size_t>(state)];
}

}  // namespace detail

/// One seeded run. Deterministic: identical SimConfig (including seed)
/// produces an identical trace.
inline SimulationTrace run(const SimConfig& cfg) {
  const int num_sensors = static_cast<int>(cfg.procs.size());
  const MarkovChannelModel& ch = cfg.channel;
  require(ch.kind == ChannelKind::binary_onoff || !cfg.redundant_mode,
          "run: redundant mode needs a binary channel");
  require(cfg.horizon >= 1, "run: horizon must be >= 1");
  const PeriodicSelectionRule& rule = cfg.policy.channel_rule;
  require(!rule.table.empty(), "run: policy has an empty channel rule");
  for (const auto& v : rule.table) check_selection(ch, v);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Channel starts from a stationary-distribution draw.
  const Vector pi = stationary_distribution(ch.trans);
  int state = ch.num_states() - 1;
  {
    const double u = unit(rng);
    double acc = 0.0;
    for (int s = 0; s < ch.num_states(); ++s) {
      acc += pi(s);
      if (u < acc) {
        state = s;
        break;
      }
    }
  }

  std::vector<CostTable> costs;
  costs.reserve(static_cast<std::size_t>(num_sensors));
  for (const auto& proc : cfg.procs.procs) {
    costs.emplace_back(proc, riccati_steady_state(proc.a, proc.c_meas, proc.w_cov, proc.v_cov));
  }

  SimulationTrace trace;
  trace.cycles.resize(static_cast<std::size_t>(num_sensors));
  trace.empirical_j.assign(static_cast<std::size_t>(num_sensors), 0.0);
  std::vector<double> cost_sum(static_cast<std::size_t>(num_sensors), 0.0);
  std::vector<double> cost_comp(static_cast<std::size_t>(num_sensors), 0.0);  // Kahan carry
  std::vector<long> aoi(static_cast<std::size_t>(num_sensors), 1);
  int served = 0;      // persistent-serial pointer
  long rr_next = 0;    // round-robin pointer

  for (long t = 1; t <= cfg.horizon; ++t) {
    const int prev_state = state;
    state = sample_transition(ch, prev_state, rng);
    const int known = cfg.knowledge == StateKnowledge::previous ? prev_state : state;

    // Assignment: (sensor, frequency) pairs for this slot.
    std::vector<std::pair<int, int>> assigned;
    switch (cfg.policy.kind) {
      case SchedulerKind::persistent_serial:
        assigned.emplace_back(served,
                              detail::rule_freq(rule, aoi[static_cast<std::size_t>(served)], known));
        break;
      case SchedulerKind::round_robin: {
        const int s = static_cast<int>(rr_next % num_sensors);
        ++rr_next;
        assigned.emplace_back(s, detail::rule_freq(rule, aoi[static_cast<std::size_t>(s)], known));
        break;
      }
      case SchedulerKind::greedy_max_aoi: {
        // Top-AoI sensors on distinct frequencies, ties by sensor index.
        std::vector<int> order(static_cast<std::size_t>(num_sensors));
        for (int i = 0; i < num_sensors; ++i) order[static_cast<std::size_t>(i)] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
          const long pa = aoi[static_cast<std::size_t>(a)], pb = aoi[static_cast<std::size_t>(b)];
          return pa != pb ? pa > pb : a < b;
        });
        const int slots = std::min(num_sensors, ch.num_freq);
        for (int i = 0; i < slots; ++i) assigned.emplace_back(order[static_cast<std::size_t>(i)], i + 1);
        break;
      }
    }

    std::vector<char> success(static_cast<std::size_t>(num_sensors), 0);
    for (auto [sensor, freq] : assigned) {
      bool ok;
      if (cfg.redundant_mode) {
        ok = !ch.all_off(state);
      } else if (ch.kind == ChannelKind::binary_onoff) {
        ok = ch.is_on(state, freq);
      } else {
        const double drop =
            ch.drop_probs[static_cast<std::size_t>(state)][static_cast<std::size_t>(freq - 1)];
        ok = unit(rng) >= drop;
      }
      success[static_cast<std::size_t>(sensor)] = ok ? 1 : 0;
    }

    // Per-slot cost at the current AoI, then AoI / cycle updates.
    for (int n = 0; n < num_sensors; ++n) {
      const double c = costs[static_cast<std::size_t>(n)].c(aoi[static_cast<std::size_t>(n)]);
      if (!std::isfinite(c)) trace.diverged = true;
      const double y = c - cost_comp[static_cast<std::size_t>(n)];
      const double s = cost_sum[static_cast<std::size_t>(n)] + y;
      cost_comp[static_cast<std::size_t>(n)] = (s - cost_sum[static_cast<std::size_t>(n)]) - y;
      cost_sum[static_cast<std::size_t>(n)] = s;
    }

    if (cfg.record_slots) {
      SlotRecord rec;
      rec.t = t;
      if (!assigned.empty()) {
        rec.sensor = assigned.front().first;
        rec.freq = cfg.redundant_mode ? 0 : assigned.front().second;
        rec.success = success[static_cast<std::size_t>(rec.sensor)] != 0;
      }
      rec.channel_state = state;
      rec.aoi = aoi;
      trace.slots.push_back(std::move(rec));
    }

    for (int n = 0; n < num_sensors; ++n) {
      auto& phi = aoi[static_cast<std::size_t>(n)];
      if (success[static_cast<std::size_t>(n)]) {
        auto& list = trace.cycles[static_cast<std::size_t>(n)];
        list.push_back(CycleRecord{n, static_cast<long>(list.size()), phi,
                                   costs[static_cast<std::size_t>(n)].g(phi)});
        phi = 1;
      } else {
        ++phi;
        if (static_cast<double>(phi) > cfg.divergence_guard) trace.diverged = true;
      }
    }

    if (cfg.policy.kind == SchedulerKind::persistent_serial &&
        success[static_cast<std::size_t>(served)]) {
      served = (served + 1) % num_sensors;
    }

    trace.slots_run = t;
    if (trace.diverged) break;
  }

  for (int n = 0; n < num_sensors; ++n) {
    trace.empirical_j[static_cast<std::size_t>(n)] =
        cost_sum[static_cast<std::size_t>(n)] / static_cast<double>(trace.slots_run);
    trace.empirical_j_sum += trace.empirical_j[static_cast<std::size_t>(n)];
  }
  return trace;
}

struct EnsembleSummary {
  double mean_j = 0.0;    // over non-diverged runs
  double stderr_j = 0.0;
  double divergence_fraction = 0.0;
  int num_seeds = 0;
  int num_diverged = 0;
};

/// Independent runs with seeds seed, seed+1, ..., seed+num_seeds-1.
inline EnsembleSummary run_ensemble(const SimConfig& cfg, int num_seeds) {
  require(num_seeds >= 1, "run_ensemble: num_seeds must be >= 1");
  EnsembleSummary summary;
  summary.num_seeds = num_seeds;
  std::vector<double> values;
  for (int i = 0; i < num_seeds; ++i) {
    SimConfig one = cfg;
    one.seed = cfg.seed + static_cast<std::uint64_t>(i);
    SimulationTrace trace = run(one);
    if (trace.diverged) {
      ++summary.num_diverged;
    } else {
      values.push_back(trace.empirical_j_sum);
    }
  }
  summary.divergence_fraction =
      static_cast<double>(summary.num_diverged) / static_cast<double>(num_seeds);
  if (!values.empty()) {
    double sum = 0.0, comp = 0.0;
    for (double v : values) {
      const double y = v - comp;
      const double s = sum + y;
      comp = (s - sum) - y;
      sum = s;
    }
    summary.mean_j = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
      double var = 0.0;
      for (double v : values) var += (v - summary.mean_j) * (v - summary.mean_j);
      var /= static_cast<double>(values.size() - 1);
      summary.stderr_j = std::sqrt(var / static_cast<double>(values.size()));
    }
  }
  return summary;
}

}  // namespace remest
