// Command-line front end: stability analysis, lambda-depth curves,
// parameter-region sweeps, state-knowledge comparisons and Monte-Carlo
// simulation, all driven by a JSON experiment config.
//
// Exit codes: 0 stable / normal, 2 unstable / diverged, 3 undecided,
// 1 input error.

#include "remest/config.hpp"
#include "remest/csv.hpp"
#include "remest/simulate.hpp"
#include "remest/stability.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <thread>

namespace fs = std::filesystem;
using namespace remest;

namespace {

enum class OutFormat { csv, json };

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  OutFormat format = OutFormat::csv;
  int depth_max = -1;             // -1: take the config value
  long frontier_cap = -1;
};

void add_format_flag(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--format", opts.format, "Output format")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, OutFormat>{{"csv", OutFormat::csv}, {"json", OutFormat::json}},
          CLI::ignore_case));
}

void add_search_flags(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--depth-max", opts.depth_max, "Maximum product depth L for the lambda search");
  cmd->add_option("--frontier-cap", opts.frontier_cap, "Frontier size cap for the lambda search");
}

LambdaSearchOptions effective_search(const ExperimentConfig& cfg, const CommonOpts& opts) {
  LambdaSearchOptions search = cfg.analysis.search;
  if (opts.depth_max > 0) search.depth_max = opts.depth_max;
  if (opts.frontier_cap > 0) search.frontier_cap = static_cast<std::size_t>(opts.frontier_cap);
  return search;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path.string());
  out << text;
}

int verdict_exit_code(Verdict v) {
  switch (v) {
    case Verdict::stable: return 0;
    case Verdict::unstable: return 2;
    default: return 3;
  }
}

std::string join_ids(const std::vector<long>& ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) s += ';';
    s += std::to_string(ids[i]);
  }
  return s;
}

Json estimate_to_json(const LambdaEstimate& est) {
  Json depths = Json::array();
  for (const auto& d : est.per_depth) {
    depths.push_back({{"depth", d.depth},
                      {"lambda", d.lambda},
                      {"capped", d.capped},
                      {"frontier_size", d.frontier_size},
                      {"argmin_selection", d.argmin_selection}});
  }
  return {{"lambda_min", est.lambda_min}, {"depth_max", est.depth_max}, {"per_depth", depths}};
}

/// Default per-AoI selection: for every previous state the first on (or
/// lowest-drop) frequency, i.e. the greedy one-step-optimal choice.
ChannelSelectionVector default_selection(const MarkovChannelModel& ch) {
  ChannelSelectionVector v;
  v.choices.assign(static_cast<std::size_t>(ch.num_states()), 1);
  for (int s = 0; s < ch.num_states(); ++s) {
    if (ch.kind == ChannelKind::binary_onoff) {
      for (int f = 1; f <= ch.num_freq; ++f) {
        if (ch.is_on(s, f)) {
          v.choices[static_cast<std::size_t>(s)] = f;
          break;
        }
      }
    } else {
      int best = 1;
      for (int f = 2; f <= ch.num_freq; ++f) {
        const auto& d = ch.drop_probs[static_cast<std::size_t>(s)];
        if (d[static_cast<std::size_t>(f - 1)] < d[static_cast<std::size_t>(best - 1)]) best = f;
      }
      v.choices[static_cast<std::size_t>(s)] = best;
    }
  }
  return v;
}

SimConfig build_sim_config(const ExperimentConfig& cfg) {
  SimConfig sim;
  sim.procs = cfg.process_set();
  sim.channel = cfg.channel;
  sim.policy.kind = cfg.simulation.policy;
  if (cfg.simulation.period_table) {
    sim.policy.channel_rule = PeriodicSelectionRule{*cfg.simulation.period_table};
  } else {
    sim.policy.channel_rule = PeriodicSelectionRule{{default_selection(cfg.channel)}};
  }
  sim.horizon = cfg.simulation.horizon;
  sim.seed = cfg.simulation.seed;
  sim.redundant_mode = cfg.simulation.redundant;
  sim.knowledge = cfg.simulation.knowledge;
  sim.divergence_guard = cfg.simulation.divergence_guard;
  sim.record_slots = cfg.simulation.record_slots;
  return sim;
}

// ---------------------------------------------------------------------------
// analyze

int cmd_analyze(const CommonOpts& opts) {
  const ExperimentConfig cfg = load_config(opts.config_path);
  const LambdaSearchOptions search = effective_search(cfg, opts);
  const ProcessSet procs = cfg.process_set();

  if (cfg.analysis.theorem == 5) {
    const Theorem5Result r = theorem5_verdicts(procs, *cfg.sensor_channels, search);
    Json j = {{"theorem", 5},
              {"necessary_ok", r.necessary_ok},
              {"sufficient_ok", r.sufficient_ok},
              {"per_sensor", Json::array()}};
    CsvWriter csv({"sensor", "rho", "lambda", "necessary_margin"});
    for (std::size_t i = 0; i < r.per_sensor.size(); ++i) {
      const double rho = procs.procs[i].rho;
      const double lam = r.per_sensor[i].lambda_min;
      j["per_sensor"].push_back({{"sensor", i + 1},
                                 {"rho", rho},
                                 {"lambda", lam},
                                 {"estimate", estimate_to_json(r.per_sensor[i])}});
      csv.add_row({std::to_string(i + 1), csv_number(rho), csv_number(lam),
                   csv_number(rho * rho * lam)});
    }
    fs::create_directories(opts.out_dir);
    if (opts.format == OutFormat::json) {
      write_text(fs::path(opts.out_dir) / "report.json", j.dump(2) + "\n");
    } else {
      csv.save((fs::path(opts.out_dir) / "report.csv").string());
    }
    std::cout << "theorem 5: necessary " << (r.necessary_ok ? "holds" : "fails")
              << ", sufficient " << (r.sufficient_ok ? "holds" : "fails") << "\n";
    if (r.sufficient_ok) return 0;
    if (!r.necessary_ok) return 2;
    return 3;
  }

  StabilityReport report;
  switch (cfg.analysis.theorem) {
    case 1: report = theorem1_verdict(procs, cfg.channel, search); break;
    case 2: report = theorem2_verdict(procs, cfg.channel); break;
    case 3: report = theorem3_verdict(procs, cfg.channel, search); break;
    case 4: report = theorem4_verdict(procs, cfg.channel); break;
    default: throw ConfigError("analysis.theorem: must be in 1..5");
  }

  Json j = {{"theorem", report.theorem},
            {"rho_max_sq", report.rho_max_sq},
            {"lambda", report.lambda},
            {"product", report.product},
            {"verdict", verdict_name(report.verdict)}};
  if (report.estimate) j["estimate"] = estimate_to_json(*report.estimate);

  fs::create_directories(opts.out_dir);
  if (opts.format == OutFormat::json) {
    write_text(fs::path(opts.out_dir) / "report.json", j.dump(2) + "\n");
  } else {
    CsvWriter csv({"theorem", "rho_max_sq", "lambda", "product", "verdict"});
    csv.add_row({std::to_string(report.theorem), csv_number(report.rho_max_sq),
                 csv_number(report.lambda), csv_number(report.product),
                 verdict_name(report.verdict)});
    csv.save((fs::path(opts.out_dir) / "report.csv").string());
    if (report.estimate) {
      CsvWriter depths({"depth", "lambda", "capped", "frontier_size", "argmin_selection"});
      for (const auto& d : report.estimate->per_depth) {
        depths.add_row({std::to_string(d.depth), csv_number(d.lambda),
                        d.capped ? "1" : "0", std::to_string(d.frontier_size),
                        join_ids(d.argmin_selection)});
      }
      depths.save((fs::path(opts.out_dir) / "lambda_depths.csv").string());
    }
  }

  std::cout << "theorem " << report.theorem << ": rho_max^2 = " << report.rho_max_sq
            << ", lambda = " << report.lambda << ", product = " << report.product
            << " -> " << verdict_name(report.verdict) << "\n";
  return verdict_exit_code(report.verdict);
}

// ---------------------------------------------------------------------------
// lambda-curve

int cmd_lambda_curve(const CommonOpts& opts) {
  const ExperimentConfig cfg = load_config(opts.config_path);
  const LambdaSearchOptions search = effective_search(cfg, opts);
  const ProductFamily family = cfg.channel.kind == ChannelKind::binary_onoff
                                   ? ProductFamily::packet_error
                                   : ProductFamily::hidden;
  const LambdaEstimate est = lambda_search(cfg.channel, family, search);

  fs::create_directories(opts.out_dir);
  if (opts.format == OutFormat::json) {
    write_text(fs::path(opts.out_dir) / "lambda_curve.json",
               estimate_to_json(est).dump(2) + "\n");
  } else {
    CsvWriter csv({"L", "lambda_L", "capped", "frontier_size", "argmin_selection"});
    for (const auto& d : est.per_depth) {
      csv.add_row({std::to_string(d.depth), csv_number(d.lambda), d.capped ? "1" : "0",
                   std::to_string(d.frontier_size), join_ids(d.argmin_selection)});
    }
    csv.save((fs::path(opts.out_dir) / "lambda_curve.csv").string());
  }
  std::cout << "lambda_min = " << est.lambda_min << " over depths 1.." << est.depth_max
            << (est.any_capped() ? " (capped: upper bound)" : "") << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// sweep-region

struct SweepRow {
  double a00 = 0.0;
  double a11 = 0.0;
  bool theorem1_stable = false;
  bool corollary1_stable = false;
};

int cmd_sweep_region(const CommonOpts& opts, int grid) {
  const ExperimentConfig cfg = load_config(opts.config_path);
  if (!cfg.factors) {
    throw ConfigError("sweep-region: the config channel must use type 'independent'");
  }
  if (grid < 2) throw ConfigError("sweep-region: --grid must be at least 2");
  const LambdaSearchOptions search = effective_search(cfg, opts);
  const double rho_sq = cfg.process_set().rho_max_sq();

  const long total = static_cast<long>(grid) * grid;
  std::vector<SweepRow> rows(static_cast<std::size_t>(total));

  auto eval_point = [&](long idx) {
    const int gi = static_cast<int>(idx / grid);
    const int gj = static_cast<int>(idx % grid);
    SweepRow row;
    row.a00 = static_cast<double>(gi) / (grid - 1);
    row.a11 = static_cast<double>(gj) / (grid - 1);
    std::vector<TwoStateChain> factors = *cfg.factors;
    factors[0] = TwoStateChain{row.a00, row.a11};
    const MarkovChannelModel joint = compose_independent(factors);
    const LambdaEstimate est = lambda_search(joint, ProductFamily::packet_error, search);
    row.theorem1_stable = rho_sq * est.lambda_min < 1.0;
    double best_a00 = 1.0;
    for (const auto& f : factors) best_a00 = std::min(best_a00, f.stay_off);
    row.corollary1_stable = rho_sq * best_a00 < 1.0;
    rows[static_cast<std::size_t>(idx)] = row;
  };

  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  std::atomic<long> cursor{0};
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (long idx = cursor.fetch_add(1); idx < total; idx = cursor.fetch_add(1)) {
        eval_point(idx);
      }
    });
  }
  for (auto& t : pool) t.join();

  fs::create_directories(opts.out_dir);
  if (opts.format == OutFormat::json) {
    Json j = Json::array();
    for (const auto& r : rows) {
      j.push_back({{"alpha1_00", r.a00},
                   {"alpha1_11", r.a11},
                   {"theorem1_stable", r.theorem1_stable},
                   {"corollary1_stable", r.corollary1_stable}});
    }
    write_text(fs::path(opts.out_dir) / "sweep_region.json", j.dump(2) + "\n");
  } else {
    CsvWriter csv({"alpha1_00", "alpha1_11", "theorem1_stable", "corollary1_stable"});
    for (const auto& r : rows) {
      csv.add_row({csv_number(r.a00), csv_number(r.a11), r.theorem1_stable ? "1" : "0",
                   r.corollary1_stable ? "1" : "0"});
    }
    csv.save((fs::path(opts.out_dir) / "sweep_region.csv").string());
  }

  long th1 = 0, cor1 = 0, gap = 0;
  for (const auto& r : rows) {
    th1 += r.theorem1_stable;
    cor1 += r.corollary1_stable;
    gap += r.theorem1_stable && !r.corollary1_stable;
  }
  std::cout << "grid " << grid << "x" << grid << ": theorem-1 stable " << th1
            << ", corollary-1 stable " << cor1 << ", gap " << gap << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// compare-knowledge

Matrix random_stochastic(std::mt19937_64& rng, int n, bool dominant) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    if (dominant) {
      const int star = static_cast<int>(rng() % static_cast<unsigned long>(n));
      const double big = 0.9 + 0.1 * unit(rng);
      double rest = 0.0;
      for (int j = 0; j < n; ++j) {
        m(i, j) = j == star ? 0.0 : unit(rng);
        rest += m(i, j);
      }
      for (int j = 0; j < n; ++j) m(i, j) *= (1.0 - big) / rest;
      m(i, star) = big;
    } else {
      double sum = 0.0;
      for (int j = 0; j < n; ++j) {
        m(i, j) = unit(rng) + 1e-6;
        sum += m(i, j);
      }
      m.row(i) /= sum;
    }
  }
  return m;
}

MarkovChannelModel random_model(std::mt19937_64& rng, int n, int freqs, bool dominant) {
  MarkovChannelModel ch;
  ch.num_freq = freqs;
  ch.kind = ChannelKind::binary_onoff;
  ch.trans = random_stochastic(rng, n, dominant);
  while (true) {
    ch.on_bits.assign(static_cast<std::size_t>(n), {});
    bool any_on = false;
    for (auto& bits : ch.on_bits) {
      bits.resize(static_cast<std::size_t>(freqs));
      for (auto& b : bits) {
        b = rng() % 2 == 0 ? 0 : 1;
        any_on = any_on || b == 1;
      }
    }
    if (any_on) return ch;
  }
}

int cmd_compare_knowledge(const CommonOpts& opts, int num_models, std::uint64_t seed,
                          int num_states, int num_freqs) {
  if (num_models < 1) throw ConfigError("compare-knowledge: --num-models must be at least 1");
  LambdaSearchOptions search;
  if (opts.depth_max > 0) search.depth_max = opts.depth_max;
  if (opts.frontier_cap > 0) search.frontier_cap = static_cast<std::size_t>(opts.frontier_cap);

  struct Row {
    std::string regime;
    int id;
    double lambda;
    double lambda_prime;
  };
  std::vector<Row> rows;
  std::mt19937_64 rng(seed);
  for (const bool dominant : {false, true}) {
    for (int id = 0; id < num_models; ++id) {
      const MarkovChannelModel ch = random_model(rng, num_states, num_freqs, dominant);
      const double lambda = lambda_search(ch, ProductFamily::packet_error, search).lambda_min;
      rows.push_back(Row{dominant ? "dominant" : "uniform", id, lambda, theorem2_lambda(ch)});
    }
  }

  fs::create_directories(opts.out_dir);
  if (opts.format == OutFormat::json) {
    Json j = Json::array();
    for (const auto& r : rows) {
      j.push_back({{"regime", r.regime},
                   {"model_id", r.id},
                   {"lambda", r.lambda},
                   {"lambda_prime", r.lambda_prime},
                   {"gap", r.lambda - r.lambda_prime}});
    }
    write_text(fs::path(opts.out_dir) / "compare_knowledge.json", j.dump(2) + "\n");
  } else {
    CsvWriter csv({"regime", "model_id", "lambda", "lambda_prime", "gap"});
    for (const auto& r : rows) {
      csv.add_row({r.regime, std::to_string(r.id), csv_number(r.lambda),
                   csv_number(r.lambda_prime), csv_number(r.lambda - r.lambda_prime)});
    }
    csv.save((fs::path(opts.out_dir) / "compare_knowledge.csv").string());
  }

  auto median_gap = [&](const std::string& regime) {
    std::vector<double> gaps;
    for (const auto& r : rows) {
      if (r.regime == regime) gaps.push_back(r.lambda - r.lambda_prime);
    }
    std::sort(gaps.begin(), gaps.end());
    return gaps[gaps.size() / 2];
  };
  std::cout << "median gap: uniform " << median_gap("uniform") << ", dominant "
            << median_gap("dominant") << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const CommonOpts& opts, std::uint64_t seed, bool seed_given) {
  const ExperimentConfig cfg = load_config(opts.config_path);
  SimConfig sim = build_sim_config(cfg);
  if (seed_given) sim.seed = seed;

  // Analytic reference when the single-sensor analytics apply.
  double analytic_j = std::numeric_limits<double>::quiet_NaN();
  if (sim.procs.size() == 1 && sim.policy.kind == SchedulerKind::persistent_serial &&
      sim.channel.kind == ChannelKind::binary_onoff && !sim.redundant_mode) {
    const LtiProcess& proc = sim.procs.procs[0];
    const CycleAnalytics an = cycle_analytics(
        proc, riccati_steady_state(proc.a, proc.c_meas, proc.w_cov, proc.v_cov), sim.channel,
        sim.policy.channel_rule);
    analytic_j = an.analytic_j;
  }

  fs::create_directories(opts.out_dir);

  if (cfg.simulation.num_seeds > 1) {
    const EnsembleSummary s = run_ensemble(sim, cfg.simulation.num_seeds);
    Json j = {{"mean_j", s.mean_j},
              {"stderr_j", s.stderr_j},
              {"divergence_fraction", s.divergence_fraction},
              {"num_seeds", s.num_seeds},
              {"num_diverged", s.num_diverged}};
    if (std::isfinite(analytic_j)) j["analytic_j"] = analytic_j;
    if (opts.format == OutFormat::json) {
      write_text(fs::path(opts.out_dir) / "summary.json", j.dump(2) + "\n");
    } else {
      CsvWriter csv({"mean_j", "stderr_j", "divergence_fraction", "num_seeds", "num_diverged",
                     "analytic_j"});
      csv.add_row({csv_number(s.mean_j), csv_number(s.stderr_j),
                   csv_number(s.divergence_fraction), std::to_string(s.num_seeds),
                   std::to_string(s.num_diverged), csv_number(analytic_j)});
      csv.save((fs::path(opts.out_dir) / "summary.csv").string());
    }
    std::cout << "ensemble mean J = " << s.mean_j << " +/- " << s.stderr_j << " ("
              << s.num_diverged << "/" << s.num_seeds << " diverged)\n";
    return s.num_diverged > 0 ? 2 : 0;
  }

  const SimulationTrace trace = run(sim);

  Json j = {{"empirical_j", trace.empirical_j},
            {"empirical_j_sum", trace.empirical_j_sum},
            {"diverged", trace.diverged},
            {"slots_run", trace.slots_run},
            {"seed", sim.seed}};
  if (std::isfinite(analytic_j)) j["analytic_j"] = analytic_j;
  if (opts.format == OutFormat::json) {
    write_text(fs::path(opts.out_dir) / "summary.json", j.dump(2) + "\n");
  } else {
    CsvWriter csv({"sensor", "empirical_j", "diverged", "slots_run", "analytic_j"});
    for (std::size_t n = 0; n < trace.empirical_j.size(); ++n) {
      csv.add_row({std::to_string(n + 1), csv_number(trace.empirical_j[n]),
                   trace.diverged ? "1" : "0", std::to_string(trace.slots_run),
                   csv_number(n == 0 ? analytic_j : std::numeric_limits<double>::quiet_NaN())});
    }
    csv.save((fs::path(opts.out_dir) / "summary.csv").string());
  }

  CsvWriter cycles({"sensor", "k", "T", "C"});
  for (const auto& per_sensor : trace.cycles) {
    for (const auto& cyc : per_sensor) {
      cycles.add_row({std::to_string(cyc.sensor + 1), std::to_string(cyc.index + 1),
                      std::to_string(cyc.length), csv_number(cyc.cost)});
    }
  }
  cycles.save((fs::path(opts.out_dir) / "cycles.csv").string());

  if (sim.record_slots) {
    std::vector<std::string> header{"t", "sensor", "freq", "channel_state", "success"};
    for (std::size_t n = 0; n < trace.empirical_j.size(); ++n) {
      header.push_back("aoi_" + std::to_string(n + 1));
    }
    CsvWriter slots(header);
    for (const auto& rec : trace.slots) {
      std::vector<std::string> row{std::to_string(rec.t), std::to_string(rec.sensor + 1),
                                   std::to_string(rec.freq),
                                   std::to_string(rec.channel_state + 1),
                                   rec.success ? "1" : "0"};
      for (long a : rec.aoi) row.push_back(std::to_string(a));
      slots.add_row(std::move(row));
    }
    slots.save((fs::path(opts.out_dir) / "slots.csv").string());
  }

  std::cout << "J = " << trace.empirical_j_sum << " over " << trace.slots_run << " slots"
            << (trace.diverged ? " (diverged)" : "") << "\n";
  return trace.diverged ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stability analysis and simulation for remote estimation over Markov fading "
               "channels"};
  app.require_subcommand(1);

  CommonOpts analyze_opts, curve_opts, sweep_opts, compare_opts, sim_opts;
  int grid = 101;
  int num_models = 50;
  int num_states = 4;
  int num_freqs = 2;
  std::uint64_t compare_seed = 0;
  std::uint64_t sim_seed = 0;

  CLI::App* analyze = app.add_subcommand("analyze", "Stability verdict for a config");
  analyze->add_option("--config", analyze_opts.config_path, "Experiment config (JSON)")
      ->required();
  analyze->add_option("--out-dir", analyze_opts.out_dir, "Output directory");
  add_search_flags(analyze, analyze_opts);
  add_format_flag(analyze, analyze_opts);

  CLI::App* curve = app.add_subcommand("lambda-curve", "Per-depth lambda_L values");
  curve->add_option("--config", curve_opts.config_path, "Experiment config (JSON)")->required();
  curve->add_option("--out-dir", curve_opts.out_dir, "Output directory");
  add_search_flags(curve, curve_opts);
  add_format_flag(curve, curve_opts);

  CLI::App* sweep = app.add_subcommand("sweep-region", "Stability region over alpha parameters");
  sweep->add_option("--config", sweep_opts.config_path, "Experiment config (JSON)")->required();
  sweep->add_option("--out-dir", sweep_opts.out_dir, "Output directory");
  sweep->add_option("--grid", grid, "Grid points per axis (default 101)");
  add_search_flags(sweep, sweep_opts);
  add_format_flag(sweep, sweep_opts);

  CLI::App* compare =
      app.add_subcommand("compare-knowledge", "Previous- vs current-state lambda over random models");
  compare->add_option("--seed", compare_seed, "RNG seed (mandatory for reproducibility)")
      ->required();
  compare->add_option("--num-models", num_models, "Models per regime (default 50)");
  compare->add_option("--states", num_states, "Joint channel states per model (default 4)");
  compare->add_option("--freqs", num_freqs, "Frequencies per model (default 2)");
  compare->add_option("--out-dir", compare_opts.out_dir, "Output directory");
  add_search_flags(compare, compare_opts);
  add_format_flag(compare, compare_opts);

  CLI::App* simulate = app.add_subcommand("simulate", "Monte-Carlo run(s) for a config");
  simulate->add_option("--config", sim_opts.config_path, "Experiment config (JSON)")->required();
  simulate->add_option("--out-dir", sim_opts.out_dir, "Output directory");
  CLI::Option* seed_opt = simulate->add_option("--seed", sim_seed, "Override the config seed");
  add_format_flag(simulate, sim_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(analyze)) return cmd_analyze(analyze_opts);
    if (app.got_subcommand(curve)) return cmd_lambda_curve(curve_opts);
    if (app.got_subcommand(sweep)) return cmd_sweep_region(sweep_opts, grid);
    if (app.got_subcommand(compare)) {
      return cmd_compare_knowledge(compare_opts, num_models, compare_seed, num_states, num_freqs);
    }
    if (app.got_subcommand(simulate)) {
      return cmd_simulate(sim_opts, sim_seed, seed_opt->count() > 0);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
