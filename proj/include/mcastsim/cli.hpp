#pragma once

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcastsim/analysis.hpp"
#include "mcastsim/harness.hpp"

namespace mcast {

inline void print_bounds_table(const BoundParams& params, std::ostream& out) {
  RegimeResult regime = capacity_regime(params);
  out << "n_s=" << params.n_s << " p=" << params.p << " D=" << params.D
      << " T=" << params.T << " W=" << params.W << " delta=" << params.delta
      << " kappa=" << params.kappa << "\n";
  out << "t1=" << format_double(regime.t1) << " t2=" << format_double(regime.t2) << "\n";
  const char* label = regime.regime == Regime::Zero      ? "zero"
                      : regime.regime == Regime::Constant ? "constant"
                                                          : "sqrt";
  out << "regime=" << label << "\n";
  out << "sqrt_value=" << format_double(regime.sqrt_value)
      << "  # order only: Theta-constants set to 1\n";
  out << "lambda_ceiling_no_relay=" << format_double(lambda_ceiling_no_relay(params)) << "\n";
  out << "lambda_ceiling_relay=" << format_double(lambda_ceiling_relay(params)) << "\n";
  HeuristicResult h = heuristic_capacity(params.n_s, params.p, params.D, params.W);
  out << "heuristic_lambda=" << format_double(h.lambda)
      << " L1=" << format_double(h.l1) << " L2=" << format_double(h.l2) << "\n";
}

inline void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows,
                            const std::vector<Violation>& violations) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open trace file " + path);
  out << "kind,slot,cell,sender,recipients,receiver,interferer,distance\n";
  for (const auto& r : rows)
    out << "tx," << r.slot << ',' << r.cell << ',' << r.sender << ','
        << r.recipients << ",,,\n";
  for (const auto& v : violations)
    out << "violation," << v.slot << ",," << v.sender << ",," << v.receiver << ','
        << v.interferer << ',' << format_double(v.distance) << '\n';
}

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"Delay-constrained multicast simulator and capacity-bound toolkit"};
  app.require_subcommand(1);

  // run
  auto* run_cmd = app.add_subcommand("run", "Run a single configuration");
  std::string run_config, run_out, run_trace;
  std::uint64_t run_seed = 0;
  bool run_seed_set = false;
  run_cmd->add_option("--config", run_config, "key = value config file")->required();
  run_cmd->add_option("--seed", run_seed, "override the config seed")
      ->each([&](const std::string&) { run_seed_set = true; });
  run_cmd->add_option("--out", run_out, "output CSV path")->required();
  run_cmd->add_option("--trace", run_trace, "per-slot diagnostics CSV (off by default)");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a figure sweep");
  std::string sweep_preset, sweep_mobility = "all", sweep_out;
  int sweep_replicates = 5, sweep_supertimes = 10;
  std::uint64_t sweep_seed = 1;
  sweep_cmd->add_option("--preset", sweep_preset, "fig5|fig6|fig7")->required();
  sweep_cmd->add_option("--mobility", sweep_mobility, "iid|walk|waypoint|all");
  sweep_cmd->add_option("--replicates", sweep_replicates, "replicates per point");
  sweep_cmd->add_option("--supertimes", sweep_supertimes, "supertime slots per replicate");
  sweep_cmd->add_option("--seed", sweep_seed, "base seed");
  sweep_cmd->add_option("--out", sweep_out, "output CSV path")->required();

  // bounds
  auto* bounds_cmd = app.add_subcommand("bounds", "Evaluate the capacity bounds");
  double b_ns = 0, b_p = 0, b_d = 0, b_t = 1, b_w = 1, b_delta = 1, b_kappa = 3;
  bounds_cmd->add_option("--ns", b_ns, "sessions")->required();
  bounds_cmd->add_option("--p", b_p, "destinations per session")->required();
  bounds_cmd->add_option("--d", b_d, "delay constraint")->required();
  bounds_cmd->add_option("--t", b_t, "horizon in slots");
  bounds_cmd->add_option("--w", b_w, "bits per slot");
  bounds_cmd->add_option("--delta", b_delta, "protocol guard");
  bounds_cmd->add_option("--kappa", b_kappa, "cluster constant (> 2)");

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "Monte Carlo oracles");
  oracle_cmd->require_subcommand(1);
  auto* bb_cmd = oracle_cmd->add_subcommand("balls-bins", "occupancy oracle");
  int bb_bins = 100, bb_m = 10, bb_rounds = 10;
  long bb_trials = 100000;
  double bb_delta = 0.1;
  std::uint64_t bb_seed = 1;
  bb_cmd->add_option("--bins", bb_bins, "bins");
  bb_cmd->add_option("--per-round", bb_m, "distinct bins marked per round");
  bb_cmd->add_option("--rounds", bb_rounds, "rounds");
  bb_cmd->add_option("--trials", bb_trials, "MC trials");
  bb_cmd->add_option("--delta", bb_delta, "concentration delta");
  bb_cmd->add_option("--seed", bb_seed, "MC seed");
  auto* cl_cmd = oracle_cmd->add_subcommand("cluster", "cluster-exceedance oracle");
  int cl_ns = 100, cl_p = 10, cl_t = 100;
  double cl_gamma = 0.01, cl_kappa = 0;
  long cl_trials = 1000;
  std::uint64_t cl_seed = 1;
  cl_cmd->add_option("--ns", cl_ns, "sessions");
  cl_cmd->add_option("--p", cl_p, "destinations per session");
  cl_cmd->add_option("--gamma", cl_gamma, "disk radius");
  cl_cmd->add_option("--kappa", cl_kappa, "cluster constant (default kappa_min)");
  cl_cmd->add_option("--t", cl_t, "slots per trial");
  cl_cmd->add_option("--trials", cl_trials, "MC trials");
  cl_cmd->add_option("--seed", cl_seed, "MC seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return 1;
  }

  try {
    if (*run_cmd) {
      SimConfig cfg = parse_config_file(run_config);
      if (run_seed_set) cfg.seed = run_seed;
      Engine engine(cfg);
      std::vector<TraceRow> trace;
      if (!run_trace.empty()) engine.trace_sink = &trace;
      RunRecord rec;
      rec.preset = Preset::Custom;
      rec.swept_var = "none";
      rec.mobility = cfg.mobility;
      rec.seed = cfg.seed;
      double mean_sum = 0.0, min_sum = 0.0;
      std::vector<Violation> violations;
      for (int s = 0; s < cfg.supertime_count; ++s) {
        SupertimeReport rep = engine.run_supertime();
        mean_sum += rep.network_mean;
        min_sum += rep.network_min_mean;
        rec.audit_violations += rep.audit_violations;
        rec.deletion_violations += rep.deletion_violations;
        violations.insert(violations.end(), rep.violations.begin(), rep.violations.end());
      }
      rec.delivered_mean = mean_sum / cfg.supertime_count;
      rec.min_delivered_mean = min_sum / cfg.supertime_count;
      rec.throughput = rec.delivered_mean;
      emit_csv(std::vector<RunRecord>{rec}, run_out);
      if (!run_trace.empty()) write_trace_csv(run_trace, trace, violations);
      out << "throughput_per_supertime=" << format_double(rec.throughput)
          << " audit_violations=" << rec.audit_violations << "\n";
      return 0;
    }
    if (*sweep_cmd) {
      std::vector<MobilityKind> kinds;
      if (sweep_mobility == "all")
        kinds = {MobilityKind::Iid, MobilityKind::Walk, MobilityKind::Waypoint};
      else
        kinds = {mobility_from_name(sweep_mobility)};
      ExperimentSpec spec = make_preset(preset_from_name(sweep_preset), kinds,
                                        sweep_replicates, sweep_supertimes, sweep_seed);
      std::vector<RunRecord> records = run_sweep(spec);
      emit_csv(records, sweep_out);
      long errors = 0;
      for (const auto& r : records) errors += r.error ? 1 : 0;
      out << "points=" << spec.values.size() << " records=" << records.size()
          << " errored=" << errors << " -> " << sweep_out << "\n";
      for (MobilityKind m : kinds) {
        if (spec.values.size() < 2) break;
        FitResult fit = fit_alpha(spec, records, m);
        out << "alpha[" << mobility_name(m) << "]=" << format_double(fit.alpha) << "\n";
      }
      return 0;
    }
    if (*bounds_cmd) {
      BoundParams params;
      params.n_s = b_ns;
      params.p = b_p;
      params.D = b_d;
      params.T = b_t;
      params.W = b_w;
      params.delta = b_delta;
      params.kappa = b_kappa;
      print_bounds_table(params, out);
      return 0;
    }
    if (*oracle_cmd) {
      if (*bb_cmd) {
        OracleConfig oc{bb_trials, 1e-3, bb_seed};
        BallsBinsResult r = balls_bins_nonempty(bb_bins, bb_m, bb_rounds, oc, bb_delta);
        out << "exact=" << format_double(r.exact) << " mc_mean=" << format_double(r.mc_mean)
            << " freq_ge=" << format_double(r.freq_ge)
            << " chernoff_lower=" << format_double(r.chernoff_lower) << "\n";
        return 0;
      }
      if (*cl_cmd) {
        OracleConfig oc{cl_trials, 1e-3, cl_seed};
        double kappa = cl_kappa > 0 ? cl_kappa : kappa_min(cl_gamma, cl_ns, cl_p);
        ClusterMcResult r = cluster_exceedance_mc(cl_ns, cl_p, cl_gamma, kappa, cl_t, oc);
        out << "kappa=" << format_double(kappa) << " threshold=" << format_double(r.threshold)
            << " z_mean=" << format_double(r.z_mean) << " bound=" << format_double(r.bound)
            << " h_mean=" << format_double(r.h_mean)
            << " h_expected=" << format_double(r.h_expected) << "\n";
        return 0;
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  err << app.help();
  return 1;
}

}  // namespace mcast
