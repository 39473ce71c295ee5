// Command-line front end: run, sweeps, steady-state classification and
// checkpoint/restore, all driven by a key=value configuration file.

#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "rdch/config.hpp"
#include "rdch/error.hpp"
#include "rdch/harness.hpp"

namespace {

void print_nested(const std::exception& e, int depth = 0) {
  std::cerr << std::string(2 * depth, ' ') << e.what() << '\n';
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    print_nested(inner, depth + 1);
  }
}

rdch::RunConfig load(const std::string& path, const std::vector<std::string>& overrides) {
  rdch::RunConfig cfg = rdch::load_config(path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw rdch::ConfigError("--set expects key=value, got '" + kv + "'");
    }
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

void report(const rdch::RunResult& r) {
  const auto& last = r.records.back();
  fmt::print("t_final            {:.10g}\n", r.final_state.t);
  fmt::print("accepted steps     {}\n", r.accepted);
  fmt::print("rejected steps     {}\n", r.rejected);
  fmt::print("mass drift         {:.3e}\n", r.max_mass_deviation);
  fmt::print("energy drop        {:.10g}\n", r.initial_energy - last.energy);
  fmt::print("final flux_l2      {:.3e}\n", last.flux_l2);
  fmt::print("n range            [{:.10g}, {:.10g}]\n", last.n_min, last.n_max);
  fmt::print("steady status      {}\n", rdch::to_string(r.steady.status));
  fmt::print("profile            {}", rdch::to_string(r.steady.kind));
  if (r.steady.kind == rdch::SteadyClass::Aggregate) {
    fmt::print(" (plateaus {}, interfaces {}, width {:.4g})", r.steady.plateaus,
               r.steady.interfaces, r.steady.interface_width);
  }
  fmt::print("\nruntime            {:.3f} s\n", r.runtime_s);
}

void print_sweep(const rdch::SweepReport& r) {
  fmt::print("{} sweep, reference {:.6g}, common dt {:.6g}\n", r.parameter, r.reference_param,
             r.common_dt);
  fmt::print("{}\n", rdch::kSweepHeader);
  for (const auto& e : r.entries) {
    fmt::print("{:.6g},{:.6e},{:.3f},{},{}\n", e.param, e.error_l2, e.runtime_s, e.accepted,
               e.rejected);
  }
  fmt::print("strictly decreasing errors: {}\n", r.strictly_decreasing ? "yes" : "no");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relaxed degenerate Cahn-Hilliard laboratory"};
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> overrides;
  std::vector<double> values;
  std::string out_path;
  std::string from_path;
  long steps = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config, "configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--set", overrides, "override a key, key=value (repeatable)");
  };

  auto* run_cmd = app.add_subcommand("run", "integrate one configuration");
  add_common(run_cmd);

  auto* steady_cmd = app.add_subcommand("steady", "integrate until steady and classify");
  add_common(steady_cmd);

  auto* sigma_cmd = app.add_subcommand("sweep-sigma", "sigma convergence study");
  add_common(sigma_cmd);
  sigma_cmd->add_option("--values", values, "strictly decreasing sigma values")->required();
  sigma_cmd->add_option("--out", out_path, "report CSV");

  auto* eps_cmd = app.add_subcommand("sweep-eps", "eps convergence and bound study");
  add_common(eps_cmd);
  eps_cmd->add_option("--values", values, "strictly decreasing eps values")->required();
  eps_cmd->add_option("--out", out_path, "report CSV (bounds go to <out>.bounds.csv)");

  auto* ckpt_cmd = app.add_subcommand("checkpoint", "run a number of steps and save the state");
  add_common(ckpt_cmd);
  ckpt_cmd->add_option("--steps", steps, "accepted steps before saving")->required();
  ckpt_cmd->add_option("--out", out_path, "checkpoint file")->required();

  auto* restore_cmd = app.add_subcommand("restore", "continue a run from a checkpoint");
  add_common(restore_cmd);
  restore_cmd->add_option("--from", from_path, "checkpoint file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    rdch::RunConfig cfg = load(config, overrides);
    if (run_cmd->parsed()) {
      report(rdch::run(cfg));
    } else if (steady_cmd->parsed()) {
      cfg.steady_stop = true;
      report(rdch::run(cfg));
    } else if (sigma_cmd->parsed()) {
      const auto r = rdch::sigma_sweep(cfg, values);
      print_sweep(r);
      if (!out_path.empty()) {
        rdch::write_sweep_report(out_path, r);
      }
    } else if (eps_cmd->parsed()) {
      const auto r = rdch::eps_sweep(cfg, values);
      print_sweep(r);
      for (const auto& e : r.entries) {
        fmt::print("eps {:.3g}: lower violation {:.3e}, upper violation {:.3e}\n", e.param,
                   e.lower_violation, e.upper_violation);
      }
      if (!out_path.empty()) {
        rdch::write_sweep_report(out_path, r);
        rdch::write_bound_report(out_path + ".bounds.csv", r);
      }
    } else if (ckpt_cmd->parsed()) {
      rdch::RunOptions opts;
      opts.checkpoint_after = steps;
      opts.checkpoint_path = out_path;
      const auto r = rdch::run(cfg, opts);
      fmt::print("{} after {} accepted steps (t = {:.10g})\n",
                 r.checkpointed ? "checkpoint written" : "run finished before the checkpoint",
                 r.accepted, r.final_state.t);
    } else if (restore_cmd->parsed()) {
      report(rdch::restore(cfg, from_path));
    }
  } catch (const rdch::SweepFailure& e) {
    fmt::print("partial results:\n");
    print_sweep(e.partial());
    print_nested(e);
    return 1;
  } catch (const std::exception& e) {
    print_nested(e);
    return 1;
  }
  return 0;
}
