#include "ddl/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "ddl/harness.hpp"
#include "ddl/reference.hpp"
#include "ddl/snapshot_io.hpp"

namespace ddl {

namespace fs = std::filesystem;

namespace {

Config base_config(const std::string& config_path, const std::string& preset) {
  Config cfg = config_path.empty() ? Config{} : Config::load(config_path);
  if (!preset.empty()) cfg.set("problem.preset", preset);
  return cfg;
}

// A trajectory directory contributes its final snapshot; anything else is
// read as a single field file.
Field load_final_field(const fs::path& path) {
  if (fs::is_directory(path)) {
    LoadedTrajectory lt = read_trajectory(path);
    if (lt.traj.empty()) throw std::invalid_argument(path.string() + " holds no snapshots");
    return lt.traj.back().u;
  }
  return read_field(path);
}

void print_record(std::ostream& out, const RunRecord& r) {
  for (const DiagRow& d : r.diags)
    out << d.diag << ' ' << d.name << ' ' << d.param << ' ' << format_double(d.value)
        << (d.holds ? "" : "  [violated]") << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"ddlab: diffusive-dispersive regularization experiments"};
  app.require_subcommand(1);

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Run one simulation and write snapshots");
  std::string solve_config, solve_preset, solve_out = "out";
  std::optional<double> solve_eps, solve_delta, solve_T;
  std::optional<int> solve_N;
  solve_cmd->add_option("--config", solve_config, "key=value configuration file");
  solve_cmd->add_option("--preset", solve_preset, "heat, airy, advection, burgers_bump or riemann");
  solve_cmd->add_option("--epsilon", solve_eps, "diffusion coefficient");
  solve_cmd->add_option("--delta", solve_delta, "dispersion coefficient");
  solve_cmd->add_option("--N", solve_N, "cells per axis");
  solve_cmd->add_option("--T", solve_T, "final time");
  solve_cmd->add_option("--out", solve_out, "output directory");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter sweep against a reference solution");
  std::string sweep_config, sweep_preset, sweep_out;
  bool sweep_plot = false;
  std::optional<int> sweep_workers;
  sweep_cmd->add_option("--config", sweep_config, "key=value configuration file");
  sweep_cmd->add_option("--preset", sweep_preset, "problem preset");
  sweep_cmd->add_option("--out", sweep_out, "output directory (overrides output.dir)");
  sweep_cmd->add_flag("--plot-data", sweep_plot, "write two-column .dat files per metric");
  sweep_cmd->add_option("--workers", sweep_workers, "worker pool width");

  // diagnose
  auto* diag_cmd = app.add_subcommand("diagnose", "Evaluate diagnostics on stored snapshots");
  std::string diag_in, diag_out, diag_config;
  diag_cmd->add_option("--in", diag_in, "trajectory directory written by solve")->required();
  diag_cmd->add_option("--out", diag_out, "directory for diagnostics.csv");
  diag_cmd->add_option("--config", diag_config, "extra diagnostics.* settings");

  // compare
  auto* cmp_cmd = app.add_subcommand("compare", "L^p distances between two snapshot sets");
  std::string cmp_a, cmp_b, cmp_out;
  std::vector<std::string> cmp_p{"1", "2", "inf"};
  cmp_cmd->add_option("--a", cmp_a, "trajectory directory or field file")->required();
  cmp_cmd->add_option("--b", cmp_b, "trajectory directory or field file")->required();
  cmp_cmd->add_option("--p", cmp_p, "exponents (inf allowed)")->delimiter(',');
  cmp_cmd->add_option("--out", cmp_out, "directory for distances.csv");

  // classify
  auto* cls_cmd = app.add_subcommand("classify", "Convergence regime of (r, m, gamma)");
  double cls_r = 1.0, cls_m = 1.0, cls_gamma = 1.0;
  bool cls_h3 = false;
  cls_cmd->add_option("--r", cls_r, "diffusion growth exponent")->required();
  cls_cmd->add_option("--m", cls_m, "flux growth exponent")->required();
  cls_cmd->add_option("--gamma", cls_gamma, "delta = c eps^gamma")->required();
  cls_cmd->add_flag("--h3", cls_h3, "diffusion satisfies the uniform ellipticity hypothesis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*solve_cmd) {
      Config cfg = base_config(solve_config, solve_preset);
      if (solve_eps) cfg.set("solver.epsilon", format_double(*solve_eps));
      if (solve_delta) cfg.set("solver.delta", format_double(*solve_delta));
      if (solve_N) cfg.set("solver.N", std::to_string(*solve_N));
      if (solve_T) cfg.set("problem.t_end", format_double(*solve_T));
      const Problem pb = make_problem(cfg);
      const Trajectory traj = solve(pb.data, pb.params(), pb.grid());
      write_trajectory(solve_out, traj, pb.echo);
      out << "wrote " << traj.size() << " snapshots to " << solve_out << " (steps " << traj.steps
          << ", dt_min " << format_double(traj.dt_min) << ")\n";
      if (traj.flags().tainted) err << "warning: solution reached the periodic wrap band\n";
      if (traj.flags().blowup) {
        err << "blow-up at t=" << format_double(traj.flags().blowup_time) << '\n';
        return kExitNumerical;
      }
      return kExitOk;
    }

    if (*sweep_cmd) {
      Config cfg = base_config(sweep_config, sweep_preset);
      if (!sweep_out.empty()) cfg.set("output.dir", sweep_out);
      if (sweep_plot) cfg.set("output.plot_data", "true");
      if (sweep_workers) cfg.set("sweep.workers", std::to_string(*sweep_workers));
      const SweepConfig sc = make_sweep_config(cfg);
      const SweepResult res = run_sweep(sc);
      for (const RunRecord& r : res.records) {
        out << "run " << r.index << " eps=" << format_double(r.epsilon) << " delta=" << format_double(r.delta)
            << " N=" << r.n << " L1=" << format_double(r.l1);
        if (r.failed) out << " FAILED: " << r.error;
        if (r.blowup) out << " BLOWUP";
        if (r.taint) out << " tainted";
        out << '\n';
      }
      out << "regime " << to_string(res.regime) << "; " << res.reused << " run(s) reused; summary in "
          << (sc.out / "summary.json").string() << '\n';
      return kExitOk;
    }

    if (*diag_cmd) {
      const LoadedTrajectory lt = read_trajectory(diag_in);
      Config cfg;
      for (const auto& [k, v] : lt.problem) cfg.set(k, v);
      if (!diag_config.empty()) cfg.merge(Config::load(diag_config));
      const SweepConfig sc = make_sweep_config(cfg);
      const RunRecord rec = diagnose(sc, lt.traj);
      print_record(out, rec);
      if (!diag_out.empty()) {
        fs::create_directories(diag_out);
        std::ofstream f(fs::path(diag_out) / "diagnostics.csv");
        f << diagnostics_csv({rec});
      }
      return kExitOk;
    }

    if (*cmp_cmd) {
      std::vector<double> ps;
      for (const auto& p : cmp_p) ps.push_back(parse_real(p, "--p"));
      const Field a = load_final_field(cmp_a);
      const Field b = load_final_field(cmp_b);
      const Distances d = compare_to_reference(a, b, ps);
      std::string csv = "p,distance\n";
      for (const auto& [p, v] : d.by_p) csv += format_double(p) + "," + format_double(v) + "\n";
      out << csv;
      if (!cmp_out.empty()) {
        fs::create_directories(cmp_out);
        std::ofstream f(fs::path(cmp_out) / "distances.csv");
        f << csv;
      }
      return kExitOk;
    }

    if (*cls_cmd) {
      if (!(cls_r >= 0.0)) throw ConfigError("--r must be >= 0");
      out << to_string(classify_regime(cls_r, cls_m, cls_gamma, cls_h3)) << '\n';
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

int run_cli(int argc, const char* const* argv) { return run_cli(argc, argv, std::cout, std::cerr); }

}  // namespace ddl
