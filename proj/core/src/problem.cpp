#include "ddl/problem.hpp"

#include <cmath>
#include <numbers>

namespace ddl {

namespace {

std::string num(double v) { return format_double(v); }

Config common_defaults() {
  Config c;
  c.set("problem.dim", "1");
  c.set("problem.diffusion", "linear");
  c.set("problem.r", "1");
  c.set("problem.flux_speed", "1");
  c.set("problem.amplitude", "1");
  c.set("problem.mode", "1");
  c.set("solver.cfl_safety", "0.5");
  c.set("solver.sample_count", "10");
  c.set("solver.delta", "0");
  return c;
}

Config sine_box(Config c) {
  c.set("problem.data", "sine");
  c.set("problem.length", num(2.0 * std::numbers::pi));
  c.set("problem.t_end", "1");
  c.set("solver.N", "256");
  return c;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"heat", "airy", "advection", "burgers_bump", "riemann"};
}

Config preset_config(const std::string& name) {
  Config c = common_defaults();
  c.set("problem.preset", name);
  if (name == "heat") {
    c = sine_box(c);
    c.set("problem.flux", "zero");
    c.set("solver.epsilon", "0.05");
  } else if (name == "airy") {
    c = sine_box(c);
    c.set("problem.flux", "zero");
    c.set("solver.epsilon", "0");
    c.set("solver.delta", "0.001");
  } else if (name == "advection") {
    c = sine_box(c);
    c.set("problem.flux", "linear");
    c.set("solver.epsilon", "0");
  } else if (name == "burgers_bump") {
    c.set("problem.flux", "burgers");
    c.set("problem.data", "bump");
    c.set("problem.length", "2");
    c.set("problem.bump_center", "1");
    c.set("problem.bump_radius", "0.5");
    c.set("problem.t_end", "0.5");
    c.set("solver.epsilon", "0.05");
    c.set("solver.delta", num(std::pow(0.05, 2.5)));
    c.set("solver.N", "512");
    c.set("solver.sample_count", "500");
    c.set("sweep.epsilons", "0.05");
    c.set("sweep.N", "512");
    c.set("sweep.gamma", "2.5");
    c.set("sweep.reference_N", "2048");
  } else if (name == "riemann") {
    c.set("problem.flux", "burgers");
    // The data stay within a bounded range on which f' is bounded, which is
    // how the bounded-flux regime is exercised with Burgers.
    c.set("problem.m", "1");
    c.set("problem.data", "smoothed_riemann");
    c.set("problem.u_left", "1");
    c.set("problem.u_right", "0");
    c.set("problem.width", "0.02");
    c.set("problem.plateau_a", "1");
    c.set("problem.plateau_b", "2");
    c.set("problem.length", "4");
    c.set("problem.t_end", "0.5");
    c.set("solver.epsilon", "0.04");
    c.set("solver.delta", num(std::pow(0.04, 2.5)));
    c.set("solver.N", "512");
    c.set("solver.sample_count", "50");
    c.set("sweep.epsilons", "0.04, 0.02, 0.01, 0.005");
    c.set("sweep.N", "512, 1024, 2048, 4096");
    c.set("sweep.gamma", "2.5");
    c.set("sweep.coefficient", "1");
    c.set("sweep.reference_N", "8192");
    // Shock sits at x = 2 + t/2; the bump is centred just ahead of it.
    c.set("diagnostics.theta_center", "2.225");
    c.set("diagnostics.theta_radius", "0.2");
    c.set("diagnostics.theta_t0", "0.25");
    c.set("diagnostics.theta_t_radius", "0.2");
    c.set("diagnostics.kruzkov_k", "0.5");
    c.set("diagnostics.young_center", "2.45");
    c.set("diagnostics.young_t", "0.45");
  } else {
    std::string names;
    for (const auto& n : preset_names()) names += (names.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + name + "' (expected one of: " + names + ")");
  }
  return c;
}

const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys = {
      "problem.preset", "problem.dim", "problem.length", "problem.t_end", "problem.flux",
      "problem.flux_speed", "problem.diffusion", "problem.r", "problem.m", "problem.h3",
      "problem.data", "problem.u_left", "problem.u_right", "problem.width",
      "problem.plateau_a", "problem.plateau_b", "problem.bump_center", "problem.bump_radius",
      "problem.amplitude", "problem.mode",
      "solver.epsilon", "solver.delta", "solver.delta_sign", "solver.N", "solver.cfl_safety",
      "solver.sample_count",
      "sweep.epsilons", "sweep.N", "sweep.gamma", "sweep.coefficient", "sweep.deltas",
      "sweep.reference_N", "sweep.workers", "sweep.seed", "sweep.p_list",
      "diagnostics.enable", "diagnostics.entropy", "diagnostics.alpha",
      "diagnostics.theta_center", "diagnostics.theta_radius", "diagnostics.theta_t0",
      "diagnostics.theta_t_radius", "diagnostics.kruzkov_k", "diagnostics.kruzkov_rho",
      "diagnostics.kruzkov_radius", "diagnostics.young_center", "diagnostics.young_t",
      "diagnostics.young_half_cells", "diagnostics.young_half_width",
      "diagnostics.young_bins", "diagnostics.constant_C", "diagnostics.lp_n",
      "diagnostics.trace_times", "diagnostics.budget_slack",
      "output.dir", "output.plot_data", "output.snapshots",
  };
  return keys;
}

Config resolve_config(const Config& cfg) {
  cfg.require_known(known_config_keys());
  Config out = preset_config(cfg.get_string("problem.preset", "heat"));
  out.merge(cfg);
  return out;
}

GridSpec Problem::grid(int n_cells) const { return make_grid(dim, length, n_cells); }

SolveParams Problem::params(double eps, double dlt) const {
  SolveParams p;
  p.epsilon = eps;
  p.delta = dlt;
  p.t_end = t_end;
  p.cfl_safety = cfl_safety;
  p.sample_count = sample_count;
  p.flux = flux;
  p.diffusion = diffusion;
  return p;
}

Problem make_problem(const Config& raw) {
  const Config cfg = resolve_config(raw);
  Problem p;
  p.preset = cfg.get_string("problem.preset", "heat");
  p.dim = cfg.get_int("problem.dim", 1);
  if (p.dim < 1 || p.dim > kMaxDim) throw ConfigError("problem.dim must be 1 or 2");
  p.length = cfg.get_double("problem.length", 1.0);
  if (!(p.length > 0.0)) throw ConfigError("problem.length must be positive");
  p.t_end = cfg.get_double("problem.t_end", 1.0);
  if (!(p.t_end > 0.0)) throw ConfigError("problem.t_end must be positive");

  const std::string flux = cfg.get_string("problem.flux", "zero");
  try {
    p.flux = flux_preset(flux, p.dim, cfg.get_double("problem.flux_speed", 1.0));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("problem.flux: ") + e.what());
  }
  const double r = cfg.get_double("problem.r", 1.0);
  try {
    p.diffusion = diffusion_preset(cfg.get_string("problem.diffusion", "linear"), r, p.dim);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("problem.diffusion: ") + e.what());
  }
  p.m = cfg.get_double("problem.m", p.flux.growth_exponent);
  p.has_h3 = cfg.get_bool("problem.h3", p.diffusion.claims_h3);

  const std::string data = cfg.get_string("problem.data", "sine");
  const double amplitude = cfg.get_double("problem.amplitude", 1.0);
  if (data == "sine") {
    p.data = sine_data(amplitude, cfg.get_int("problem.mode", 1));
  } else if (data == "bump") {
    auto c = cfg.get_doubles("problem.bump_center", {0.5 * p.length});
    Vec centre{c[0], c.size() > 1 ? c[1] : c[0]};
    p.data = bump_data(centre, cfg.get_double("problem.bump_radius", 0.25 * p.length), amplitude);
  } else if (data == "smoothed_riemann") {
    p.data = smoothed_riemann_data(cfg.get_double("problem.u_left", 1.0),
                                   cfg.get_double("problem.u_right", 0.0),
                                   cfg.get_double("problem.width", 0.02),
                                   cfg.get_double("problem.plateau_a", 0.25 * p.length),
                                   cfg.get_double("problem.plateau_b", 0.5 * p.length));
    // Extruded along the second axis, where it cannot have compact support.
    if (p.dim == 2) p.data.waive_support_check = true;
  } else {
    throw ConfigError("problem.data must be sine, bump or smoothed_riemann (got '" + data + "')");
  }

  p.epsilon = cfg.get_double("solver.epsilon", 0.0);
  const double sign = cfg.get_double("solver.delta_sign", 1.0);
  if (sign != 1.0 && sign != -1.0) throw ConfigError("solver.delta_sign must be 1 or -1");
  p.delta = sign * cfg.get_double("solver.delta", 0.0);
  p.n = cfg.get_int("solver.N", 256);
  p.cfl_safety = cfg.get_double("solver.cfl_safety", 0.5);
  p.sample_count = cfg.get_int("solver.sample_count", 10);
  try {
    validate(p.params());
    (void)p.grid();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  for (const auto& [k, v] : cfg.entries())
    if (k.rfind("problem.", 0) == 0 || k.rfind("solver.", 0) == 0) p.echo[k] = v;
  return p;
}

}  // namespace ddl
