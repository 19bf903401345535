#include "ddl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "ddl/reference.hpp"
#include "ddl/snapshot_io.hpp"

namespace ddl {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_atomic(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// JSON has no NaN; null stands in for it.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double num_of(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

Vec to_vec(const std::vector<double>& v, const char* key) {
  if (v.empty() || v.size() > 2) throw ConfigError(std::string(key) + " needs 1 or 2 values");
  return Vec{v[0], v.size() > 1 ? v[1] : v[0]};
}

template <class T>
T broadcast(const std::vector<T>& v, std::size_t i) {
  return v.size() == 1 ? v.front() : v.at(i);
}

}  // namespace

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::thm31: return "thm31";
    case Regime::thm32: return "thm32";
    case Regime::thm33: return "thm33";
    case Regime::unsupported: break;
  }
  return "unsupported";
}

double regime_threshold(Regime regime, double r) {
  switch (regime) {
    case Regime::thm31: return 3.0 / (r + 1.0);
    case Regime::thm32: return 2.0;
    case Regime::thm33: return (r + 3.0) / (r + 1.0);
    case Regime::unsupported: break;
  }
  return kNaN;
}

Regime classify_regime(double r, double m, double gamma, bool has_h3) {
  if (!(r >= 0.0) || !std::isfinite(m) || std::isnan(gamma)) return Regime::unsupported;
  if (m <= 1.0 && r == 1.0 && has_h3 && gamma > regime_threshold(Regime::thm32, r))
    return Regime::thm32;
  if (r >= 1.0 && has_h3 && m <= 2.0 * r / (r + 1.0) &&
      gamma > regime_threshold(Regime::thm33, r))
    return Regime::thm33;
  if (r >= 2.0 && gamma > regime_threshold(Regime::thm31, r)) return Regime::thm31;
  return Regime::unsupported;
}

void ScalingLaw::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("scaling law needs gamma > 0");
  if (!(coefficient > 0.0) || !std::isfinite(coefficient))
    throw ConfigError("scaling law needs coefficient > 0");
}

double ScalingLaw::delta(double eps) const { return coefficient * std::pow(eps, gamma); }

double Distances::at(double p) const {
  for (const auto& [q, d] : by_p)
    if (q == p) return d;
  throw std::out_of_range("distance for p=" + format_double(p) + " was not computed");
}

Distances compare_to_reference(const Field& run, const Field& ref,
                               const std::vector<double>& p_list) {
  const GridSpec& a = run.grid();
  const GridSpec& b = ref.grid();
  if (a.dim != b.dim) throw std::invalid_argument("compare: dimensions differ");
  Field x = run, y = ref;
  if (!(a == b)) {
    const bool run_finer = a.n[0] >= b.n[0];
    const Field& fine = run_finer ? run : ref;
    const GridSpec& coarse = run_finer ? b : a;
    // cell_average rejects mismatched extents and non-dividing N.
    Field avg = cell_average(fine, coarse);
    (run_finer ? x : y) = std::move(avg);
  }
  const Field d = x - y;
  Distances out;
  for (double p : p_list) {
    if (!(p >= 1.0)) throw std::invalid_argument("compare: p must be >= 1");
    out.by_p.emplace_back(p, lp_norm(d, p));
  }
  return out;
}

Distances compare_to_reference(const Trajectory& run, const Field& ref,
                               const std::vector<double>& p_list) {
  if (run.empty()) throw std::invalid_argument("compare: run has no snapshots");
  return compare_to_reference(run.back().u, ref, p_list);
}

const std::set<std::string>& diagnostic_names() {
  static const std::set<std::string> names = {
      "distance", "energy", "budget", "production", "kruzkov", "young",
      "lp_bound", "h_regularity", "power_energy", "trace",
  };
  return names;
}

std::size_t SweepConfig::size() const {
  return std::max({epsilons.size(), deltas.size(), grid.size()});
}

double SweepConfig::epsilon(std::size_t i) const { return broadcast(epsilons, i); }

double SweepConfig::delta(std::size_t i) const {
  if (!deltas.empty()) return broadcast(deltas, i);
  return delta_sign * law->delta(epsilon(i));
}

int SweepConfig::n(std::size_t i) const { return broadcast(grid, i); }

void SweepConfig::validate() const {
  if (epsilons.empty()) throw ConfigError("sweep.epsilons is empty");
  if (grid.empty()) throw ConfigError("sweep.N is empty");
  const std::size_t n_runs = size();
  auto check_len = [&](std::size_t len, const char* key) {
    if (len > 1 && len != n_runs)
      throw ConfigError(std::string(key) + " has " + std::to_string(len) + " entries, expected 1 or " +
                        std::to_string(n_runs));
  };
  check_len(epsilons.size(), "sweep.epsilons");
  check_len(deltas.size(), "sweep.deltas");
  check_len(grid.size(), "sweep.N");

  for (double e : epsilons)
    if (!(e >= 0.0) || !std::isfinite(e)) throw ConfigError("sweep.epsilons must be finite and >= 0");
  for (std::size_t k = 1; k < epsilons.size(); ++k)
    if (!(epsilons[k] < epsilons[k - 1]))
      throw ConfigError("sweep.epsilons must be strictly decreasing");
  for (double d : deltas)
    if (!std::isfinite(d)) throw ConfigError("sweep.deltas must be finite");
  for (std::size_t k = 1; k < deltas.size(); ++k)
    if (!(std::abs(deltas[k]) < std::abs(deltas[k - 1])))
      throw ConfigError("sweep.deltas must be strictly decreasing in magnitude");
  if (deltas.empty()) {
    if (!law) throw ConfigError("sweep needs sweep.deltas or sweep.gamma");
    law->validate();
  }
  if (n_runs < 1) throw ConfigError("sweep has no runs");
  if (reference_n < 8) throw ConfigError("sweep.reference_N must be >= 8");
  for (int n_cells : grid) {
    if (n_cells < 8) throw ConfigError("sweep.N entries must be >= 8");
    const int hi = std::max(n_cells, reference_n), lo = std::min(n_cells, reference_n);
    if (hi % lo != 0)
      throw ConfigError("grid N=" + std::to_string(n_cells) + " is incommensurate with reference_N=" +
                        std::to_string(reference_n));
  }
  for (double p : p_list)
    if (!(p >= 1.0)) throw ConfigError("sweep.p_list entries must be >= 1");
  if (diagnostics.young_bins < 2) throw ConfigError("diagnostics.young_bins must be >= 2");
}

SweepConfig make_sweep_config(const Config& raw) {
  SweepConfig s;
  s.resolved = resolve_config(raw);
  const Config& cfg = s.resolved;
  s.problem = make_problem(cfg);
  const Problem& pb = s.problem;

  s.epsilons = cfg.get_doubles("sweep.epsilons", {pb.epsilon});
  s.grid = cfg.get_ints("sweep.N", {pb.n});
  s.deltas = cfg.get_doubles("sweep.deltas", {});
  s.delta_sign = cfg.get_double("solver.delta_sign", 1.0);
  if (s.deltas.empty()) {
    if (cfg.has("sweep.gamma")) {
      s.law = ScalingLaw{cfg.get_double("sweep.gamma", 1.0), cfg.get_double("sweep.coefficient", 1.0),
                         pb.diffusion.r};
    } else {
      s.deltas = {pb.delta};
    }
  } else {
    for (double& d : s.deltas) d *= s.delta_sign;
  }
  const int n_max = *std::max_element(s.grid.begin(), s.grid.end());
  s.reference_n = cfg.get_int("sweep.reference_N", 4 * n_max);
  s.seed = static_cast<std::uint64_t>(cfg.get_int("sweep.seed", 0));
  s.workers = cfg.get_int("sweep.workers", 0);
  s.p_list = cfg.get_doubles("sweep.p_list", {1.0, 2.0, kInfNorm});
  s.out = cfg.get_string("output.dir", "out");
  s.plot_data = cfg.get_bool("output.plot_data", false);
  s.snapshots = cfg.get_bool("output.snapshots", false);

  DiagnosticSettings& d = s.diagnostics;
  auto enable = cfg.get_strings("diagnostics.enable",
                                {"distance", "energy", "budget", "production", "kruzkov", "young"});
  for (const auto& name : enable) {
    if (name == "all") {
      d.enabled = diagnostic_names();
    } else if (name == "none") {
      d.enabled.clear();
    } else if (diagnostic_names().count(name) == 0) {
      throw ConfigError("diagnostics.enable: unknown diagnostic '" + name + "'");
    } else {
      d.enabled.insert(name);
    }
  }
  d.entropy = cfg.get_string("diagnostics.entropy", "quadratic");
  if (d.entropy != "quadratic" && d.entropy != "power")
    throw ConfigError("diagnostics.entropy must be quadratic or power");
  d.alpha = cfg.get_double("diagnostics.alpha", 2.0);

  const double L = pb.length, T = pb.t_end;
  d.theta_center = to_vec(cfg.get_doubles("diagnostics.theta_center", {0.5 * L}), "diagnostics.theta_center");
  d.theta_radius = cfg.get_double("diagnostics.theta_radius", 0.25 * L);
  d.theta_t0 = cfg.get_double("diagnostics.theta_t0", 0.5 * T);
  d.theta_t_radius = cfg.get_double("diagnostics.theta_t_radius", 0.4 * T);

  if (cfg.has("diagnostics.kruzkov_k")) {
    d.kruzkov_k = cfg.get_double("diagnostics.kruzkov_k", 0.0);
  } else {
    const Field u0 = pb.data(pb.grid());
    d.kruzkov_k = 0.5 * (u0.min() + u0.max());
  }
  if (cfg.has("diagnostics.kruzkov_rho")) d.kruzkov_rho = cfg.get_double("diagnostics.kruzkov_rho", 0.0);
  d.kruzkov_radius = cfg.get_double("diagnostics.kruzkov_radius", std::min(0.1, L / 8.0));

  d.young_center = to_vec(cfg.get_doubles("diagnostics.young_center", {0.5 * L}), "diagnostics.young_center");
  d.young_t = cfg.get_double("diagnostics.young_t", T);
  d.young_half_cells = cfg.get_int("diagnostics.young_half_cells", 2);
  d.young_half_width = cfg.get_double("diagnostics.young_half_width", 0.0);
  d.young_bins = cfg.get_int("diagnostics.young_bins", 20);
  d.constant_C = cfg.get_double("diagnostics.constant_C", 1.0);
  d.lp_n = cfg.get_int("diagnostics.lp_n", 1);
  d.trace_times = cfg.get_doubles("diagnostics.trace_times", {});
  d.budget_slack = cfg.get_double("diagnostics.budget_slack", 1e-2);

  s.validate();
  return s;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

int worker_count(int configured) {
  if (const char* env = std::getenv("DDL_WORKERS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != nullptr && *end == '\0' && v >= 1) return static_cast<int>(v);
    throw ConfigError(std::string("DDL_WORKERS must be a positive integer (got '") + env + "')");
  }
  if (configured > 0) return configured;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

namespace {

std::string reference_key(const SweepConfig& cfg) {
  std::string key = "engquist-osher/euler;N=" + std::to_string(cfg.reference_n);
  for (const auto& [k, v] : cfg.problem.echo)
    if (k.rfind("problem.", 0) == 0) key += ";" + k + "=" + v;
  return hex64(fnv1a(key));
}

std::string run_hash(const SweepConfig& cfg, std::size_t i) {
  std::string key = "run;" + std::to_string(i) + ";eps=" + format_double(cfg.epsilon(i)) +
                    ";delta=" + format_double(cfg.delta(i)) + ";N=" + std::to_string(cfg.n(i)) +
                    ";ref=" + reference_key(cfg);
  for (const auto& [k, v] : cfg.resolved.entries()) {
    if (k.rfind("output.", 0) == 0 || k == "sweep.workers") continue;
    key += ";" + k + "=" + v;
  }
  return hex64(fnv1a(key));
}

json record_to_json(const RunRecord& r) {
  json j;
  j["hash"] = r.hash;
  j["index"] = r.index;
  j["epsilon"] = num(r.epsilon);
  j["delta"] = num(r.delta);
  j["gamma"] = num(r.gamma);
  j["N"] = r.n;
  j["dx"] = num(r.dx);
  j["dt_min"] = num(r.dt_min);
  j["steps"] = r.steps;
  j["blowup"] = r.blowup;
  j["taint"] = r.taint;
  j["failed"] = r.failed;
  j["error"] = r.error;
  j["L1"] = num(r.l1);
  j["L2"] = num(r.l2);
  j["Linf"] = num(r.linf);
  j["mu1"] = num(r.mu1);
  j["mu2"] = num(r.mu2);
  j["mu3"] = num(r.mu3);
  j["kruzkov_pos"] = num(r.kruzkov_pos);
  j["young_var"] = num(r.young_var);
  json diags = json::array();
  for (const auto& d : r.diags)
    diags.push_back({{"diag", d.diag}, {"name", d.name}, {"param", d.param}, {"value", num(d.value)},
                     {"holds", d.holds}});
  j["diagnostics"] = std::move(diags);
  json ys = json::array();
  for (double v : r.young_samples) ys.push_back(num(v));
  j["young_samples"] = std::move(ys);
  return j;
}

RunRecord record_from_json(const json& j) {
  RunRecord r;
  r.hash = j.at("hash").get<std::string>();
  r.index = j.at("index").get<std::size_t>();
  r.epsilon = num_of(j.at("epsilon"));
  r.delta = num_of(j.at("delta"));
  r.gamma = num_of(j.at("gamma"));
  r.n = j.at("N").get<int>();
  r.dx = num_of(j.at("dx"));
  r.dt_min = num_of(j.at("dt_min"));
  r.steps = j.at("steps").get<std::size_t>();
  r.blowup = j.at("blowup").get<bool>();
  r.taint = j.at("taint").get<bool>();
  r.failed = j.at("failed").get<bool>();
  r.error = j.at("error").get<std::string>();
  r.l1 = num_of(j.at("L1"));
  r.l2 = num_of(j.at("L2"));
  r.linf = num_of(j.at("Linf"));
  r.mu1 = num_of(j.at("mu1"));
  r.mu2 = num_of(j.at("mu2"));
  r.mu3 = num_of(j.at("mu3"));
  r.kruzkov_pos = num_of(j.at("kruzkov_pos"));
  r.young_var = num_of(j.at("young_var"));
  for (const auto& d : j.at("diagnostics"))
    r.diags.push_back({d.at("diag").get<std::string>(), d.at("name").get<std::string>(),
                       d.at("param").get<std::string>(), num_of(d.at("value")), d.at("holds").get<bool>()});
  for (const auto& v : j.at("young_samples")) r.young_samples.push_back(num_of(v));
  return r;
}

fs::path run_path(const SweepConfig& cfg, std::size_t i) {
  char name[32];
  std::snprintf(name, sizeof name, "run_%04zu", i);
  return cfg.out / "runs" / name;
}

double run_gamma(const SweepConfig& cfg, std::size_t i) {
  if (cfg.law) return cfg.law->gamma;
  const double e = cfg.epsilon(i), d = std::abs(cfg.delta(i));
  if (e > 0.0 && e != 1.0 && d > 0.0) return std::log(d) / std::log(e);
  return kNaN;
}

int young_half_cells(const DiagnosticSettings& d, const GridSpec& g) {
  if (d.young_half_width > 0.0) return std::max(0, static_cast<int>(std::lround(d.young_half_width / g.dx(0))));
  return d.young_half_cells;
}

EntropyPair entropy_for(const DiagnosticSettings& d, const FluxSpec& flux, const Trajectory& traj) {
  double lo = traj.front().u.min(), hi = traj.front().u.max();
  for (const auto& s : traj.samples()) {
    lo = std::min(lo, s.u.min());
    hi = std::max(hi, s.u.max());
  }
  const Interval range{lo, hi > lo ? hi : lo + 1.0};
  const EntropyFunction fn = d.entropy == "power" ? power_entropy(d.alpha) : quadratic_entropy();
  return make_entropy_pair(fn, flux, range);
}

// Evaluates one diagnostic, turning argument errors into a failed row.
template <class F>
void guarded(RunRecord& rec, const std::string& diag, F&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    rec.diags.push_back({diag, "error", csv_safe(e.what()), kNaN, false});
  }
}

void run_diagnostics(const SweepConfig& cfg, const Trajectory& traj, RunRecord& rec) {
  const DiagnosticSettings& d = cfg.diagnostics;
  const Problem& pb = cfg.problem;
  const double eps = rec.epsilon, dlt = rec.delta;
  const Field& u0 = traj.front().u;
  const double u0_l2 = lp_norm(u0, 2.0);
  const double T = traj.back().t;
  const GridSpec& g = traj.grid();

  if (d.on("energy"))
    guarded(rec, "energy", [&] {
      const ResidualReport r = energy_balance_residual(traj, pb.diffusion, eps, T);
      rec.diags.push_back({"energy", "energy_residual", "t=" + format_double(T), r.value,
                           std::abs(r.value) <= 1e-3 * u0_l2 * u0_l2});
    });
  if (d.on("budget"))
    guarded(rec, "budget", [&] {
      const BudgetReport b = gradient_budget(traj, pb.diffusion, eps, u0_l2, d.budget_slack);
      rec.diags.push_back({"budget", "gradient_budget", "bound=" + format_double(b.bound), b.lhs, b.holds});
    });
  if (d.on("production"))
    guarded(rec, "production", [&] {
      const TestFunction theta = make_test_function(g.dim, d.theta_center, {d.theta_radius, d.theta_radius},
                                                    d.theta_t0, d.theta_t_radius);
      const EntropyPair pair = entropy_for(d, pb.flux, traj);
      const EntropyProductionReport p = entropy_production(traj, pair, theta, eps, dlt, pb.diffusion);
      rec.mu1 = p.mu1;
      rec.mu2 = p.mu2;
      rec.mu3 = p.mu3;
      rec.diags.push_back({"production", "mu1", d.entropy, p.mu1, true});
      rec.diags.push_back({"production", "mu2", d.entropy, p.mu2, p.mu2_sign_ok});
      rec.diags.push_back({"production", "mu3", d.entropy, p.mu3, true});
      rec.diags.push_back({"production", "lhs", d.entropy, p.lhs, true});
      rec.diags.push_back({"production", "total", d.entropy, p.total, true});
    });
  if (d.on("kruzkov"))
    guarded(rec, "kruzkov", [&] {
      const double rho = d.kruzkov_rho.value_or(g.dx(0));
      const auto family = test_function_lattice(g, d.kruzkov_radius, d.theta_t0, d.theta_t_radius);
      rec.kruzkov_pos = kruzkov_positive_part(traj, pb.flux, d.kruzkov_k, rho, family);
      rec.diags.push_back({"kruzkov", "kruzkov_pos",
                           "k=" + format_double(d.kruzkov_k) + ";rho=" + format_double(rho),
                           rec.kruzkov_pos, true});
    });
  if (d.on("young"))
    guarded(rec, "young", [&] {
      YoungWindow w;
      w.center = d.young_center;
      w.half_cells = young_half_cells(d, g);
      w.t_center = d.young_t;
      rec.young_samples = young_window_samples(traj, w);
      rec.young_var = histogram_of(rec.young_samples, 2).score;
      rec.diags.push_back({"young", "young_var", "half_cells=" + std::to_string(w.half_cells),
                           rec.young_var, true});
    });
  if (d.on("lp_bound"))
    guarded(rec, "lp_bound", [&] {
      const double r = pb.diffusion.r;
      HnBoundParams hp;
      hp.r = r;
      hp.n = d.lp_n;
      for (int k = 0; k <= d.lp_n; ++k) hp.lq_powers.push_back(lp_power(u0, hn_exponent(r, k)));
      hp.C = d.constant_C;
      hp.t = T;
      hp.Delta = eps > 0.0 ? std::abs(dlt) * std::pow(eps, -3.0 / (r + 1.0)) : kNaN;
      const LpBoundReport lb = lp_bound_check(traj, r, d.lp_n, hn_bound(hp));
      rec.diags.push_back({"lp_bound", "max_norm_power",
                           "q=" + format_double(lb.exponent) + ";bound=" + format_double(lb.bound),
                           lb.max_norm_power, lb.holds});
    });
  if (d.on("h_regularity"))
    guarded(rec, "h_regularity", [&] {
      const HRegularityReport h = h_regularity_check(traj, pb.diffusion, eps, dlt, pb.m);
      const std::string m = "m_statement=" + std::to_string(h.m_within_statement) +
                            ";m_proof=" + std::to_string(h.m_within_proof);
      rec.diags.push_back({"h_regularity", "gradient_term", m, h.gradient_term, true});
      rec.diags.push_back({"h_regularity", "hessian_term", m, h.hessian_term, true});
      rec.diags.push_back({"h_regularity", "lq_normalized", m, h.lq_normalized, true});
    });
  if (d.on("power_energy"))
    guarded(rec, "power_energy", [&] {
      const PowerEnergyReport p = power_energy_identity(traj, d.alpha, pb.diffusion, eps, dlt);
      rec.diags.push_back({"power_energy", "imbalance", "alpha=" + format_double(d.alpha), p.imbalance,
                           std::abs(p.imbalance) <= 1e-3 * std::max(1.0, p.initial_term)});
    });
  if (d.on("trace"))
    guarded(rec, "trace", [&] {
      const auto v = initial_trace_check(traj, u0, d.trace_times);
      for (std::size_t k = 0; k < v.size(); ++k)
        rec.diags.push_back({"trace", "trace", "t=" + format_double(d.trace_times[k]), v[k], true});
    });
}

struct Verdict {
  bool strictly_decreasing = true;
  bool nonincreasing = true;
  double ratio = kNaN;
  std::size_t points = 0;
};

// Absolute slack for "does not increase" on columns that sit at round-off.
constexpr double kMonotoneSlack = 1e-9;

Verdict monotonicity(const std::vector<double>& v) {
  Verdict out;
  out.points = v.size();
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (!(v[k] < v[k - 1])) out.strictly_decreasing = false;
    if (!(v[k] <= v[k - 1] + kMonotoneSlack)) out.nonincreasing = false;
  }
  if (v.size() >= 2 && v.front() != 0.0) out.ratio = v.back() / v.front();
  if (v.size() < 2) out.strictly_decreasing = out.nonincreasing = false;
  return out;
}

json fit_json(const PowerFit& f) {
  return {{"slope", num(f.slope)}, {"intercept", num(f.intercept)}, {"ci_low", num(f.ci_low)},
          {"ci_high", num(f.ci_high)}, {"points", f.points}};
}

std::string dat_file(const std::vector<std::pair<double, double>>& rows) {
  std::string s;
  for (const auto& [x, y] : rows) s += format_double(x) + " " + format_double(y) + "\n";
  return s;
}

}  // namespace

std::string records_csv(const std::vector<RunRecord>& records) {
  std::string s = std::string(kRecordHeader) + "\n";
  for (const RunRecord& r : records) {
    const double cols[] = {r.epsilon, r.delta, r.gamma};
    for (double c : cols) s += format_double(c) + ",";
    s += std::to_string(r.n) + "," + format_double(r.dx) + "," + format_double(r.dt_min) + "," +
         std::to_string(r.steps) + "," + (r.blowup ? "1" : "0") + "," + (r.taint ? "1" : "0");
    for (double c : {r.l1, r.l2, r.linf, r.mu1, r.mu2, r.mu3, r.kruzkov_pos, r.young_var})
      s += "," + format_double(c);
    s += "\n";
  }
  return s;
}

std::string diagnostics_csv(const std::vector<RunRecord>& records) {
  std::string s = "run,diag,name,param,value,holds\n";
  for (const RunRecord& r : records)
    for (const DiagRow& d : r.diags)
      s += std::to_string(r.index) + "," + d.diag + "," + d.name + "," + csv_safe(d.param) + "," +
           format_double(d.value) + "," + (d.holds ? "1" : "0") + "\n";
  return s;
}

Field sweep_reference(const SweepConfig& cfg) {
  const GridSpec grid = cfg.problem.grid(cfg.reference_n);
  const fs::path cache = cfg.out / "cache" / ("ref_" + reference_key(cfg) + ".ddl1");
  if (fs::exists(cache)) {
    try {
      Field f = read_field_binary(cache);
      if (f.grid() == grid) return f;
    } catch (const std::exception&) {
      // Unreadable cache entries are rebuilt.
    }
  }
  const Field u0 = cfg.problem.data(grid);
  Field ref = reference_solve(u0, cfg.problem.flux, cfg.problem.t_end);
  fs::create_directories(cache.parent_path());
  const fs::path tmp = cache.string() + ".tmp";
  write_field_binary(tmp, ref);
  fs::rename(tmp, cache);
  return ref;
}

RunRecord evaluate_run(const SweepConfig& cfg, std::size_t i, const Field& reference, Trajectory* keep) {
  RunRecord rec;
  rec.index = i;
  rec.epsilon = cfg.epsilon(i);
  rec.delta = cfg.delta(i);
  rec.gamma = run_gamma(cfg, i);
  rec.n = cfg.n(i);
  rec.hash = run_hash(cfg, i);
  rec.l1 = rec.l2 = rec.linf = kNaN;
  rec.mu1 = rec.mu2 = rec.mu3 = rec.kruzkov_pos = rec.young_var = kNaN;
  try {
    const GridSpec grid = cfg.problem.grid(rec.n);
    rec.dx = grid.dx(0);
    Trajectory traj = solve(cfg.problem.data, cfg.problem.params(rec.epsilon, rec.delta), grid);
    rec.steps = traj.steps;
    rec.dt_min = traj.dt_min;
    rec.blowup = traj.flags().blowup;
    rec.taint = traj.flags().tainted;
    if (!rec.blowup) {
      const Distances dist = compare_to_reference(traj, reference, cfg.p_list);
      for (const auto& [p, v] : dist.by_p) {
        if (p == 1.0) rec.l1 = v;
        if (p == 2.0) rec.l2 = v;
        if (p == kInfNorm) rec.linf = v;
        if (cfg.diagnostics.on("distance"))
          rec.diags.push_back({"distance", p == kInfNorm ? "Linf" : "L" + format_double(p),
                               "p=" + format_double(p), v, true});
      }
      run_diagnostics(cfg, traj, rec);
    }
    if (cfg.snapshots) write_trajectory(run_path(cfg, i), traj, cfg.problem.echo);
    if (keep != nullptr) *keep = std::move(traj);
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.error = e.what();
  }
  return rec;
}

RunRecord diagnose(const SweepConfig& cfg, const Trajectory& traj) {
  if (traj.empty()) throw std::invalid_argument("diagnose: trajectory has no snapshots");
  RunRecord rec;
  rec.epsilon = traj.params().epsilon;
  rec.delta = traj.params().delta;
  rec.n = traj.grid().n[0];
  rec.dx = traj.grid().dx(0);
  rec.steps = traj.steps;
  rec.dt_min = traj.dt_min;
  rec.blowup = traj.flags().blowup;
  rec.taint = traj.flags().tainted;
  rec.gamma = rec.epsilon > 0.0 && rec.epsilon != 1.0 && rec.delta != 0.0
                  ? std::log(std::abs(rec.delta)) / std::log(rec.epsilon)
                  : kNaN;
  rec.l1 = rec.l2 = rec.linf = kNaN;
  rec.mu1 = rec.mu2 = rec.mu3 = rec.kruzkov_pos = rec.young_var = kNaN;
  run_diagnostics(cfg, traj, rec);
  return rec;
}

SweepResult run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out / "runs");
  const Field reference = sweep_reference(cfg);
  const std::size_t n_runs = cfg.size();

  SweepResult result;
  result.records.resize(n_runs);
  std::vector<char> done(n_runs, 0);
  for (std::size_t i = 0; i < n_runs; ++i) {
    const fs::path p = run_path(cfg, i).string() + ".json";
    if (!fs::exists(p)) continue;
    try {
      RunRecord r = record_from_json(json::parse(slurp(p)));
      if (r.hash == run_hash(cfg, i) && r.index == i) {
        result.records[i] = std::move(r);
        done[i] = 1;
        ++result.reused;
      }
    } catch (const std::exception&) {
      // Stale or truncated record: recompute.
    }
  }

  std::atomic<std::size_t> next{0};
  std::mutex io_mutex;
  std::exception_ptr io_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_runs) return;
      if (done[i]) continue;
      RunRecord rec = evaluate_run(cfg, i, reference);
      try {
        write_atomic(run_path(cfg, i).string() + ".json", record_to_json(rec).dump(1) + "\n");
      } catch (...) {
        std::lock_guard lock(io_mutex);
        if (!io_error) io_error = std::current_exception();
      }
      result.records[i] = std::move(rec);
    }
  };
  const int width = std::min<int>(worker_count(cfg.workers), static_cast<int>(n_runs));
  std::vector<std::thread> pool;
  for (int w = 1; w < width; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (io_error) std::rethrow_exception(io_error);

  // Reduction, in run order.
  const auto& recs = result.records;
  std::vector<const RunRecord*> ok;
  for (const auto& r : recs)
    if (r.accepted()) ok.push_back(&r);

  const bool dispersive = std::all_of(recs.begin(), recs.end(), [](const RunRecord& r) { return r.epsilon == 0.0; });
  auto xval = [&](const RunRecord& r) { return dispersive ? std::abs(r.delta) : r.epsilon; };

  json summary;
  json echo = json::object();
  for (const auto& [k, v] : cfg.resolved.entries())
    if (k.rfind("output.", 0) != 0 && k != "sweep.workers") echo[k] = v;
  summary["config"] = std::move(echo);

  double gamma_min = kNaN;
  for (const auto& r : recs)
    if (!std::isnan(r.gamma) && (std::isnan(gamma_min) || r.gamma < gamma_min)) gamma_min = r.gamma;
  const double rr = cfg.problem.diffusion.r;
  result.regime = dispersive ? Regime::unsupported
                             : classify_regime(rr, cfg.problem.m, gamma_min, cfg.problem.has_h3);
  summary["theorem"] = {{"tag", std::string(to_string(result.regime))},
                        {"threshold", num(regime_threshold(result.regime, rr))},
                        {"r", num(rr)},
                        {"m", num(cfg.problem.m)},
                        {"gamma", num(gamma_min)},
                        {"h3", cfg.problem.has_h3}};

  std::size_t failed = 0, blown = 0, tainted = 0;
  for (const auto& r : recs) {
    failed += r.failed ? 1 : 0;
    blown += r.blowup ? 1 : 0;
    tainted += r.taint ? 1 : 0;
  }
  summary["runs"] = {{"total", n_runs}, {"accepted", ok.size()}, {"failed", failed},
                     {"blowup", blown}, {"tainted", tainted}};

  json warnings = json::array();
  for (std::size_t i = 0; i < n_runs; ++i) {
    const double e = cfg.epsilon(i);
    const double dx = cfg.problem.grid(cfg.n(i)).dx(0);
    if (e > 0.0 && dx > 0.25 * e * (1.0 + 1e-12))
      warnings.push_back("run " + std::to_string(i) + ": dx exceeds eps/4; the regularization is under-resolved");
    if (recs[i].failed) warnings.push_back("run " + std::to_string(i) + " failed: " + recs[i].error);
  }

  struct Column {
    const char* name;
    double RunRecord::*field;
  };
  const Column columns[] = {{"L1", &RunRecord::l1},           {"L2", &RunRecord::l2},
                            {"Linf", &RunRecord::linf},       {"kruzkov_pos", &RunRecord::kruzkov_pos},
                            {"young_var", &RunRecord::young_var}};
  json mono = json::object();
  for (const auto& c : columns) {
    std::vector<double> v;
    for (const RunRecord* r : ok)
      if (!std::isnan(r->*c.field)) v.push_back(r->*c.field);
    if (v.empty()) continue;
    const Verdict vd = monotonicity(v);
    mono[c.name] = {{"strictly_decreasing", vd.strictly_decreasing},
                    {"nonincreasing", vd.nonincreasing},
                    {"slack", kMonotoneSlack},
                    {"last_over_first", num(vd.ratio)},
                    {"points", vd.points}};
  }
  summary["monotonicity"] = std::move(mono);

  json fits = json::object();
  fits["x"] = dispersive ? "abs_delta" : "epsilon";
  {
    std::vector<double> x, y;
    for (const RunRecord* r : ok)
      if (xval(*r) > 0.0 && !std::isnan(r->l1)) {
        x.push_back(xval(*r));
        y.push_back(r->l1);
      }
    try {
      fits["L1"] = fit_json(fit_power_law(x, y));
    } catch (const std::invalid_argument& e) {
      fits["L1"] = {{"error", e.what()}};
    }
  }
  if (cfg.diagnostics.on("production")) {
    std::vector<EntropyProductionReport> reps;
    for (const RunRecord* r : ok) {
      if (std::isnan(r->mu1) || !(r->epsilon > 0.0)) continue;
      EntropyProductionReport p;
      p.epsilon = r->epsilon;
      p.delta = r->delta;
      p.mu1 = r->mu1;
      p.mu2 = r->mu2;
      p.mu3 = r->mu3;
      reps.push_back(p);
    }
    try {
      const ProductionScaling ps = production_scaling_fit(reps);
      fits["mu1"] = fit_json(ps.mu1);
      fits["mu3"] = fit_json(ps.mu3);
      fits["spans_decade"] = ps.spans_decade;
      for (const auto& w : ps.warnings) warnings.push_back(w);
    } catch (const std::invalid_argument& e) {
      fits["production_error"] = e.what();
    }
  }
  summary["fits"] = std::move(fits);

  if (cfg.diagnostics.on("young")) {
    std::vector<std::vector<double>> per_run;
    for (const RunRecord* r : ok)
      if (!r->young_samples.empty()) per_run.push_back(r->young_samples);
    try {
      const YoungHistogram h = young_histogram(per_run, cfg.diagnostics.young_bins);
      json edges = json::array(), counts = json::array(), var = json::array();
      for (double e : h.edges) edges.push_back(num(e));
      for (auto c : h.counts) counts.push_back(c);
      for (double v : h.run_variance) var.push_back(num(v));
      summary["young"] = {{"score", num(h.score)}, {"pooled", h.pooled}, {"edges", edges},
                          {"counts", counts}, {"run_variance", var}};
    } catch (const std::invalid_argument& e) {
      summary["young"] = {{"error", e.what()}};
    }
  }
  summary["warnings"] = std::move(warnings);
  result.summary_json = summary.dump(2) + "\n";

  write_atomic(cfg.out / "records.csv", records_csv(recs));
  write_atomic(cfg.out / "diagnostics.csv", diagnostics_csv(recs));
  write_atomic(cfg.out / "summary.json", result.summary_json);

  if (cfg.plot_data) {
    for (const auto& c : columns) {
      std::vector<std::pair<double, double>> rows;
      for (const RunRecord* r : ok)
        if (!std::isnan(r->*c.field)) rows.emplace_back(xval(*r), r->*c.field);
      write_atomic(cfg.out / "plot" / (std::string(c.name) + ".dat"), dat_file(rows));
    }
    for (const auto* name : {"mu1", "mu2", "mu3"}) {
      std::vector<std::pair<double, double>> rows;
      for (const RunRecord* r : ok) {
        const double v = std::string(name) == "mu1" ? r->mu1 : std::string(name) == "mu2" ? r->mu2 : r->mu3;
        if (!std::isnan(v)) rows.emplace_back(xval(*r), v);
      }
      write_atomic(cfg.out / "plot" / (std::string(name) + ".dat"), dat_file(rows));
    }
  }

  if (ok.empty()) throw NumericalError("every sweep run failed or blew up");
  return result;
}

}  // namespace ddl
