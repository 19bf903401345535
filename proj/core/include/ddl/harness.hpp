// Regime classification, parameter sweeps against a cached reference
// solution, and report emission.
#ifndef DDL_HARNESS_HPP_
#define DDL_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ddl/config.hpp"
#include "ddl/diagnostics.hpp"
#include "ddl/problem.hpp"

namespace ddl {

enum class Regime { thm31, thm32, thm33, unsupported };

std::string_view to_string(Regime regime);

/// Strongest convergence regime whose hypotheses hold, with gamma strictly
/// above the regime's exponent threshold:
///   thm32: m <= 1, r == 1, H3, gamma > 2
///   thm33: r >= 1, H3, m <= 2r/(r+1), gamma > (r+3)/(r+1)
///   thm31: r >= 2, gamma > 3/(r+1)
Regime classify_regime(double r, double m, double gamma, bool has_h3);

/// Exponent threshold of a regime (NaN for unsupported).
double regime_threshold(Regime regime, double r);

/// delta = coefficient * eps^gamma.
struct ScalingLaw {
  double gamma = 1.0;
  double coefficient = 1.0;
  double r = 1.0;

  void validate() const;
  double delta(double eps) const;
};

struct Distances {
  std::vector<std::pair<double, double>> by_p;  // (p, ||run - ref||_p)
  double at(double p) const;
};

/// The finer field is cell-averaged onto the coarser grid, then L^p
/// distances are taken there. Incommensurate grids throw.
Distances compare_to_reference(const Field& run, const Field& ref, const std::vector<double>& p_list);
/// Uses the final snapshot of the run.
Distances compare_to_reference(const Trajectory& run, const Field& ref,
                               const std::vector<double>& p_list);

struct DiagRow {
  std::string diag;
  std::string name;
  std::string param;
  double value = 0.0;
  bool holds = true;
};

struct DiagnosticSettings {
  std::set<std::string> enabled;
  std::string entropy = "quadratic";
  double alpha = 2.0;
  Vec theta_center{};
  double theta_radius = 0.0;
  double theta_t0 = 0.0;
  double theta_t_radius = 0.0;
  double kruzkov_k = 0.0;
  std::optional<double> kruzkov_rho;  // defaults to dx
  double kruzkov_radius = 0.1;
  Vec young_center{};
  double young_t = 0.0;
  int young_half_cells = 2;
  double young_half_width = 0.0;  // overrides young_half_cells when > 0
  int young_bins = 20;
  double constant_C = 1.0;
  int lp_n = 1;
  std::vector<double> trace_times;
  double budget_slack = 1e-2;

  bool on(const std::string& name) const { return enabled.count(name) != 0; }
};

/// Names accepted in diagnostics.enable.
const std::set<std::string>& diagnostic_names();

struct SweepConfig {
  Problem problem;
  std::vector<double> epsilons;
  /// Explicit delta per run; when empty the scaling law supplies delta.
  std::vector<double> deltas;
  std::vector<int> grid;
  std::optional<ScalingLaw> law;
  /// Sign applied to law-derived deltas (solver.delta_sign).
  double delta_sign = 1.0;
  int reference_n = 0;
  DiagnosticSettings diagnostics;
  std::filesystem::path out = "out";
  std::uint64_t seed = 0;
  int workers = 0;
  bool plot_data = false;
  bool snapshots = false;
  std::vector<double> p_list{1.0, 2.0, kInfNorm};
  /// Fully resolved configuration, echoed into the summary.
  Config resolved;

  std::size_t size() const;
  double epsilon(std::size_t i) const;
  double delta(std::size_t i) const;
  int n(std::size_t i) const;
  /// Throws ConfigError on inconsistent ladders.
  void validate() const;
};

SweepConfig make_sweep_config(const Config& cfg);

struct RunRecord {
  std::size_t index = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  double gamma = 0.0;
  int n = 0;
  double dx = 0.0;
  double dt_min = 0.0;
  std::size_t steps = 0;
  bool blowup = false;
  bool taint = false;
  bool failed = false;
  std::string error;
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double mu3 = 0.0;
  double kruzkov_pos = 0.0;
  double young_var = 0.0;
  std::vector<DiagRow> diags;
  std::vector<double> young_samples;
  std::string hash;

  bool accepted() const { return !failed && !blowup; }
};

inline constexpr const char* kRecordHeader =
    "epsilon,delta,gamma,N,dx,dt_min,steps,blowup,taint,L1,L2,Linf,mu1,mu2,mu3,kruzkov_pos,young_var";

std::string records_csv(const std::vector<RunRecord>& records);
std::string diagnostics_csv(const std::vector<RunRecord>& records);

struct SweepResult {
  std::vector<RunRecord> records;
  Regime regime = Regime::unsupported;
  std::string summary_json;
  std::size_t reused = 0;
};

/// Reference solution at the sweep's final time on reference_n cells,
/// cached under out/cache keyed by a hash of the problem.
Field sweep_reference(const SweepConfig& cfg);

/// Solves run i, compares against `reference` and evaluates the enabled
/// diagnostics. The trajectory is returned through `keep` when given.
RunRecord evaluate_run(const SweepConfig& cfg, std::size_t i, const Field& reference,
                       Trajectory* keep = nullptr);

/// Evaluates the enabled diagnostics (all but distance) on a stored
/// trajectory, taking eps and delta from the trajectory parameters.
RunRecord diagnose(const SweepConfig& cfg, const Trajectory& traj);

/// Runs every sweep point in a worker pool, reusing records whose hash
/// matches, and writes records.csv, diagnostics.csv and summary.json.
/// Throws NumericalError when every run fails.
SweepResult run_sweep(const SweepConfig& cfg);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view text);

/// DDL_WORKERS when set, else `configured` when positive, else the
/// hardware concurrency.
int worker_count(int configured);

}  // namespace ddl

#endif  // DDL_HARNESS_HPP_
