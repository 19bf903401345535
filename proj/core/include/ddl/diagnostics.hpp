// Energy identities, a priori bounds, entropy-production pairings and
// oscillation diagnostics evaluated on stored trajectories.
#ifndef DDL_DIAGNOSTICS_HPP_
#define DDL_DIAGNOSTICS_HPP_

#include <optional>
#include <string>
#include <vector>

#include "ddl/discrete.hpp"
#include "ddl/model.hpp"

namespace ddl {

/// theta(x, t) = scale * prod_j phi((x_j - c_j) / R_j) * phi((t - t0) / R_t)
/// with phi(s) = (1 - s^2)^4 on |s| < 1 and 0 outside.
struct TestFunction {
  int dim = 1;
  Vec center{};
  Vec radius{1.0, 1.0};
  double t0 = 0.0;
  double t_radius = 1.0;
  double scale = 1.0;

  bool nonneg() const { return scale >= 0.0; }

  double value(const Vec& x, double t) const;
  double time_derivative(const Vec& x, double t) const;
  Vec gradient(const Vec& x, double t) const;
  Mat hessian(const Vec& x, double t) const;
  /// d^3 theta / dx_axis^3.
  double third_derivative(const Vec& x, double t, int axis) const;
  double third_derivative_sum(const Vec& x, double t) const;

  /// True when the support lies inside [0, L) x (0, T) without touching
  /// the periodic seam.
  bool supported_in(const GridSpec& grid, double t_end) const;
};

/// Checked constructor (positive radii, d in {1, 2}).
TestFunction make_test_function(int dim, Vec center, Vec radius, double t0, double t_radius,
                                double scale = 1.0);

/// phi(s) = (1 - s^2)^4 and its first three derivatives (0 outside |s| < 1).
double bump_profile(double s, int derivative = 0);

struct ResidualReport {
  double value = 0.0;
  bool tainted = false;
};

/// ||u(t)||^2 + 2 eps int_0^t int grad u . b(grad u) - ||u0||^2.
/// `t` must be one of the stored sample times.
ResidualReport energy_balance_residual(const Trajectory& traj, const DiffusionSpec& diff,
                                       double eps, double t);

struct BudgetReport {
  double lhs = 0.0;
  double bound = 0.0;
  bool holds = false;
};

/// lhs = eps int int |grad u|^(r+1) over the whole trajectory, bound =
/// ||u0||_2^2 / (2 C2); holds when lhs <= bound + slack.
BudgetReport gradient_budget(const Trajectory& traj, const DiffusionSpec& diff, double eps,
                             double u0_l2, double slack = 1e-2);

enum class DispersiveForm {
  /// -(alpha/2) delta int int |u|^(alpha-1) sum_j d_j (d_j u)^2
  divergence,
  /// (alpha (alpha-1) / 2) delta int int sgn(u) |u|^(alpha-2) sum_j (d_j u)^3, alpha >= 2
  cubic,
};

struct PowerEnergyReport {
  /// int |u(t)|^(alpha+1)/(alpha+1) + alpha eps int int |u|^(alpha-1) grad u . b(grad u)
  double lhs_terms = 0.0;
  /// int |u0|^(alpha+1)/(alpha+1)
  double initial_term = 0.0;
  double dispersive_term = 0.0;
  /// lhs_terms - initial_term - dispersive_term
  double imbalance = 0.0;
  DispersiveForm form = DispersiveForm::divergence;
};

/// Both sides of the power-entropy balance up to time t (default: last sample).
PowerEnergyReport power_energy_identity(const Trajectory& traj, double alpha,
                                        const DiffusionSpec& diff, double eps, double delta,
                                        DispersiveForm form = DispersiveForm::cubic,
                                        std::optional<double> t = std::nullopt);

struct HnBoundParams {
  double r = 2.0;
  int n = 0;
  /// int |u0|^(q_k) dx for k = 0..n, q_k = k (r - 1) + 2.
  std::vector<double> lq_powers;
  /// The unnamed constant of the recursion.
  double C = 1.0;
  double t = 0.0;
  /// delta * eps^(-3/(r+1)).
  double Delta = 0.0;
};

/// q_n = n (r - 1) + 2.
double hn_exponent(double r, int n);

/// C_n(u0) of the L^q recursion (C_0 = ||u0||_2^2).
double cn_constant(const HnBoundParams& p);

/// H_n = C_n (1 + Delta max{1, [t C_n (1 + Delta)]^((r-2)/3)}), H_0 = ||u0||_2^2.
/// Rejects r < 2.
double hn_bound(const HnBoundParams& p);

/// max{1, [K (1 + Delta)]^((r+1)/(r+1-theta))}: bounds any X >= 0 with
/// X <= K (1 + Delta X^(theta/(r+1))), for K, Delta >= 0 and 0 <= theta < r + 1.
double bootstrap_bound(double K, double Delta, double theta, double r);

struct LpBoundReport {
  double exponent = 2.0;
  double max_norm_power = 0.0;
  double bound = 0.0;
  bool holds = false;
};

/// max over samples of int |u(t)|^(n(r-1)+2) against `hn` (+ slack).
LpBoundReport lp_bound_check(const Trajectory& traj, double r, int n, double hn,
                             double slack = 0.0);

struct HRegularityReport {
  /// eps^((r+3)/(r+1)) max_t int |grad u|^2
  double gradient_term = 0.0;
  /// eps^(2(r+2)/(r+1)) int int |D^2 u|^2
  double hessian_term = 0.0;
  /// max_t int |u|^(2+(r-1)/r) + eps int int |u|^((r-1)/r) |grad u|^(r+1)
  double lq_term = 0.0;
  /// 1 + delta^((r+1)/r) eps^(-(r+3)/r)
  double lq_factor = 1.0;
  /// lq_term / lq_factor
  double lq_normalized = 0.0;
  /// Which of the two growth conditions on m the run satisfies.
  bool m_within_statement = false;  // m <= 2r/(r+1)
  bool m_within_proof = false;      // m <= (r-1)/(r+1)
};

HRegularityReport h_regularity_check(const Trajectory& traj, const DiffusionSpec& diff,
                                     double eps, double delta, double m);

struct EntropyProductionReport {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double mu3 = 0.0;
  double total = 0.0;
  /// <d_t eta(u) + div q(u), theta> = -int int (eta theta_t + q . grad theta)
  double lhs = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  bool sign_checked = false;
  bool mu2_sign_ok = true;
  std::string warning;
};

inline constexpr double kSignTolerance = 1e-10;

EntropyProductionReport entropy_production(const Trajectory& traj, const EntropyPair& pair,
                                           const TestFunction& theta, double eps,
                                           double delta, const DiffusionSpec& diff);

struct PowerFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t points = 0;
};

/// Least-squares fit of log|y| = slope log x + intercept with a 95% Student t
/// interval on the slope. Entries with |y| < 1e-14 are excluded; fewer than
/// two remaining points throw.
PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

struct ProductionScaling {
  PowerFit mu1;
  PowerFit mu3;
  bool spans_decade = false;
  std::vector<std::string> warnings;
};

/// Fits |mu1| and |mu3| against eps over at least four reports.
ProductionScaling production_scaling_fit(const std::vector<EntropyProductionReport>& reports);

struct KruzkovResidual {
  double value = 0.0;
  double positive_part = 0.0;
};

/// -int int (eta_rho(u) theta_t + q_rho(u) . grad theta) for the smoothed
/// Kruzkov entropy centred at k.
KruzkovResidual kruzkov_residual(const Trajectory& traj, const FluxSpec& flux, double k,
                                 double rho, const TestFunction& theta);

/// The same pairing for each member of a family of test functions.
std::vector<double> kruzkov_pairings(const Trajectory& traj, const FluxSpec& flux, double k,
                                     double rho, const std::vector<TestFunction>& family);

/// Nonnegative bumps of spatial radius `radius` centred on a lattice of
/// spacing radius/2 covering the box, all with the same time window.
std::vector<TestFunction> test_function_lattice(const GridSpec& grid, double radius, double t0,
                                                double t_radius);

/// Largest positive part of the Kruzkov pairing over a test-function family.
/// A single bump can see cancelling contributions; the maximum over a
/// lattice measures how far the entropy inequality fails anywhere.
double kruzkov_positive_part(const Trajectory& traj, const FluxSpec& flux, double k, double rho,
                             const std::vector<TestFunction>& family);

struct YoungWindow {
  Vec center{};
  /// The window spans 2 * half_cells + 1 cells per axis.
  int half_cells = 2;
  double t_center = 0.0;
  int time_samples = 3;
};

struct YoungHistogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
  std::vector<double> run_mean;
  std::vector<double> run_variance;
  std::size_t pooled = 0;
  /// Population variance of the pooled samples.
  double score = 0.0;
};

/// Window samples of each run (ordered from largest to smallest eps); the
/// finest half of the runs is pooled into the histogram.
YoungHistogram young_histogram(const std::vector<const Trajectory*>& runs,
                               const YoungWindow& window, int bins = 20);

/// Samples of one run inside the window, time-major then x fastest.
std::vector<double> young_window_samples(const Trajectory& traj, const YoungWindow& window);

/// Same as above from per-run window samples.
YoungHistogram young_histogram(const std::vector<std::vector<double>>& per_run, int bins = 20);

/// Histogram of arbitrary samples with `bins` equal bins over [min, max].
YoungHistogram histogram_of(const std::vector<double>& samples, int bins);

/// (1/t) int_0^t int |u - u0| for each t.
std::vector<double> initial_trace_check(const Trajectory& traj, const Field& u0,
                                        const std::vector<double>& t_small);

}  // namespace ddl

#endif  // DDL_DIAGNOSTICS_HPP_
