// Method-of-lines integration of
//   u_t + div f(u) = div( eps b(grad u) + delta (d^2 u / dx_j^2)_j )
// on a periodic box with centred differences and classical RK4.
#ifndef DDL_SOLVER_HPP_
#define DDL_SOLVER_HPP_

#include <functional>
#include <string>
#include <vector>

#include "ddl/discrete.hpp"
#include "ddl/model.hpp"

namespace ddl {

struct SolveParams {
  double epsilon = 0.0;
  double delta = 0.0;
  double t_end = 1.0;
  double cfl_safety = 0.5;
  int sample_count = 10;
  FluxSpec flux = zero_flux();
  DiffusionSpec diffusion = linear_diffusion();
};

/// Throws std::invalid_argument unless eps >= 0, T > 0, safety in (0, 1]
/// and sample_count >= 1.
void validate(const SolveParams& p);

struct InitialData {
  std::string name;
  std::function<Field(const GridSpec&)> producer;
  /// Value the data relaxes to away from its support.
  double background = 0.0;
  /// Analytic (periodic, non-compact) test data skip the support check.
  bool waive_support_check = false;

  Field operator()(const GridSpec& grid) const { return producer(grid); }
};

/// C-infinity bump amplitude * exp(1 - 1/(1 - s^2)), s = |x - centre| / radius.
InitialData bump_data(Vec centre, double radius, double amplitude = 1.0);
/// Plateau u_left on [a, b] over background u_right, with tanh edges of width w.
/// The left edge is the rarefaction-type jump and the right edge the
/// Riemann problem (u_left, u_right). Varies along axis 0 only.
InitialData smoothed_riemann_data(double u_left, double u_right, double width, double a,
                                  double b);
/// amplitude * sin(2 pi mode x_0 / L_0); periodic, support check waived.
InitialData sine_data(double amplitude = 1.0, int mode = 1);

struct InitialNorms {
  double l1 = 0.0;
  double l2 = 0.0;
  std::vector<std::pair<double, double>> lq;  // (q, ||u0||_q)
};

InitialNorms declared_norms(const Field& u0, const std::vector<double>& qs = {});

/// Largest per-axis fraction of the box covered by the support of u - bg,
/// support meaning |u - bg| > rel_tol * max |u - bg|.
double support_fraction(const Field& u, double background, double rel_tol = 1e-12);

/// Signals non-finite values or runaway growth during integration.
class BlowUp : public NumericalError {
 public:
  BlowUp(const std::string& what, double max_value)
      : NumericalError(what), max_value_(max_value) {}
  double max_value() const { return max_value_; }

 private:
  double max_value_;
};

/// -div f(u) + eps div b(grad u) + delta sum_j d^3 u / dx_j^3.
Field rhs(const Field& u, const SolveParams& p);

/// Explicit stability limit for the stiffest active term.
double stable_dt(const SolveParams& p, const GridSpec& grid, double u_max, double grad_max);

/// One classical fourth-order Runge-Kutta step.
Field step_rk4(const Field& u, double dt, const SolveParams& p);

/// Integrates to p.t_end with dt = stable_dt refreshed every step and stores
/// sample_count + 1 evenly spaced snapshots (t = 0 and t = T included).
/// Blow-up returns the partial trajectory with flags().blowup set.
Trajectory solve(const InitialData& u0, const SolveParams& p, const GridSpec& grid);
Trajectory solve(const Field& u0, const SolveParams& p, double background = 0.0,
                 bool check_support = false);

inline constexpr double kBlowupFactor = 1e6;
inline constexpr double kMaxSupportFraction = 0.8;
/// Relative deviation from the background that marks the wrap band tainted.
inline constexpr double kTaintTolerance = 1e-4;

}  // namespace ddl

#endif  // DDL_SOLVER_HPP_
