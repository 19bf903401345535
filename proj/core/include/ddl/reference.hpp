// Entropy-solution oracles for the inviscid conservation law: a first-order
// Engquist-Osher finite-volume scheme and the exact Burgers Riemann solution.
#ifndef DDL_REFERENCE_HPP_
#define DDL_REFERENCE_HPP_

#include <vector>

#include "ddl/discrete.hpp"
#include "ddl/model.hpp"

namespace ddl {

struct RiemannData {
  double u_left = 0.0;
  double u_right = 0.0;
  FluxSpec flux = burgers_flux();

  /// Throws std::invalid_argument unless d = 1 and f is convex between the states.
  void validate() const;
};

/// Engquist-Osher numerical flux along one axis, built for states in a
/// fixed interval. The sonic points of f' are located once, so each call
/// reduces to a few flux evaluations. Splitting [0, v] at the sonic points
/// makes the positive/negative parts of f' integrate to flux differences,
/// hence F(u, u) = f(u) up to rounding.
class EngquistOsher {
 public:
  EngquistOsher(const FluxSpec& flux, Interval range, int axis = 0);

  double operator()(double a, double b) const;
  const std::vector<double>& sonic_points() const { return nodes_; }

 private:
  double f(double v) const { return flux_.eval(v)[static_cast<std::size_t>(axis_)]; }
  double fp(double v) const { return flux_.deriv(v)[static_cast<std::size_t>(axis_)]; }
  /// Integral of max(f', 0) (positive = true) or min(f', 0) from nodes_[0] to v.
  double part(double v, bool positive) const;

  FluxSpec flux_;
  int axis_;
  std::vector<double> nodes_;     // range ends, 0 and sonic points, sorted
  std::vector<char> rising_;      // sign of f' on [nodes_[k], nodes_[k+1]]
  std::vector<double> pos_cum_;   // part(nodes_[k], true)
  std::vector<double> neg_cum_;   // part(nodes_[k], false)
  double f0_ = 0.0;
  double pos0_ = 0.0;
  double neg0_ = 0.0;
};

/// F(a, b) = f(0) + int_0^a max(f', 0) + int_0^b min(f', 0) for a 1-D flux.
double engquist_osher_flux(double a, double b, const FluxSpec& flux);

/// Explicit step size 0.4 / sum_j (max |f_j'| / dx_j) over the range of u.
double reference_dt(const Field& u, const FluxSpec& flux);

/// One forward-Euler EO step (dimension by dimension fluxes in 2-D).
Field reference_step(const Field& u, double dt, const FluxSpec& flux);

/// EO solution at t_end; the final step is clipped to land on t_end.
Field reference_solve(const Field& u0, const FluxSpec& flux, double t_end);

/// Same scheme, storing sample_count + 1 evenly spaced snapshots. The
/// trajectory is tagged with role "reference".
Trajectory reference_trajectory(const Field& u0, const FluxSpec& flux, double t_end,
                                int sample_count);

/// Exact self-similar Burgers solution u(x/t) of the Riemann problem.
double burgers_riemann_exact(const RiemannData& data, double x_over_t);

/// Cell-wise residual (|u1 - k| - |u0 - k|) / dt + (Q_{i+1/2} - Q_{i-1/2}) / dx
/// of one EO step u0 -> u1 with the Kruzkov entropy flux
/// Q(a, b) = F(a v k, b v k) - F(a ^ k, b ^ k). Returns the largest entry.
double max_discrete_entropy_residual(const Field& u0, const Field& u1, double dt,
                                     const FluxSpec& flux, double k);

/// Averages a field onto a coarser grid whose cells are unions of fine
/// cells. Extents must agree to a relative 1e-9 and N must divide evenly.
Field cell_average(const Field& fine, const GridSpec& coarse);

}  // namespace ddl

#endif  // DDL_REFERENCE_HPP_
