// Periodic uniform grids, finite-difference operators and discrete norms.
#ifndef DDL_DISCRETE_HPP_
#define DDL_DISCRETE_HPP_

#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddl/model.hpp"

namespace ddl {

/// Raised when a field acquires NaN/Inf or a run leaves its validity range.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Periodic box [0, L_0) x [0, L_1) with N_j cells per axis. Values live at
/// cell centres x_i = (i + 1/2) dx.
struct GridSpec {
  int dim = 1;
  std::array<double, kMaxDim> length{1.0, 1.0};
  std::array<int, kMaxDim> n{8, 1};

  double dx(int axis = 0) const { return length[axis] / n[axis]; }
  std::size_t size() const;
  double cell_volume() const;
  double coord(int axis, int i) const { return (i + 0.5) * dx(axis); }
  std::size_t index(int i, int j = 0) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(n[0]) * static_cast<std::size_t>(j);
  }
  /// Cell-centre coordinates of the flat index.
  Vec point(std::size_t flat) const;

  bool operator==(const GridSpec&) const = default;
};

/// Checked constructor: d in {1,2}, N >= 8, L > 0, same N and L on each axis.
GridSpec make_grid(int dim, double length, int n);
GridSpec make_grid(int dim, std::array<double, kMaxDim> length, std::array<int, kMaxDim> n);

class Field {
 public:
  Field() = default;
  explicit Field(GridSpec grid, double fill = 0.0);
  Field(GridSpec grid, std::vector<double> values);

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& at(int i, int j = 0) { return values_[grid_.index(i, j)]; }
  double at(int i, int j = 0) const { return values_[grid_.index(i, j)]; }

  /// Throws NumericalError if any value is NaN or infinite.
  const Field& ensure_finite(const char* where) const;
  double max_abs() const;
  double min() const;
  double max() const;
  /// Sum of values times the cell volume.
  double integral() const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s);
  /// this += s * other.
  Field& axpy(double s, const Field& other);

  template <class F>
  static Field from_function(const GridSpec& grid, F&& fn) {
    Field out(grid);
    for (std::size_t k = 0; k < out.size(); ++k) out.values_[k] = fn(grid.point(k));
    return out;
  }

  template <class F>
  Field map(F&& fn) const {
    Field out(grid_);
    for (std::size_t k = 0; k < size(); ++k) out.values_[k] = fn(values_[k]);
    return out;
  }

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

using VectorField = std::array<Field, kMaxDim>;

/// (u_{i+1} - u_{i-1}) / (2 dx) along one axis, periodic.
Field centered_difference(const Field& u, int axis);
/// Centred gradient, one component per active axis (others left empty).
VectorField gradient(const Field& u);
/// Sum of centred differences of the active components.
Field divergence(const VectorField& v);
/// (u_{i+1} - 2u_i + u_{i-1}) / dx^2 along one axis.
Field second_difference(const Field& u, int axis);
/// Centred mixed derivative d^2 u / dx_0 dx_1 (2-D only).
Field mixed_difference(const Field& u);
/// (u_{i+2} - 2u_{i+1} + 2u_{i-1} - u_{i-2}) / (2 dx^3) along one axis.
Field third_derivative_axis(const Field& u, int axis);

inline constexpr double kInfNorm = std::numeric_limits<double>::infinity();

/// (sum |u_i|^p dx^d)^(1/p); p = kInfNorm gives max |u_i|.
double lp_norm(const Field& u, double p);
/// sum |u_i|^p dx^d (the p-th power of the norm, no root).
double lp_power(const Field& u, double p);

/// Solution history with strictly increasing sample times starting at 0.
class Trajectory {
 public:
  struct Sample {
    double t;
    Field u;
  };

  struct Params {
    double epsilon = 0.0;
    double delta = 0.0;
    double cfl_safety = 0.0;
    std::string flux;
    std::string diffusion;
    std::string scheme;
    std::string role = "solver";
  };

  struct Flags {
    bool blowup = false;
    bool tainted = false;
    bool dispersive_regime = false;
    double blowup_time = 0.0;
    double blowup_max = 0.0;
    double taint_time = 0.0;
  };

  Trajectory() = default;
  explicit Trajectory(Params params) : params_(std::move(params)) {}

  /// Appends a sample; the first must be at t = 0 and times must increase.
  void push(double t, Field u);

  const std::vector<Sample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const Sample& front() const { return samples_.front(); }
  const Sample& back() const { return samples_.back(); }
  const GridSpec& grid() const { return samples_.front().u.grid(); }
  /// Index of the sample at time t (within a relative 1e-9), if any.
  std::optional<std::size_t> index_at(double t) const;

  Params& params() { return params_; }
  const Params& params() const { return params_; }
  Flags& flags() { return flags_; }
  const Flags& flags() const { return flags_; }

  std::size_t steps = 0;
  double dt_min = 0.0;
  double wall_seconds = 0.0;

 private:
  Params params_;
  Flags flags_;
  std::vector<Sample> samples_;
};

/// Maps (t, u(t)) to a cellwise integrand.
using FieldIntegrand = std::function<Field(double, const Field&)>;

/// Trapezoidal rule in time over stored samples of cellwise sums times dx^d.
/// Integrates over [0, t_end] (defaults to the last sample); t_end between
/// samples is handled by linear interpolation of the spatial integral.
double spacetime_integral(const Trajectory& traj, const FieldIntegrand& integrand,
                          std::optional<double> t_end = std::nullopt);

/// Same rule for an integrand that is already reduced to a scalar per sample.
double time_integral(std::span<const double> times, std::span<const double> values,
                     std::optional<double> t_end = std::nullopt);

}  // namespace ddl

#endif  // DDL_DISCRETE_HPP_
