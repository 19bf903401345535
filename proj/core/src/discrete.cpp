#include "ddl/discrete.hpp"

#include <algorithm>
#include <cmath>

namespace ddl {

std::size_t GridSpec::size() const {
  std::size_t s = 1;
  for (int j = 0; j < dim; ++j) s *= static_cast<std::size_t>(n[j]);
  return s;
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int j = 0; j < dim; ++j) v *= dx(j);
  return v;
}

Vec GridSpec::point(std::size_t flat) const {
  Vec x{};
  const auto i = static_cast<int>(flat % static_cast<std::size_t>(n[0]));
  x[0] = coord(0, i);
  if (dim == 2) x[1] = coord(1, static_cast<int>(flat / static_cast<std::size_t>(n[0])));
  return x;
}

GridSpec make_grid(int dim, double length, int n) {
  return make_grid(dim, {length, length}, {n, n});
}

GridSpec make_grid(int dim, std::array<double, kMaxDim> length, std::array<int, kMaxDim> n) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("grid dimension must be 1 or 2");
  GridSpec g;
  g.dim = dim;
  for (int j = 0; j < kMaxDim; ++j) {
    if (j < dim) {
      if (n[j] < 8) throw std::invalid_argument("grid needs N >= 8 points per axis");
      if (!(length[j] > 0.0)) throw std::invalid_argument("grid extent must be positive");
      g.n[j] = n[j];
      g.length[j] = length[j];
    } else {
      g.n[j] = 1;
      g.length[j] = 1.0;
    }
  }
  return g;
}

Field::Field(GridSpec grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

Field::Field(GridSpec grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw std::invalid_argument("field size does not match its grid");
}

const Field& Field::ensure_finite(const char* where) const {
  for (double v : values_)
    if (!std::isfinite(v)) throw NumericalError(std::string("non-finite value in ") + where);
  return *this;
}

double Field::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }
double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }

double Field::integral() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s * grid_.cell_volume();
}

namespace {
void require_same_grid(const Field& a, const Field& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("fields live on different grids");
}
}  // namespace

Field& Field::operator+=(const Field& other) {
  require_same_grid(*this, other);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(*this, other);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
  return *this;
}

Field& Field::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

Field& Field::axpy(double s, const Field& other) {
  require_same_grid(*this, other);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += s * other.values_[k];
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

namespace {

// Applies a 5-point periodic stencil sum_k w[k] u_{i+k-2} along `axis`.
Field apply_stencil(const Field& u, int axis, const std::array<double, 5>& w) {
  const GridSpec& g = u.grid();
  if (axis < 0 || axis >= g.dim) throw std::invalid_argument("stencil axis out of range");
  Field out(g);
  const double* in = u.values().data();
  double* res = out.values().data();
  const int n0 = g.n[0];
  const int n1 = g.dim == 2 ? g.n[1] : 1;
  const int n = g.n[axis];
  // Stride between neighbours along the axis and number of independent lines.
  const std::ptrdiff_t stride = axis == 0 ? 1 : n0;
  const int lines = axis == 0 ? n1 : n0;
  const std::ptrdiff_t line_step = axis == 0 ? n0 : 1;
  for (int line = 0; line < lines; ++line) {
    const double* a = in + line * line_step;
    double* r = res + line * line_step;
    auto wrapped = [&](int i) {
      double acc = 0.0;
      for (int k = 0; k < 5; ++k) acc += w[k] * a[(((i + k - 2) % n + n) % n) * stride];
      return acc;
    };
    for (int i = 0; i < std::min(2, n); ++i) r[i * stride] = wrapped(i);
    for (int i = 2; i < n - 2; ++i) {
      const double* c = a + i * stride;
      r[i * stride] = w[0] * c[-2 * stride] + w[1] * c[-stride] + w[2] * c[0] +
                      w[3] * c[stride] + w[4] * c[2 * stride];
    }
    for (int i = std::max(2, n - 2); i < n; ++i) r[i * stride] = wrapped(i);
  }
  return out;
}

}  // namespace

Field centered_difference(const Field& u, int axis) {
  const double h = u.grid().dx(axis);
  const double c = 1.0 / (2.0 * h);
  Field out = apply_stencil(u, axis, {0.0, -c, 0.0, c, 0.0});
  out.ensure_finite("gradient");
  return out;
}

VectorField gradient(const Field& u) {
  VectorField g;
  for (int axis = 0; axis < u.grid().dim; ++axis) g[axis] = centered_difference(u, axis);
  return g;
}

Field divergence(const VectorField& v) {
  const GridSpec& grid = v[0].grid();
  Field out(grid);
  for (int axis = 0; axis < grid.dim; ++axis) {
    if (!(v[axis].grid() == grid))
      throw std::invalid_argument("divergence: components live on different grids");
    out += centered_difference(v[axis], axis);
  }
  out.ensure_finite("divergence");
  return out;
}

Field second_difference(const Field& u, int axis) {
  const double h = u.grid().dx(axis);
  const double c = 1.0 / (h * h);
  Field out = apply_stencil(u, axis, {0.0, c, -2.0 * c, c, 0.0});
  out.ensure_finite("second_difference");
  return out;
}

Field mixed_difference(const Field& u) {
  if (u.grid().dim != 2) throw std::invalid_argument("mixed_difference needs a 2-D grid");
  return centered_difference(centered_difference(u, 0), 1);
}

Field third_derivative_axis(const Field& u, int axis) {
  const GridSpec& g = u.grid();
  if (g.n[axis] < 5) throw std::invalid_argument("third derivative stencil needs N >= 5");
  const double h = g.dx(axis);
  const double c = 1.0 / (2.0 * h * h * h);
  Field out = apply_stencil(u, axis, {-c, 2.0 * c, 0.0, -2.0 * c, c});
  out.ensure_finite("third_derivative_axis");
  return out;
}

double lp_power(const Field& u, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp norm needs p >= 1");
  double s = 0.0;
  if (p == 1.0) {
    for (double v : u.values()) s += std::abs(v);
  } else if (p == 2.0) {
    for (double v : u.values()) s += v * v;
  } else {
    for (double v : u.values()) s += std::pow(std::abs(v), p);
  }
  return s * u.grid().cell_volume();
}

double lp_norm(const Field& u, double p) {
  if (std::isinf(p)) return u.max_abs();
  const double s = lp_power(u, p);
  if (p == 1.0) return s;
  if (p == 2.0) return std::sqrt(s);
  return std::pow(s, 1.0 / p);
}

void Trajectory::push(double t, Field u) {
  if (samples_.empty()) {
    if (t != 0.0) throw std::invalid_argument("trajectory must start at t = 0");
  } else {
    if (!(t > samples_.back().t))
      throw std::invalid_argument("trajectory sample times must be strictly increasing");
    if (!(u.grid() == samples_.front().u.grid()))
      throw std::invalid_argument("trajectory samples must share a grid");
  }
  samples_.push_back({t, std::move(u)});
}

std::optional<std::size_t> Trajectory::index_at(double t) const {
  for (std::size_t k = 0; k < samples_.size(); ++k)
    if (std::abs(samples_[k].t - t) <= 1e-9 * std::max(1.0, std::abs(t))) return k;
  return std::nullopt;
}

double time_integral(std::span<const double> times, std::span<const double> values,
                     std::optional<double> t_end) {
  if (times.size() != values.size()) throw std::invalid_argument("time_integral: size mismatch");
  if (times.size() < 2) throw std::invalid_argument("time integral needs >= 2 samples");
  const double stop = t_end.value_or(times.back());
  if (stop > times.back() * (1.0 + 1e-12) + 1e-15 || stop < times.front())
    throw std::invalid_argument("time integral: t_end outside the sampled range");
  double acc = 0.0;
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double a = times[k - 1];
    if (a >= stop) break;
    const double b = times[k];
    if (b <= stop * (1.0 + 1e-12)) {
      acc += 0.5 * (b - a) * (values[k - 1] + values[k]);
    } else {
      const double s = (stop - a) / (b - a);
      const double v_stop = values[k - 1] + s * (values[k] - values[k - 1]);
      acc += 0.5 * (stop - a) * (values[k - 1] + v_stop);
      break;
    }
  }
  return acc;
}

double spacetime_integral(const Trajectory& traj, const FieldIntegrand& integrand,
                          std::optional<double> t_end) {
  if (traj.size() < 2) throw std::invalid_argument("spacetime integral needs >= 2 samples");
  const double stop = t_end.value_or(traj.back().t);
  std::vector<double> times, values;
  for (const auto& s : traj.samples()) {
    times.push_back(s.t);
    values.push_back(integrand(s.t, s.u).integral());
    if (s.t >= stop) break;
  }
  return time_integral(times, values, stop);
}

}  // namespace ddl
