#include "ddl/reference.hpp"

#include <algorithm>
#include <cmath>

namespace ddl {

void RiemannData::validate() const {
  if (flux.dim != 1) throw std::invalid_argument("Riemann data needs a 1-D flux");
  const Interval span{std::min(u_left, u_right), std::max(u_left, u_right)};
  if (span.length() > 0.0 && !flux_is_convex(flux, span))
    throw std::invalid_argument("Riemann flux is not convex between the states");
}

EngquistOsher::EngquistOsher(const FluxSpec& flux, Interval range, int axis)
    : flux_(flux), axis_(axis) {
  if (!flux_.eval || !flux_.deriv) throw std::invalid_argument("EO flux: flux is not set");
  if (axis < 0 || axis >= flux_.dim) throw std::invalid_argument("EO flux: axis out of range");
  const double lo = std::min({range.lo, range.hi, 0.0});
  const double hi = std::max({range.lo, range.hi, 0.0});
  nodes_ = {lo, 0.0, hi};

  if (hi > lo) {
    constexpr int kSamples = 256;
    double prev_v = lo;
    double prev_d = fp(lo);
    for (int s = 1; s <= kSamples; ++s) {
      const double v = lo + (hi - lo) * s / kSamples;
      const double d = fp(v);
      if (d == 0.0) {
        nodes_.push_back(v);
      } else if (prev_d * d < 0.0) {
        double a = prev_v, b = v, da = prev_d;
        for (int it = 0; it < 100 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
          const double m = 0.5 * (a + b);
          const double dm = fp(m);
          if (dm == 0.0) {
            a = b = m;
            break;
          }
          if ((dm < 0.0) == (da < 0.0)) {
            a = m;
            da = dm;
          } else {
            b = m;
          }
        }
        nodes_.push_back(0.5 * (a + b));
      }
      prev_v = v;
      prev_d = d;
    }
  }
  std::sort(nodes_.begin(), nodes_.end());
  nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());

  const std::size_t n = nodes_.size();
  rising_.assign(n > 1 ? n - 1 : 0, 0);
  pos_cum_.assign(n, 0.0);
  neg_cum_.assign(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    rising_[k] = fp(0.5 * (nodes_[k] + nodes_[k + 1])) > 0.0;
    const double df = f(nodes_[k + 1]) - f(nodes_[k]);
    pos_cum_[k + 1] = pos_cum_[k] + (rising_[k] ? df : 0.0);
    neg_cum_[k + 1] = neg_cum_[k] + (rising_[k] ? 0.0 : df);
  }
  f0_ = f(0.0);
  pos0_ = part(0.0, true);
  neg0_ = part(0.0, false);
}

double EngquistOsher::part(double v, bool positive) const {
  const auto& cum = positive ? pos_cum_ : neg_cum_;
  if (v < nodes_.front() || v > nodes_.back()) {
    // Outside the tabulated range: one extra sign-definite piece, assuming
    // no sonic point in between.
    const std::size_t k = v < nodes_.front() ? 0 : nodes_.size() - 1;
    const bool rising = fp(0.5 * (v + nodes_[k])) > 0.0;
    return cum[k] + (rising == positive ? f(v) - f(nodes_[k]) : 0.0);
  }
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), v);
  std::size_t k = static_cast<std::size_t>(it - nodes_.begin()) - 1;
  if (k + 1 >= nodes_.size()) return cum.back();
  const bool rising = rising_[k];
  return cum[k] + (rising == positive ? f(v) - f(nodes_[k]) : 0.0);
}

double EngquistOsher::operator()(double a, double b) const {
  return f0_ + (part(a, true) - pos0_) + (part(b, false) - neg0_);
}

double engquist_osher_flux(double a, double b, const FluxSpec& flux) {
  if (flux.dim != 1) throw std::invalid_argument("engquist_osher_flux needs a 1-D flux");
  return EngquistOsher(flux, {std::min(a, b), std::max(a, b)})(a, b);
}

namespace {

double max_speed(const FluxSpec& flux, int axis, double lo, double hi) {
  constexpr int kSamples = 64;
  double m = 0.0;
  for (int s = 0; s <= kSamples; ++s) {
    const double v = lo + (hi - lo) * s / kSamples;
    m = std::max(m, std::abs(flux.deriv(v)[static_cast<std::size_t>(axis)]));
  }
  return m;
}

void require_flux_grid(const Field& u, const FluxSpec& flux) {
  if (flux.dim != u.grid().dim)
    throw std::invalid_argument("reference: flux and grid dimensions differ");
}

double dt_for_range(const GridSpec& g, const FluxSpec& flux, double lo, double hi) {
  double rate = 0.0;
  for (int j = 0; j < g.dim; ++j) rate += max_speed(flux, j, lo, hi) / g.dx(j);
  return rate > 0.0 ? 0.4 / rate : std::numeric_limits<double>::infinity();
}

struct EoStepper {
  std::vector<EngquistOsher> axes;

  EoStepper(const FluxSpec& flux, int dim, Interval range) {
    for (int j = 0; j < dim; ++j) axes.emplace_back(flux, range, j);
  }

  Field step(const Field& u, double dt) const {
    const GridSpec& g = u.grid();
    Field out = u;
    const int n0 = g.n[0];
    const int n1 = g.dim == 2 ? g.n[1] : 1;
    std::vector<double> face;
    {
      const double lam = dt / g.dx(0);
      face.resize(static_cast<std::size_t>(n0));
      for (int j = 0; j < n1; ++j) {
        for (int i = 0; i < n0; ++i)
          face[static_cast<std::size_t>(i)] = axes[0](u.at(i, j), u.at((i + 1) % n0, j));
        for (int i = 0; i < n0; ++i)
          out.at(i, j) -= lam * (face[static_cast<std::size_t>(i)] -
                                 face[static_cast<std::size_t>((i + n0 - 1) % n0)]);
      }
    }
    if (g.dim == 2) {
      const double lam = dt / g.dx(1);
      face.resize(static_cast<std::size_t>(n1));
      for (int i = 0; i < n0; ++i) {
        for (int j = 0; j < n1; ++j)
          face[static_cast<std::size_t>(j)] = axes[1](u.at(i, j), u.at(i, (j + 1) % n1));
        for (int j = 0; j < n1; ++j)
          out.at(i, j) -= lam * (face[static_cast<std::size_t>(j)] -
                                 face[static_cast<std::size_t>((j + n1 - 1) % n1)]);
      }
    }
    out.ensure_finite("reference step");
    return out;
  }
};

}  // namespace

double reference_dt(const Field& u, const FluxSpec& flux) {
  require_flux_grid(u, flux);
  return dt_for_range(u.grid(), flux, u.min(), u.max());
}

Field reference_step(const Field& u, double dt, const FluxSpec& flux) {
  require_flux_grid(u, flux);
  if (!(dt >= 0.0)) throw std::invalid_argument("reference_step: negative dt");
  return EoStepper(flux, u.grid().dim, {u.min(), u.max()}).step(u, dt);
}

Trajectory reference_trajectory(const Field& u0, const FluxSpec& flux, double t_end,
                                int sample_count) {
  require_flux_grid(u0, flux);
  if (!(t_end > 0.0)) throw std::invalid_argument("reference: t_end must be > 0");
  if (sample_count < 1) throw std::invalid_argument("reference: sample_count must be >= 1");
  u0.ensure_finite("reference initial data");

  Trajectory::Params params;
  params.cfl_safety = 0.4;
  params.flux = flux.name;
  params.diffusion = "none";
  params.scheme = "engquist-osher/euler";
  params.role = "reference";
  Trajectory traj(params);
  traj.push(0.0, u0);

  // The scheme obeys the maximum principle, so the initial range bounds
  // every later state and fixes both the sonic table and dt.
  const Interval range{u0.min(), u0.max()};
  const EoStepper stepper(flux, u0.grid().dim, range);
  const double dt_cfl = dt_for_range(u0.grid(), flux, range.lo, range.hi);

  Field u = u0;
  double t = 0.0;
  std::size_t steps = 0;
  for (int next = 1; next <= sample_count; ++next) {
    const double target = t_end * next / sample_count;
    while (t < target) {
      double dt = dt_cfl;
      bool land = false;
      if (t + dt >= target - 1e-12 * t_end) {
        dt = target - t;
        land = true;
      }
      u = stepper.step(u, dt);
      ++steps;
      t = land ? target : t + dt;
    }
    traj.push(target, u);
  }
  traj.steps = steps;
  traj.dt_min = std::isinf(dt_cfl) ? t_end : dt_cfl;
  return traj;
}

Field reference_solve(const Field& u0, const FluxSpec& flux, double t_end) {
  return reference_trajectory(u0, flux, t_end, 1).back().u;
}

double burgers_riemann_exact(const RiemannData& data, double x_over_t) {
  if (data.flux.name != "burgers")
    throw std::invalid_argument("burgers_riemann_exact needs the Burgers flux");
  const double ul = data.u_left, ur = data.u_right;
  if (ul > ur) {
    const double s = 0.5 * (ul + ur);
    return x_over_t < s ? ul : ur;
  }
  if (ul < ur) {
    if (x_over_t <= ul) return ul;
    if (x_over_t >= ur) return ur;
    return x_over_t;
  }
  return ul;
}

double max_discrete_entropy_residual(const Field& u0, const Field& u1, double dt,
                                     const FluxSpec& flux, double k) {
  require_flux_grid(u0, flux);
  if (u0.grid().dim != 1) throw std::invalid_argument("entropy residual is 1-D only");
  if (!(u0.grid() == u1.grid())) throw std::invalid_argument("entropy residual: grid mismatch");
  if (!(dt > 0.0)) throw std::invalid_argument("entropy residual: dt must be > 0");
  const Interval range{std::min({u0.min(), u1.min(), k}), std::max({u0.max(), u1.max(), k})};
  const EngquistOsher eo(flux, range);
  const int n = u0.grid().n[0];
  const double dx = u0.grid().dx(0);
  std::vector<double> q(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double a = u0.at(i), b = u0.at((i + 1) % n);
    q[static_cast<std::size_t>(i)] =
        eo(std::max(a, k), std::max(b, k)) - eo(std::min(a, k), std::min(b, k));
  }
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double r = (std::abs(u1.at(i) - k) - std::abs(u0.at(i) - k)) / dt +
                     (q[static_cast<std::size_t>(i)] -
                      q[static_cast<std::size_t>((i + n - 1) % n)]) / dx;
    worst = std::max(worst, r);
  }
  return worst;
}

Field cell_average(const Field& fine, const GridSpec& coarse) {
  const GridSpec& g = fine.grid();
  if (g.dim != coarse.dim) throw std::invalid_argument("cell_average: dimension mismatch");
  std::array<int, kMaxDim> ratio{1, 1};
  for (int j = 0; j < g.dim; ++j) {
    if (std::abs(g.length[j] - coarse.length[j]) > 1e-9 * std::max(g.length[j], coarse.length[j]))
      throw std::invalid_argument("cell_average: domain extents differ");
    if (g.n[j] % coarse.n[j] != 0)
      throw std::invalid_argument("cell_average: fine N must be a multiple of coarse N");
    ratio[j] = g.n[j] / coarse.n[j];
  }
  Field out(coarse);
  const double w = 1.0 / (static_cast<double>(ratio[0]) * ratio[1]);
  const int n1 = g.dim == 2 ? g.n[1] : 1;
  for (int j = 0; j < n1; ++j)
    for (int i = 0; i < g.n[0]; ++i) out.at(i / ratio[0], j / ratio[1]) += w * fine.at(i, j);
  return out;
}

}  // namespace ddl
