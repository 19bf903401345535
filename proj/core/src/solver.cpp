#include "ddl/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

namespace ddl {

void validate(const SolveParams& p) {
  if (!(p.epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
  if (!std::isfinite(p.delta)) throw std::invalid_argument("delta must be finite");
  if (!(p.t_end > 0.0)) throw std::invalid_argument("t_end must be > 0");
  if (!(p.cfl_safety > 0.0 && p.cfl_safety <= 1.0))
    throw std::invalid_argument("cfl_safety must lie in (0, 1]");
  if (p.sample_count < 1) throw std::invalid_argument("sample_count must be >= 1");
  if (!p.flux.eval || !p.flux.deriv) throw std::invalid_argument("flux is not set");
  if (!p.diffusion.eval) throw std::invalid_argument("diffusion is not set");
  if (p.flux.dim != p.diffusion.dim)
    throw std::invalid_argument("flux and diffusion dimensions differ");
}

InitialData bump_data(Vec centre, double radius, double amplitude) {
  if (!(radius > 0.0)) throw std::invalid_argument("bump radius must be positive");
  InitialData d;
  d.name = "bump";
  d.producer = [centre, radius, amplitude](const GridSpec& g) {
    return Field::from_function(g, [&](const Vec& x) {
      double s2 = 0.0;
      for (int j = 0; j < g.dim; ++j) {
        const double s = (x[j] - centre[j]) / radius;
        s2 += s * s;
      }
      return s2 < 1.0 ? amplitude * std::exp(1.0 - 1.0 / (1.0 - s2)) : 0.0;
    });
  };
  return d;
}

InitialData smoothed_riemann_data(double u_left, double u_right, double width, double a,
                                  double b) {
  if (!(width > 0.0)) throw std::invalid_argument("smoothed_riemann: width must be positive");
  if (!(b > a)) throw std::invalid_argument("smoothed_riemann: plateau must have b > a");
  InitialData d;
  d.name = "smoothed_riemann";
  d.background = u_right;
  d.producer = [=](const GridSpec& g) {
    Field u = Field::from_function(g, [&](const Vec& x) {
      const double s = 0.5 * (std::tanh((x[0] - a) / width) - std::tanh((x[0] - b) / width));
      return u_right + (u_left - u_right) * s;
    });
    return u;
  };
  return d;
}

InitialData sine_data(double amplitude, int mode) {
  InitialData d;
  d.name = "sine";
  d.waive_support_check = true;
  d.producer = [amplitude, mode](const GridSpec& g) {
    const double k = 2.0 * std::numbers::pi * mode / g.length[0];
    return Field::from_function(g, [&](const Vec& x) { return amplitude * std::sin(k * x[0]); });
  };
  return d;
}

InitialNorms declared_norms(const Field& u0, const std::vector<double>& qs) {
  InitialNorms n;
  n.l1 = lp_norm(u0, 1.0);
  n.l2 = lp_norm(u0, 2.0);
  for (double q : qs) n.lq.emplace_back(q, lp_norm(u0, q));
  return n;
}

double support_fraction(const Field& u, double background, double rel_tol) {
  const GridSpec& g = u.grid();
  double peak = 0.0;
  for (double v : u.values()) peak = std::max(peak, std::abs(v - background));
  if (peak == 0.0) return 0.0;
  const double cut = rel_tol * peak;
  double worst = 0.0;
  for (int axis = 0; axis < g.dim; ++axis) {
    std::vector<char> occupied(static_cast<std::size_t>(g.n[axis]), 0);
    for (std::size_t k = 0; k < u.size(); ++k) {
      if (std::abs(u[k] - background) <= cut) continue;
      const std::size_t i = axis == 0 ? k % static_cast<std::size_t>(g.n[0])
                                      : k / static_cast<std::size_t>(g.n[0]);
      occupied[i] = 1;
    }
    const auto count = std::count(occupied.begin(), occupied.end(), 1);
    worst = std::max(worst, static_cast<double>(count) / g.n[axis]);
  }
  return worst;
}

Field rhs(const Field& u, const SolveParams& p) {
  const GridSpec& g = u.grid();
  const int dim = g.dim;
  Field out(g);

  // Convection in conservative form.
  {
    VectorField flux;
    for (int j = 0; j < dim; ++j) flux[j] = Field(g);
    for (std::size_t k = 0; k < u.size(); ++k) {
      const Vec fk = p.flux.eval(u[k]);
      for (int j = 0; j < dim; ++j) flux[j][k] = fk[j];
    }
    for (int j = 0; j < dim; ++j) out.axpy(-1.0, centered_difference(flux[j], j));
  }

  if (p.epsilon > 0.0) {
    const VectorField grad = gradient(u);
    VectorField b;
    for (int j = 0; j < dim; ++j) b[j] = Field(g);
    for (std::size_t k = 0; k < u.size(); ++k) {
      Vec l{};
      for (int j = 0; j < dim; ++j) l[j] = grad[j][k];
      const Vec bk = p.diffusion.eval(l);
      for (int j = 0; j < dim; ++j) b[j][k] = bk[j];
    }
    for (int j = 0; j < dim; ++j) out.axpy(p.epsilon, centered_difference(b[j], j));
  }

  if (p.delta != 0.0)
    for (int j = 0; j < dim; ++j) out.axpy(p.delta, third_derivative_axis(u, j));

  for (double v : out.values())
    if (!std::isfinite(v)) throw BlowUp("non-finite right-hand side", u.max_abs());
  return out;
}

double stable_dt(const SolveParams& p, const GridSpec& grid, double u_max, double grad_max) {
  if (!(grid.dx(0) > 0.0)) throw std::invalid_argument("stable_dt: non-positive spacing");
  double dx = grid.dx(0);
  for (int j = 1; j < grid.dim; ++j) dx = std::min(dx, grid.dx(j));

  double limit = std::numeric_limits<double>::infinity();

  // Convection: 1 / sum_j (max |f_j'| / dx_j) over |u| <= u_max.
  {
    const int samples = 64;
    std::array<double, kMaxDim> speed{};
    for (int s = 0; s <= samples; ++s) {
      const double v = u_max * (2.0 * s / samples - 1.0);
      const Vec d = p.flux.deriv(v);
      for (int j = 0; j < grid.dim; ++j) speed[j] = std::max(speed[j], std::abs(d[j]));
    }
    double rate = 0.0;
    for (int j = 0; j < grid.dim; ++j) rate += speed[j] / grid.dx(j);
    if (rate > 0.0) limit = std::min(limit, 1.0 / rate);
  }

  if (p.epsilon > 0.0) {
    const double b = p.diffusion.spectral_bound ? p.diffusion.spectral_bound(grad_max) : 1.0;
    if (b > 0.0) limit = std::min(limit, dx * dx / (2.0 * grid.dim * p.epsilon * b));
  }

  if (p.delta != 0.0) limit = std::min(limit, dx * dx * dx / (4.0 * std::abs(p.delta)));

  if (std::isinf(limit)) limit = dx;
  return p.cfl_safety * limit;
}

Field step_rk4(const Field& u, double dt, const SolveParams& p) {
  const Field k1 = rhs(u, p);
  Field stage = u;
  stage.axpy(0.5 * dt, k1);
  const Field k2 = rhs(stage, p);
  stage = u;
  stage.axpy(0.5 * dt, k2);
  const Field k3 = rhs(stage, p);
  stage = u;
  stage.axpy(dt, k3);
  const Field k4 = rhs(stage, p);

  Field next = u;
  const double w = dt / 6.0;
  auto out = next.values();
  const auto a = k1.values(), b = k2.values(), c = k3.values(), d = k4.values();
  for (std::size_t i = 0; i < next.size(); ++i)
    out[i] += w * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]);
  for (double v : next.values())
    if (!std::isfinite(v)) throw BlowUp("non-finite RK4 stage", u.max_abs());
  return next;
}

namespace {

double max_gradient(const Field& u) {
  const VectorField g = gradient(u);
  double m = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    double s = 0.0;
    for (int j = 0; j < u.grid().dim; ++j) s += g[j][k] * g[j][k];
    m = std::max(m, s);
  }
  return std::sqrt(m);
}

bool touches_wrap(const Field& u, double background, double threshold) {
  const GridSpec& g = u.grid();
  constexpr int kBand = 2;
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (std::abs(u[k] - background) <= threshold) continue;
    const int i = static_cast<int>(k % static_cast<std::size_t>(g.n[0]));
    if (i < kBand || i >= g.n[0] - kBand) return true;
    if (g.dim == 2) {
      const int j = static_cast<int>(k / static_cast<std::size_t>(g.n[0]));
      if (j < kBand || j >= g.n[1] - kBand) return true;
    }
  }
  return false;
}

Trajectory integrate(Field u, const SolveParams& p, double background, bool watch_wrap) {
  validate(p);
  const auto started = std::chrono::steady_clock::now();

  Trajectory::Params tp;
  tp.epsilon = p.epsilon;
  tp.delta = p.delta;
  tp.cfl_safety = p.cfl_safety;
  tp.flux = p.flux.name;
  tp.diffusion = p.diffusion.name;
  tp.scheme = "centered-fd/rk4";
  Trajectory traj(tp);
  traj.flags().dispersive_regime = p.epsilon == 0.0 && p.delta != 0.0;

  u.ensure_finite("initial data");
  const double u0_max = u.max_abs();
  double deviation0 = 0.0;
  for (double v : u.values()) deviation0 = std::max(deviation0, std::abs(v - background));
  const double taint_cut = kTaintTolerance * deviation0;

  traj.push(0.0, u);
  double t = 0.0;
  double dt_min = std::numeric_limits<double>::infinity();
  std::size_t steps = 0;

  for (int next = 1; next <= p.sample_count; ++next) {
    const double target = p.t_end * next / p.sample_count;
    bool failed = false;
    while (t < target) {
      const double grad_max = p.epsilon > 0.0 ? max_gradient(u) : 0.0;
      double dt = stable_dt(p, u.grid(), u.max_abs(), grad_max);
      dt_min = std::min(dt_min, dt);
      bool land = false;
      if (t + dt >= target - 1e-12 * p.t_end) {
        dt = target - t;
        land = true;
      }
      try {
        u = step_rk4(u, dt, p);
      } catch (const NumericalError& e) {
        traj.flags().blowup = true;
        traj.flags().blowup_time = t;
        traj.flags().blowup_max = u.max_abs();
        failed = true;
        break;
      }
      ++steps;
      t = land ? target : t + dt;
      if (u0_max > 0.0 && u.max_abs() > kBlowupFactor * u0_max) {
        traj.flags().blowup = true;
        traj.flags().blowup_time = t;
        traj.flags().blowup_max = u.max_abs();
        failed = true;
        break;
      }
    }
    if (failed) break;
    traj.push(target, u);
    if (watch_wrap && !traj.flags().tainted && deviation0 > 0.0 &&
        touches_wrap(u, background, taint_cut)) {
      traj.flags().tainted = true;
      traj.flags().taint_time = target;
    }
  }

  traj.steps = steps;
  traj.dt_min = std::isinf(dt_min) ? 0.0 : dt_min;
  traj.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return traj;
}

}  // namespace

Trajectory solve(const InitialData& u0, const SolveParams& p, const GridSpec& grid) {
  Field u = u0(grid);
  if (!u0.waive_support_check) {
    const double frac = support_fraction(u, u0.background);
    if (frac > kMaxSupportFraction)
      throw std::invalid_argument("initial data support covers " + std::to_string(frac) +
                                  " of an axis (limit 0.8)");
  }
  return integrate(std::move(u), p, u0.background, !u0.waive_support_check);
}

Trajectory solve(const Field& u0, const SolveParams& p, double background, bool check_support) {
  if (check_support && support_fraction(u0, background) > kMaxSupportFraction)
    throw std::invalid_argument("initial data support exceeds 0.8 of an axis");
  return integrate(u0, p, background, check_support);
}

}  // namespace ddl
