#include "ddl/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

namespace ddl {

double bump_profile(double s, int derivative) {
  if (!(std::abs(s) < 1.0)) return 0.0;
  const double w = 1.0 - s * s;
  switch (derivative) {
    case 0:
      return w * w * w * w;
    case 1:
      return -8.0 * s * w * w * w;
    case 2:
      return -8.0 * w * w * w + 48.0 * s * s * w * w;
    case 3:
      return 144.0 * s * w * w - 192.0 * s * s * s * w;
    default:
      throw std::invalid_argument("bump_profile: derivative order must be 0..3");
  }
}

namespace {

// Per-axis profile values phi^(k)(s_j) / R_j^k.
struct AxisProfiles {
  std::array<std::array<double, 4>, kMaxDim> x{};
  std::array<double, 2> t{};
};

AxisProfiles profiles(const TestFunction& th, const Vec& x, double t) {
  AxisProfiles p;
  for (int j = 0; j < th.dim; ++j) {
    const double s = (x[j] - th.center[j]) / th.radius[j];
    double scale = 1.0;
    for (int k = 0; k < 4; ++k) {
      p.x[j][k] = bump_profile(s, k) / scale;
      scale *= th.radius[j];
    }
  }
  const double st = (t - th.t0) / th.t_radius;
  p.t[0] = bump_profile(st, 0);
  p.t[1] = bump_profile(st, 1) / th.t_radius;
  return p;
}

// Product over axes with axis j using derivative order orders[j].
double space_product(const TestFunction& th, const AxisProfiles& p, std::array<int, kMaxDim> orders) {
  double v = 1.0;
  for (int j = 0; j < th.dim; ++j) v *= p.x[j][orders[j]];
  return v;
}

}  // namespace

double TestFunction::value(const Vec& x, double t) const {
  const auto p = profiles(*this, x, t);
  return scale * space_product(*this, p, {0, 0}) * p.t[0];
}

double TestFunction::time_derivative(const Vec& x, double t) const {
  const auto p = profiles(*this, x, t);
  return scale * space_product(*this, p, {0, 0}) * p.t[1];
}

Vec TestFunction::gradient(const Vec& x, double t) const {
  const auto p = profiles(*this, x, t);
  Vec g{};
  for (int j = 0; j < dim; ++j) {
    std::array<int, kMaxDim> o{0, 0};
    o[j] = 1;
    g[j] = scale * space_product(*this, p, o) * p.t[0];
  }
  return g;
}

Mat TestFunction::hessian(const Vec& x, double t) const {
  const auto p = profiles(*this, x, t);
  Mat h{};
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) {
      std::array<int, kMaxDim> o{0, 0};
      o[a] += 1;
      o[b] += 1;
      h[a][b] = scale * space_product(*this, p, o) * p.t[0];
    }
  return h;
}

double TestFunction::third_derivative(const Vec& x, double t, int axis) const {
  if (axis < 0 || axis >= dim) throw std::invalid_argument("test function axis out of range");
  const auto p = profiles(*this, x, t);
  std::array<int, kMaxDim> o{0, 0};
  o[axis] = 3;
  return scale * space_product(*this, p, o) * p.t[0];
}

double TestFunction::third_derivative_sum(const Vec& x, double t) const {
  double s = 0.0;
  for (int j = 0; j < dim; ++j) s += third_derivative(x, t, j);
  return s;
}

bool TestFunction::supported_in(const GridSpec& grid, double t_end) const {
  if (grid.dim != dim) return false;
  for (int j = 0; j < dim; ++j)
    if (center[j] - radius[j] < 0.0 || center[j] + radius[j] > grid.length[j]) return false;
  return t0 - t_radius >= 0.0 && t0 + t_radius <= t_end;
}

TestFunction make_test_function(int dim, Vec center, Vec radius, double t0, double t_radius,
                                double scale) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("test function dimension must be 1 or 2");
  for (int j = 0; j < dim; ++j)
    if (!(radius[j] > 0.0)) throw std::invalid_argument("test function radii must be positive");
  if (!(t_radius > 0.0)) throw std::invalid_argument("test function time radius must be positive");
  TestFunction th;
  th.dim = dim;
  th.center = center;
  th.radius = radius;
  th.t0 = t0;
  th.t_radius = t_radius;
  th.scale = scale;
  return th;
}

namespace {

std::size_t require_sample(const Trajectory& traj, double t, const char* who) {
  if (traj.empty()) throw std::invalid_argument(std::string(who) + ": empty trajectory");
  auto idx = traj.index_at(t);
  if (!idx) throw std::invalid_argument(std::string(who) + ": t is not a stored sample time");
  return *idx;
}

// Cellwise grad u . b(grad u) and |grad u|.
struct GradientData {
  VectorField grad;
  Field dissipation;  // grad u . b(grad u)
  Field magnitude;    // |grad u|
};

GradientData gradient_data(const Field& u, const DiffusionSpec& diff) {
  GradientData d{gradient(u), Field(u.grid()), Field(u.grid())};
  const int dim = u.grid().dim;
  for (std::size_t k = 0; k < u.size(); ++k) {
    Vec l{};
    for (int j = 0; j < dim; ++j) l[j] = d.grad[j][k];
    d.dissipation[k] = dot(l, diff.eval(l));
    d.magnitude[k] = norm(l);
  }
  return d;
}

std::vector<double> sample_times(const Trajectory& traj, std::size_t last) {
  std::vector<double> t;
  for (std::size_t k = 0; k <= last; ++k) t.push_back(traj.samples()[k].t);
  return t;
}

}  // namespace

ResidualReport energy_balance_residual(const Trajectory& traj, const DiffusionSpec& diff,
                                       double eps, double t) {
  const std::size_t last = require_sample(traj, t, "energy_balance_residual");
  const double u0_sq = lp_power(traj.front().u, 2.0);
  const double ut_sq = lp_power(traj.samples()[last].u, 2.0);
  double dissipation = 0.0;
  if (last > 0 && eps != 0.0) {
    std::vector<double> values;
    for (std::size_t k = 0; k <= last; ++k)
      values.push_back(gradient_data(traj.samples()[k].u, diff).dissipation.integral());
    dissipation = time_integral(sample_times(traj, last), values);
  }
  ResidualReport r;
  r.value = ut_sq + 2.0 * eps * dissipation - u0_sq;
  r.tainted = traj.flags().tainted && traj.flags().taint_time <= t;
  return r;
}

BudgetReport gradient_budget(const Trajectory& traj, const DiffusionSpec& diff, double eps,
                             double u0_l2, double slack) {
  if (!(diff.c2 > 0.0)) throw std::invalid_argument("gradient_budget needs C2 > 0");
  if (traj.empty()) throw std::invalid_argument("gradient_budget: empty trajectory");
  BudgetReport b;
  if (eps != 0.0 && traj.size() >= 2) {
    const double r = diff.r;
    b.lhs = eps * spacetime_integral(traj, [&](double, const Field& u) {
              Field m = gradient_data(u, diff).magnitude;
              for (double& v : m.values()) v = std::pow(v, r + 1.0);
              return m;
            });
  }
  b.bound = u0_l2 * u0_l2 / (2.0 * diff.c2);
  b.holds = b.lhs <= b.bound + slack;
  return b;
}

PowerEnergyReport power_energy_identity(const Trajectory& traj, double alpha,
                                        const DiffusionSpec& diff, double eps, double delta,
                                        DispersiveForm form, std::optional<double> t) {
  if (!(alpha >= 1.0)) throw std::invalid_argument("power_energy_identity needs alpha >= 1");
  if (form == DispersiveForm::cubic && alpha < 2.0)
    throw std::invalid_argument("the cubic dispersive form needs alpha >= 2");
  if (traj.empty()) throw std::invalid_argument("power_energy_identity: empty trajectory");
  const std::size_t last = require_sample(traj, t.value_or(traj.back().t), "power_energy_identity");
  const double a1 = alpha + 1.0;

  std::vector<double> diss, disp;
  for (std::size_t k = 0; k <= last; ++k) {
    const Field& u = traj.samples()[k].u;
    const GradientData g = gradient_data(u, diff);
    Field wd(u.grid()), wp(u.grid());
    for (std::size_t c = 0; c < u.size(); ++c) wd[c] = std::pow(std::abs(u[c]), alpha - 1.0) * g.dissipation[c];
    if (form == DispersiveForm::divergence) {
      for (int j = 0; j < u.grid().dim; ++j) {
        const Field dsq = centered_difference(g.grad[j].map([](double v) { return v * v; }), j);
        for (std::size_t c = 0; c < u.size(); ++c)
          wp[c] += std::pow(std::abs(u[c]), alpha - 1.0) * dsq[c];
      }
    } else {
      for (std::size_t c = 0; c < u.size(); ++c) {
        const double sgn = u[c] > 0.0 ? 1.0 : (u[c] < 0.0 ? -1.0 : 0.0);
        double cube = 0.0;
        for (int j = 0; j < u.grid().dim; ++j) cube += g.grad[j][c] * g.grad[j][c] * g.grad[j][c];
        wp[c] = sgn * std::pow(std::abs(u[c]), alpha - 2.0) * cube;
      }
    }
    diss.push_back(wd.integral());
    disp.push_back(wp.integral());
  }
  const auto times = sample_times(traj, last);
  const double diss_int = last > 0 ? time_integral(times, diss) : 0.0;
  const double disp_int = last > 0 ? time_integral(times, disp) : 0.0;

  PowerEnergyReport rep;
  rep.form = form;
  rep.lhs_terms = lp_power(traj.samples()[last].u, a1) / a1 + alpha * eps * diss_int;
  rep.initial_term = lp_power(traj.front().u, a1) / a1;
  rep.dispersive_term = form == DispersiveForm::divergence
                            ? -0.5 * alpha * delta * disp_int
                            : 0.5 * alpha * (alpha - 1.0) * delta * disp_int;
  rep.imbalance = rep.lhs_terms - rep.initial_term - rep.dispersive_term;
  return rep;
}

double hn_exponent(double r, int n) { return n * (r - 1.0) + 2.0; }

namespace {

void validate_hn(const HnBoundParams& p) {
  if (!(p.r >= 2.0)) throw std::invalid_argument("hn_bound needs r >= 2");
  if (p.n < 0) throw std::invalid_argument("hn_bound needs n >= 0");
  if (p.lq_powers.size() < static_cast<std::size_t>(p.n) + 1)
    throw std::invalid_argument("hn_bound needs int |u0|^q_k for k = 0..n");
  for (double v : p.lq_powers)
    if (!(v >= 0.0)) throw std::invalid_argument("hn_bound: norms must be nonnegative");
  if (!(p.C > 0.0)) throw std::invalid_argument("hn_bound: C must be positive");
  if (!(p.t >= 0.0)) throw std::invalid_argument("hn_bound: t must be nonnegative");
  if (!(p.Delta >= 0.0)) throw std::invalid_argument("hn_bound: Delta must be nonnegative");
}

// Returns (C_n, H_n).
std::pair<double, double> hn_recursion(const HnBoundParams& p) {
  validate_hn(p);
  const double r = p.r;
  const double e = 3.0 / (r + 1.0);
  double c = p.lq_powers[0];
  double h = c;
  for (int k = 1; k <= p.n; ++k) {
    const double q = hn_exponent(r, k);
    const double qm = hn_exponent(r, k - 1);
    const double feedback = q / std::pow(qm, e) * (q - 1.0) / std::pow(qm - 1.0, e) * k *
                            (r - 1.0) / 2.0 * std::pow(p.C * h, e);
    c = std::max(p.lq_powers[static_cast<std::size_t>(k)], feedback);
    const double growth = std::pow(p.t * c * (1.0 + p.Delta), (r - 2.0) / 3.0);
    h = c * (1.0 + p.Delta * std::max(1.0, growth));
  }
  return {c, h};
}

}  // namespace

double cn_constant(const HnBoundParams& p) { return hn_recursion(p).first; }

double hn_bound(const HnBoundParams& p) { return hn_recursion(p).second; }

double bootstrap_bound(double K, double Delta, double theta, double r) {
  if (!(K >= 0.0) || !(Delta >= 0.0)) throw std::invalid_argument("bootstrap_bound: K, Delta >= 0");
  if (!(r > -1.0) || !(theta >= 0.0) || !(theta < r + 1.0))
    throw std::invalid_argument("bootstrap_bound needs 0 <= theta < r + 1");
  return std::max(1.0, std::pow(K * (1.0 + Delta), (r + 1.0) / (r + 1.0 - theta)));
}

LpBoundReport lp_bound_check(const Trajectory& traj, double r, int n, double hn, double slack) {
  if (!(r >= 2.0) && n > 0) throw std::invalid_argument("lp_bound_check needs r >= 2");
  if (n < 0) throw std::invalid_argument("lp_bound_check needs n >= 0");
  LpBoundReport rep;
  rep.exponent = hn_exponent(r, n);
  for (const auto& s : traj.samples())
    rep.max_norm_power = std::max(rep.max_norm_power, lp_power(s.u, rep.exponent));
  rep.bound = hn;
  rep.holds = rep.max_norm_power <= hn + slack;
  return rep;
}

HRegularityReport h_regularity_check(const Trajectory& traj, const DiffusionSpec& diff,
                                     double eps, double delta, double m) {
  const double r = diff.r;
  if (!(r >= 1.0)) throw std::invalid_argument("h_regularity_check needs r >= 1");
  if (!(eps > 0.0)) throw std::invalid_argument("h_regularity_check needs eps > 0");
  if (traj.size() < 2) throw std::invalid_argument("h_regularity_check needs >= 2 samples");

  const double q = 2.0 + (r - 1.0) / r;
  double grad_max = 0.0, lq_max = 0.0;
  std::vector<double> hess, diss;
  for (const auto& s : traj.samples()) {
    const Field& u = s.u;
    const GradientData g = gradient_data(u, diff);
    grad_max = std::max(grad_max, lp_power(g.magnitude, 2.0));
    lq_max = std::max(lq_max, lp_power(u, q));

    Field h2(u.grid());
    for (int j = 0; j < u.grid().dim; ++j) {
      const Field d2 = second_difference(u, j);
      for (std::size_t c = 0; c < u.size(); ++c) h2[c] += d2[c] * d2[c];
    }
    if (u.grid().dim == 2) {
      const Field dxy = mixed_difference(u);
      for (std::size_t c = 0; c < u.size(); ++c) h2[c] += 2.0 * dxy[c] * dxy[c];
    }
    hess.push_back(h2.integral());

    Field w(u.grid());
    for (std::size_t c = 0; c < u.size(); ++c)
      w[c] = std::pow(std::abs(u[c]), (r - 1.0) / r) * std::pow(g.magnitude[c], r + 1.0);
    diss.push_back(w.integral());
  }
  const auto times = sample_times(traj, traj.size() - 1);

  HRegularityReport rep;
  rep.gradient_term = std::pow(eps, (r + 3.0) / (r + 1.0)) * grad_max;
  rep.hessian_term = std::pow(eps, 2.0 * (r + 2.0) / (r + 1.0)) * time_integral(times, hess);
  rep.lq_term = lq_max + eps * time_integral(times, diss);
  rep.lq_factor = 1.0 + std::pow(std::abs(delta), (r + 1.0) / r) * std::pow(eps, -(r + 3.0) / r);
  rep.lq_normalized = rep.lq_term / rep.lq_factor;
  rep.m_within_statement = m <= 2.0 * r / (r + 1.0);
  rep.m_within_proof = m <= (r - 1.0) / (r + 1.0);
  return rep;
}

EntropyProductionReport entropy_production(const Trajectory& traj, const EntropyPair& pair,
                                           const TestFunction& theta, double eps,
                                           double delta, const DiffusionSpec& diff) {
  if (traj.size() < 2) throw std::invalid_argument("entropy_production needs >= 2 samples");
  const GridSpec& grid = traj.grid();
  if (!theta.supported_in(grid, traj.back().t))
    throw std::invalid_argument("test function support leaves the domain or (0, T)");
  const int dim = grid.dim;

  std::vector<double> times, m1, m2, m3, lhs;
  for (const auto& s : traj.samples()) {
    const Field& u = s.u;
    const double t = s.t;
    times.push_back(t);
    if (bump_profile((t - theta.t0) / theta.t_radius) == 0.0) {
      m1.push_back(0.0);
      m2.push_back(0.0);
      m3.push_back(0.0);
      lhs.push_back(0.0);
      continue;
    }
    const VectorField grad = gradient(u);
    double a1 = 0.0, a2 = 0.0, a3 = 0.0, a4 = 0.0;
    for (std::size_t c = 0; c < u.size(); ++c) {
      const Vec x = grid.point(c);
      const double th = theta.value(x, t);
      const Vec gth = theta.gradient(x, t);
      if (th == 0.0 && gth[0] == 0.0 && gth[1] == 0.0) continue;
      const Mat hth = theta.hessian(x, t);
      const double v = u[c];
      const double e1 = pair.eta_prime(v);
      const double e2 = pair.eta_second(v);
      const double e3 = pair.eta_third(v);
      Vec l{};
      for (int j = 0; j < dim; ++j) l[j] = grad[j][c];
      const Vec b = diff.eval(l);
      const Vec qv = pair.q(v);
      a1 += -eps * e1 * dot(b, gth);
      a2 += -eps * th * e2 * dot(l, b);
      double d = 0.0;
      for (int j = 0; j < dim; ++j)
        d += th * e3 * l[j] * l[j] * l[j] + 3.0 * e2 * l[j] * l[j] * gth[j] +
             2.0 * e1 * l[j] * hth[j][j];
      a3 += 0.5 * delta * d;
      a4 += -(pair.eta(v) * theta.time_derivative(x, t) + dot(qv, gth));
    }
    const double vol = grid.cell_volume();
    m1.push_back(a1 * vol);
    m2.push_back(a2 * vol);
    m3.push_back(a3 * vol);
    lhs.push_back(a4 * vol);
  }

  EntropyProductionReport rep;
  rep.epsilon = eps;
  rep.delta = delta;
  rep.mu1 = time_integral(times, m1);
  rep.mu2 = time_integral(times, m2);
  rep.mu3 = time_integral(times, m3);
  rep.total = rep.mu1 + rep.mu2 + rep.mu3;
  rep.lhs = time_integral(times, lhs);
  if (theta.nonneg()) {
    rep.sign_checked = true;
    rep.mu2_sign_ok = rep.mu2 <= kSignTolerance;
  } else {
    rep.warning = "test function is not nonnegative; mu2 sign check skipped";
  }
  return rep;
}

PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_power_law: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0)) throw std::invalid_argument("fit_power_law: x must be positive");
    if (!(std::abs(y[k]) >= 1e-14)) continue;
    lx.push_back(std::log(x[k]));
    ly.push_back(std::log(std::abs(y[k])));
  }
  const std::size_t n = lx.size();
  if (n < 2) throw std::invalid_argument("fit_power_law needs >= 2 non-negligible points");
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_power_law: x values must differ");
  PowerFit fit;
  fit.points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.ci_low = fit.ci_high = fit.slope;
  if (n > 2) {
    double sse = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double e = ly[k] - (fit.intercept + fit.slope * lx[k]);
      sse += e * e;
    }
    const double se = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
    const boost::math::students_t dist(static_cast<double>(n - 2));
    const double tq = boost::math::quantile(boost::math::complement(dist, 0.025));
    fit.ci_low = fit.slope - tq * se;
    fit.ci_high = fit.slope + tq * se;
  }
  return fit;
}

ProductionScaling production_scaling_fit(const std::vector<EntropyProductionReport>& reports) {
  if (reports.size() < 4)
    throw std::invalid_argument("production_scaling_fit needs >= 4 sweep points");
  std::vector<double> eps, mu1, mu3;
  for (const auto& r : reports) {
    eps.push_back(r.epsilon);
    mu1.push_back(r.mu1);
    mu3.push_back(r.mu3);
  }
  ProductionScaling out;
  const auto [lo, hi] = std::minmax_element(eps.begin(), eps.end());
  out.spans_decade = *hi >= 10.0 * *lo;
  if (!out.spans_decade) out.warnings.push_back("eps ladder spans less than one decade");
  out.mu1 = fit_power_law(eps, mu1);
  out.mu3 = fit_power_law(eps, mu3);
  return out;
}

std::vector<double> kruzkov_pairings(const Trajectory& traj, const FluxSpec& flux, double k,
                                     double rho, const std::vector<TestFunction>& family) {
  if (!(rho > 0.0)) throw std::invalid_argument("kruzkov_residual needs rho > 0");
  if (traj.size() < 2) throw std::invalid_argument("kruzkov_residual needs >= 2 samples");
  const GridSpec& grid = traj.grid();
  for (const auto& theta : family)
    if (!theta.supported_in(grid, traj.back().t))
      throw std::invalid_argument("test function support leaves the domain or (0, T)");

  double lo = k, hi = k;
  for (const auto& s : traj.samples()) {
    lo = std::min(lo, s.u.min());
    hi = std::max(hi, s.u.max());
  }
  // Resolve the regularized kink: panels of width rho / 4 at most.
  const double span = std::max(hi, 0.0) - std::min(lo, 0.0);
  const auto panels = std::max<std::size_t>(kDefaultEntropyPanels,
                                            static_cast<std::size_t>(std::ceil(span / (rho / 4.0))));
  const EntropyPair pair = make_entropy_pair(kruzkov_entropy(k, rho), flux, {lo, hi}, panels);

  std::vector<double> times;
  std::vector<std::vector<double>> values(family.size());
  std::vector<double> eta(grid.size());
  std::vector<Vec> q(grid.size());
  for (const auto& s : traj.samples()) {
    times.push_back(s.t);
    bool active = false;
    for (const auto& theta : family)
      active = active || bump_profile((s.t - theta.t0) / theta.t_radius) != 0.0;
    if (active) {
      for (std::size_t c = 0; c < s.u.size(); ++c) {
        eta[c] = pair.eta(s.u[c]);
        q[c] = pair.q(s.u[c]);
      }
    }
    for (std::size_t f = 0; f < family.size(); ++f) {
      const TestFunction& theta = family[f];
      double acc = 0.0;
      if (bump_profile((s.t - theta.t0) / theta.t_radius) != 0.0) {
        // Loop over the cells inside the spatial support only.
        std::array<int, kMaxDim> lo_i{0, 0}, hi_i{0, 0};
        for (int j = 0; j < grid.dim; ++j) {
          lo_i[j] = std::max(0, static_cast<int>(std::floor((theta.center[j] - theta.radius[j]) / grid.dx(j))));
          hi_i[j] = std::min(grid.n[j] - 1, static_cast<int>(std::ceil((theta.center[j] + theta.radius[j]) / grid.dx(j))));
        }
        for (int jj = lo_i[1]; jj <= hi_i[1]; ++jj)
          for (int ii = lo_i[0]; ii <= hi_i[0]; ++ii) {
            const std::size_t c = grid.index(ii, jj);
            const Vec x = grid.point(c);
            acc += -(eta[c] * theta.time_derivative(x, s.t) + dot(q[c], theta.gradient(x, s.t)));
          }
      }
      values[f].push_back(acc * grid.cell_volume());
    }
  }
  std::vector<double> out;
  for (const auto& v : values) out.push_back(time_integral(times, v));
  return out;
}

KruzkovResidual kruzkov_residual(const Trajectory& traj, const FluxSpec& flux, double k,
                                 double rho, const TestFunction& theta) {
  KruzkovResidual r;
  r.value = kruzkov_pairings(traj, flux, k, rho, {theta}).front();
  r.positive_part = std::max(r.value, 0.0);
  return r;
}

std::vector<TestFunction> test_function_lattice(const GridSpec& grid, double radius, double t0,
                                                double t_radius) {
  std::array<std::vector<double>, kMaxDim> centres;
  for (int j = 0; j < grid.dim; ++j) {
    if (!(2.0 * radius <= grid.length[j]))
      throw std::invalid_argument("test function lattice radius exceeds half the box");
    const int steps = static_cast<int>(std::floor((grid.length[j] - 2.0 * radius) / (0.5 * radius) + 1e-9));
    for (int s = 0; s <= steps; ++s)
      centres[j].push_back(std::min(radius + 0.5 * radius * s, grid.length[j] - radius));
  }
  if (grid.dim == 1) centres[1] = {0.0};
  std::vector<TestFunction> family;
  for (double cy : centres[1])
    for (double cx : centres[0])
      family.push_back(make_test_function(grid.dim, {cx, cy}, {radius, radius}, t0, t_radius));
  return family;
}

double kruzkov_positive_part(const Trajectory& traj, const FluxSpec& flux, double k, double rho,
                             const std::vector<TestFunction>& family) {
  if (family.empty()) throw std::invalid_argument("kruzkov_positive_part needs test functions");
  double best = 0.0;
  for (double v : kruzkov_pairings(traj, flux, k, rho, family)) best = std::max(best, v);
  return best;
}

YoungHistogram histogram_of(const std::vector<double>& samples, int bins) {
  if (samples.empty()) throw std::invalid_argument("histogram of an empty sample set");
  if (bins < 2) throw std::invalid_argument("histogram needs >= 2 bins");
  YoungHistogram h;
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  double lo = *mn, hi = *mx;
  if (!(hi > lo)) {
    const double pad = 0.5e-6 * std::max(1.0, std::abs(lo));
    lo -= pad;
    hi += pad;
  }
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b) h.edges[static_cast<std::size_t>(b)] = lo + (hi - lo) * b / bins;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double v : samples) {
    auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * bins);
    b = std::min(b, static_cast<std::size_t>(bins) - 1);
    ++h.counts[b];
  }
  h.pooled = samples.size();
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
  double var = 0.0;
  for (double v : samples) var += (v - mean) * (v - mean);
  h.score = var / static_cast<double>(samples.size());
  return h;
}

std::vector<double> young_window_samples(const Trajectory& traj, const YoungWindow& w) {
  if (w.half_cells < 0 || w.time_samples < 1) throw std::invalid_argument("young window is empty");
  const GridSpec& g = traj.grid();
  std::array<int, kMaxDim> lo{0, 0}, hi{0, 0};
  for (int j = 0; j < g.dim; ++j) {
    if (w.center[j] < 0.0 || w.center[j] >= g.length[j])
      throw std::invalid_argument("young window centre lies outside the domain");
    const int i = std::min(static_cast<int>(w.center[j] / g.dx(j)), g.n[j] - 1);
    lo[j] = i - w.half_cells;
    hi[j] = i + w.half_cells;
    if (lo[j] < 0 || hi[j] >= g.n[j])
      throw std::invalid_argument("young window does not fit inside the domain");
  }
  // Time samples nearest t_center.
  std::size_t nearest = 0;
  for (std::size_t k = 1; k < traj.size(); ++k)
    if (std::abs(traj.samples()[k].t - w.t_center) < std::abs(traj.samples()[nearest].t - w.t_center))
      nearest = k;
  const auto ts = static_cast<std::size_t>(w.time_samples);
  if (ts > traj.size()) throw std::invalid_argument("young window needs more time samples than stored");
  std::size_t start = nearest >= (ts - 1) / 2 ? nearest - (ts - 1) / 2 : 0;
  start = std::min(start, traj.size() - ts);

  std::vector<double> out;
  for (std::size_t k = start; k < start + ts; ++k) {
    const Field& u = traj.samples()[k].u;
    for (int j = lo[1]; j <= hi[1]; ++j)
      for (int i = lo[0]; i <= hi[0]; ++i) out.push_back(u.at(i, j));
  }
  return out;
}

YoungHistogram young_histogram(const std::vector<const Trajectory*>& runs,
                               const YoungWindow& window, int bins) {
  std::vector<std::vector<double>> per_run;
  for (const Trajectory* t : runs) {
    if (t == nullptr || t->empty()) throw std::invalid_argument("young_histogram: empty run");
    per_run.push_back(young_window_samples(*t, window));
  }
  return young_histogram(per_run, bins);
}

YoungHistogram young_histogram(const std::vector<std::vector<double>>& per_run, int bins) {
  if (per_run.size() < 3) throw std::invalid_argument("young_histogram needs >= 3 runs");
  const std::size_t first_pooled = per_run.size() / 2;  // finest ceil(n/2) runs
  std::vector<double> pooled;
  for (std::size_t k = first_pooled; k < per_run.size(); ++k)
    pooled.insert(pooled.end(), per_run[k].begin(), per_run[k].end());
  YoungHistogram h = histogram_of(pooled, bins);
  for (const auto& s : per_run) {
    const YoungHistogram one = histogram_of(s, 2);
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    h.run_mean.push_back(mean);
    h.run_variance.push_back(one.score);
  }
  return h;
}

std::vector<double> initial_trace_check(const Trajectory& traj, const Field& u0,
                                        const std::vector<double>& t_small) {
  if (traj.size() < 2) throw std::invalid_argument("initial_trace_check needs >= 2 samples");
  if (!(u0.grid() == traj.grid())) throw std::invalid_argument("initial_trace_check: grid mismatch");
  std::vector<double> out;
  for (double t : t_small) {
    if (!(t > 0.0) || t > traj.back().t * (1.0 + 1e-12))
      throw std::invalid_argument("initial_trace_check: t outside (0, T]");
    const double v = spacetime_integral(
        traj, [&](double, const Field& u) {
          Field d = u - u0;
          for (double& x : d.values()) x = std::abs(x);
          return d;
        },
        t);
    out.push_back(v / t);
  }
  return out;
}

}  // namespace ddl
