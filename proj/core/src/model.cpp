#include "ddl/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

namespace ddl {

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (int j = 0; j < kMaxDim; ++j) s += a[j] * b[j];
  return s;
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

namespace {

void require_dim(int dim) {
  if (dim < 1 || dim > kMaxDim)
    throw std::invalid_argument("dimension must be 1 or 2, got " + std::to_string(dim));
}

// Applies a scalar function along the first `dim` axes.
std::function<Vec(double)> replicate(int dim, std::function<double(double)> g) {
  return [dim, g = std::move(g)](double u) {
    Vec out{};
    const double v = g(u);
    for (int j = 0; j < dim; ++j) out[j] = v;
    return out;
  };
}

FluxSpec make_scalar_flux(std::string name, int dim, std::function<double(double)> f,
                          std::function<double(double)> fp, double m, double c) {
  require_dim(dim);
  FluxSpec spec;
  spec.name = std::move(name);
  spec.dim = dim;
  spec.eval = replicate(dim, std::move(f));
  spec.deriv = replicate(dim, std::move(fp));
  spec.growth_exponent = m;
  // |f'(u)| is the Euclidean norm, so replicated axes scale the constants.
  const double scale = std::sqrt(static_cast<double>(dim));
  spec.c1 = c * scale;
  spec.c1p = c * scale;
  return spec;
}

}  // namespace

FluxSpec burgers_flux(int dim) {
  return make_scalar_flux(
      "burgers", dim, [](double u) { return 0.5 * u * u; }, [](double u) { return u; },
      2.0, 1.0);
}

FluxSpec linear_flux(double speed, int dim) {
  auto spec = make_scalar_flux(
      "linear", dim, [speed](double u) { return speed * u; },
      [speed](double) { return speed; }, 1.0, std::max(std::abs(speed), 1e-300));
  spec.c1p = 0.0;
  return spec;
}

FluxSpec bounded_flux(int dim) {
  auto spec = make_scalar_flux(
      "bounded", dim, [](double u) { return std::sqrt(1.0 + u * u) - 1.0; },
      [](double u) { return u / std::sqrt(1.0 + u * u); }, 1.0, 1.0);
  spec.c1p = 0.0;
  return spec;
}

FluxSpec zero_flux(int dim) {
  auto spec = make_scalar_flux(
      "zero", dim, [](double) { return 0.0; }, [](double) { return 0.0; }, 0.0, 1.0);
  spec.c1p = 0.0;
  return spec;
}

namespace {

struct HermiteTable {
  std::vector<double> u, f, fp;

  std::size_t segment(double x) const {
    auto it = std::upper_bound(u.begin(), u.end(), x);
    std::size_t i = static_cast<std::size_t>(std::distance(u.begin(), it));
    if (i == 0) return 0;
    return std::min(i - 1, u.size() - 2);
  }

  double value(double x) const {
    if (x <= u.front()) return f.front() + fp.front() * (x - u.front());
    if (x >= u.back()) return f.back() + fp.back() * (x - u.back());
    const std::size_t i = segment(x);
    const double h = u[i + 1] - u[i];
    const double s = (x - u[i]) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    return h00 * f[i] + h10 * h * fp[i] + h01 * f[i + 1] + h11 * h * fp[i + 1];
  }

  double slope(double x) const {
    if (x <= u.front()) return fp.front();
    if (x >= u.back()) return fp.back();
    const std::size_t i = segment(x);
    const double h = u[i + 1] - u[i];
    const double s = (x - u[i]) / h;
    const double d00 = 6 * s * s - 6 * s;
    const double d10 = 3 * s * s - 4 * s + 1;
    const double d01 = -d00;
    const double d11 = 3 * s * s - 2 * s;
    return (d00 * f[i] + d01 * f[i + 1]) / h + d10 * fp[i] + d11 * fp[i + 1];
  }
};

}  // namespace

FluxSpec tabulated_flux(std::vector<double> u, std::vector<double> f,
                        std::vector<double> fp, int dim) {
  require_dim(dim);
  if (u.size() < 2 || u.size() != f.size() || u.size() != fp.size())
    throw std::invalid_argument("tabulated flux needs >= 2 rows of equal length");
  for (std::size_t i = 1; i < u.size(); ++i)
    if (!(u[i] > u[i - 1]))
      throw std::invalid_argument("tabulated flux: u column must be strictly increasing");

  auto table = std::make_shared<const HermiteTable>(
      HermiteTable{std::move(u), std::move(f), std::move(fp)});

  // Growth data: m = 1 with C1 = max |f'| on the table (linear extrapolation
  // keeps f' bounded outside it).
  double max_slope = 0.0;
  for (double v : table->fp) max_slope = std::max(max_slope, std::abs(v));

  FluxSpec spec;
  spec.name = "tabulated";
  spec.dim = dim;
  spec.eval = replicate(dim, [table](double x) { return table->value(x); });
  spec.deriv = replicate(dim, [table](double x) { return table->slope(x); });
  spec.growth_exponent = 1.0;
  spec.c1 = std::sqrt(static_cast<double>(dim)) * std::max(max_slope, 1e-300);
  spec.c1p = 0.0;
  return spec;
}

FluxSpec load_flux_csv(const std::filesystem::path& path, int dim) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open flux table " + path.string());
  std::vector<double> u, f, fp;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double a, b, c;
    if (!(row >> a >> b >> c)) continue;  // header or malformed row
    u.push_back(a);
    f.push_back(b);
    fp.push_back(c);
  }
  return tabulated_flux(std::move(u), std::move(f), std::move(fp), dim);
}

FluxSpec flux_preset(std::string_view key, int dim, double speed) {
  if (key == "burgers") return burgers_flux(dim);
  if (key == "linear") return linear_flux(speed, dim);
  if (key == "bounded") return bounded_flux(dim);
  if (key == "zero") return zero_flux(dim);
  if (key.starts_with("csv:")) return load_flux_csv(std::string(key.substr(4)), dim);
  throw std::invalid_argument("unknown flux preset '" + std::string(key) + "'");
}

DiffusionSpec linear_diffusion(int dim) {
  require_dim(dim);
  DiffusionSpec d;
  d.name = "linear";
  d.dim = dim;
  d.eval = [](const Vec& l) { return l; };
  d.jacobian = [dim](const Vec&) {
    Mat m{};
    for (int j = 0; j < dim; ++j) m[j][j] = 1.0;
    return m;
  };
  d.r = 1.0;
  d.c2 = d.c3 = 1.0;
  d.claims_h3 = true;
  d.h3_constant = 1.0;
  d.spectral_bound = [](double) { return 1.0; };
  return d;
}

DiffusionSpec power_diffusion(double r, int dim) {
  require_dim(dim);
  if (!(r >= 1.0)) throw std::invalid_argument("power diffusion needs r >= 1");
  if (r == 1.0) {
    auto d = linear_diffusion(dim);
    d.name = "power";
    return d;
  }
  DiffusionSpec d;
  d.name = "power";
  d.dim = dim;
  d.eval = [r](const Vec& l) {
    const double n = norm(l);
    const double s = n > 0.0 ? std::pow(n, r - 1.0) : 0.0;
    return Vec{s * l[0], s * l[1]};
  };
  // Db = |l|^(r-1) (I + (r-1) e e^T) with e = l / |l|; Db(0) = 0 for r > 1.
  d.jacobian = [r, dim](const Vec& l) {
    Mat m{};
    const double n = norm(l);
    if (n == 0.0) return m;
    const double s = std::pow(n, r - 1.0);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        m[i][j] = s * ((i == j ? 1.0 : 0.0) + (r - 1.0) * l[i] * l[j] / (n * n));
    return m;
  };
  d.r = r;
  d.c2 = d.c3 = 1.0;
  d.claims_h3 = false;
  d.h3_constant = 1.0;
  d.spectral_bound = [r](double g) { return r * std::pow(std::max(g, 0.0), r - 1.0); };
  return d;
}

DiffusionSpec diffusion_preset(std::string_view key, double r, int dim) {
  if (key == "linear") return linear_diffusion(dim);
  if (key == "power") return power_diffusion(r, dim);
  throw std::invalid_argument("unknown diffusion preset '" + std::string(key) + "'");
}

std::string_view to_string(EntropyKind kind) {
  switch (kind) {
    case EntropyKind::quadratic: return "quadratic";
    case EntropyKind::power: return "power";
    case EntropyKind::kruzkov: return "kruzkov";
    case EntropyKind::custom: return "custom";
  }
  return "custom";
}

EntropyFunction quadratic_entropy() {
  EntropyFunction e;
  e.kind = EntropyKind::quadratic;
  e.eta = [](double u) { return 0.5 * u * u; };
  e.eta_prime = [](double u) { return u; };
  e.eta_second = [](double) { return 1.0; };
  e.eta_third = [](double) { return 0.0; };
  e.alpha = 1.0;
  return e;
}

EntropyFunction power_entropy(double alpha) {
  if (!(alpha >= 1.0)) throw std::invalid_argument("power entropy needs alpha >= 1");
  EntropyFunction e;
  e.kind = EntropyKind::power;
  e.alpha = alpha;
  e.eta = [alpha](double u) { return std::pow(std::abs(u), alpha + 1.0) / (alpha + 1.0); };
  e.eta_prime = [alpha](double u) {
    return std::copysign(std::pow(std::abs(u), alpha), u);
  };
  e.eta_second = [alpha](double u) {
    return alpha == 1.0 ? 1.0 : alpha * std::pow(std::abs(u), alpha - 1.0);
  };
  e.eta_third = [alpha](double u) {
    if (alpha == 1.0 || u == 0.0) return 0.0;
    return std::copysign(alpha * (alpha - 1.0) * std::pow(std::abs(u), alpha - 2.0), u);
  };
  return e;
}

EntropyFunction kruzkov_entropy(double k, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("kruzkov regularization needs rho > 0");
  EntropyFunction e;
  e.kind = EntropyKind::kruzkov;
  e.k = k;
  e.rho = rho;
  e.eta = [k, rho](double u) {
    const double s = u - k;
    return std::hypot(s, rho) - rho;
  };
  e.eta_prime = [k, rho](double u) {
    const double s = u - k;
    return s / std::hypot(s, rho);
  };
  e.eta_second = [k, rho](double u) {
    const double s = u - k;
    const double h = std::hypot(s, rho);
    return rho * rho / (h * h * h);
  };
  e.eta_third = [k, rho](double u) {
    const double s = u - k;
    const double h2 = s * s + rho * rho;
    return -3.0 * rho * rho * s / (h2 * h2 * std::sqrt(h2));
  };
  return e;
}

double EntropyPair::eta_third(double u) const {
  if (fn.eta_third) return fn.eta_third(u);
  const double h = 1e-4 * std::max(1.0, std::abs(u));
  return (fn.eta_second(u + h) - fn.eta_second(u - h)) / (2.0 * h);
}

NonConvexEntropy::NonConvexEntropy(double witness, double value)
    : std::invalid_argument("entropy is not convex: eta''(" + std::to_string(witness) +
                            ") = " + std::to_string(value)),
      witness_(witness) {}

namespace {

// Cumulative integral of eta' f_j' tabulated on nodes that include u = 0.
struct EntropyFluxTable {
  int dim = 1;
  std::vector<double> nodes;
  std::vector<Vec> values;  // q at nodes
  std::vector<Vec> slopes;  // eta' f' at nodes
  std::function<Vec(double)> integrand;

  Vec simpson(double a, double b, std::size_t panels) const {
    Vec acc{};
    if (a == b) return acc;
    const double h = (b - a) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
      const double x0 = a + h * static_cast<double>(p);
      const double x1 = (p + 1 == panels) ? b : x0 + h;
      const Vec g0 = integrand(x0), gm = integrand(0.5 * (x0 + x1)), g1 = integrand(x1);
      for (int j = 0; j < dim; ++j) acc[j] += (x1 - x0) / 6.0 * (g0[j] + 4.0 * gm[j] + g1[j]);
    }
    return acc;
  }

  Vec operator()(double u) const {
    const double lo = nodes.front(), hi = nodes.back();
    if (u < lo || u > hi) {
      const double end = u < lo ? lo : hi;
      const Vec base = u < lo ? values.front() : values.back();
      const double h = (hi - lo) / static_cast<double>(nodes.size() - 1);
      const auto panels = static_cast<std::size_t>(std::ceil(std::abs(u - end) / h)) + 1;
      Vec tail = simpson(end, u, panels);
      for (int j = 0; j < dim; ++j) tail[j] += base[j];
      return tail;
    }
    auto it = std::upper_bound(nodes.begin(), nodes.end(), u);
    std::size_t i = static_cast<std::size_t>(std::distance(nodes.begin(), it));
    i = (i == 0) ? 0 : std::min(i - 1, nodes.size() - 2);
    const double h = nodes[i + 1] - nodes[i];
    const double s = (u - nodes[i]) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    Vec out{};
    for (int j = 0; j < dim; ++j)
      out[j] = h00 * values[i][j] + h10 * h * slopes[i][j] + h01 * values[i + 1][j] +
               h11 * h * slopes[i + 1][j];
    return out;
  }
};

}  // namespace

EntropyPair make_entropy_pair(const EntropyFunction& eta, const FluxSpec& flux,
                              Interval u_range, std::size_t n_quad) {
  if (n_quad < 2) throw std::invalid_argument("make_entropy_pair: n_quad must be >= 2");
  if (!(u_range.hi > u_range.lo))
    throw std::invalid_argument("make_entropy_pair: empty u_range");

  const double lo = std::min(u_range.lo, 0.0);
  const double hi = std::max(u_range.hi, 0.0);

  // Panels split proportionally so that 0 is a node.
  std::vector<double> nodes;
  auto push_side = [&](double a, double b, std::size_t panels) {
    for (std::size_t p = 0; p < panels; ++p)
      nodes.push_back(a + (b - a) * static_cast<double>(p) / static_cast<double>(panels));
  };
  if (lo < 0.0 && hi > 0.0) {
    auto left = static_cast<std::size_t>(std::llround(static_cast<double>(n_quad) * (-lo) / (hi - lo)));
    left = std::clamp<std::size_t>(left, 1, n_quad - 1);
    push_side(lo, 0.0, left);
    push_side(0.0, hi, n_quad - left);
  } else {
    push_side(lo, hi, n_quad);
  }
  nodes.push_back(hi);

  for (double u : nodes) {
    const double c = eta.eta_second(u);
    if (c < -1e-12) throw NonConvexEntropy(u, c);
  }

  auto table = std::make_shared<EntropyFluxTable>();
  table->dim = flux.dim;
  table->nodes = nodes;
  auto eta_prime = eta.eta_prime;
  auto fprime = flux.deriv;
  table->integrand = [eta_prime, fprime](double v) {
    const double e = eta_prime(v);
    Vec g = fprime(v);
    for (double& x : g) x *= e;
    return g;
  };

  const std::size_t n = nodes.size();
  table->values.assign(n, Vec{});
  table->slopes.resize(n);
  for (std::size_t i = 0; i < n; ++i) table->slopes[i] = table->integrand(nodes[i]);
  const auto zero = static_cast<std::size_t>(
      std::distance(nodes.begin(), std::find(nodes.begin(), nodes.end(), 0.0)));
  for (std::size_t i = zero + 1; i < n; ++i) {
    const Vec step = table->simpson(nodes[i - 1], nodes[i], 1);
    for (int j = 0; j < flux.dim; ++j) table->values[i][j] = table->values[i - 1][j] + step[j];
  }
  for (std::size_t i = zero; i-- > 0;) {
    const Vec step = table->simpson(nodes[i], nodes[i + 1], 1);
    for (int j = 0; j < flux.dim; ++j) table->values[i][j] = table->values[i + 1][j] - step[j];
  }

  EntropyPair pair;
  pair.fn = eta;
  pair.dim = flux.dim;
  pair.u_range = u_range;
  pair.n_quad = n_quad;
  std::shared_ptr<const EntropyFluxTable> frozen = table;
  pair.q = [frozen](double u) { return (*frozen)(u); };
  return pair;
}

GrowthReport check_growth_H1(const FluxSpec& flux, Interval u_range, std::size_t n_samples) {
  if (n_samples < 16) throw std::invalid_argument("check_growth_H1 needs >= 16 samples");
  GrowthReport report;
  report.holds = true;
  report.worst_ratio = 0.0;
  report.witness = u_range.lo;
  const double m = flux.growth_exponent;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double u = u_range.lo + u_range.length() * static_cast<double>(i) /
                                      static_cast<double>(n_samples - 1);
    const double slope = norm(flux.deriv(u));
    double bound;
    if (u == 0.0 && m < 1.0)
      bound = std::numeric_limits<double>::infinity();
    else
      bound = flux.c1 + flux.c1p * std::pow(std::abs(u), m - 1.0);
    const double ratio = std::isinf(bound) ? 0.0 : slope / bound;
    if (ratio > report.worst_ratio) {
      report.worst_ratio = ratio;
      report.witness = u;
    }
    if (slope > bound) report.holds = false;
  }
  return report;
}

CoercivityReport check_coercivity_H2(const DiffusionSpec& diff,
                                     std::span<const Vec> lambda_samples) {
  CoercivityReport report;
  report.holds = true;
  report.worst_lower = std::numeric_limits<double>::infinity();
  report.worst_upper = 0.0;
  for (const Vec& l : lambda_samples) {
    const double n = norm(l);
    const double work = dot(l, diff.eval(l));
    if (work < 0.0) {
      report.holds = false;
      report.anti_dissipative = true;
      report.witness = l;
      return report;
    }
    if (n == 0.0) continue;
    const double ratio = work / std::pow(n, diff.r + 1.0);
    if (ratio < report.worst_lower) {
      report.worst_lower = ratio;
      if (ratio < diff.c2) report.witness = l;
    }
    if (ratio > report.worst_upper) {
      report.worst_upper = ratio;
      if (ratio > diff.c3) report.witness = l;
    }
  }
  if (std::isinf(report.worst_lower)) report.worst_lower = diff.c2;
  const double tol = 1e-12;
  report.holds = report.worst_lower >= diff.c2 * (1.0 - tol) &&
                 report.worst_upper <= diff.c3 * (1.0 + tol);
  return report;
}

H3Report check_H3(const DiffusionSpec& diff, std::span<const Vec> lambda_samples,
                  std::span<const Vec> probe_vectors) {
  H3Report report;
  report.min_eigen_proxy = std::numeric_limits<double>::infinity();
  for (const Vec& l : lambda_samples) {
    const Mat db = diff.jacobian(l);
    for (const Vec& v : probe_vectors) {
      double quad = 0.0;
      for (int i = 0; i < kMaxDim; ++i)
        for (int j = 0; j < kMaxDim; ++j) quad += v[i] * 0.5 * (db[i][j] + db[j][i]) * v[j];
      if (quad < report.min_eigen_proxy) {
        report.min_eigen_proxy = quad;
        report.witness = l;
      }
    }
  }
  report.holds = report.min_eigen_proxy >= diff.h3_constant * (1.0 - 1e-12);
  return report;
}

bool flux_is_convex(const FluxSpec& flux, Interval range, int axis, std::size_t n_samples) {
  if (range.hi <= range.lo) return true;
  const double h = range.length() / static_cast<double>(n_samples);
  double prev = flux.deriv(range.lo)[axis];
  for (std::size_t i = 1; i <= n_samples; ++i) {
    const double next = flux.deriv(range.lo + h * static_cast<double>(i))[axis];
    if (next < prev - 1e-12 * std::max(1.0, std::abs(prev))) return false;
    prev = next;
  }
  return true;
}

}  // namespace ddl
