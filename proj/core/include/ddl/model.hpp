// Continuous-problem definitions: fluxes, diffusions, entropy pairs and
// sampling-based checks of the structural hypotheses on them.
#ifndef DDL_MODEL_HPP_
#define DDL_MODEL_HPP_

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ddl {

inline constexpr int kMaxDim = 2;

/// Point of R^d with d <= kMaxDim; unused trailing components stay zero.
using Vec = std::array<double, kMaxDim>;
using Mat = std::array<Vec, kMaxDim>;

double dot(const Vec& a, const Vec& b);
double norm(const Vec& a);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  bool contains(double u) const { return u >= lo && u <= hi; }
};

/// Flux f: R -> R^d together with the growth data (m, C1, C1') of the
/// bound |f'(u)| <= C1 + C1' |u|^(m-1).
struct FluxSpec {
  std::string name;
  int dim = 1;
  std::function<Vec(double)> eval;
  std::function<Vec(double)> deriv;
  double growth_exponent = 0.0;
  double c1 = 1.0;
  double c1p = 1.0;
};

FluxSpec burgers_flux(int dim = 1);
FluxSpec linear_flux(double speed, int dim = 1);
/// f(u) = sqrt(1 + u^2) - 1 per axis; |f'| < 1 so m = 1.
FluxSpec bounded_flux(int dim = 1);
FluxSpec zero_flux(int dim = 1);

/// Cubic Hermite interpolant through tabulated (u, f, f') triples. The same
/// scalar flux is applied along every axis. Outside the table the end
/// tangents are used for linear extrapolation.
FluxSpec tabulated_flux(std::vector<double> u, std::vector<double> f,
                        std::vector<double> fp, int dim = 1);

/// Reads a CSV with header `u,f,fp` (any header line is skipped).
FluxSpec load_flux_csv(const std::filesystem::path& path, int dim = 1);

/// Looks up `burgers`, `linear`, `bounded`, `zero` or `csv:<path>`.
FluxSpec flux_preset(std::string_view key, int dim = 1, double speed = 1.0);

/// Diffusion b: R^d -> R^d with the coercivity data of
/// C2 |l|^(r+1) <= l.b(l) <= C3 |l|^(r+1).
struct DiffusionSpec {
  std::string name;
  int dim = 1;
  std::function<Vec(const Vec&)> eval;
  std::function<Mat(const Vec&)> jacobian;
  double r = 1.0;
  double c2 = 1.0;
  double c3 = 1.0;
  bool claims_h3 = false;
  /// Lower bound asserted for v^T sym(Db) v when claims_h3 is set.
  double h3_constant = 1.0;
  /// Upper bound of the spectral radius of Db over |l| <= g.
  std::function<double(double)> spectral_bound;
};

/// b(l) = l.
DiffusionSpec linear_diffusion(int dim = 1);
/// b(l) = |l|^(r-1) l with r >= 1; C2 = C3 = 1.
DiffusionSpec power_diffusion(double r, int dim = 1);
/// `linear` or `power` (the latter takes r).
DiffusionSpec diffusion_preset(std::string_view key, double r, int dim = 1);

enum class EntropyKind { quadratic, power, kruzkov, custom };

std::string_view to_string(EntropyKind kind);

/// Scalar entropy eta with closed-form derivatives, before its flux is built.
struct EntropyFunction {
  EntropyKind kind = EntropyKind::custom;
  std::function<double(double)> eta;
  std::function<double(double)> eta_prime;
  std::function<double(double)> eta_second;
  /// May be empty; a centred difference of eta_second is used then.
  std::function<double(double)> eta_third;
  double alpha = 0.0;  // power entropies
  double k = 0.0;      // kruzkov
  double rho = 0.0;    // kruzkov
};

/// eta = u^2 / 2.
EntropyFunction quadratic_entropy();
/// eta = |u|^(alpha+1) / (alpha+1), alpha >= 1.
EntropyFunction power_entropy(double alpha);
/// eta = sqrt((u-k)^2 + rho^2) - rho, a smooth convex stand-in for |u-k|.
EntropyFunction kruzkov_entropy(double k, double rho);

/// Entropy with its compatible flux q_j' = eta' f_j', anchored at q(0) = 0.
struct EntropyPair {
  EntropyFunction fn;
  std::function<Vec(double)> q;
  int dim = 1;
  Interval u_range;
  std::size_t n_quad = 0;

  EntropyKind kind() const { return fn.kind; }
  double eta(double u) const { return fn.eta(u); }
  double eta_prime(double u) const { return fn.eta_prime(u); }
  double eta_second(double u) const { return fn.eta_second(u); }
  double eta_third(double u) const;
};

class NonConvexEntropy : public std::invalid_argument {
 public:
  NonConvexEntropy(double witness, double value);
  double witness() const { return witness_; }

 private:
  double witness_;
};

inline constexpr std::size_t kDefaultEntropyPanels = 512;

/// Builds q by composite Simpson quadrature of eta' f' on n_quad panels
/// spanning u_range extended to contain 0. Values between panel nodes come
/// from the cubic Hermite interpolant of the cumulative integral, which uses
/// the exact slope eta' f' at the nodes.
EntropyPair make_entropy_pair(const EntropyFunction& eta, const FluxSpec& flux,
                              Interval u_range,
                              std::size_t n_quad = kDefaultEntropyPanels);

struct GrowthReport {
  bool holds = false;
  double worst_ratio = 0.0;
  double witness = 0.0;
};

GrowthReport check_growth_H1(const FluxSpec& flux, Interval u_range,
                             std::size_t n_samples);

struct CoercivityReport {
  bool holds = false;
  bool anti_dissipative = false;
  double worst_lower = 0.0;  // min of l.b(l) / |l|^(r+1)
  double worst_upper = 0.0;  // max of the same ratio
  Vec witness{};
};

CoercivityReport check_coercivity_H2(const DiffusionSpec& diff,
                                     std::span<const Vec> lambda_samples);

struct H3Report {
  bool holds = false;
  double min_eigen_proxy = 0.0;
  Vec witness{};
};

H3Report check_H3(const DiffusionSpec& diff, std::span<const Vec> lambda_samples,
                  std::span<const Vec> probe_vectors);

/// Convexity of the flux on [lo, hi] via sampled second differences of f'.
bool flux_is_convex(const FluxSpec& flux, Interval range, int axis = 0,
                    std::size_t n_samples = 256);

}  // namespace ddl

#endif  // DDL_MODEL_HPP_
