// Named problem presets and their construction from configuration.
#ifndef DDL_PROBLEM_HPP_
#define DDL_PROBLEM_HPP_

#include <set>
#include <string>
#include <vector>

#include "ddl/config.hpp"
#include "ddl/snapshot_io.hpp"
#include "ddl/solver.hpp"

namespace ddl {

struct Problem {
  std::string preset;
  int dim = 1;
  double length = 1.0;
  double t_end = 1.0;
  FluxSpec flux;
  DiffusionSpec diffusion;
  InitialData data;
  /// Growth exponent of f' used for regime classification.
  double m = 0.0;
  bool has_h3 = false;

  // Single-run solver settings.
  double epsilon = 0.0;
  double delta = 0.0;
  int n = 256;
  double cfl_safety = 0.5;
  int sample_count = 10;

  /// Every problem.* and solver.* key after presets and overrides, so that a
  /// manifest echo can rebuild the same problem.
  ProblemEcho echo;

  GridSpec grid(int n_cells) const;
  GridSpec grid() const { return grid(n); }
  SolveParams params(double eps, double dlt) const;
  SolveParams params() const { return params(epsilon, delta); }
};

std::vector<std::string> preset_names();

/// Default key/value set of a preset (all sections). Throws ConfigError for
/// unknown names.
Config preset_config(const std::string& name);

/// Keys accepted in configuration files.
const std::set<std::string>& known_config_keys();

/// Applies `problem.preset` (default "heat") and the overrides in `cfg`.
Problem make_problem(const Config& cfg);

/// Preset defaults merged with `cfg` (cfg wins).
Config resolve_config(const Config& cfg);

}  // namespace ddl

#endif  // DDL_PROBLEM_HPP_
