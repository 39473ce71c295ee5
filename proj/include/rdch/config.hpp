#pragma once

// Run configuration as flat "section.key = value" text. Every key may be
// overridden from the environment as RDCH_<SECTION>_<KEY> (upper case).

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rdch/grid.hpp"
#include "rdch/model.hpp"
#include "rdch/stepper.hpp"

namespace rdch {

enum class InitialKind { Constant, Cosine, Tanh, Noise };

struct InitialCondition {
  InitialKind kind = InitialKind::Cosine;
  double m = 0.5;       // constant / cosine mean
  double a = 0.01;      // cosine amplitude
  int j = 1;            // cosine wave number
  double lo = 0.1;      // tanh / noise lower value
  double hi = 0.6;      // tanh / noise upper value
  double x0 = 0.5;      // tanh centre, as a fraction of L
  double width = 0.05;  // tanh width, as a fraction of L
  int smoothing = 8;    // noise: passes of a (1,2,1)/4 filter
};

struct RunConfig {
  double length = 1.0;
  std::size_t npoints = 256;
  PotentialSpec potential;
  MobilityKind mobility = MobilityKind::Polynomial;
  double gamma = 1e-3;
  double sigma = 1e-4;
  double eps = kDefaultEps;
  bool regularize = true;

  SchemeMode mode = SchemeMode::Explicit;
  double dt0 = 0.0;      // 0 selects the default policy
  double dt_min = 0.0;
  double dt_max = 0.0;
  double energy_slack = -1.0;
  double fp_tol = 1e-12;
  int fp_maxiter = 200;
  double stabilization = -1.0;
  double semi_factor = 100.0;

  InitialCondition init;
  double t_end = 1.0;
  long max_steps = 0;  // 0: unlimited

  std::filesystem::path output_dir;
  long snapshot_stride = 0;  // 0: no snapshots
  long diagnostics_stride = 10;
  std::uint64_t seed = 0;

  double tol_flux = 1e-8;
  double tol_energy = 1e-12;
  int window = 50;
  bool steady_stop = false;

  Grid1D grid() const { return Grid1D(length, npoints); }
  Model model() const;
  /// Scheme with unset step bounds filled from default_scheme.
  SchemeConfig scheme() const;
  Field initial_field() const;

  /// Throws ConfigError naming the first violated constraint.
  void validate() const;

  /// Assign one key from its textual value; throws ConfigError on an unknown
  /// key or malformed value.
  void set(std::string_view key, std::string_view value);
  /// Canonical text, one "key = value" line per key in a fixed order.
  std::string to_text() const;
  /// FNV-1a of the canonical text without the output and end-time keys, so a
  /// run can be resumed with a different horizon or directory.
  std::uint64_t physics_hash() const;

  static const std::vector<std::string>& keys();
};

/// Parse "key = value" lines; '#' starts a comment.
RunConfig parse_config(std::string_view text);

/// Read a file, then apply environment overrides.
RunConfig load_config(const std::filesystem::path& path, bool use_environment = true);

/// Apply RDCH_* variables from the environment.
void apply_environment(RunConfig& cfg);

/// Name of the environment variable that overrides `key`.
std::string environment_name(std::string_view key);

std::string to_string(SchemeMode mode);
std::string to_string(InitialKind kind);

}  // namespace rdch
