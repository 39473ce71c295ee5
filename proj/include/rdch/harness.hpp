#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdch/config.hpp"
#include "rdch/diagnostics.hpp"
#include "rdch/state.hpp"
#include "rdch/stepper.hpp"

namespace rdch {

enum class SteadyStatus { Steady, Inconclusive };
enum class SteadyClass { Constant, Aggregate };

struct SteadyReport {
  SteadyStatus status = SteadyStatus::Inconclusive;
  SteadyClass kind = SteadyClass::Constant;
  double spread = 0.0;  // max n - min n
  int plateaus = 0;
  /// Mean 10%-90% rise distance over all interfaces, levels taken between min
  /// and max of n; 0 when there is no interface.
  double interface_width = 0.0;
  int interfaces = 0;
};

std::string to_string(SteadyStatus s);
std::string to_string(SteadyClass c);

/// Classify the profile alone: Constant when the spread is below 10 tol_flux,
/// else Aggregate with plateau and interface statistics.
SteadyReport classify_profile(const Field& n, double tol_flux);

/// Steady when the last `window` records all have flux_l2 < tol_flux and the
/// energy moved by less than tol_energy |E| across them.
SteadyReport detect_steady_state(std::span<const DiagnosticsRecord> history, const Field& n,
                                 double tol_flux, double tol_energy, int window);

struct RunResult {
  State final_state;
  std::vector<DiagnosticsRecord> records{};  // as written to the CSV
  long accepted = 0;
  long rejected = 0;
  double initial_mass = 0.0;
  double initial_energy = 0.0;
  double max_mass_deviation = 0.0;   // max |mass - M| over accepted steps
  double max_energy_increase = 0.0;  // largest accepted per-step increase
  double energy_slack = 0.0;
  double max_lower_violation = 0.0;  // max(0, -min n) over the trajectory
  double max_upper_violation = 0.0;  // max(0, max n - 1)
  double runtime_s = 0.0;
  bool stopped_steady = false;
  bool checkpointed = false;
  SteadyReport steady{};
  /// Entropy-bound sides at the end, when tracking was requested.
  double entropy_lhs = 0.0;
  double entropy_rhs = 0.0;
};

struct RunOptions {
  bool track_entropy = false;
  /// Stop after this many accepted steps and write `checkpoint_path`.
  std::optional<long> checkpoint_after;
  std::filesystem::path checkpoint_path;
  /// Called after each accepted step.
  std::function<void(const Stepper&, const Stepper::Outcome&)> on_step;
};

/// Validates the configuration, integrates to t_end (or max_steps, or a
/// detected steady state when steady.stop is set) and writes
/// output.dir/diagnostics.csv plus snap_<step>.dat files when output.dir is set.
RunResult run(const RunConfig& cfg, const RunOptions& opts = {});

/// Continue a run from a checkpoint written by run(); appends to the same CSV.
/// Throws CheckpointError on version, configuration or checksum mismatch.
RunResult restore(const RunConfig& cfg, const std::filesystem::path& checkpoint,
                  const RunOptions& opts = {});

struct Checkpoint {
  std::uint64_t config_hash = 0;
  State state;
  ControllerState controller;
  double energy_slack = 0.0;
  long accepted = 0;
  long rejected = 0;
  std::vector<DiagnosticsRecord> window;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& cp);
Checkpoint read_checkpoint(const std::filesystem::path& path);

struct SweepEntry {
  double param = 0.0;
  double error_l2 = 0.0;
  double runtime_s = 0.0;
  long accepted = 0;
  long rejected = 0;
  double lower_violation = 0.0;
  double upper_violation = 0.0;
};

struct SweepReport {
  std::string parameter;
  double reference_param = 0.0;
  double common_dt = 0.0;
  std::vector<SweepEntry> entries;
  /// error[i+1] / error[i]
  std::vector<double> ratios;
  bool strictly_decreasing = false;
  /// Bound violations (max of lower and upper) strictly decrease along the list.
  bool violations_decreasing = false;
};

/// A sweep member failed. Carries the entries of the members that finished
/// (error_l2 is NaN when the reference itself failed); the member's own
/// exception is nested.
class SweepFailure : public std::runtime_error {
 public:
  SweepFailure(const std::string& what, SweepReport partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const SweepReport& partial() const noexcept { return partial_; }

 private:
  SweepReport partial_;
};

/// Members at each sigma plus a reference at sigmas.back()/10, all with the
/// same fixed step (the stable step of the reference). Errors are L2 distances
/// of n(t_end) to the reference.
SweepReport sigma_sweep(const RunConfig& base, std::span<const double> sigmas);

/// Members at each eps; the smallest eps is the reference. Steps are fixed at
/// the smallest stable step across members.
SweepReport eps_sweep(const RunConfig& base, std::span<const double> epsilons);

inline constexpr std::string_view kSweepHeader =
    "param,error_l2,runtime_s,accepted_steps,rejected_steps";

void write_sweep_report(const std::filesystem::path& path, const SweepReport& r);
void write_bound_report(const std::filesystem::path& path, const SweepReport& r);

}  // namespace rdch
