#pragma once

#include <optional>

#include "rdch/elliptic.hpp"
#include "rdch/model.hpp"
#include "rdch/state.hpp"

namespace rdch {

enum class SchemeMode { Explicit, SemiImplicit, UFormulation };

struct SchemeConfig {
  SchemeMode mode = SchemeMode::Explicit;
  double dt0 = 0.0;
  double dt_min = 0.0;
  double dt_max = 0.0;
  /// Accepted energy increase per step; negative means 1e-10 |E0|.
  double energy_slack = -1.0;
  /// Semi-implicit stabilization S; negative means automatic.
  double stabilization = -1.0;
  int grow_after = 20;
  double grow_factor = 1.2;

  void validate() const;
};

/// Explicit Euler stability estimate 2 / (lambda_max D_eff) with
/// D_eff = B_max gamma lambda_max / (1 + sigma lambda_max) + sup B psi_+''.
double explicit_stable_dt(const Grid1D& grid, const Model& model);

/// dt0 = 0.1 h^4 / gamma clamped into [dt_min, dt_max]; explicit modes cap dt
/// at 0.8 of the stability estimate, the semi-implicit mode at `semi_factor`
/// times that.
SchemeConfig default_scheme(const Grid1D& grid, const Model& model, SchemeMode mode,
                            double semi_factor = 100.0);

struct StepResult {
  State state;
  int fp_iterations = 0;
};

/// Builds the state at t = 0: phi from a cold-started relaxation solve.
StepResult make_initial_state(const Field& n0, const Model& model, const HelmholtzSolver& solver);

/// n' = n + dt div(B(n) grad(phi + psi_+'(n))), then phi' from the relaxation
/// equation warm-started at phi. Uses s.dt as the step.
StepResult step_explicit(const State& s, const Model& model, const HelmholtzSolver& solver);

/// Lagged-mobility linearised step
///   n' = n + dt div(B(n) grad(phi + psi_+'(n) + S (n' - n)));
/// S = 0 reproduces step_explicit bit for bit.
StepResult step_semi_implicit(const State& s, const Model& model, const HelmholtzSolver& solver,
                              double stabilization);

/// gamma/sigma + max_i psi_+''(n_i): covers the stiff part of phi and psi_+.
double auto_stabilization(const State& s, const Model& model);

/// Explicit step carried out with U = phi - (gamma/sigma) n as the elliptic
/// unknown. The returned state stores phi = U + (gamma/sigma) n.
StepResult step_u_formulation(const State& s, const Model& model, const HelmholtzSolver& solver);

struct ControllerState {
  int consecutive_accepts = 0;
};

struct AdaptDecision {
  bool accepted = false;
  double new_dt = 0.0;
};

/// Accept iff energy_increase <= slack. A reject halves dt (EnergyBlowUp below
/// dt_min); grow_after consecutive accepts multiply dt by grow_factor, capped at dt_max.
AdaptDecision adapt_dt(double energy_increase, double slack, double dt, const SchemeConfig& cfg,
                       ControllerState& ctl);

/// Drives one run: repeats trial steps until the controller accepts one.
class Stepper {
 public:
  Stepper(Model model, SchemeConfig cfg, const Field& n0);
  Stepper(Model model, SchemeConfig cfg, State initial, ControllerState ctl);

  struct Outcome {
    int rejections = 0;
    int fp_iterations = 0;
    double dt_used = 0.0;
    double energy_change = 0.0;
  };

  /// One accepted step; the step length never carries the time past t_limit.
  Outcome advance(std::optional<double> t_limit = std::nullopt);

  const State& state() const noexcept { return state_; }
  const Model& model() const noexcept { return model_; }
  const SchemeConfig& scheme() const noexcept { return cfg_; }
  const HelmholtzSolver& solver() const noexcept { return solver_; }
  const ControllerState& controller() const noexcept { return ctl_; }
  double energy_slack() const noexcept { return slack_; }
  int last_fp_iterations() const noexcept { return last_fp_; }

 private:
  StepResult trial(const State& s) const;

  Model model_;
  SchemeConfig cfg_;
  HelmholtzSolver solver_;
  State state_;
  ControllerState ctl_;
  double slack_;
  int last_fp_ = 0;
};

}  // namespace rdch
