#include "rdch/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "rdch/diagnostics.hpp"
#include "rdch/error.hpp"

namespace rdch {

void SchemeConfig::validate() const {
  if (!(dt_min > 0.0 && dt_min <= dt0 && dt0 <= dt_max)) {
    throw ConfigError(fmt::format(
        "scheme step bounds must satisfy 0 < dt_min <= dt0 <= dt_max (got {:g}, {:g}, {:g})",
        dt_min, dt0, dt_max));
  }
  if (grow_after < 1 || !(grow_factor >= 1.0)) {
    throw ConfigError("scheme growth policy must have grow_after >= 1 and grow_factor >= 1");
  }
}

double explicit_stable_dt(const Grid1D& grid, const Model& model) {
  const double h = grid.spacing();
  const double lambda_max = 4.0 / (h * h);
  const double b_max = 4.0 / 27.0;
  const double relax_symbol =
      model.gamma() * lambda_max / (1.0 + model.sigma() * lambda_max);
  const double d_eff = b_max * relax_symbol + model.sup_mobility_times_curvature();
  return 2.0 / (lambda_max * d_eff);
}

SchemeConfig default_scheme(const Grid1D& grid, const Model& model, SchemeMode mode,
                            double semi_factor) {
  SchemeConfig cfg;
  cfg.mode = mode;
  const double stable = 0.8 * explicit_stable_dt(grid, model);
  cfg.dt_max = mode == SchemeMode::SemiImplicit ? semi_factor * stable : stable;
  const double h = grid.spacing();
  cfg.dt0 = std::min(0.1 * h * h * h * h / model.gamma(), cfg.dt_max);
  cfg.dt_min = 1e-3 * cfg.dt0;
  return cfg;
}

StepResult make_initial_state(const Field& n0, const Model& model, const HelmholtzSolver& solver) {
  auto res = solve_relaxation(model.relax, solver, model.potential, n0, nullptr);
  return {State{0.0, n0, std::move(res.phi), 0.0, 0}, res.iterations};
}

namespace {

void require_finite_state(const Field& n, const char* where) {
  if (!n.all_finite()) {
    throw DomainError(std::string(where) + ": non-finite density after update");
  }
}

StepResult finish_step(const State& s, Field n_next, const Model& model,
                       const HelmholtzSolver& solver) {
  require_finite_state(n_next, "step");
  auto res = solve_relaxation(model.relax, solver, model.potential, n_next, &s.phi);
  return {State{s.t + s.dt, std::move(n_next), std::move(res.phi), s.dt, s.step_index + 1},
          res.iterations};
}

}  // namespace

StepResult step_explicit(const State& s, const Model& model, const HelmholtzSolver& solver) {
  const Field b = model.mobility_field(s.n);
  const Field g = model.flux_argument(s.n, s.phi);
  const Field div = divergence_of_flux(b, g);
  Field n_next(s.n.grid());
  kernels::parallel::axpy(s.n.values(), s.dt, div.values(), n_next.values());
  return finish_step(s, std::move(n_next), model, solver);
}

double auto_stabilization(const State& s, const Model& model) {
  double curv = 0.0;
  for (double v : s.n.values()) {
    curv = std::max(curv, model.psi_plus(v).d2);
  }
  return model.gamma() / model.sigma() + curv;
}

StepResult step_semi_implicit(const State& s, const Model& model, const HelmholtzSolver& solver,
                              double stabilization) {
  if (stabilization == 0.0) {
    return step_explicit(s, model, solver);
  }
  if (!(stabilization > 0.0)) {
    throw InvalidArgument("semi-implicit stabilization must be non-negative");
  }
  const std::size_t size = s.n.size();
  const double h = s.n.grid().spacing();
  const Field b = model.mobility_field(s.n);
  Field shifted = model.flux_argument(s.n, s.phi);
  for (std::size_t i = 0; i < size; ++i) {
    shifted[i] -= stabilization * s.n[i];
  }
  const Field div = divergence_of_flux(b, shifted);

  std::vector<double> lower(size, 0.0), diag(size, 1.0), upper(size, 0.0), rhs(size);
  const double c = s.dt * stabilization / (h * h);
  for (std::size_t i = 0; i + 1 < size; ++i) {
    const double face = c * 0.5 * (b[i] + b[i + 1]);
    upper[i] = -face;
    lower[i + 1] = -face;
    diag[i] += face;
    diag[i + 1] += face;
  }
  for (std::size_t i = 0; i < size; ++i) {
    rhs[i] = s.n[i] + s.dt * div[i];
  }
  Field n_next(s.n.grid());
  solve_tridiagonal(lower, diag, upper, rhs, n_next.values());
  return finish_step(s, std::move(n_next), model, solver);
}

StepResult step_u_formulation(const State& s, const Model& model, const HelmholtzSolver& solver) {
  const double inv_r = model.gamma() / model.sigma();
  const std::size_t size = s.n.size();
  const Field b = model.mobility_field(s.n);
  const Field dpsi = model.psi_plus_d1_field(s.n);
  Field g(s.n.grid());
  for (std::size_t i = 0; i < size; ++i) {
    const double u = s.phi[i] - inv_r * s.n[i];
    g[i] = u + inv_r * s.n[i] + dpsi[i];
  }
  const Field div = divergence_of_flux(b, g);
  Field n_next(s.n.grid());
  kernels::parallel::axpy(s.n.values(), s.dt, div.values(), n_next.values());
  require_finite_state(n_next, "step_u_formulation");

  Field u_guess(s.n.grid());
  for (std::size_t i = 0; i < size; ++i) {
    u_guess[i] = s.phi[i] - inv_r * n_next[i];
  }
  auto res = solve_relaxation_u(model.relax, solver, model.potential, n_next, &u_guess);
  Field phi(s.n.grid());
  for (std::size_t i = 0; i < size; ++i) {
    phi[i] = res.phi[i] + inv_r * n_next[i];
  }
  return {State{s.t + s.dt, std::move(n_next), std::move(phi), s.dt, s.step_index + 1},
          res.iterations};
}

AdaptDecision adapt_dt(double energy_increase, double slack, double dt, const SchemeConfig& cfg,
                       ControllerState& ctl) {
  if (energy_increase <= slack) {
    ++ctl.consecutive_accepts;
    double next = dt;
    if (ctl.consecutive_accepts >= cfg.grow_after) {
      next = std::min(cfg.grow_factor * dt, cfg.dt_max);
      ctl.consecutive_accepts = 0;
    }
    return {true, next};
  }
  ctl.consecutive_accepts = 0;
  const double next = 0.5 * dt;
  if (next < cfg.dt_min) {
    throw EnergyBlowUp(fmt::format(
        "energy blow-up at dt_min: energy increase {:.6e} exceeds slack {:.6e} with dt {:.6e} "
        "(dt_min {:.6e})",
        energy_increase, slack, dt, cfg.dt_min));
  }
  return {false, next};
}

Stepper::Stepper(Model model, SchemeConfig cfg, const Field& n0)
    : model_(std::move(model)),
      cfg_(cfg),
      solver_(n0.grid(), model_.sigma()),
      state_(make_initial_state(n0, model_, solver_).state),
      slack_(cfg.energy_slack) {
  state_.dt = cfg_.dt0;
  if (slack_ < 0.0) {
    slack_ = 1e-10 * std::abs(energy(state_, model_));
  }
}

Stepper::Stepper(Model model, SchemeConfig cfg, State initial, ControllerState ctl)
    : model_(std::move(model)),
      cfg_(cfg),
      solver_(initial.n.grid(), model_.sigma()),
      state_(std::move(initial)),
      ctl_(ctl),
      slack_(cfg.energy_slack) {
  if (slack_ < 0.0) {
    slack_ = 1e-10 * std::abs(energy(state_, model_));
  }
}

StepResult Stepper::trial(const State& s) const {
  switch (cfg_.mode) {
    case SchemeMode::Explicit:
      return step_explicit(s, model_, solver_);
    case SchemeMode::SemiImplicit: {
      const double stab =
          cfg_.stabilization < 0.0 ? auto_stabilization(s, model_) : cfg_.stabilization;
      return step_semi_implicit(s, model_, solver_, stab);
    }
    case SchemeMode::UFormulation:
      return step_u_formulation(s, model_, solver_);
  }
  throw InvalidArgument("unknown scheme mode");
}

Stepper::Outcome Stepper::advance(std::optional<double> t_limit) {
  Outcome out;
  for (;;) {
    State start = state_;
    bool truncated = false;
    if (t_limit && start.t + start.dt > *t_limit) {
      start.dt = *t_limit - start.t;
      truncated = true;
    }
    StepResult r = trial(start);
    const double increase = energy_difference(start, r.state, model_);
    const AdaptDecision d = adapt_dt(increase, slack_, state_.dt, cfg_, ctl_);
    out.fp_iterations += r.fp_iterations;
    if (d.accepted) {
      out.dt_used = start.dt;
      out.energy_change = increase;
      state_ = std::move(r.state);
      if (truncated) {
        // Land exactly on the limit; keep the controller's step for later runs.
        state_.t = *t_limit;
      }
      state_.dt = d.new_dt;
      last_fp_ = r.fp_iterations;
      return out;
    }
    ++out.rejections;
    state_.dt = d.new_dt;
  }
}

}  // namespace rdch
