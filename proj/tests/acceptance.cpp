#include <fmt/core.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rdch/diagnostics.hpp"
#include "rdch/error.hpp"
#include "rdch/galerkin.hpp"
#include "rdch/harness.hpp"
#include "rdch/stepper.hpp"

using namespace rdch;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

RunConfig spinodal() {
  RunConfig c;
  c.length = 1.0;
  c.npoints = 256;
  c.potential.nstar = 0.7;
  c.potential.k = 1.0;
  c.gamma = 1e-3;
  c.sigma = 1e-4;
  c.eps = 1e-2;
  c.init.kind = InitialKind::Cosine;
  c.init.m = 0.5;
  c.init.a = 0.01;
  c.init.j = 2;
  c.t_end = 1.0;
  c.diagnostics_stride = 100;
  return c;
}

const RunResult& spinodal_run() {
  static std::optional<RunResult> cached;
  if (!cached) {
    RunOptions opts;
    opts.track_entropy = true;
    cached = run(spinodal(), opts);
  }
  return *cached;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rdch_acceptance_" + name);
  fs::remove_all(p);
  return p;
}

Verdict mass_conservation() {
  const RunResult& r = spinodal_run();
  const double bound = 1e-11 * r.initial_mass;
  return {r.max_mass_deviation <= bound && r.final_state.t == 1.0,
          fmt::format("max |mass - M| = {:.3e} (bound {:.3e}), {} steps, runtime {:.1f} s",
                      r.max_mass_deviation, bound, r.accepted, r.runtime_s)};
}

Verdict energy_monotonicity() {
  const RunResult& r = spinodal_run();
  return {r.max_energy_increase <= r.energy_slack,
          fmt::format("largest accepted increase {:.3e} (slack {:.3e}), {} rejections, "
                      "E: {:.12f} -> {:.12f}",
                      r.max_energy_increase, r.energy_slack, r.rejected, r.initial_energy,
                      r.records.back().energy)};
}

Verdict dissipation_consistency() {
  const Grid1D g(1.0, 32);
  Model model;
  model.potential.nstar = 0.7;
  model.potential.k = 1.0;
  model.relax.gamma = 1e-3;
  model.relax.sigma = 1e-4;
  model.relax.fp_tol = 1e-14;
  const HelmholtzSolver hs(g, model.sigma());
  const Field n0 = Field::from_function(g, [](double x) {
    return 0.5 + 0.1 * std::cos(std::numbers::pi * x) + 0.05 * std::cos(4 * std::numbers::pi * x);
  });
  const State s = make_initial_state(n0, model, hs).state;
  const Field v = divergence_of_flux(model.mobility_field(s.n), model.flux_argument(s.n, s.phi));
  const double d = dissipation(s, model);
  const double h = g.spacing();
  std::vector<double> log_dt;
  std::vector<double> log_dev;
  std::vector<double> c_est;
  std::string ratios;
  for (double f : {1e-6, 1e-7, 1e-8, 1e-9}) {
    const double dt = f * std::pow(h, 4) / model.gamma();
    const Field dn = dt * v;
    const Field phi = solve_relaxation(model.relax, hs, model.potential, s.n + dn, &s.phi).phi;
    const double ratio = -energy_increment(s, dn, phi, model) / (dt * d);
    const double dev = std::abs(ratio - 1.0);
    log_dt.push_back(std::log(dt));
    log_dev.push_back(std::log(dev));
    c_est.push_back(dev / dt);
    ratios += fmt::format(" {:.12f}", ratio);
  }
  const double mx = std::accumulate(log_dt.begin(), log_dt.end(), 0.0) / log_dt.size();
  const double my = std::accumulate(log_dev.begin(), log_dev.end(), 0.0) / log_dev.size();
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < log_dt.size(); ++i) {
    sxy += (log_dt[i] - mx) * (log_dev[i] - my);
    sxx += (log_dt[i] - mx) * (log_dt[i] - mx);
  }
  const double slope = sxy / sxx;
  const auto [cmin, cmax] = std::minmax_element(c_est.begin(), c_est.end());
  const bool pass = std::abs(slope - 1.0) <= 0.1 && *cmax <= 2.0 * *cmin;
  return {pass, fmt::format("ratios{}; fitted slope {:.4f}, C in [{:.3e}, {:.3e}]", ratios, slope,
                            *cmin, *cmax)};
}

Verdict entropy_bound() {
  const RunResult& r = spinodal_run();
  return {r.entropy_lhs <= r.entropy_rhs + 1e-6,
          fmt::format("lhs {:.10f} <= rhs {:.10f} + 1e-6", r.entropy_lhs, r.entropy_rhs)};
}

Verdict contraction_rate() {
  const Grid1D g(1.0, 128);
  RelaxationParams p;
  p.gamma = 1e-3;
  p.sigma = 5e-4;
  PotentialSpec pot;
  pot.nstar = 0.3;
  pot.k = 1.0;
  const double bound = p.contraction(pot);
  const HelmholtzSolver hs(g, p.sigma);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 0.95);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Field n(g);
    if (trial % 2 == 0) {
      for (double& x : n.values()) {
        x = u(rng);
      }
    } else {
      double c[6];
      for (double& x : c) {
        x = coef(rng);
      }
      n = Field::from_function(g, [&](double x) {
        double s = 0.0;
        for (int k = 0; k < 6; ++k) {
          s += c[k] * std::cos((k + 1) * std::numbers::pi * x);
        }
        return 0.475 + 0.475 * s / 6.0;
      });
    }
    worst = std::max(worst, solve_relaxation(p, hs, pot, n).max_ratio);
  }
  return {worst <= bound + 1e-6,
          fmt::format("max Picard ratio {:.6f} over 100 states, bound {:.6f}", worst, bound)};
}

Verdict oracle_agreement() {
  Model model;
  model.potential.nstar = 0.7;
  model.potential.k = 1.0;
  model.relax.gamma = 1.0;
  model.relax.sigma = 0.1;
  model.eps = 1e-2;
  const double t_end = 1e-2 / model.gamma();
  auto n0 = [](double x) { return 0.5 + 0.1 * std::cos(std::numbers::pi * x); };
  std::vector<double> errors;
  std::string detail;
  for (const auto& [npts, modes] : {std::pair<std::size_t, std::size_t>{32, 8}, {64, 16}, {128, 32}}) {
    const Grid1D g(1.0, npts);
    Stepper fd(model, default_scheme(g, model, SchemeMode::Explicit), Field::from_function(g, n0));
    while (fd.state().t < t_end) {
      fd.advance(t_end);
    }
    const SpectralSolver spec(model, SpectralBasis(1.0, modes));
    const double nominal = spec.default_dt();
    const long steps = static_cast<long>(std::ceil(t_end / nominal));
    const SpectralState s = spec.integrate(spec.initial_state(n0), t_end / steps, steps);
    const double err = l2_norm(fd.state().n - spec.basis().to_grid(s.c, g));
    errors.push_back(err);
    detail += fmt::format(" N={}/M={}: {:.3e}", npts, modes, err);
  }
  const bool pass = errors[0] <= 1e-3 && errors[1] <= 1e-3 && errors[2] <= 1e-3 &&
                    errors[1] < errors[0] && errors[2] < errors[1];
  return {pass, "L2 differences" + detail};
}

Verdict sigma_convergence() {
  RunConfig c = spinodal();
  c.npoints = 128;
  c.t_end = 0.1;
  const std::vector<double> sigmas = {0.2 * c.gamma, 0.1 * c.gamma, 0.05 * c.gamma, 0.025 * c.gamma};
  const SweepReport r = sigma_sweep(c, sigmas);
  std::string detail;
  for (const auto& e : r.entries) {
    detail += fmt::format(" {:.4g}:{:.3e}", e.param, e.error_l2);
  }
  const double last_over_first = r.entries.back().error_l2 / r.entries.front().error_l2;
  return {r.strictly_decreasing && last_over_first <= 0.25,
          fmt::format("errors{}; last/first {:.3f}", detail, last_over_first)};
}

Verdict bound_preservation() {
  RunConfig c = spinodal();
  c.npoints = 512;
  c.init.m = 0.3;
  c.init.a = 0.3;
  c.init.j = 1;
  c.t_end = 0.05;
  const std::vector<double> eps = {1e-1, 3e-2, 1e-2, 3e-3};
  const SweepReport r = eps_sweep(c, eps);
  std::string detail;
  for (const auto& e : r.entries) {
    detail += fmt::format(" {:.0e}:{:.3e}", e.param,
                          std::max(e.lower_violation, e.upper_violation));
  }
  const auto& fine = r.entries.back();
  const double finest = std::max(fine.lower_violation, fine.upper_violation);
  return {r.violations_decreasing && finest <= 1e-3,
          fmt::format("max violation per eps{}", detail)};
}

// Equilibrium 10%-90% width over sqrt(gamma) for the sigma -> 0 profile
// between n = 0 and the common-tangent plateau, from gamma n'^2 / 2 = dW(n).
double equilibrium_width_factor(double nstar) {
  const double a = 1.0 - nstar;
  auto psi = [&](double n) { return -a * std::log(1.0 - n) - n * n * n / 3.0 - a * n * n / 2.0 - a * n; };
  auto dpsi = [&](double n) { return a / (1.0 - n) - n * n - a * n - a; };
  auto tangent = [&](double p) { return psi(0.0) - psi(p) + dpsi(p) * p; };
  double lo = 0.3;
  double hi = 0.95;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (tangent(lo) * tangent(mid) <= 0.0 ? hi : lo) = mid;
  }
  const double top = 0.5 * (lo + hi);
  const double mu = dpsi(top);
  auto integrand = [&](double n) {
    return 1.0 / std::sqrt(2.0 * (psi(n) - psi(top) - mu * (n - top)));
  };
  const int m = 4000;
  const double x0 = 0.1 * top;
  const double step = 0.8 * top / m;
  double sum = integrand(x0) + integrand(x0 + m * step);
  for (int i = 1; i < m; ++i) {
    sum += (i % 2 == 1 ? 4.0 : 2.0) * integrand(x0 + i * step);
  }
  return sum * step / 3.0;
}

Verdict long_time() {
  RunConfig big = spinodal();
  big.gamma = 1.0;
  big.sigma = 0.1;
  const RunResult rb = run(big);
  const double mean = integrate(rb.final_state.n) / big.length;
  const double dev = max_abs_difference(rb.final_state.n, Field(big.grid(), mean));
  const SteadyReport cb = classify_profile(rb.final_state.n, big.tol_flux);
  bool pass = cb.kind == SteadyClass::Constant && dev <= 1e-6;
  std::string detail = fmt::format("gamma=1: {} with |n - M/L| = {:.2e};", to_string(cb.kind), dev);

  for (double gamma : {1e-3, 2.5e-4, 6.25e-5}) {
    RunConfig c = spinodal();
    c.npoints = 512;
    c.gamma = gamma;
    c.sigma = 0.1 * gamma;
    c.mode = SchemeMode::SemiImplicit;
    c.semi_factor = 1000.0;
    c.t_end = 50.0;
    const RunResult r = run(c);
    const SteadyReport s = classify_profile(r.final_state.n, c.tol_flux);
    const double scaled = s.interface_width / std::sqrt(gamma);
    pass = pass && s.kind == SteadyClass::Aggregate && scaled >= 1.0 / 3.0 && scaled <= 3.0;
    detail += fmt::format(" gamma={:.3g}: {}, {} interfaces, n in [{:.3f}, {:.3f}], width/sqrt(gamma) = {:.2f};",
                          gamma, to_string(s.kind), s.interfaces, r.final_state.n.min(),
                          r.final_state.n.max(), scaled);
  }
  detail += fmt::format(" equilibrium profile gives width/sqrt(gamma) = {:.2f}",
                        equilibrium_width_factor(big.potential.nstar));
  return {pass, detail};
}

Verdict formulation_equivalence() {
  const RunConfig c = spinodal();
  const Grid1D g = c.grid();
  const Model model = c.model();
  auto fixed = [&](SchemeMode mode) {
    SchemeConfig s = default_scheme(g, model, mode);
    s.dt0 = s.dt_min = s.dt_max = 0.8 * explicit_stable_dt(g, model);
    return s;
  };
  Stepper phi_mode(model, fixed(SchemeMode::Explicit), c.initial_field());
  Stepper u_mode(model, fixed(SchemeMode::UFormulation), c.initial_field());
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    phi_mode.advance();
    u_mode.advance();
    worst = std::max(worst, max_abs_difference(phi_mode.state().n, u_mode.state().n));
  }
  return {worst <= 1e-9, fmt::format("max |n_phi - n_U| over 100 steps = {:.3e}", worst)};
}

Verdict determinism() {
  RunConfig c = spinodal();
  c.max_steps = 2000;
  c.diagnostics_stride = 10;
  c.output_dir = scratch("first");
  run(c);
  const std::string first = slurp(c.output_dir / "diagnostics.csv");
  c.output_dir = scratch("second");
  run(c);
  const bool same = slurp(c.output_dir / "diagnostics.csv") == first;
  c.output_dir = scratch("split");
  RunOptions opts;
  opts.checkpoint_after = 777;
  opts.checkpoint_path = c.output_dir / "state.ckpt";
  run(c, opts);
  restore(c, opts.checkpoint_path);
  const bool split = slurp(c.output_dir / "diagnostics.csv") == first;
  return {same && split && !first.empty(),
          fmt::format("repeat identical: {}, checkpoint split identical: {}, {} bytes", same,
                      split, first.size())};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> check;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "mass conservation", mass_conservation},
      {2, "energy monotonicity", energy_monotonicity},
      {3, "dissipation consistency", dissipation_consistency},
      {4, "entropy combined bound", entropy_bound},
      {5, "Picard contraction rate", contraction_rate},
      {6, "finite difference vs spectral Galerkin", oracle_agreement},
      {7, "sigma convergence", sigma_convergence},
      {8, "bound preservation trend", bound_preservation},
      {9, "long-time behaviour", long_time},
      {10, "phi vs U formulation", formulation_equivalence},
      {11, "determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    selected.insert(std::stoi(argv[i]));
  }
  int failures = 0;
  for (const auto& c : all) {
    if (!selected.empty() && !selected.contains(c.id)) {
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, fmt::format("threw: {}", e.what())};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += v.pass ? 0 : 1;
    fmt::print("{} C{} {}: {} [{:.1f} s]\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail, secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
