#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "rdch/diagnostics.hpp"
#include "rdch/error.hpp"
#include "rdch/stepper.hpp"

using namespace rdch;

namespace {

Model make_model(double nstar, double gamma, double sigma, double k = 0.0) {
  Model m;
  m.potential.nstar = nstar;
  m.potential.k = k;
  m.relax.gamma = gamma;
  m.relax.sigma = sigma;
  return m;
}

Field cosine(const Grid1D& g, double mean, double amp, int j) {
  return Field::from_function(g, [&](double x) {
    return mean + amp * std::cos(j * std::numbers::pi * x / g.length());
  });
}

// Coefficient of cos(j pi x / L) in the discrete L2 sense.
double mode_amplitude(const Field& n, int j) {
  const Grid1D& g = n.grid();
  const Field e = cosine(g, 0.0, 1.0, j);
  return inner_product(n, e) / inner_product(e, e);
}

State run_steps(const State& s0, const Model& m, const HelmholtzSolver& hs, long steps,
                SchemeMode mode, double stab = 0.0) {
  State s = s0;
  for (long i = 0; i < steps; ++i) {
    const double dt = s.dt;
    switch (mode) {
      case SchemeMode::Explicit:
        s = step_explicit(s, m, hs).state;
        break;
      case SchemeMode::SemiImplicit:
        s = step_semi_implicit(s, m, hs, stab).state;
        break;
      case SchemeMode::UFormulation:
        s = step_u_formulation(s, m, hs).state;
        break;
    }
    s.dt = dt;
  }
  return s;
}

}  // namespace

TEST_CASE("constant states are fixed points of every scheme") {
  const Grid1D g(1.0, 64);
  const Model m = make_model(0.7, 1e-3, 1e-4, 1.0);
  const HelmholtzSolver hs(g, m.sigma());
  const Field n0(g, 0.5);
  State s = make_initial_state(n0, m, hs).state;
  s.dt = 0.5 * explicit_stable_dt(g, m);
  for (SchemeMode mode : {SchemeMode::Explicit, SchemeMode::SemiImplicit,
                          SchemeMode::UFormulation}) {
    const State e = run_steps(s, m, hs, 200, mode, auto_stabilization(s, m));
    CHECK(max_abs_difference(e.n, n0) <= 1e-13);
  }
}

TEST_CASE("mass is conserved to roundoff over many steps") {
  const Grid1D g(1.0, 128);
  const Model m = make_model(0.7, 1e-3, 1e-4, 1.0);
  const HelmholtzSolver hs(g, m.sigma());
  State s = make_initial_state(cosine(g, 0.5, 0.05, 3), m, hs).state;
  s.dt = 0.5 * explicit_stable_dt(g, m);
  const double mass0 = integrate(s.n);
  const State e = run_steps(s, m, hs, 10000, SchemeMode::Explicit);
  CHECK(std::abs(integrate(e.n) - mass0) <= 1e-11 * std::abs(mass0));
}

TEST_CASE("small perturbations grow or decay at the linearised rate") {
  // mu = -B lam [(gamma lam + psi_-'') / (1 + sigma lam + (sigma/gamma) psi_-'') + psi_+'']
  // with the discrete symbol lam of the Neumann laplacian.
  const Grid1D g(1.0, 32);
  struct Case {
    double nstar, gamma, sigma;
    int j;
  };
  for (const Case c : {Case{0.7, 1e-3, 1e-4, 2}, Case{0.7, 1e-3, 1e-4, 1},
                       Case{0.3, 1e-2, 1e-3, 2}, Case{0.7, 5e-2, 1e-3, 3}}) {
    const Model m = make_model(c.nstar, c.gamma, c.sigma);
    const HelmholtzSolver hs(g, m.sigma());
    const double mean = 0.5;
    const double h = g.spacing();
    const double lam = std::pow(2.0 / h * std::sin(c.j * std::numbers::pi * h / 2.0), 2);
    const double b = polynomial_mobility(mean);
    const double pm2 = m.psi_minus(mean).d2;
    const double pp2 = m.psi_plus(mean).d2;
    const double mu = -b * lam *
                      ((c.gamma * lam + pm2) / (1.0 + c.sigma * lam + m.relax.ratio() * pm2) + pp2);
    const double amp0 = 1e-7;
    State s = make_initial_state(cosine(g, mean, amp0, c.j), m, hs).state;
    const double t_end = std::min(1.0, 1.0 / std::abs(mu));
    const long steps = static_cast<long>(std::ceil(t_end / (0.25 * explicit_stable_dt(g, m))));
    s.dt = t_end / steps;
    const State e = run_steps(s, m, hs, steps, SchemeMode::Explicit);
    const double measured = std::log(mode_amplitude(e.n, c.j) / amp0) / t_end;
    CAPTURE(mu);
    CHECK((measured > 0) == (mu > 0));
    // forward Euler growth factor over the same steps
    const double euler = std::log1p(mu * s.dt) / s.dt;
    CHECK(measured == doctest::Approx(euler).epsilon(1e-4));
  }
}

TEST_CASE("zero stabilization reproduces the explicit step bit for bit") {
  const Grid1D g(1.0, 96);
  const Model m = make_model(0.7, 1e-3, 1e-4, 1.0);
  const HelmholtzSolver hs(g, m.sigma());
  State s = make_initial_state(cosine(g, 0.5, 0.1, 2), m, hs).state;
  s.dt = 0.5 * explicit_stable_dt(g, m);
  const State a = run_steps(s, m, hs, 50, SchemeMode::Explicit);
  const State b = run_steps(s, m, hs, 50, SchemeMode::SemiImplicit, 0.0);
  CHECK(std::ranges::equal(a.n.values(), b.n.values()));
  CHECK(std::ranges::equal(a.phi.values(), b.phi.values()));
  CHECK_THROWS_AS(step_semi_implicit(s, m, hs, -1.0), InvalidArgument);
}

TEST_CASE("semi-implicit steps far beyond the explicit limit stay accurate") {
  const Grid1D g(1.0, 64);
  const Model m = make_model(0.3, 1e-3, 1e-4);
  const HelmholtzSolver hs(g, m.sigma());
  const double dt_exp = explicit_stable_dt(g, m);
  const double t_end = 0.2;
  State s = make_initial_state(cosine(g, 0.5, 0.05, 1), m, hs).state;

  State fine = s;
  const long n_fine = static_cast<long>(std::ceil(t_end / (0.25 * dt_exp)));
  fine.dt = t_end / n_fine;
  fine = run_steps(fine, m, hs, n_fine, SchemeMode::Explicit);

  State coarse = s;
  const long n_coarse = static_cast<long>(std::floor(t_end / (100.0 * dt_exp)));
  coarse.dt = t_end / n_coarse;
  CHECK(coarse.dt >= 100.0 * dt_exp);
  coarse = run_steps(coarse, m, hs, n_coarse, SchemeMode::SemiImplicit, auto_stabilization(s, m));
  CHECK(coarse.n.all_finite());
  CHECK(l2_distance(coarse.n, fine.n) <= 1e-3);
}

TEST_CASE("U formulation agrees with the phi formulation") {
  const Grid1D g(1.0, 128);
  const Model m = make_model(0.7, 1e-3, 1e-4, 1.0);
  const HelmholtzSolver hs(g, m.sigma());
  State s = make_initial_state(cosine(g, 0.5, 0.1, 2), m, hs).state;
  s.dt = 0.5 * explicit_stable_dt(g, m);
  const State a1 = run_steps(s, m, hs, 1, SchemeMode::Explicit);
  const State b1 = run_steps(s, m, hs, 1, SchemeMode::UFormulation);
  CHECK(max_abs_difference(a1.n, b1.n) <= 1e-10 * a1.n.max_abs());
  const State a = run_steps(s, m, hs, 100, SchemeMode::Explicit);
  const State b = run_steps(s, m, hs, 100, SchemeMode::UFormulation);
  CHECK(max_abs_difference(a.n, b.n) <= 1e-9 * a.n.max_abs());
}

TEST_CASE("step controller contract") {
  SchemeConfig cfg;
  cfg.dt0 = 1e-3;
  cfg.dt_min = 1e-6;
  cfg.dt_max = 1.1e-3;
  const double slack = 1e-12;
  ControllerState ctl;

  auto d = adapt_dt(-1.0, slack, 1e-3, cfg, ctl);
  CHECK(d.accepted);
  CHECK(d.new_dt == 1e-3);
  CHECK(ctl.consecutive_accepts == 1);

  d = adapt_dt(slack, slack, 1e-3, cfg, ctl);
  CHECK(d.accepted);

  d = adapt_dt(2.0 * slack, slack, 1e-3, cfg, ctl);
  CHECK_FALSE(d.accepted);
  CHECK(d.new_dt == 0.5e-3);
  CHECK(ctl.consecutive_accepts == 0);

  double dt = 1e-3;
  for (int i = 0; i < 19; ++i) {
    d = adapt_dt(0.0, slack, dt, cfg, ctl);
    CHECK(d.new_dt == dt);
  }
  d = adapt_dt(0.0, slack, dt, cfg, ctl);
  CHECK(d.new_dt == doctest::Approx(1.1e-3));  // 1.2x capped at dt_max
  CHECK(ctl.consecutive_accepts == 0);

  CHECK_THROWS_AS(adapt_dt(1.0, slack, 1.5e-6, cfg, ctl), EnergyBlowUp);
}

TEST_CASE("accepted steps never raise the energy beyond the slack") {
  const Grid1D g(1.0, 64);
  const Model m = make_model(0.7, 1e-3, 1e-4, 1.0);
  SchemeConfig cfg = default_scheme(g, m, SchemeMode::Explicit);
  Stepper st(m, cfg, cosine(g, 0.5, 0.05, 2));
  const double mass0 = integrate(st.state().n);
  long rejected = 0;
  for (int i = 0; i < 3000; ++i) {
    const auto out = st.advance();
    rejected += out.rejections;
    CHECK(out.energy_change <= st.energy_slack());
  }
  CHECK(rejected <= 150);
  CHECK(std::abs(integrate(st.state().n) - mass0) <= 1e-11);
}

TEST_CASE("advance lands exactly on the time limit") {
  const Grid1D g(1.0, 32);
  const Model m = make_model(0.3, 1e-2, 1e-3);
  Stepper st(m, default_scheme(g, m, SchemeMode::Explicit), cosine(g, 0.4, 0.05, 1));
  const double dt = st.state().dt;
  const double limit = 3.5 * dt;
  while (st.state().t < limit) {
    st.advance(limit);
  }
  CHECK(st.state().t == limit);
  CHECK(st.state().step_index == 4);
  CHECK(st.state().dt == dt);
}

TEST_CASE("discrete energy decrease approaches the dissipation") {
  const Grid1D g(1.0, 64);
  const Model m = make_model(0.7, 1e-3, 1e-4, 1.0);
  const HelmholtzSolver hs(g, m.sigma());
  State s = make_initial_state(cosine(g, 0.5, 0.1, 2), m, hs).state;
  const double d = dissipation(s, m);
  REQUIRE(d > 0.0);
  std::vector<double> gaps;
  for (double frac : {1e-1, 1e-2, 1e-3}) {
    s.dt = frac * explicit_stable_dt(g, m);
    const State e = step_explicit(s, m, hs).state;
    const double rate = -energy_difference(s, e, m) / s.dt;
    gaps.push_back(std::abs(rate / d - 1.0));
  }
  CHECK(gaps[1] < gaps[0]);
  CHECK(gaps[2] < gaps[1]);
  CHECK(gaps[2] < 1e-3);
}

TEST_CASE("unregularized model rejects states outside the domain") {
  const Grid1D g(1.0, 16);
  Model m = make_model(0.3, 1e-2, 1e-3);
  m.eps.reset();
  const HelmholtzSolver hs(g, m.sigma());
  Field n0(g, 0.5);
  n0[4] = 1.0;
  State s = make_initial_state(Field(g, 0.5), m, hs).state;
  s.n = n0;
  s.dt = 1e-6;
  CHECK_THROWS_AS(step_explicit(s, m, hs), DomainError);
}

TEST_CASE("scheme defaults") {
  const Grid1D g(1.0, 64);
  const Model m = make_model(0.7, 1e-3, 1e-4, 1.0);
  const double stable = explicit_stable_dt(g, m);
  const auto e = default_scheme(g, m, SchemeMode::Explicit);
  CHECK(e.dt_max == doctest::Approx(0.8 * stable));
  CHECK(e.dt0 <= e.dt_max);
  CHECK(e.dt_min <= e.dt0);
  const auto si = default_scheme(g, m, SchemeMode::SemiImplicit);
  CHECK(si.dt_max == doctest::Approx(80.0 * stable));
  SchemeConfig bad = e;
  bad.dt_min = 2.0 * bad.dt_max;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
