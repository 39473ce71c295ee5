#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rdch/config.hpp"
#include "rdch/error.hpp"

using namespace rdch;

namespace {

std::string validation_message(const RunConfig& cfg) {
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

struct Violation {
  const char* name;
  std::vector<std::pair<const char*, const char*>> settings;
  const char* expected;  // substring of the message
};

}  // namespace

TEST_CASE("defaults are admissible") {
  RunConfig cfg;
  CHECK(validation_message(cfg).empty());
  CHECK(cfg.initial_field().grid().size() == 256);
}

TEST_CASE("every constraint has its own message") {
  const std::vector<Violation> cases = {
      {"domain length", {{"grid.L", "0"}}, "grid.L must be positive"},
      {"grid size", {{"grid.N", "4"}}, "grid.N must be at least"},
      {"nstar above 0.7", {{"potential.nstar", "0.75"}}, "potential.nstar must lie in (0, 0.7]"},
      {"nstar zero", {{"potential.nstar", "0"}}, "potential.nstar must lie in (0, 0.7]"},
      {"k finite", {{"potential.k", "inf"}}, "potential.k must be finite"},
      {"gamma", {{"params.gamma", "-1"}}, "params.gamma must be positive"},
      {"sigma", {{"params.sigma", "0"}}, "params.sigma must be positive"},
      {"contraction", {{"params.gamma", "1e-3"}, {"params.sigma", "2e-3"}}, "contraction condition"},
      {"eps range", {{"params.eps", "0.5"}}, "params.eps must lie in"},
      {"fp_tol", {{"scheme.fp_tol", "0"}}, "scheme.fp_tol must be positive"},
      {"fp_maxiter", {{"scheme.fp_maxiter", "1"}}, "scheme.fp_maxiter must be at least 2"},
      {"negative dt", {{"scheme.dt0", "-1"}}, "must be non-negative"},
      {"semi factor", {{"scheme.semi_factor", "0.5"}}, "scheme.semi_factor must be at least 1"},
      {"t_end", {{"t_end", "0"}}, "t_end must be positive"},
      {"max_steps", {{"max_steps", "-3"}}, "max_steps must be non-negative"},
      {"snapshot stride", {{"output.snapshot_stride", "-1"}}, "output.snapshot_stride"},
      {"diagnostics stride", {{"output.diagnostics_stride", "0"}}, "output.diagnostics_stride"},
      {"steady tolerances", {{"steady.tol_flux", "0"}}, "steady.tol_flux and steady.tol_energy"},
      {"steady window", {{"steady.window", "1"}}, "steady.window must be at least 2"},
      {"constant data", {{"init.kind", "constant"}, {"init.m", "1.0"}}, "init.m must lie in [0, 1)"},
      {"cosine wave number", {{"init.j", "-1"}}, "init.j must be non-negative"},
      {"cosine range", {{"init.m", "0.995"}, {"init.a", "0.01"}}, "cosine initial data"},
      {"tanh levels", {{"init.kind", "tanh"}, {"init.hi", "1.2"}}, "init.lo and init.hi"},
      {"tanh width", {{"init.kind", "tanh"}, {"init.width", "0"}}, "init.width must be positive"},
      {"tanh centre", {{"init.kind", "tanh"}, {"init.x0", "1.5"}}, "init.x0"},
      {"noise range", {{"init.kind", "noise"}, {"init.lo", "0.5"}, {"init.hi", "0.4"}},
       "0 <= init.lo < init.hi < 1"},
      {"noise smoothing", {{"init.kind", "noise"}, {"init.smoothing", "-1"}}, "init.smoothing"},
      {"step bounds", {{"scheme.dt0", "1e-6"}, {"scheme.dt_min", "1e-5"}}, "scheme:"},
  };
  for (const auto& c : cases) {
    CAPTURE(c.name);
    RunConfig cfg;
    for (const auto& [k, v] : c.settings) {
      cfg.set(k, v);
    }
    const std::string msg = validation_message(cfg);
    CAPTURE(msg);
    CHECK(msg.find(c.expected) != std::string::npos);
  }
}

TEST_CASE("malformed values and keys are refused") {
  RunConfig cfg;
  CHECK_THROWS_AS(cfg.set("grid.N", "many"), ConfigError);
  CHECK_THROWS_AS(cfg.set("params.gamma", "1e-3x"), ConfigError);
  CHECK_THROWS_AS(cfg.set("scheme.regularize", "maybe"), ConfigError);
  CHECK_THROWS_AS(cfg.set("scheme.mode", "implicit"), ConfigError);
  CHECK_THROWS_AS(cfg.set("no.such.key", "1"), ConfigError);
  CHECK_THROWS_AS(parse_config("grid.N 256\n"), ConfigError);
}

TEST_CASE("text round trip keeps every value") {
  RunConfig cfg = parse_config(
      "# comment line\n"
      "grid.L = 2.5\n"
      "grid.N = 300   # trailing comment\n"
      "potential.nstar = 0.7\n"
      "params.gamma = 0.1\n"
      "params.sigma = 0.0123456789012345\n"
      "scheme.mode = semi-implicit\n"
      "init.kind = noise\n"
      "seed = 42\n"
      "steady.stop = true\n");
  CHECK(cfg.length == 2.5);
  CHECK(cfg.npoints == 300);
  CHECK(cfg.mode == SchemeMode::SemiImplicit);
  CHECK(cfg.init.kind == InitialKind::Noise);
  CHECK(cfg.steady_stop);
  const RunConfig again = parse_config(cfg.to_text());
  CHECK(again.to_text() == cfg.to_text());
  CHECK(again.sigma == cfg.sigma);
  CHECK(again.physics_hash() == cfg.physics_hash());
}

TEST_CASE("physics hash ignores output settings") {
  RunConfig a;
  RunConfig b;
  b.output_dir = "/tmp/somewhere";
  b.snapshot_stride = 5;
  b.t_end = 7.0;
  b.max_steps = 10;
  CHECK(a.physics_hash() == b.physics_hash());
  b.gamma = 2e-3;
  CHECK(a.physics_hash() != b.physics_hash());
}

TEST_CASE("environment overrides") {
  CHECK(environment_name("params.gamma") == "RDCH_PARAMS_GAMMA");
  CHECK(environment_name("t_end") == "RDCH_T_END");
  const auto path = std::filesystem::temp_directory_path() / "rdch_env_test.cfg";
  {
    std::ofstream out(path);
    out << "params.gamma = 0.01\ngrid.N = 64\n";
  }
  setenv("RDCH_GRID_N", "128", 1);
  const RunConfig with_env = load_config(path);
  const RunConfig without_env = load_config(path, false);
  unsetenv("RDCH_GRID_N");
  CHECK(with_env.npoints == 128);
  CHECK(without_env.npoints == 64);
  CHECK(with_env.gamma == 0.01);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_config(path), ConfigError);
}

TEST_CASE("initial data generators") {
  RunConfig cfg;
  cfg.npoints = 64;
  cfg.init.kind = InitialKind::Tanh;
  cfg.init.lo = 0.1;
  cfg.init.hi = 0.6;
  Field f = cfg.initial_field();
  CHECK(f[0] == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(f[63] == doctest::Approx(0.6).epsilon(1e-6));

  cfg.init.kind = InitialKind::Noise;
  cfg.seed = 9;
  const Field a = cfg.initial_field();
  const Field b = cfg.initial_field();
  CHECK(max_abs_difference(a, b) == 0.0);
  for (double v : a.values()) {
    CHECK(v >= 0.1);
    CHECK(v <= 0.6);
  }
  cfg.seed = 10;
  CHECK(max_abs_difference(cfg.initial_field(), a) > 0.0);
}

TEST_CASE("scheme policy from the configuration") {
  RunConfig cfg;
  cfg.npoints = 64;
  const SchemeConfig d = cfg.scheme();
  CHECK(d.dt0 <= d.dt_max);
  CHECK(d.dt_min <= d.dt0);
  cfg.dt_max = 1e-9;
  const SchemeConfig capped = cfg.scheme();
  CHECK(capped.dt_max == 1e-9);
  CHECK(capped.dt0 <= 1e-9);
  CHECK(capped.dt_min <= capped.dt0);
  CHECK(to_string(SchemeMode::UFormulation) == "u-formulation");
  CHECK(to_string(InitialKind::Tanh) == "tanh");
}
