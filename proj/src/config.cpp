#include "rdch/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "rdch/error.hpp"

namespace rdch {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_double(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(fmt::format("{}: '{}' is not a number", key, s));
  }
  return v;
}

template <class Int>
Int parse_int(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(fmt::format("{}: '{}' is not an integer", key, s));
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes") {
    return true;
  }
  if (s == "false" || s == "0" || s == "no") {
    return false;
  }
  throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, s));
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

struct Entry {
  const char* key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
  bool physics = true;
};

#define RDCH_DOUBLE(KEY, MEMBER)                                                     \
  Entry {                                                                            \
    KEY, [](RunConfig& c, std::string_view v) { c.MEMBER = parse_double(KEY, v); }, \
        [](const RunConfig& c) { return num(c.MEMBER); }                             \
  }

#define RDCH_INT(KEY, MEMBER, TYPE)                                                        \
  Entry {                                                                                  \
    KEY, [](RunConfig& c, std::string_view v) { c.MEMBER = parse_int<TYPE>(KEY, v); },   \
        [](const RunConfig& c) { return std::to_string(c.MEMBER); }                        \
  }

const std::vector<Entry>& table() {
  static const std::vector<Entry> entries = [] {
    std::vector<Entry> e = {
        RDCH_DOUBLE("grid.L", length),
        RDCH_INT("grid.N", npoints, std::size_t),
        RDCH_DOUBLE("potential.nstar", potential.nstar),
        RDCH_DOUBLE("potential.k", potential.k),
        Entry{"mobility.kind",
              [](RunConfig&, std::string_view v) {
                if (trim(v) != "polynomial") {
                  throw ConfigError("mobility.kind: only 'polynomial' is available");
                }
              },
              [](const RunConfig&) { return std::string("polynomial"); }},
        RDCH_DOUBLE("params.gamma", gamma),
        RDCH_DOUBLE("params.sigma", sigma),
        RDCH_DOUBLE("params.eps", eps),
        Entry{"scheme.mode",
              [](RunConfig& c, std::string_view v) {
                const std::string s = trim(v);
                if (s == "explicit") {
                  c.mode = SchemeMode::Explicit;
                } else if (s == "semi-implicit") {
                  c.mode = SchemeMode::SemiImplicit;
                } else if (s == "u-formulation") {
                  c.mode = SchemeMode::UFormulation;
                } else {
                  throw ConfigError(
                      "scheme.mode must be explicit, semi-implicit or u-formulation, got '" + s +
                      "'");
                }
              },
              [](const RunConfig& c) { return to_string(c.mode); }},
        Entry{"scheme.regularize",
              [](RunConfig& c, std::string_view v) {
                c.regularize = parse_bool("scheme.regularize", v);
              },
              [](const RunConfig& c) { return std::string(c.regularize ? "true" : "false"); }},
        RDCH_DOUBLE("scheme.dt0", dt0),
        RDCH_DOUBLE("scheme.dt_min", dt_min),
        RDCH_DOUBLE("scheme.dt_max", dt_max),
        RDCH_DOUBLE("scheme.energy_slack", energy_slack),
        RDCH_DOUBLE("scheme.fp_tol", fp_tol),
        RDCH_INT("scheme.fp_maxiter", fp_maxiter, int),
        RDCH_DOUBLE("scheme.stabilization", stabilization),
        RDCH_DOUBLE("scheme.semi_factor", semi_factor),
        Entry{"init.kind",
              [](RunConfig& c, std::string_view v) {
                const std::string s = trim(v);
                if (s == "constant") {
                  c.init.kind = InitialKind::Constant;
                } else if (s == "cosine") {
                  c.init.kind = InitialKind::Cosine;
                } else if (s == "tanh") {
                  c.init.kind = InitialKind::Tanh;
                } else if (s == "noise") {
                  c.init.kind = InitialKind::Noise;
                } else {
                  throw ConfigError("init.kind must be constant, cosine, tanh or noise, got '" +
                                    s + "'");
                }
              },
              [](const RunConfig& c) { return to_string(c.init.kind); }},
        RDCH_DOUBLE("init.m", init.m),
        RDCH_DOUBLE("init.a", init.a),
        RDCH_INT("init.j", init.j, int),
        RDCH_DOUBLE("init.lo", init.lo),
        RDCH_DOUBLE("init.hi", init.hi),
        RDCH_DOUBLE("init.x0", init.x0),
        RDCH_DOUBLE("init.width", init.width),
        RDCH_INT("init.smoothing", init.smoothing, int),
        RDCH_INT("seed", seed, std::uint64_t),
        RDCH_DOUBLE("steady.tol_flux", tol_flux),
        RDCH_DOUBLE("steady.tol_energy", tol_energy),
        RDCH_INT("steady.window", window, int),
        Entry{"steady.stop",
              [](RunConfig& c, std::string_view v) { c.steady_stop = parse_bool("steady.stop", v); },
              [](const RunConfig& c) { return std::string(c.steady_stop ? "true" : "false"); }},
        RDCH_INT("output.diagnostics_stride", diagnostics_stride, long),
    };
    auto non_physics = [](Entry x) {
      x.physics = false;
      return x;
    };
    e.push_back(non_physics(RDCH_DOUBLE("t_end", t_end)));
    e.push_back(non_physics(RDCH_INT("max_steps", max_steps, long)));
    e.push_back(non_physics(Entry{
        "output.dir",
        [](RunConfig& c, std::string_view v) { c.output_dir = trim(v); },
        [](const RunConfig& c) { return c.output_dir.string(); }}));
    e.push_back(non_physics(RDCH_INT("output.snapshot_stride", snapshot_stride, long)));
    return e;
  }();
  return entries;
}

#undef RDCH_DOUBLE
#undef RDCH_INT

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

}  // namespace

std::string to_string(SchemeMode mode) {
  switch (mode) {
    case SchemeMode::Explicit:
      return "explicit";
    case SchemeMode::SemiImplicit:
      return "semi-implicit";
    case SchemeMode::UFormulation:
      return "u-formulation";
  }
  return "unknown";
}

std::string to_string(InitialKind kind) {
  switch (kind) {
    case InitialKind::Constant:
      return "constant";
    case InitialKind::Cosine:
      return "cosine";
    case InitialKind::Tanh:
      return "tanh";
    case InitialKind::Noise:
      return "noise";
  }
  return "unknown";
}

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (const auto& e : table()) {
      out.emplace_back(e.key);
    }
    return out;
  }();
  return k;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  for (const auto& e : table()) {
    if (key == e.key) {
      e.set(*this, value);
      return;
    }
  }
  fail("unknown configuration key '" + std::string(key) + "'");
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& e : table()) {
    out += fmt::format("{} = {}\n", e.key, e.get(*this));
  }
  return out;
}

std::uint64_t RunConfig::physics_hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& e : table()) {
    if (!e.physics) {
      continue;
    }
    for (char ch : fmt::format("{}={};", e.key, e.get(*this))) {
      h ^= static_cast<unsigned char>(ch);
      h *= 1099511628211ull;
    }
  }
  return h;
}

Model RunConfig::model() const {
  Model m;
  m.potential = potential;
  m.relax = RelaxationParams{sigma, gamma, fp_tol, fp_maxiter};
  m.eps = regularize ? std::optional<double>(eps) : std::nullopt;
  m.mobility_kind = mobility;
  return m;
}

SchemeConfig RunConfig::scheme() const {
  SchemeConfig s = default_scheme(grid(), model(), mode, semi_factor);
  if (dt_max > 0.0) {
    s.dt_max = dt_max;
  }
  s.dt0 = dt0 > 0.0 ? dt0 : std::min(s.dt0, s.dt_max);
  s.dt_min = dt_min > 0.0 ? dt_min : std::min(s.dt_min, s.dt0);
  s.energy_slack = energy_slack;
  s.stabilization = stabilization;
  return s;
}

Field RunConfig::initial_field() const {
  const Grid1D g = grid();
  const double len = length;
  switch (init.kind) {
    case InitialKind::Constant:
      return Field(g, init.m);
    case InitialKind::Cosine:
      return Field::from_function(g, [&](double x) {
        return init.m + init.a * std::cos(init.j * std::numbers::pi * x / len);
      });
    case InitialKind::Tanh:
      return Field::from_function(g, [&](double x) {
        return init.lo + 0.5 * (init.hi - init.lo) *
                             (1.0 + std::tanh((x - init.x0 * len) / (init.width * len)));
      });
    case InitialKind::Noise: {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> dist(init.lo, init.hi);
      std::vector<double> v(g.size());
      for (auto& x : v) {
        x = dist(rng);
      }
      std::vector<double> tmp(v.size());
      for (int pass = 0; pass < init.smoothing; ++pass) {
        for (std::size_t i = 0; i < v.size(); ++i) {
          const double left = v[i == 0 ? 0 : i - 1];
          const double right = v[i + 1 == v.size() ? i : i + 1];
          tmp[i] = 0.25 * left + 0.5 * v[i] + 0.25 * right;
        }
        std::swap(v, tmp);
      }
      return Field(g, std::move(v));
    }
  }
  throw ConfigError("unknown initial condition");
}

void RunConfig::validate() const {
  if (!(length > 0.0) || !std::isfinite(length)) {
    fail(fmt::format("grid.L must be positive and finite, got {}", length));
  }
  if (npoints < Grid1D::kMinPoints) {
    fail(fmt::format("grid.N must be at least {}, got {}", Grid1D::kMinPoints, npoints));
  }
  if (!(potential.nstar > 0.0 && potential.nstar <= 0.7)) {
    fail(fmt::format("potential.nstar must lie in (0, 0.7], got {}", potential.nstar));
  }
  if (!std::isfinite(potential.k)) {
    fail("potential.k must be finite");
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    fail(fmt::format("params.gamma must be positive, got {}", gamma));
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    fail(fmt::format("params.sigma must be positive, got {}", sigma));
  }
  const double contraction = sigma / gamma * psi_minus_sup_norms(potential).d2;
  if (!(contraction < 1.0)) {
    fail(fmt::format("contraction condition violated: (sigma/gamma) sup|psi_-''| = {} must be < 1",
                     contraction));
  }
  if (regularize && !(eps >= kMinEps && eps <= kMaxEps)) {
    fail(fmt::format("params.eps must lie in [1e-8, 1e-1], got {}", eps));
  }
  if (!(fp_tol > 0.0)) {
    fail("scheme.fp_tol must be positive");
  }
  if (fp_maxiter < 2) {
    fail("scheme.fp_maxiter must be at least 2");
  }
  if (dt0 < 0.0 || dt_min < 0.0 || dt_max < 0.0) {
    fail("scheme.dt0, scheme.dt_min and scheme.dt_max must be non-negative (0 selects the default)");
  }
  if (!(semi_factor >= 1.0)) {
    fail("scheme.semi_factor must be at least 1");
  }
  if (!(t_end > 0.0) || !std::isfinite(t_end)) {
    fail(fmt::format("t_end must be positive and finite, got {}", t_end));
  }
  if (max_steps < 0) {
    fail("max_steps must be non-negative");
  }
  if (snapshot_stride < 0) {
    fail("output.snapshot_stride must be non-negative");
  }
  if (diagnostics_stride < 1) {
    fail("output.diagnostics_stride must be at least 1");
  }
  if (!(tol_flux > 0.0) || !(tol_energy > 0.0)) {
    fail("steady.tol_flux and steady.tol_energy must be positive");
  }
  if (window < 2) {
    fail("steady.window must be at least 2");
  }

  const auto& ic = init;
  switch (ic.kind) {
    case InitialKind::Constant:
      if (!(ic.m >= 0.0 && ic.m < 1.0)) {
        fail(fmt::format("init.m must lie in [0, 1) for constant data, got {}", ic.m));
      }
      break;
    case InitialKind::Cosine:
      if (ic.j < 0) {
        fail("init.j must be non-negative");
      }
      if (!(ic.m - std::abs(ic.a) >= 0.0 && ic.m + std::abs(ic.a) < 1.0)) {
        fail(fmt::format("cosine initial data m +- |a| = [{}, {}] must lie in [0, 1)",
                         ic.m - std::abs(ic.a), ic.m + std::abs(ic.a)));
      }
      break;
    case InitialKind::Tanh:
      if (!(ic.lo >= 0.0 && ic.lo < 1.0 && ic.hi >= 0.0 && ic.hi < 1.0)) {
        fail("tanh initial data: init.lo and init.hi must lie in [0, 1)");
      }
      if (!(ic.width > 0.0)) {
        fail("tanh initial data: init.width must be positive");
      }
      if (!(ic.x0 >= 0.0 && ic.x0 <= 1.0)) {
        fail("tanh initial data: init.x0 is a fraction of L and must lie in [0, 1]");
      }
      break;
    case InitialKind::Noise:
      if (!(ic.lo >= 0.0 && ic.lo < ic.hi && ic.hi < 1.0)) {
        fail("noise initial data needs 0 <= init.lo < init.hi < 1");
      }
      if (ic.smoothing < 0) {
        fail("init.smoothing must be non-negative");
      }
      break;
  }

  const SchemeConfig s = scheme();
  try {
    s.validate();
  } catch (const ConfigError& e) {
    fail(std::string("scheme: ") + e.what());
  }
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    const std::string body = trim(line);
    if (body.empty()) {
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("line {}: expected 'key = value'", lineno));
    }
    cfg.set(trim(std::string_view(body).substr(0, eq)),
            trim(std::string_view(body).substr(eq + 1)));
  }
  return cfg;
}

std::string environment_name(std::string_view key) {
  std::string out = "RDCH_";
  for (char ch : key) {
    out += ch == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  }
  return out;
}

void apply_environment(RunConfig& cfg) {
  for (const auto& key : RunConfig::keys()) {
    if (const char* v = std::getenv(environment_name(key).c_str())) {
      cfg.set(key, v);
    }
  }
}

RunConfig load_config(const std::filesystem::path& path, bool use_environment) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot read configuration file " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig cfg = parse_config(buf.str());
  if (use_environment) {
    apply_environment(cfg);
  }
  return cfg;
}

}  // namespace rdch
