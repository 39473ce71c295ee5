#include "rdch/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "rdch/error.hpp"

namespace rdch {

std::string to_string(SteadyStatus s) {
  return s == SteadyStatus::Steady ? "steady" : "inconclusive";
}

std::string to_string(SteadyClass c) { return c == SteadyClass::Constant ? "constant" : "aggregate"; }

namespace {

constexpr double kPlateauBand = 1e-2;

double crossing(const Field& n, std::size_t k, double level) {
  const double a = n[k];
  const double b = n[k + 1];
  const double h = n.grid().spacing();
  return n.grid().x(k) + (level - a) / (b - a) * h;
}

}  // namespace

SteadyReport classify_profile(const Field& n, double tol_flux) {
  SteadyReport r;
  const double lo = n.min();
  const double hi = n.max();
  r.spread = hi - lo;
  if (r.spread < 10.0 * tol_flux) {
    r.kind = SteadyClass::Constant;
    return r;
  }
  r.kind = SteadyClass::Aggregate;

  int prev = 0;  // -1 low plateau, +1 high plateau, 0 neither
  for (double v : n.values()) {
    const int tag = v < kPlateauBand ? -1 : (v > hi - kPlateauBand ? 1 : 0);
    if (tag != 0 && tag != prev) {
      ++r.plateaus;
    }
    prev = tag;
  }

  const double l10 = lo + 0.1 * r.spread;
  const double l50 = lo + 0.5 * r.spread;
  const double l90 = lo + 0.9 * r.spread;
  const std::size_t size = n.size();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < size; ++i) {
    if (!((n[i] - l50) * (n[i + 1] - l50) < 0.0)) {
      continue;
    }
    const bool rising = n[i + 1] > n[i];
    std::optional<double> x_low;
    std::optional<double> x_high;
    if (rising) {
      for (std::size_t k = i + 1; k-- > 0;) {
        if (n[k] <= l10) {
          x_low = crossing(n, k, l10);
          break;
        }
      }
      for (std::size_t k = i + 1; k < size; ++k) {
        if (n[k] >= l90) {
          x_high = crossing(n, k - 1, l90);
          break;
        }
      }
    } else {
      for (std::size_t k = i + 1; k < size; ++k) {
        if (n[k] <= l10) {
          x_low = crossing(n, k - 1, l10);
          break;
        }
      }
      for (std::size_t k = i + 1; k-- > 0;) {
        if (n[k] >= l90) {
          x_high = crossing(n, k, l90);
          break;
        }
      }
    }
    if (x_low && x_high) {
      total += std::abs(*x_high - *x_low);
      ++r.interfaces;
    }
  }
  if (r.interfaces > 0) {
    r.interface_width = total / r.interfaces;
  }
  return r;
}

SteadyReport detect_steady_state(std::span<const DiagnosticsRecord> history, const Field& n,
                                 double tol_flux, double tol_energy, int window) {
  SteadyReport r = classify_profile(n, tol_flux);
  if (window < 1 || history.size() < static_cast<std::size_t>(window)) {
    return r;
  }
  const auto tail = history.subspan(history.size() - static_cast<std::size_t>(window));
  const bool frozen = std::all_of(tail.begin(), tail.end(),
                                  [&](const DiagnosticsRecord& rec) { return rec.flux_l2 < tol_flux; });
  const double e_last = tail.back().energy;
  const bool flat = std::abs(e_last - tail.front().energy) <= tol_energy * std::abs(e_last);
  if (frozen && flat) {
    r.status = SteadyStatus::Steady;
  }
  return r;
}

// ---------------------------------------------------------------------------
// checkpoint file

namespace {

constexpr std::string_view kCheckpointMagic = "rdch-checkpoint 1";

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (char ch : s) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex(double v) { return fmt::format("{:a}", v); }

double read_hex(std::istream& in, const char* what) {
  std::string tok;
  if (!(in >> tok)) {
    throw CheckpointError(fmt::format("corrupt checkpoint: missing {}", what));
  }
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size()) {
    throw CheckpointError(fmt::format("corrupt checkpoint: bad value '{}' for {}", tok, what));
  }
  return v;
}

template <class Int>
Int read_int(std::istream& in, const char* what) {
  long long v = 0;
  if (!(in >> v)) {
    throw CheckpointError(fmt::format("corrupt checkpoint: missing {}", what));
  }
  return static_cast<Int>(v);
}

void expect(std::istream& in, std::string_view label) {
  std::string tok;
  if (!(in >> tok) || tok != label) {
    throw CheckpointError(fmt::format("corrupt checkpoint: expected '{}'", label));
  }
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& cp) {
  std::string body;
  body += kCheckpointMagic;
  body += '\n';
  body += fmt::format("config_hash {:016x}\n", cp.config_hash);
  body += fmt::format("t {}\ndt {}\nstep_index {}\n", hex(cp.state.t), hex(cp.state.dt),
                      cp.state.step_index);
  body += fmt::format("consecutive_accepts {}\nenergy_slack {}\naccepted {}\nrejected {}\n",
                      cp.controller.consecutive_accepts, hex(cp.energy_slack), cp.accepted,
                      cp.rejected);
  body += fmt::format("npoints {}\nn", cp.state.n.size());
  for (double v : cp.state.n.values()) {
    body += ' ' + hex(v);
  }
  body += "\nphi";
  for (double v : cp.state.phi.values()) {
    body += ' ' + hex(v);
  }
  body += fmt::format("\nrecords {}\n", cp.window.size());
  for (const auto& r : cp.window) {
    body += fmt::format("{} {} {} {} {} {} {} {} {} {}\n", hex(r.t), hex(r.mass), hex(r.energy),
                        hex(r.dissipation), hex(r.entropy), hex(r.flux_l2), hex(r.n_min),
                        hex(r.n_max), r.fp_iterations, hex(r.dt));
  }
  const std::string tail = fmt::format("checksum {:016x}\n", fnv1a(body));
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw CheckpointError("cannot write checkpoint " + path.string());
  }
  out << body << tail;
  if (!out) {
    throw CheckpointError("failed while writing checkpoint " + path.string());
  }
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) {
    throw CheckpointError("cannot read checkpoint " + path.string());
  }
  std::stringstream buf;
  buf << file.rdbuf();
  const std::string text = buf.str();

  const auto pos = text.rfind("checksum ");
  if (pos == std::string::npos || (pos > 0 && text[pos - 1] != '\n')) {
    throw CheckpointError("corrupt checkpoint: no checksum line");
  }
  const std::string body = text.substr(0, pos);
  std::uint64_t stored = 0;
  {
    std::istringstream tail(text.substr(pos + 9));
    std::string tok;
    tail >> tok;
    char* end = nullptr;
    stored = std::strtoull(tok.c_str(), &end, 16);
    if (tok.empty() || end != tok.c_str() + tok.size()) {
      throw CheckpointError("corrupt checkpoint: unreadable checksum");
    }
  }
  if (stored != fnv1a(body)) {
    throw CheckpointError("corrupt checkpoint: checksum mismatch");
  }
  if (body.compare(0, kCheckpointMagic.size(), kCheckpointMagic) != 0 ||
      body.size() <= kCheckpointMagic.size() || body[kCheckpointMagic.size()] != '\n') {
    throw CheckpointError("unsupported checkpoint version");
  }

  std::istringstream in(body.substr(kCheckpointMagic.size() + 1));
  expect(in, "config_hash");
  std::string hash_tok;
  in >> hash_tok;
  Checkpoint cp{std::strtoull(hash_tok.c_str(), nullptr, 16),
                State{0.0, Field(Grid1D(1.0, Grid1D::kMinPoints)),
                      Field(Grid1D(1.0, Grid1D::kMinPoints)), 0.0, 0},
                {}, 0.0, 0, 0, {}};
  expect(in, "t");
  const double t = read_hex(in, "t");
  expect(in, "dt");
  const double dt = read_hex(in, "dt");
  expect(in, "step_index");
  const auto step_index = read_int<std::int64_t>(in, "step_index");
  expect(in, "consecutive_accepts");
  cp.controller.consecutive_accepts = read_int<int>(in, "consecutive_accepts");
  expect(in, "energy_slack");
  cp.energy_slack = read_hex(in, "energy_slack");
  expect(in, "accepted");
  cp.accepted = read_int<long>(in, "accepted");
  expect(in, "rejected");
  cp.rejected = read_int<long>(in, "rejected");
  expect(in, "npoints");
  const auto npoints = read_int<std::size_t>(in, "npoints");
  if (npoints < Grid1D::kMinPoints || npoints > (std::size_t{1} << 28)) {
    throw CheckpointError("corrupt checkpoint: implausible grid size");
  }
  std::vector<double> n(npoints), phi(npoints);
  expect(in, "n");
  for (auto& v : n) {
    v = read_hex(in, "n");
  }
  expect(in, "phi");
  for (auto& v : phi) {
    v = read_hex(in, "phi");
  }
  expect(in, "records");
  const auto nrec = read_int<std::size_t>(in, "records");
  if (nrec > (std::size_t{1} << 24)) {
    throw CheckpointError("corrupt checkpoint: implausible record count");
  }
  for (std::size_t k = 0; k < nrec; ++k) {
    DiagnosticsRecord r;
    r.t = read_hex(in, "record");
    r.mass = read_hex(in, "record");
    r.energy = read_hex(in, "record");
    r.dissipation = read_hex(in, "record");
    r.entropy = read_hex(in, "record");
    r.flux_l2 = read_hex(in, "record");
    r.n_min = read_hex(in, "record");
    r.n_max = read_hex(in, "record");
    r.fp_iterations = read_int<int>(in, "record");
    r.dt = read_hex(in, "record");
    cp.window.push_back(r);
  }
  // The grid length is not stored; restore() rebinds the samples to the
  // configured grid after checking the size.
  const Grid1D g(1.0, npoints);
  cp.state = State{t, Field(g, std::move(n)), Field(g, std::move(phi)), dt, step_index};
  return cp;
}

// ---------------------------------------------------------------------------
// driver

namespace {

[[noreturn]] void rethrow_with_config(const RunConfig& cfg, const std::exception& e) {
  std::throw_with_nested(
      RunFailure(fmt::format("run failed: {}\nconfiguration:\n{}", e.what(), cfg.to_text())));
}

struct Progress {
  long accepted = 0;
  long rejected = 0;
  std::deque<DiagnosticsRecord> window;
};

RunResult drive(const RunConfig& cfg, const RunOptions& opts, Stepper& st, Progress progress,
                bool resumed) {
  const auto t0 = std::chrono::steady_clock::now();
  const Model& model = st.model();
  RunResult res{.final_state = st.state()};
  res.accepted = progress.accepted;
  res.rejected = progress.rejected;
  res.energy_slack = st.energy_slack();
  res.initial_mass = integrate(st.state().n);
  res.initial_energy = energy(st.state(), model);
  res.max_lower_violation = std::max(0.0, -st.state().n.min());
  res.max_upper_violation = std::max(0.0, st.state().n.max() - 1.0);

  const bool to_disk = !cfg.output_dir.empty();
  std::optional<CsvSink> csv;
  if (to_disk) {
    std::filesystem::create_directories(cfg.output_dir);
    csv.emplace(cfg.output_dir / "diagnostics.csv", resumed);
  }
  auto snapshot = [&](const State& s) {
    if (to_disk && cfg.snapshot_stride > 0 && s.step_index % cfg.snapshot_stride == 0) {
      write_snapshot(cfg.output_dir / fmt::format("snap_{}.dat", s.step_index), s.n);
    }
  };
  auto record = [&](const DiagnosticsRecord& r) {
    res.records.push_back(r);
    progress.window.push_back(r);
    while (progress.window.size() > static_cast<std::size_t>(cfg.window)) {
      progress.window.pop_front();
    }
    if (csv) {
      csv->write(r);
    }
  };

  std::optional<EntropyBoundTracker> tracker;
  if (opts.track_entropy && model.regularized()) {
    tracker.emplace(st.state(), model);
  }

  if (!resumed) {
    record(make_record(st.state(), model, st.last_fp_iterations()));
    snapshot(st.state());
  }

  long last_recorded = res.accepted % cfg.diagnostics_stride == 0 ? res.accepted : -1;
  while (st.state().t < cfg.t_end && (cfg.max_steps == 0 || res.accepted < cfg.max_steps)) {
    if (opts.checkpoint_after && res.accepted >= *opts.checkpoint_after) {
      Checkpoint cp{cfg.physics_hash(), st.state(), st.controller(), st.energy_slack(),
                    res.accepted, res.rejected,
                    std::vector<DiagnosticsRecord>(progress.window.begin(), progress.window.end())};
      write_checkpoint(opts.checkpoint_path, cp);
      res.checkpointed = true;
      break;
    }
    std::optional<State> start;
    if (tracker) {
      start = st.state();
    }
    Stepper::Outcome out;
    try {
      out = st.advance(cfg.t_end);
    } catch (const std::exception& e) {
      rethrow_with_config(cfg, e);
    }
    ++res.accepted;
    res.rejected += out.rejections;
    const State& s = st.state();
    if (tracker) {
      tracker->accumulate(*start, out.dt_used);
    }
    res.max_mass_deviation =
        std::max(res.max_mass_deviation, std::abs(integrate(s.n) - res.initial_mass));
    res.max_energy_increase = std::max(res.max_energy_increase, out.energy_change);
    res.max_lower_violation = std::max(res.max_lower_violation, -s.n.min());
    res.max_upper_violation = std::max(res.max_upper_violation, s.n.max() - 1.0);
    if (opts.on_step) {
      opts.on_step(st, out);
    }
    if (res.accepted % cfg.diagnostics_stride == 0) {
      record(make_record(s, model, out.fp_iterations));
      last_recorded = res.accepted;
      if (cfg.steady_stop) {
        const std::vector<DiagnosticsRecord> w(progress.window.begin(), progress.window.end());
        if (detect_steady_state(w, s.n, cfg.tol_flux, cfg.tol_energy, cfg.window).status ==
            SteadyStatus::Steady) {
          res.stopped_steady = true;
          snapshot(s);
          break;
        }
      }
    }
    snapshot(s);
  }

  if (!res.checkpointed && last_recorded != res.accepted) {
    record(make_record(st.state(), model, st.last_fp_iterations()));
  }
  if (csv) {
    csv->flush();
  }
  res.final_state = st.state();
  const std::vector<DiagnosticsRecord> w(progress.window.begin(), progress.window.end());
  res.steady = detect_steady_state(w, res.final_state.n, cfg.tol_flux, cfg.tol_energy, cfg.window);
  if (tracker) {
    res.entropy_lhs = tracker->lhs(res.final_state);
    res.entropy_rhs = tracker->rhs(res.final_state.t);
  }
  res.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace

RunResult run(const RunConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  const Field n0 = cfg.initial_field();
  std::optional<Stepper> st;
  try {
    st.emplace(cfg.model(), cfg.scheme(), n0);
  } catch (const std::exception& e) {
    rethrow_with_config(cfg, e);
  }
  return drive(cfg, opts, *st, Progress{}, false);
}

RunResult restore(const RunConfig& cfg, const std::filesystem::path& checkpoint,
                  const RunOptions& opts) {
  cfg.validate();
  Checkpoint cp = read_checkpoint(checkpoint);
  if (cp.config_hash != cfg.physics_hash()) {
    throw CheckpointError("checkpoint was written for a different configuration");
  }
  if (cp.state.n.size() != cfg.npoints) {
    throw CheckpointError("checkpoint grid size differs from the configuration");
  }
  const Grid1D g = cfg.grid();
  State s{cp.state.t, Field(g, cp.state.n.data()), Field(g, cp.state.phi.data()), cp.state.dt,
          cp.state.step_index};
  SchemeConfig scheme = cfg.scheme();
  scheme.energy_slack = cp.energy_slack;
  Stepper st(cfg.model(), scheme, std::move(s), cp.controller);
  Progress p{cp.accepted, cp.rejected, {cp.window.begin(), cp.window.end()}};
  return drive(cfg, opts, st, std::move(p), true);
}

// ---------------------------------------------------------------------------
// sweeps

namespace {

struct Member {
  RunConfig cfg;
  std::optional<RunResult> result;
};

std::vector<std::exception_ptr> run_members(std::vector<Member>& members) {
  std::vector<std::exception_ptr> errors(members.size());
  const auto count = static_cast<std::ptrdiff_t>(members.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      auto& m = members[static_cast<std::size_t>(i)];
      m.result = run(m.cfg);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  return errors;
}

void fix_step(RunConfig& c, double dt) {
  c.dt0 = dt;
  c.dt_max = dt;
  c.dt_min = 1e-3 * dt;
  c.output_dir.clear();
  c.snapshot_stride = 0;
  c.steady_stop = false;
}

void finish_report(SweepReport& r) {
  r.strictly_decreasing = r.entries.size() >= 2;
  r.violations_decreasing = r.entries.size() >= 2;
  for (std::size_t i = 0; i + 1 < r.entries.size(); ++i) {
    const auto& a = r.entries[i];
    const auto& b = r.entries[i + 1];
    r.ratios.push_back(a.error_l2 > 0.0 ? b.error_l2 / a.error_l2 : 0.0);
    if (!(b.error_l2 < a.error_l2)) {
      r.strictly_decreasing = false;
    }
    if (!(std::max(b.lower_violation, b.upper_violation) <
          std::max(a.lower_violation, a.upper_violation))) {
      r.violations_decreasing = false;
    }
  }
}

SweepEntry entry_from(double param, const RunResult& res, const Field& reference) {
  return {param,
          l2_distance(res.final_state.n, reference),
          res.runtime_s,
          res.accepted,
          res.rejected,
          res.max_lower_violation,
          res.max_upper_violation};
}

void require_strictly_decreasing(std::span<const double> v, const char* what) {
  if (v.empty()) {
    throw ConfigError(fmt::format("{} sweep needs at least one value", what));
  }
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (!(v[i + 1] < v[i])) {
      throw ConfigError(fmt::format("{} sweep values must be strictly decreasing", what));
    }
  }
}

// Members are the sweep values followed by the reference run.
SweepReport collect(SweepReport rep, std::span<const double> params,
                    const std::vector<Member>& members,
                    const std::vector<std::exception_ptr>& errors) {
  const auto& ref = members.back().result;
  std::exception_ptr first;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (errors[i] && !first) {
      first = errors[i];
      failed = i;
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!members[i].result) {
      continue;
    }
    SweepEntry e = entry_from(params[i], *members[i].result,
                              ref ? ref->final_state.n : members[i].result->final_state.n);
    if (!ref) {
      e.error_l2 = std::numeric_limits<double>::quiet_NaN();
    }
    rep.entries.push_back(e);
  }
  finish_report(rep);
  if (first) {
    const double param = failed < params.size() ? params[failed] : rep.reference_param;
    try {
      std::rethrow_exception(first);
    } catch (...) {
      std::throw_with_nested(SweepFailure(
          fmt::format("{} sweep aborted: run at {} = {:.6g} failed", rep.parameter,
                      rep.parameter, param),
          rep));
    }
  }
  return rep;
}

}  // namespace

SweepReport sigma_sweep(const RunConfig& base, std::span<const double> sigmas) {
  require_strictly_decreasing(sigmas, "sigma");
  SweepReport rep;
  rep.parameter = "sigma";
  rep.reference_param = sigmas.back() / 10.0;

  RunConfig ref_cfg = base;
  ref_cfg.sigma = rep.reference_param;
  ref_cfg.dt0 = ref_cfg.dt_min = ref_cfg.dt_max = 0.0;
  ref_cfg.validate();
  rep.common_dt = ref_cfg.scheme().dt_max;

  std::vector<Member> members;
  for (double s : sigmas) {
    RunConfig c = base;
    c.sigma = s;
    fix_step(c, rep.common_dt);
    c.validate();
    members.push_back({c, {}});
  }
  fix_step(ref_cfg, rep.common_dt);
  members.push_back({ref_cfg, {}});
  const auto errors = run_members(members);
  return collect(std::move(rep), sigmas, members, errors);
}

SweepReport eps_sweep(const RunConfig& base, std::span<const double> epsilons) {
  require_strictly_decreasing(epsilons, "eps");
  SweepReport rep;
  rep.parameter = "eps";
  rep.reference_param = epsilons.back();

  std::vector<Member> members;
  double dt = std::numeric_limits<double>::infinity();
  for (double e : epsilons) {
    RunConfig c = base;
    c.eps = e;
    c.regularize = true;
    c.dt0 = c.dt_min = c.dt_max = 0.0;
    c.validate();
    dt = std::min(dt, c.scheme().dt_max);
    members.push_back({c, {}});
  }
  rep.common_dt = dt;
  for (auto& m : members) {
    fix_step(m.cfg, dt);
    m.cfg.validate();
  }
  const auto errors = run_members(members);
  return collect(std::move(rep), epsilons, members, errors);
}

void write_sweep_report(const std::filesystem::path& path, const SweepReport& r) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write sweep report " + path.string());
  }
  out << kSweepHeader << '\n';
  for (const auto& e : r.entries) {
    out << fmt::format("{:.17g},{:.17g},{:.17g},{},{}\n", e.param, e.error_l2, e.runtime_s,
                       e.accepted, e.rejected);
  }
}

void write_bound_report(const std::filesystem::path& path, const SweepReport& r) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write bound report " + path.string());
  }
  out << "param,lower_violation,upper_violation\n";
  for (const auto& e : r.entries) {
    out << fmt::format("{:.17g},{:.17g},{:.17g}\n", e.param, e.lower_violation,
                       e.upper_violation);
  }
}

}  // namespace rdch
