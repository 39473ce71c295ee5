#include "rdch/diagnostics.hpp"

#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "rdch/error.hpp"

namespace rdch {

namespace {

// f(a + delta) - f(a) from the derivative by 3-point Gauss-Legendre; exact for
// the polynomial pieces of psi_- and accurate to O(delta^7) otherwise.
template <class Deriv>
double increment_from_derivative(Deriv fprime, double a, double delta) {
  static constexpr std::array<double, 3> nodes = {0.5 - 0.3872983346207417, 0.5,
                                                  0.5 + 0.3872983346207417};
  static constexpr std::array<double, 3> weights = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  double s = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    s += weights[k] * fprime(a + nodes[k] * delta);
  }
  return delta * s;
}

constexpr double kSmallIncrement = 1e-4;

template <class Fn>
double function_increment(Fn f, double a, double delta) {
  if (std::abs(delta) > kSmallIncrement) {
    return f(a + delta).value - f(a).value;
  }
  return increment_from_derivative([&](double x) { return f(x).d1; }, a, delta);
}

}  // namespace

double energy(const Field& n, const Field& phi, const Model& model) {
  require_same_grid(n, phi);
  const double r = model.relax.ratio();
  const double h = n.grid().spacing();
  Field w(n.grid());
  double bulk = 0.0;
  double relax = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    w[i] = n[i] - r * phi[i];
    bulk += model.psi_plus(n[i]).value + model.psi_minus(w[i]).value;
    relax += phi[i] * phi[i];
  }
  return h * bulk + 0.5 * model.gamma() * gradient_sq_norm(w) + 0.5 * r * h * relax;
}

double energy_increment(const State& from, const Field& dn, const Field& phi_to,
                        const Model& model) {
  require_same_grid(from.n, dn);
  require_same_grid(from.n, phi_to);
  const double r = model.relax.ratio();
  const double h = from.n.grid().spacing();
  const std::size_t size = from.n.size();
  std::vector<double> dw(size);
  std::vector<double> w(size);
  double bulk = 0.0;
  double relax = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double dphi = phi_to[i] - from.phi[i];
    dw[i] = dn[i] - r * dphi;
    w[i] = from.n[i] - r * from.phi[i];
    bulk += function_increment([&](double x) { return model.psi_plus(x); }, from.n[i], dn[i]);
    bulk += function_increment([&](double x) { return model.psi_minus(x); }, w[i], dw[i]);
    relax += dphi * (phi_to[i] + from.phi[i]);
  }
  double grad = 0.0;
  for (std::size_t i = 0; i + 1 < size; ++i) {
    const double d_from = w[i + 1] - w[i];
    const double d_inc = dw[i + 1] - dw[i];
    grad += d_inc * (2.0 * d_from + d_inc);
  }
  return h * bulk + 0.5 * model.gamma() * grad / h + 0.5 * r * h * relax;
}

double energy_difference(const State& from, const State& to, const Model& model) {
  require_same_grid(from.n, to.n);
  return energy_increment(from, to.n - from.n, to.phi, model);
}

double dissipation(const State& s, const Model& model) {
  const Field b = model.mobility_field(s.n);
  const Field g = model.flux_argument(s.n, s.phi);
  const double h = s.n.grid().spacing();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    const double dg = g[i + 1] - g[i];
    total += 0.5 * (b[i] + b[i + 1]) * dg * dg;
  }
  return total / h;
}

double entropy(const Field& n, const Model& model) {
  const double h = n.grid().spacing();
  double total = 0.0;
  if (model.regularized()) {
    const EntropyDensity density(model.mobility());
    for (double v : n.values()) {
      total += density.value(v);
    }
  } else {
    for (double v : n.values()) {
      total += unregularized_entropy_density(v);
    }
  }
  return h * total;
}

EntropyTerms entropy_dissipation_terms(const State& s, const Model& model) {
  const double r = model.relax.ratio();
  const double h = s.n.grid().spacing();
  const Field w = s.n - r * s.phi;
  const Field lap_w = laplacian(w);
  EntropyTerms t;
  t.laplacian_term = model.gamma() * inner_product(lap_w, lap_w);
  t.grad_phi_term = r * gradient_sq_norm(s.phi);
  for (std::size_t i = 0; i + 1 < s.n.size(); ++i) {
    const double dw = (w[i + 1] - w[i]) / h;
    const double dn = (s.n[i + 1] - s.n[i]) / h;
    const double w_face = 0.5 * (w[i] + w[i + 1]);
    const double n_face = 0.5 * (s.n[i] + s.n[i + 1]);
    t.psi_minus_term += h * model.psi_minus(w_face).d2 * dw * dw;
    t.psi_plus_term += h * model.psi_plus(n_face).d2 * dn * dn;
  }
  return t;
}

double flux_l2(const State& s, const Model& model) {
  const auto flux = face_flux(model.mobility_field(s.n), model.flux_argument(s.n, s.phi));
  double sum = 0.0;
  for (double f : flux) {
    sum += f * f;
  }
  return std::sqrt(s.n.grid().spacing() * sum);
}

DiagnosticsRecord make_record(const State& s, const Model& model, int fp_iterations) {
  DiagnosticsRecord r;
  r.t = s.t;
  r.mass = integrate(s.n);
  r.energy = energy(s, model);
  r.dissipation = dissipation(s, model);
  r.entropy = entropy(s.n, model);
  r.flux_l2 = flux_l2(s, model);
  r.n_min = s.n.min();
  r.n_max = s.n.max();
  r.fp_iterations = fp_iterations;
  r.dt = s.dt;
  return r;
}

EntropyBoundTracker::EntropyBoundTracker(const State& initial, const Model& model)
    : model_(&model), phi0_(entropy(initial.n, model)), energy0_(energy(initial, model)) {}

void EntropyBoundTracker::accumulate(const State& step_start, double dt) {
  integral_ += dt * entropy_dissipation_terms(step_start, *model_).positive();
}

double EntropyBoundTracker::lhs(const State& current) const {
  return entropy(current.n, *model_) + integral_;
}

double EntropyBoundTracker::rhs(double elapsed) const {
  const double sup_d2 = psi_minus_sup_norms(model_->potential).d2;
  return phi0_ + 2.0 * elapsed / model_->gamma() * sup_d2 * energy0_;
}

std::string format_record(const DiagnosticsRecord& r) {
  return fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{:.17g}",
                     r.t, r.mass, r.energy, r.dissipation, r.entropy, r.flux_l2, r.n_min, r.n_max,
                     r.fp_iterations, r.dt);
}

CsvSink::CsvSink(const std::filesystem::path& path, bool append) {
  const bool exists = std::filesystem::exists(path);
  out_.open(path, append ? std::ios::app : std::ios::trunc);
  if (!out_) {
    throw std::runtime_error("cannot open diagnostics file " + path.string());
  }
  if (!append || !exists) {
    out_ << kDiagnosticsHeader << '\n';
  }
}

void CsvSink::write(const DiagnosticsRecord& r) { out_ << format_record(r) << '\n'; }

}  // namespace rdch
