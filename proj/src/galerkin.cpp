#include "rdch/galerkin.hpp"

#include <algorithm>
#include <numbers>

namespace rdch {

SpectralBasis::SpectralBasis(double length, std::size_t modes)
    : length_(length), modes_(modes) {
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw InvalidArgument("spectral basis length must be positive and finite");
  }
  if (modes < 1) {
    throw InvalidArgument("spectral basis needs at least one mode");
  }
  const std::size_t nq = kQuadratureFactor * modes;
  weight_ = length / static_cast<double>(nq);
  nodes_.resize(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    nodes_[q] = (static_cast<double>(q) + 0.5) * weight_;
  }
  lambda_.resize(modes);
  value_.resize(modes * nq);
  slope_.resize(modes * nq);
  const double c0 = 1.0 / std::sqrt(length);
  const double cj = std::sqrt(2.0 / length);
  for (std::size_t j = 0; j < modes; ++j) {
    const double k = static_cast<double>(j) * std::numbers::pi / length;
    lambda_[j] = k * k;
    for (std::size_t q = 0; q < nq; ++q) {
      if (j == 0) {
        value_[q] = c0;
        slope_[q] = 0.0;
      } else {
        value_[j * nq + q] = cj * std::cos(k * nodes_[q]);
        slope_[j * nq + q] = -cj * k * std::sin(k * nodes_[q]);
      }
    }
  }
}

std::vector<double> SpectralBasis::project(std::span<const double> samples) const {
  const std::size_t nq = nodes_.size();
  if (samples.size() != nq) {
    throw InvalidArgument("projection expects one sample per quadrature node");
  }
  std::vector<double> out(modes_, 0.0);
  for (std::size_t j = 0; j < modes_; ++j) {
    const double* row = &value_[j * nq];
    double s = 0.0;
    for (std::size_t q = 0; q < nq; ++q) {
      s += row[q] * samples[q];
    }
    out[j] = weight_ * s;
  }
  return out;
}

namespace {

std::vector<double> synthesize(std::span<const double> coeffs, const std::vector<double>& table,
                               std::size_t modes, std::size_t nq) {
  if (coeffs.size() != modes) {
    throw InvalidArgument("coefficient vector length differs from the number of modes");
  }
  std::vector<double> out(nq, 0.0);
  for (std::size_t j = 0; j < modes; ++j) {
    const double cj = coeffs[j];
    const double* row = &table[j * nq];
    for (std::size_t q = 0; q < nq; ++q) {
      out[q] += cj * row[q];
    }
  }
  return out;
}

}  // namespace

std::vector<double> SpectralBasis::reconstruct(std::span<const double> coeffs) const {
  return synthesize(coeffs, value_, modes_, nodes_.size());
}

std::vector<double> SpectralBasis::reconstruct_derivative(std::span<const double> coeffs) const {
  return synthesize(coeffs, slope_, modes_, nodes_.size());
}

double SpectralBasis::evaluate(std::span<const double> coeffs, double x) const {
  double s = coeffs[0] / std::sqrt(length_);
  const double cj = std::sqrt(2.0 / length_);
  for (std::size_t j = 1; j < modes_; ++j) {
    s += coeffs[j] * cj * std::cos(static_cast<double>(j) * std::numbers::pi * x / length_);
  }
  return s;
}

Field SpectralBasis::to_grid(std::span<const double> coeffs, const Grid1D& grid) const {
  if (std::abs(grid.length() - length_) > 1e-14 * length_) {
    throw InvalidArgument("grid and spectral basis cover different intervals");
  }
  return Field::from_function(grid, [&](double x) { return evaluate(coeffs, x); });
}

CoefficientSolve solve_d_from_c(const SpectralBasis& basis, std::span<const double> c,
                                const Model& model, const std::vector<double>* guess) {
  const PotentialSpec& p = model.potential;
  return solve_d_from_c_with(
      basis, c, model.relax, [&p](double w) { return eval_psi_minus(p, w).d1; }, guess);
}

SpectralSolver::SpectralSolver(Model model, SpectralBasis basis)
    : model_(std::move(model)), basis_(std::move(basis)) {
  if (!model_.regularized()) {
    throw InvalidArgument("the spectral solver runs the regularized system only");
  }
}

SpectralState SpectralSolver::initial_state_from_nodes(std::span<const double> samples) const {
  SpectralState s;
  s.c = basis_.project(samples);
  s.d = solve_d_from_c(basis_, s.c, model_).d;
  return s;
}

std::vector<double> SpectralSolver::gradient_argument(std::span<const double> n_nodes,
                                                      std::span<const double> d) const {
  std::vector<double> dpsi(n_nodes.size());
  for (std::size_t q = 0; q < n_nodes.size(); ++q) {
    dpsi[q] = model_.psi_plus(n_nodes[q]).d1;
  }
  std::vector<double> g = basis_.project(dpsi);
  for (std::size_t j = 0; j < g.size(); ++j) {
    g[j] += d[j];
  }
  return basis_.reconstruct_derivative(g);
}

std::vector<double> SpectralSolver::rhs(std::span<const double> c,
                                        std::span<const double> d) const {
  const std::vector<double> n_nodes = basis_.reconstruct(c);
  std::vector<double> flux = gradient_argument(n_nodes, d);
  for (std::size_t q = 0; q < flux.size(); ++q) {
    flux[q] *= model_.mobility_at(n_nodes[q]);
  }
  const std::size_t nq = basis_.quadrature_size();
  std::vector<double> out(basis_.modes(), 0.0);
  for (std::size_t j = 1; j < basis_.modes(); ++j) {
    double s = 0.0;
    for (std::size_t q = 0; q < nq; ++q) {
      s += flux[q] * basis_.mode_slope(j, q);
    }
    out[j] = -basis_.weight() * s;
  }
  return out;
}

SpectralState SpectralSolver::step(const SpectralState& s, double dt) const {
  const std::size_t m = basis_.modes();
  auto shifted = [&](const std::vector<double>& k, double a) {
    std::vector<double> c(m);
    for (std::size_t j = 0; j < m; ++j) {
      c[j] = s.c[j] + a * k[j];
    }
    return c;
  };
  const auto k1 = rhs(s.c, s.d);
  const auto c2 = shifted(k1, 0.5 * dt);
  const auto d2 = solve_d_from_c(basis_, c2, model_, &s.d).d;
  const auto k2 = rhs(c2, d2);
  const auto c3 = shifted(k2, 0.5 * dt);
  const auto d3 = solve_d_from_c(basis_, c3, model_, &d2).d;
  const auto k3 = rhs(c3, d3);
  const auto c4 = shifted(k3, dt);
  const auto d4 = solve_d_from_c(basis_, c4, model_, &d3).d;
  const auto k4 = rhs(c4, d4);

  SpectralState out;
  out.c.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    out.c[j] = s.c[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  }
  out.d = solve_d_from_c(basis_, out.c, model_, &d4).d;
  out.t = s.t + dt;
  return out;
}

SpectralState SpectralSolver::integrate(SpectralState s, double dt, long nsteps) const {
  for (long k = 0; k < nsteps; ++k) {
    s = step(s, dt);
    for (double v : s.c) {
      if (!std::isfinite(v)) {
        throw DomainError("spectral integration produced a non-finite coefficient at step " +
                          std::to_string(k + 1) + " (t = " + std::to_string(s.t) + ")");
      }
    }
  }
  return s;
}

double SpectralSolver::energy(const SpectralState& s) const {
  const double r = model_.relax.ratio();
  const auto n_nodes = basis_.reconstruct(s.c);
  const auto phi_nodes = basis_.reconstruct(s.d);
  double bulk = 0.0;
  for (std::size_t q = 0; q < n_nodes.size(); ++q) {
    bulk += model_.psi_plus(n_nodes[q]).value +
            model_.psi_minus(n_nodes[q] - r * phi_nodes[q]).value;
  }
  double grad = 0.0;
  double relax = 0.0;
  for (std::size_t j = 0; j < basis_.modes(); ++j) {
    const double w = s.c[j] - r * s.d[j];
    grad += basis_.eigenvalue(j) * w * w;
    relax += s.d[j] * s.d[j];
  }
  return basis_.weight() * bulk + 0.5 * model_.gamma() * grad + 0.5 * r * relax;
}

double SpectralSolver::dissipation(const SpectralState& s) const {
  const auto n_nodes = basis_.reconstruct(s.c);
  const auto gx = gradient_argument(n_nodes, s.d);
  double total = 0.0;
  for (std::size_t q = 0; q < gx.size(); ++q) {
    total += model_.mobility_at(n_nodes[q]) * gx[q] * gx[q];
  }
  return basis_.weight() * total;
}

double SpectralSolver::default_dt() const {
  const double lam = basis_.eigenvalue(basis_.modes() - 1);
  if (lam == 0.0) {
    return 1.0;
  }
  const double b_max = 4.0 / 27.0;
  const double relax_symbol = model_.gamma() * lam / (1.0 + model_.sigma() * lam);
  const double rate = lam * (b_max * relax_symbol + model_.sup_mobility_times_curvature());
  return 0.5 * 2.78 / rate;
}

void export_snapshot(const std::filesystem::path& path, const SpectralBasis& basis,
                     std::span<const double> coeffs) {
  write_snapshot(path, basis.nodes(), basis.reconstruct(coeffs));
}

}  // namespace rdch
