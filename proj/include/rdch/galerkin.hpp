#pragma once

// Spectral Galerkin solver in the Neumann cosine eigenbasis, used as an
// independent reference for the finite-difference stepper. The coefficient
// vector c carries n, d carries phi; all nonlinear terms are evaluated by a
// midpoint rule on 4 * modes nodes.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rdch/elliptic.hpp"
#include "rdch/error.hpp"
#include "rdch/grid.hpp"
#include "rdch/model.hpp"

namespace rdch {

class SpectralBasis {
 public:
  static constexpr std::size_t kQuadratureFactor = 4;

  SpectralBasis(double length, std::size_t modes);

  double length() const noexcept { return length_; }
  std::size_t modes() const noexcept { return modes_; }
  std::size_t quadrature_size() const noexcept { return nodes_.size(); }
  double weight() const noexcept { return weight_; }
  double node(std::size_t q) const noexcept { return nodes_[q]; }
  std::span<const double> nodes() const noexcept { return nodes_; }
  /// (j pi / L)^2; zero for the constant mode.
  double eigenvalue(std::size_t j) const noexcept { return lambda_[j]; }

  double mode_value(std::size_t j, std::size_t q) const noexcept { return value_[j * nodes_.size() + q]; }
  double mode_slope(std::size_t j, std::size_t q) const noexcept { return slope_[j * nodes_.size() + q]; }

  /// Quadrature coefficients (f, phi_j) from samples at the nodes.
  std::vector<double> project(std::span<const double> samples) const;
  /// Samples of sum_j c_j phi_j at the nodes.
  std::vector<double> reconstruct(std::span<const double> coeffs) const;
  /// Samples of the x-derivative of sum_j c_j phi_j at the nodes.
  std::vector<double> reconstruct_derivative(std::span<const double> coeffs) const;
  /// sum_j c_j phi_j(x) at an arbitrary point.
  double evaluate(std::span<const double> coeffs, double x) const;
  /// Evaluation at the cell centres of a finite-difference grid on the same interval.
  Field to_grid(std::span<const double> coeffs, const Grid1D& grid) const;

 private:
  double length_;
  std::size_t modes_;
  double weight_;
  std::vector<double> nodes_;
  std::vector<double> lambda_;
  std::vector<double> value_;
  std::vector<double> slope_;
};

struct SpectralState {
  std::vector<double> c;
  std::vector<double> d;
  double t = 0.0;
};

struct CoefficientSolve {
  std::vector<double> d;
  int iterations = 0;
  /// max_j |(1 + sigma lambda_j) d_j - gamma lambda_j c_j - (psi_-'(w), phi_j)|
  double residual = 0.0;
};

namespace detail {

template <class DPsiMinus>
std::vector<double> projected_concave_force(const SpectralBasis& basis,
                                            const std::vector<double>& n_nodes,
                                            std::span<const double> d, double ratio,
                                            DPsiMinus dpsi_minus) {
  std::vector<double> phi = basis.reconstruct(d);
  for (std::size_t q = 0; q < phi.size(); ++q) {
    phi[q] = dpsi_minus(n_nodes[q] - ratio * phi[q]);
  }
  return basis.project(phi);
}

}  // namespace detail

/// Picard iteration
///   d_j <- [gamma lambda_j c_j + (psi_-'(n - sigma/gamma phi), phi_j)] / (1 + sigma lambda_j)
/// with the same stopping rule as the grid solver. sigma = 0 decouples and
/// finishes after one sweep.
template <class DPsiMinus>
CoefficientSolve solve_d_from_c_with(const SpectralBasis& basis, std::span<const double> c,
                                     const RelaxationParams& params, DPsiMinus dpsi_minus,
                                     const std::vector<double>* guess = nullptr) {
  const std::size_t m = basis.modes();
  const std::vector<double> n_nodes = basis.reconstruct(c);
  const double ratio = params.sigma / params.gamma;
  CoefficientSolve out;
  out.d = guess ? *guess : std::vector<double>(m, 0.0);
  std::vector<double> next(m);

  auto sweep = [&](const std::vector<double>& d) {
    const auto force = detail::projected_concave_force(basis, n_nodes, d, ratio, dpsi_minus);
    for (std::size_t j = 0; j < m; ++j) {
      const double lam = basis.eigenvalue(j);
      next[j] = (params.gamma * lam * c[j] + force[j]) / (1.0 + params.sigma * lam);
    }
  };

  for (int it = 1; it <= params.fp_maxiter; ++it) {
    sweep(out.d);
    double increment = 0.0;
    double scale = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      increment = std::max(increment, std::abs(next[j] - out.d[j]));
      scale = std::max(scale, std::abs(next[j]));
    }
    std::swap(out.d, next);
    out.iterations = it;
    if (!std::isfinite(increment)) {
      throw ConvergenceError("spectral relaxation produced non-finite coefficients", it, 0.0);
    }
    const bool decoupled = params.sigma == 0.0;
    if (decoupled || increment < params.fp_tol ||
        (it > 1 && increment <= 16.0 * std::numeric_limits<double>::epsilon() * scale)) {
      const auto force = detail::projected_concave_force(basis, n_nodes, out.d, ratio, dpsi_minus);
      for (std::size_t j = 0; j < m; ++j) {
        const double lam = basis.eigenvalue(j);
        out.residual = std::max(out.residual, std::abs((1.0 + params.sigma * lam) * out.d[j] -
                                                       params.gamma * lam * c[j] - force[j]));
      }
      return out;
    }
  }
  throw ConvergenceError("spectral relaxation did not converge in " +
                             std::to_string(params.fp_maxiter) + " iterations",
                         params.fp_maxiter, 0.0);
}

CoefficientSolve solve_d_from_c(const SpectralBasis& basis, std::span<const double> c,
                                const Model& model, const std::vector<double>* guess = nullptr);

/// Coefficient ODE dc_j/dt = -(B_eps(n) d/dx(phi^N + Pi^N psi_{+,eps}'(n)), phi_j')
/// advanced by classical RK4 with phi^N recomputed at every stage.
class SpectralSolver {
 public:
  /// Requires a regularized model.
  SpectralSolver(Model model, SpectralBasis basis);

  const SpectralBasis& basis() const noexcept { return basis_; }
  const Model& model() const noexcept { return model_; }

  template <class Fn>
  SpectralState initial_state(Fn n0) const {
    std::vector<double> samples(basis_.quadrature_size());
    for (std::size_t q = 0; q < samples.size(); ++q) {
      samples[q] = n0(basis_.node(q));
    }
    return initial_state_from_nodes(samples);
  }
  SpectralState initial_state_from_nodes(std::span<const double> samples) const;

  /// Right-hand side of the coefficient ODE; d is the relaxation solution for c.
  std::vector<double> rhs(std::span<const double> c, std::span<const double> d) const;

  SpectralState step(const SpectralState& s, double dt) const;
  /// nsteps RK4 steps of length dt; throws DomainError on a non-finite state.
  SpectralState integrate(SpectralState s, double dt, long nsteps) const;

  /// Continuous energy of the reconstruction, gradient and relaxation terms exact.
  double energy(const SpectralState& s) const;
  /// (B_eps(n), |d/dx(phi^N + Pi^N psi_{+,eps}'(n))|^2)
  double dissipation(const SpectralState& s) const;

  /// Half the RK4 real-axis stability limit for the stiffest mode,
  /// 0.5 * 2.78 / (lambda_max (B_max gamma lambda_max / (1 + sigma lambda_max) + sup B psi_+'')).
  double default_dt() const;

 private:
  std::vector<double> gradient_argument(std::span<const double> n_nodes,
                                        std::span<const double> d) const;

  Model model_;
  SpectralBasis basis_;
};

void export_snapshot(const std::filesystem::path& path, const SpectralBasis& basis,
                     std::span<const double> coeffs);

}  // namespace rdch
