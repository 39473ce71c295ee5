#pragma once

// Relaxation equation  -sigma Lap(phi) + phi = -gamma Lap(n) + psi_-'(n - sigma/gamma phi)
// solved by Picard iteration on top of a factorised Neumann Helmholtz operator.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rdch/error.hpp"
#include "rdch/grid.hpp"
#include "rdch/kernels.hpp"
#include "rdch/potentials.hpp"

namespace rdch {

struct RelaxationParams {
  double sigma = 1e-4;
  double gamma = 1e-3;
  double fp_tol = 1e-12;
  int fp_maxiter = 200;

  double ratio() const noexcept { return sigma / gamma; }
  /// Picard contraction factor (sigma/gamma) sup|psi_-''|.
  double contraction(const PotentialSpec& p) const { return ratio() * psi_minus_sup_norms(p).d2; }
  /// Throws ConfigError unless sigma, gamma > 0 and the contraction factor is < 1.
  void validate(const PotentialSpec& p) const;
};

/// Thomas algorithm for a general tridiagonal system; lower[0] and upper[n-1]
/// are ignored. Throws InvalidArgument on a zero pivot.
void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<const double> rhs,
                       std::span<double> out);

/// (I - sigma Lap_h) with mirror-ghost Neumann closure, factorised once.
class HelmholtzSolver {
 public:
  HelmholtzSolver(const Grid1D& grid, double sigma);

  const Grid1D& grid() const noexcept { return grid_; }
  double sigma() const noexcept { return sigma_; }

  Field solve(const Field& rhs) const;
  void solve(std::span<const double> rhs, std::span<double> out) const;
  /// Forward operator (I - sigma Lap_h) u.
  Field apply(const Field& u) const;

 private:
  Grid1D grid_;
  double sigma_;
  double off_;                  // -sigma/h^2
  std::vector<double> c_prime_; // modified super-diagonal
  std::vector<double> inv_den_; // 1 / modified diagonal
};

struct RelaxationResult {
  Field phi;
  int iterations = 0;
  double final_increment = 0.0;
  double residual = 0.0;
  /// Largest ratio of consecutive sup-norm increments above the roundoff floor.
  double max_ratio = 0.0;
  std::vector<double> increments;
};

namespace detail {

/// Generic Picard loop u <- H^{-1} rhs(u). `rhs(u, out)` fills the right-hand
/// side for the current iterate.
template <class RhsFn>
RelaxationResult picard(const HelmholtzSolver& solver, Field start, const RelaxationParams& params,
                        RhsFn rhs) {
  const Grid1D& grid = solver.grid();
  RelaxationResult res{std::move(start), 0, 0.0, 0.0, 0.0, {}};
  Field rhs_buf(grid);
  Field next(grid);
  double prev_increment = 0.0;
  for (int it = 1; it <= params.fp_maxiter; ++it) {
    rhs(res.phi, rhs_buf);
    solver.solve(rhs_buf.values(), next.values());
    double increment = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      increment = std::max(increment, std::abs(next[i] - res.phi[i]));
    }
    std::swap(res.phi, next);
    res.increments.push_back(increment);
    res.iterations = it;
    res.final_increment = increment;
    if (!std::isfinite(increment)) {
      throw ConvergenceError("relaxation solve produced non-finite iterate", it, prev_increment);
    }
    const double scale = std::max(1.0, res.phi.max_abs());
    if (it > 1 && prev_increment > 1e-7 * scale) {
      res.max_ratio = std::max(res.max_ratio, increment / prev_increment);
    }
    const double floor = 16.0 * std::numeric_limits<double>::epsilon() * scale;
    if (increment < params.fp_tol || (it > 1 && increment <= floor)) {
      rhs(res.phi, rhs_buf);
      const Field lhs = solver.apply(res.phi);
      double r = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        r = std::max(r, std::abs(lhs[i] - rhs_buf[i]));
      }
      res.residual = r;
      return res;
    }
    prev_increment = increment;
  }
  const auto& inc = res.increments;
  const double last_ratio = inc.size() >= 2 ? inc.back() / inc[inc.size() - 2] : 0.0;
  throw ConvergenceError("relaxation Picard iteration did not converge in " +
                             std::to_string(params.fp_maxiter) +
                             " iterations (last increment ratio " + std::to_string(last_ratio) +
                             "); the contraction assumption is probably violated",
                         params.fp_maxiter, last_ratio);
}

}  // namespace detail

/// Solve for phi given n with an arbitrary psi_-' (used by tests with synthetic
/// concave parts). `phi_guess` may be null, in which case iteration starts at 0.
template <class DPsiMinus>
RelaxationResult solve_relaxation_with(const RelaxationParams& params,
                                       const HelmholtzSolver& solver, const Field& n,
                                       const Field* phi_guess, DPsiMinus dpsi_minus) {
  const Field base = (-params.gamma) * laplacian(n);
  const double r = params.ratio();
  Field start = phi_guess ? *phi_guess : Field(n.grid());
  return detail::picard(solver, std::move(start), params, [&](const Field& phi, Field& out) {
    for (std::size_t i = 0; i < n.size(); ++i) {
      out[i] = base[i] + dpsi_minus(n[i] - r * phi[i]);
    }
  });
}

RelaxationResult solve_relaxation(const RelaxationParams& params, const HelmholtzSolver& solver,
                                  const PotentialSpec& potential, const Field& n,
                                  const Field* phi_guess = nullptr);

/// Same equation written for U = phi - (gamma/sigma) n:
///   -sigma Lap(U) + U = -(gamma/sigma) n + psi_-'(-(sigma/gamma) U).
/// Returns U (not phi).
RelaxationResult solve_relaxation_u(const RelaxationParams& params, const HelmholtzSolver& solver,
                                    const PotentialSpec& potential, const Field& n,
                                    const Field* u_guess = nullptr);

}  // namespace rdch
