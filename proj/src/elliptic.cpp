#include "rdch/elliptic.hpp"

namespace rdch {

void RelaxationParams::validate(const PotentialSpec& p) const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("params.sigma must be positive");
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ConfigError("params.gamma must be positive");
  }
  if (!(fp_tol > 0.0)) {
    throw ConfigError("scheme.fp_tol must be positive");
  }
  if (fp_maxiter < 2) {
    throw ConfigError("scheme.fp_maxiter must be at least 2");
  }
  const double q = contraction(p);
  if (!(q < 1.0)) {
    throw ConfigError("contraction condition violated: (sigma/gamma) sup|psi_-''| = " +
                      std::to_string(q) + " must be < 1");
  }
}

void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<const double> rhs,
                       std::span<double> out) {
  const std::size_t n = diag.size();
  std::vector<double> c(n);
  double den = diag[0];
  if (den == 0.0) {
    throw InvalidArgument("tridiagonal solve: zero pivot");
  }
  c[0] = upper[0] / den;
  out[0] = rhs[0] / den;
  for (std::size_t i = 1; i < n; ++i) {
    den = diag[i] - lower[i] * c[i - 1];
    if (den == 0.0) {
      throw InvalidArgument("tridiagonal solve: zero pivot");
    }
    c[i] = (i + 1 < n) ? upper[i] / den : 0.0;
    out[i] = (rhs[i] - lower[i] * out[i - 1]) / den;
  }
  for (std::size_t i = n - 1; i > 0; --i) {
    out[i - 1] -= c[i - 1] * out[i];
  }
}

HelmholtzSolver::HelmholtzSolver(const Grid1D& grid, double sigma)
    : grid_(grid), sigma_(sigma), c_prime_(grid.size()), inv_den_(grid.size()) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("HelmholtzSolver: sigma must be non-negative");
  }
  const std::size_t n = grid.size();
  const double h = grid.spacing();
  off_ = -sigma / (h * h);
  auto diag = [&](std::size_t i) {
    return (i == 0 || i + 1 == n) ? 1.0 - off_ : 1.0 - 2.0 * off_;
  };
  double den = diag(0);
  inv_den_[0] = 1.0 / den;
  c_prime_[0] = off_ / den;
  for (std::size_t i = 1; i < n; ++i) {
    den = diag(i) - off_ * c_prime_[i - 1];
    if (!(den > 0.0)) {
      throw InvalidArgument("HelmholtzSolver: singular system");
    }
    inv_den_[i] = 1.0 / den;
    c_prime_[i] = off_ / den;
  }
}

void HelmholtzSolver::solve(std::span<const double> rhs, std::span<double> out) const {
  const std::size_t n = grid_.size();
  out[0] = rhs[0] * inv_den_[0];
  for (std::size_t i = 1; i < n; ++i) {
    out[i] = (rhs[i] - off_ * out[i - 1]) * inv_den_[i];
  }
  for (std::size_t i = n - 1; i > 0; --i) {
    out[i - 1] -= c_prime_[i - 1] * out[i];
  }
}

Field HelmholtzSolver::solve(const Field& rhs) const {
  if (!(rhs.grid() == grid_)) {
    throw InvalidArgument("HelmholtzSolver: grid mismatch");
  }
  Field out(grid_);
  solve(rhs.values(), out.values());
  return out;
}

Field HelmholtzSolver::apply(const Field& u) const {
  Field lap = laplacian(u);
  Field out(grid_);
  kernels::parallel::axpy(u.values(), -sigma_, lap.values(), out.values());
  return out;
}

RelaxationResult solve_relaxation(const RelaxationParams& params, const HelmholtzSolver& solver,
                                  const PotentialSpec& potential, const Field& n,
                                  const Field* phi_guess) {
  return solve_relaxation_with(params, solver, n, phi_guess,
                               [&](double x) { return eval_psi_minus(potential, x).d1; });
}

RelaxationResult solve_relaxation_u(const RelaxationParams& params, const HelmholtzSolver& solver,
                                    const PotentialSpec& potential, const Field& n,
                                    const Field* u_guess) {
  const double r = params.ratio();
  const double inv_r = params.gamma / params.sigma;
  Field start = u_guess ? *u_guess : Field(n.grid());
  return detail::picard(solver, std::move(start), params, [&](const Field& u, Field& out) {
    for (std::size_t i = 0; i < n.size(); ++i) {
      out[i] = -inv_r * n[i] + eval_psi_minus(potential, -r * u[i]).d1;
    }
  });
}

}  // namespace rdch
