#pragma once

#include <optional>

#include "rdch/elliptic.hpp"
#include "rdch/grid.hpp"
#include "rdch/potentials.hpp"

namespace rdch {

/// Everything that defines the continuous system: potential, mobility,
/// relaxation parameters and (optionally) the regularization parameter.
/// When eps is set, psi_+ and b are replaced by psi_{+,eps} and B_eps.
struct Model {
  PotentialSpec potential;
  RelaxationParams relax;
  std::optional<double> eps = kDefaultEps;
  MobilityKind mobility_kind = MobilityKind::Polynomial;

  bool regularized() const noexcept { return eps.has_value(); }
  double gamma() const noexcept { return relax.gamma; }
  double sigma() const noexcept { return relax.sigma; }
  MobilitySpec mobility() const { return {mobility_kind, eps}; }

  Derivs psi_plus(double n) const {
    return eps ? eval_psi_plus(RegularizedPotential{potential, *eps}, n)
               : eval_psi_plus(potential, n);
  }
  Derivs psi_minus(double x) const { return eval_psi_minus(potential, x); }
  double mobility_at(double n) const { return eval_mobility(mobility(), n, regularized()).value; }

  /// Throws ConfigError on any violated parameter constraint.
  void validate() const;

  Field mobility_field(const Field& n) const;
  Field psi_plus_d1_field(const Field& n) const;
  /// Chemical potential of the transport equation, phi + psi_+'(n).
  Field flux_argument(const Field& n, const Field& phi) const;
  /// sup over n of B(n) psi_+''(n), sampled; finite for the degenerate pair.
  double sup_mobility_times_curvature() const;
};

}  // namespace rdch
