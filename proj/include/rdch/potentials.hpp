#pragma once

// Single-well logarithmic potential, its convex/concave split, the degenerate
// mobility b(n) = n(1-n)^2 and the entropy density phi'' = 1/b, together with
// the epsilon-regularized variants that remove the degeneracy at 0 and 1.

#include <optional>

namespace rdch {

/// Value and first two derivatives of a scalar function at one point.
struct Derivs {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

enum class PotentialKind { SingleWellLog };

/// psi(n) = -(1-n*) ln(1-n) - n^3/3 - (1-n*) n^2/2 - (1-n*) n + k,
/// split as psi_+ = -(1-n*) ln(1-n) - n^3/3 (convex for n* <= 0.7) and
/// psi_- = -(1-n*) n^2/2 - (1-n*) n + k (concave, extended to the real line).
struct PotentialSpec {
  double nstar = 0.3;
  double k = 0.0;
  PotentialKind kind = PotentialKind::SingleWellLog;

  /// Throws ConfigError unless nstar is in (0, 0.7] and k is finite.
  void validate() const;
  /// 1 - nstar, the coefficient shared by both parts.
  double slope() const noexcept { return 1.0 - nstar; }
};

/// psi_+ with its second derivative clamped outside [eps, 1-eps]; value and
/// first derivative continue as the exact double integral of the clamped
/// curvature, so the result is C^2 on the real line.
struct RegularizedPotential {
  PotentialSpec base;
  double eps = 1e-2;
};

inline constexpr double kDefaultEps = 1e-2;
inline constexpr double kMinEps = 1e-8;
inline constexpr double kMaxEps = 1e-1;

/// Throws DomainError for n >= 1 or non-finite n.
Derivs eval_psi_plus(const PotentialSpec& p, double n);
/// Defined for every finite n.
Derivs eval_psi_plus(const RegularizedPotential& p, double n);

/// Concave part on the whole real line. On [0,1] it is the quadratic above;
/// outside, psi_-'' tapers from -(1-n*) to 0 over a unit-width collar with a
/// cubic smoothstep, after which psi_- is affine.
Derivs eval_psi_minus(const PotentialSpec& p, double n);

struct SupNorms {
  double d1 = 0.0;  ///< sup |psi_-'|
  double d2 = 0.0;  ///< sup |psi_-''|
};

/// Analytic suprema of the extension: sup|psi_-''| = 1-n*, sup|psi_-'| = 5/2 (1-n*).
SupNorms psi_minus_sup_norms(const PotentialSpec& p);

enum class MobilityKind { Polynomial };

/// b(n) = n (1-n)^2 and, when eps is set, the clamped B_eps.
struct MobilitySpec {
  MobilityKind kind = MobilityKind::Polynomial;
  std::optional<double> eps;

  /// min(b(eps), b(1-eps)); requires eps.
  double lower_bound() const;
  /// max of b over [eps, 1-eps]; requires eps.
  double upper_bound() const;
};

struct MobilityValue {
  double value = 0.0;
  double d1 = 0.0;
};

/// Unregularized evaluation requires n in [0,1]; the regularized one requires
/// m.eps and accepts any finite n (B_eps' = 0 outside [eps, 1-eps]).
MobilityValue eval_mobility(const MobilitySpec& m, double n, bool regularized);

/// Bare b(n) without domain checks; used by hot loops that already validated.
inline double polynomial_mobility(double n) noexcept { return n * (1.0 - n) * (1.0 - n); }

/// Convex entropy density phi_eps with phi_eps'' = 1/B_eps and
/// phi_eps(0) = phi_eps'(0) = 0, in closed form.
class EntropyDensity {
 public:
  explicit EntropyDensity(MobilitySpec mobility);

  double value(double n) const;
  double d1(double n) const;
  double d2(double n) const;
  double eps() const noexcept { return eps_; }

 private:
  MobilitySpec mobility_;
  double eps_;
  double b_lo_;   // b(eps)
  double b_hi_;   // b(1-eps)
  double alpha_;  // affine correction on [eps, 1-eps]
  double beta_;
  double v_hi_;   // phi_eps(1-eps)
  double s_hi_;   // phi_eps'(1-eps)
};

double eval_entropy_density(const EntropyDensity& e, double n);

/// Unregularized n ln(n/(1-n)); +inf when n is outside the open interval (0,1).
double unregularized_entropy_density(double n);

}  // namespace rdch
