#include "rdch/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rdch/error.hpp"

namespace rdch {

namespace {

void require_finite(double n, const char* where) {
  if (!std::isfinite(n)) {
    throw DomainError(std::string(where) + ": non-finite argument");
  }
}

// Quadratic continuation of a C^2 function from a knot with clamped curvature.
Derivs continue_quadratic(const Derivs& at_knot, double knot, double n) {
  const double t = n - knot;
  return {at_knot.value + t * (at_knot.d1 + 0.5 * t * at_knot.d2), at_knot.d1 + t * at_knot.d2,
          at_knot.d2};
}

// Integral of (1 - smoothstep) and its antiderivative on [0,1].
double taper_int1(double t) { return t - t * t * t + 0.5 * t * t * t * t; }
double taper_int2(double t) {
  const double t2 = t * t;
  return 0.5 * t2 - 0.25 * t2 * t2 + 0.1 * t2 * t2 * t;
}

}  // namespace

void PotentialSpec::validate() const {
  if (!(nstar > 0.0 && nstar <= 0.7)) {
    throw ConfigError("potential.nstar must lie in (0, 0.7] for psi_+ to be convex, got " +
                      std::to_string(nstar));
  }
  if (!std::isfinite(k)) {
    throw ConfigError("potential.k must be finite");
  }
}

Derivs eval_psi_plus(const PotentialSpec& p, double n) {
  require_finite(n, "psi_plus");
  if (n >= 1.0) {
    throw DomainError("psi_plus: singular potential evaluated at n >= 1 (n = " +
                      std::to_string(n) + ")");
  }
  const double a = p.slope();
  const double one_minus = 1.0 - n;
  return {-a * std::log1p(-n) - n * n * n / 3.0, a / one_minus - n * n,
          a / (one_minus * one_minus) - 2.0 * n};
}

Derivs eval_psi_plus(const RegularizedPotential& p, double n) {
  require_finite(n, "psi_plus");
  const double lo = p.eps;
  const double hi = 1.0 - p.eps;
  if (n < lo) {
    return continue_quadratic(eval_psi_plus(p.base, lo), lo, n);
  }
  if (n > hi) {
    return continue_quadratic(eval_psi_plus(p.base, hi), hi, n);
  }
  return eval_psi_plus(p.base, n);
}

Derivs eval_psi_minus(const PotentialSpec& p, double n) {
  require_finite(n, "psi_minus");
  const double a = p.slope();
  const double k = p.k;
  if (n >= 0.0 && n <= 1.0) {
    return {-0.5 * a * n * n - a * n + k, -a * n - a, -a};
  }
  if (n > 1.0) {
    const double t = n - 1.0;
    if (t <= 1.0) {
      const double s = t * t * (3.0 - 2.0 * t);
      return {k - 1.5 * a - 2.0 * a * t - a * taper_int2(t), -2.0 * a - a * taper_int1(t),
              -a * (1.0 - s)};
    }
    return {k - 3.85 * a - 2.5 * a * (t - 1.0), -2.5 * a, 0.0};
  }
  const double t = -n;
  if (t <= 1.0) {
    const double s = t * t * (3.0 - 2.0 * t);
    return {k + a * t - a * taper_int2(t), -a + a * taper_int1(t), -a * (1.0 - s)};
  }
  return {k + 0.65 * a + 0.5 * a * (t - 1.0), -0.5 * a, 0.0};
}

SupNorms psi_minus_sup_norms(const PotentialSpec& p) {
  const double a = p.slope();
  return {2.5 * a, a};
}

double MobilitySpec::lower_bound() const {
  if (!eps) {
    throw InvalidArgument("mobility lower bound requires eps");
  }
  return std::min(polynomial_mobility(*eps), polynomial_mobility(1.0 - *eps));
}

double MobilitySpec::upper_bound() const {
  if (!eps) {
    throw InvalidArgument("mobility upper bound requires eps");
  }
  const double e = *eps;
  // b(n) = n(1-n)^2 peaks at n = 1/3.
  if (e <= 1.0 / 3.0 && 1.0 / 3.0 <= 1.0 - e) {
    return 4.0 / 27.0;
  }
  return std::max(polynomial_mobility(e), polynomial_mobility(1.0 - e));
}

MobilityValue eval_mobility(const MobilitySpec& m, double n, bool regularized) {
  require_finite(n, "mobility");
  if (!regularized) {
    if (n < 0.0 || n > 1.0) {
      throw DomainError("mobility: degenerate b(n) evaluated outside [0,1] (n = " +
                        std::to_string(n) + ")");
    }
    return {polynomial_mobility(n), (1.0 - n) * (1.0 - 3.0 * n)};
  }
  if (!m.eps) {
    throw InvalidArgument("mobility: regularized evaluation requires eps");
  }
  const double e = *m.eps;
  if (n <= e) {
    return {polynomial_mobility(e), 0.0};
  }
  if (n >= 1.0 - e) {
    return {polynomial_mobility(1.0 - e), 0.0};
  }
  return {polynomial_mobility(n), (1.0 - n) * (1.0 - 3.0 * n)};
}

namespace {

// Double antiderivative of 1/(n(1-n)^2) = 1/n + 1/(1-n) + 1/(1-n)^2.
double entropy_core(double n) { return n * std::log(n / (1.0 - n)); }
double entropy_core_d1(double n) { return std::log(n / (1.0 - n)) + 1.0 / (1.0 - n); }

}  // namespace

EntropyDensity::EntropyDensity(MobilitySpec mobility) : mobility_(mobility) {
  if (!mobility_.eps) {
    throw InvalidArgument("EntropyDensity requires a regularized mobility (eps set)");
  }
  eps_ = *mobility_.eps;
  if (!(eps_ > 0.0 && eps_ < 0.5)) {
    throw InvalidArgument("EntropyDensity: eps must lie in (0, 1/2)");
  }
  b_lo_ = polynomial_mobility(eps_);
  b_hi_ = polynomial_mobility(1.0 - eps_);
  beta_ = eps_ / b_lo_ - entropy_core_d1(eps_);
  alpha_ = eps_ * eps_ / (2.0 * b_lo_) - entropy_core(eps_) - beta_ * eps_;
  const double hi = 1.0 - eps_;
  v_hi_ = entropy_core(hi) + alpha_ + beta_ * hi;
  s_hi_ = entropy_core_d1(hi) + beta_;
}

double EntropyDensity::value(double n) const {
  if (n <= eps_) {
    return n * n / (2.0 * b_lo_);
  }
  const double hi = 1.0 - eps_;
  if (n >= hi) {
    const double t = n - hi;
    return v_hi_ + s_hi_ * t + t * t / (2.0 * b_hi_);
  }
  return entropy_core(n) + alpha_ + beta_ * n;
}

double EntropyDensity::d1(double n) const {
  if (n <= eps_) {
    return n / b_lo_;
  }
  const double hi = 1.0 - eps_;
  if (n >= hi) {
    return s_hi_ + (n - hi) / b_hi_;
  }
  return entropy_core_d1(n) + beta_;
}

double EntropyDensity::d2(double n) const {
  return 1.0 / eval_mobility(mobility_, n, true).value;
}

double eval_entropy_density(const EntropyDensity& e, double n) { return e.value(n); }

double unregularized_entropy_density(double n) {
  if (!(n > 0.0 && n < 1.0)) {
    return std::numeric_limits<double>::infinity();
  }
  return entropy_core(n);
}

}  // namespace rdch
