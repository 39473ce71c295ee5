#include "rdch/kernels.hpp"

#include <cassert>

namespace rdch::kernels {

namespace serial {

void laplacian(std::span<const double> f, double h, std::span<double> out) {
  const std::size_t n = f.size();
  assert(out.size() == n && n >= 2);
  const double inv_h2 = 1.0 / (h * h);
  out[0] = (f[1] - f[0]) * inv_h2;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    out[i] = ((f[i + 1] - f[i]) - (f[i] - f[i - 1])) * inv_h2;
  }
  out[n - 1] = (f[n - 2] - f[n - 1]) * inv_h2;
}

void flux_divergence(std::span<const double> coeff, std::span<const double> g, double h,
                     std::span<double> out) {
  const std::size_t n = g.size();
  assert(coeff.size() == n && out.size() == n && n >= 2);
  const double inv_h2 = 1.0 / (h * h);
  double left = 0.0;  // flux through face i-1/2, times h
  for (std::size_t i = 0; i < n; ++i) {
    const double right =
        (i + 1 < n) ? 0.5 * (coeff[i] + coeff[i + 1]) * (g[i + 1] - g[i]) : 0.0;
    out[i] = (right - left) * inv_h2;
    left = right;
  }
}

void face_flux(std::span<const double> coeff, std::span<const double> g, double h,
               std::span<double> out) {
  const std::size_t n = g.size();
  assert(out.size() + 1 == n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    out[i] = -0.5 * (coeff[i] + coeff[i + 1]) * (g[i + 1] - g[i]) / h;
  }
}

void axpy(std::span<const double> x, double a, std::span<const double> y, std::span<double> out) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = x[i] + a * y[i];
  }
}

}  // namespace serial

namespace parallel {

void laplacian(std::span<const double> f, double h, std::span<double> out) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(f.size());
  assert(static_cast<std::ptrdiff_t>(out.size()) == n && n >= 2);
  const double inv_h2 = 1.0 / (h * h);
  out[0] = (f[1] - f[0]) * inv_h2;
  out[n - 1] = (f[n - 2] - f[n - 1]) * inv_h2;
#pragma omp parallel for schedule(static) if (f.size() >= kParallelThreshold)
  for (std::ptrdiff_t i = 1; i < n - 1; ++i) {
    out[i] = ((f[i + 1] - f[i]) - (f[i] - f[i - 1])) * inv_h2;
  }
}

void flux_divergence(std::span<const double> coeff, std::span<const double> g, double h,
                     std::span<double> out) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(g.size());
  assert(n >= 2);
  const double inv_h2 = 1.0 / (h * h);
  // Each cell recomputes both of its face fluxes with the same expression the
  // serial loop uses, so the result does not depend on the partition.
#pragma omp parallel for schedule(static) if (g.size() >= kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double left = (i > 0) ? 0.5 * (coeff[i - 1] + coeff[i]) * (g[i] - g[i - 1]) : 0.0;
    const double right =
        (i + 1 < n) ? 0.5 * (coeff[i] + coeff[i + 1]) * (g[i + 1] - g[i]) : 0.0;
    out[i] = (right - left) * inv_h2;
  }
}

void face_flux(std::span<const double> coeff, std::span<const double> g, double h,
               std::span<double> out) {
  const std::ptrdiff_t faces = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static) if (out.size() >= kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < faces; ++i) {
    out[i] = -0.5 * (coeff[i] + coeff[i + 1]) * (g[i + 1] - g[i]) / h;
  }
}

void axpy(std::span<const double> x, double a, std::span<const double> y, std::span<double> out) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static) if (x.size() >= kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = x[i] + a * y[i];
  }
}

}  // namespace parallel

double ordered_sum(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) {
    s += x;
  }
  return s;
}

}  // namespace rdch::kernels
