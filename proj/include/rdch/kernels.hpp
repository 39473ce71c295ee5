#pragma once

// Raw stencil kernels on cell-centred 1D samples with zero-flux closure.
//
// Every kernel exists twice: kernels::serial is the plain reference loop and
// kernels::parallel is the OpenMP version used by the rest of the library.
// The parallel loops only split independent outputs, so both produce
// bit-identical results; reductions stay sequential to keep runs
// reproducible regardless of the thread count.

#include <cstddef>
#include <exception>
#include <span>

namespace rdch::kernels {

/// Below this many samples the OpenMP regions run on the calling thread.
inline constexpr std::size_t kParallelThreshold = 1u << 14;

namespace serial {

/// ((f[i+1] - f[i]) - (f[i] - f[i-1])) / h^2 with mirror ghosts.
void laplacian(std::span<const double> f, double h, std::span<double> out);

/// out[i] = (F[i+1/2] - F[i-1/2]) / h with F = c_face (g[i+1]-g[i]) / h,
/// c_face the arithmetic mean of adjacent coeff samples, zero boundary flux.
void flux_divergence(std::span<const double> coeff, std::span<const double> g, double h,
                     std::span<double> out);

/// Interior face fluxes -c_face (g[i+1]-g[i]) / h, size N-1.
void face_flux(std::span<const double> coeff, std::span<const double> g, double h,
               std::span<double> out);

/// out = x + a * y
void axpy(std::span<const double> x, double a, std::span<const double> y, std::span<double> out);

}  // namespace serial

namespace parallel {

void laplacian(std::span<const double> f, double h, std::span<double> out);
void flux_divergence(std::span<const double> coeff, std::span<const double> g, double h,
                     std::span<double> out);
void face_flux(std::span<const double> coeff, std::span<const double> g, double h,
               std::span<double> out);
void axpy(std::span<const double> x, double a, std::span<const double> y, std::span<double> out);

/// out[i] = fn(in[i]); fn must be free of side effects. An exception thrown
/// by fn is rethrown on the calling thread after the loop.
template <class Fn>
void transform(std::span<const double> in, std::span<double> out, Fn fn) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(in.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(static) if (in.size() >= kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = fn(in[i]);
    } catch (...) {
#pragma omp critical(rdch_transform_failure)
      if (!failure) {
        failure = std::current_exception();
      }
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
}

}  // namespace parallel

/// Sequential sum in index order.
double ordered_sum(std::span<const double> v);

}  // namespace rdch::kernels
