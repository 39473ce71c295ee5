#include "rdch/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include <fmt/format.h>

#include "rdch/error.hpp"
#include "rdch/kernels.hpp"

namespace rdch {

Grid1D::Grid1D(double length, std::size_t npoints) : length_(length), npoints_(npoints) {
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw InvalidArgument("grid length must be positive and finite");
  }
  if (npoints < kMinPoints) {
    throw InvalidArgument("grid needs at least " + std::to_string(kMinPoints) + " cells, got " +
                          std::to_string(npoints));
  }
  h_ = length / static_cast<double>(npoints);
}

Field::Field(const Grid1D& grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

Field::Field(const Grid1D& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw InvalidArgument("field size does not match grid");
  }
}

double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }
double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }

double Field::max_abs() const {
  double m = 0.0;
  for (double v : values_) {
    m = std::max(m, std::abs(v));
  }
  return m;
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_grid(const Field& a, const Field& b) {
  if (!(a.grid() == b.grid())) {
    throw InvalidArgument("fields live on different grids");
  }
}

Field laplacian(const Field& f) {
  Field out(f.grid());
  kernels::parallel::laplacian(f.values(), f.grid().spacing(), out.values());
  return out;
}

namespace {

constexpr double kNegativeCoeffTolerance = 1e-14;

std::vector<double> checked_coefficients(const Field& coeff) {
  std::vector<double> c(coeff.data());
  for (double& v : c) {
    if (v < 0.0) {
      if (v < -kNegativeCoeffTolerance) {
        throw InvalidArgument("divergence_of_flux: negative coefficient " + std::to_string(v));
      }
      v = 0.0;
    }
  }
  return c;
}

}  // namespace

Field divergence_of_flux(const Field& coeff, const Field& g) {
  require_same_grid(coeff, g);
  const auto c = checked_coefficients(coeff);
  Field out(g.grid());
  kernels::parallel::flux_divergence(c, g.values(), g.grid().spacing(), out.values());
  return out;
}

std::vector<double> face_flux(const Field& coeff, const Field& g) {
  require_same_grid(coeff, g);
  const auto c = checked_coefficients(coeff);
  std::vector<double> out(g.size() - 1);
  kernels::parallel::face_flux(c, g.values(), g.grid().spacing(), out);
  return out;
}

double integrate(const Field& f) { return f.grid().spacing() * kernels::ordered_sum(f.values()); }

double inner_product(const Field& f, const Field& g) {
  require_same_grid(f, g);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    s += f[i] * g[i];
  }
  return f.grid().spacing() * s;
}

double gradient_sq_norm(const Field& f) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < f.size(); ++i) {
    const double d = f[i + 1] - f[i];
    s += d * d;
  }
  return s / f.grid().spacing();
}

double l2_norm(const Field& f) { return std::sqrt(inner_product(f, f)); }

double l2_distance(const Field& a, const Field& b) { return l2_norm(a - b); }

double max_abs_difference(const Field& a, const Field& b) { return (a - b).max_abs(); }

Field operator+(const Field& a, const Field& b) {
  require_same_grid(a, b);
  Field out(a.grid());
  kernels::parallel::axpy(a.values(), 1.0, b.values(), out.values());
  return out;
}

Field operator-(const Field& a, const Field& b) {
  require_same_grid(a, b);
  Field out(a.grid());
  kernels::parallel::axpy(a.values(), -1.0, b.values(), out.values());
  return out;
}

Field operator*(double s, const Field& a) {
  Field out(a.grid());
  kernels::parallel::transform(a.values(), out.values(), [s](double v) { return s * v; });
  return out;
}

void write_snapshot(const std::filesystem::path& path, std::span<const double> x,
                    std::span<const double> values) {
  std::ofstream os(path);
  if (!os) {
    throw std::runtime_error("cannot open snapshot file " + path.string());
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    os << fmt::format("{:.17g} {:.17g}\n", x[i], values[i]);
  }
}

void write_snapshot(const std::filesystem::path& path, const Field& f) {
  std::vector<double> x(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    x[i] = f.grid().x(i);
  }
  write_snapshot(path, x, f.values());
}

}  // namespace rdch
