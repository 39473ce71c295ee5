#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace rdch {

/// Uniform cell-centred grid on [0, L]: N cells of width h = L/N, node i at
/// x_i = (i + 1/2) h, homogeneous Neumann closure by mirror ghosts.
class Grid1D {
 public:
  static constexpr std::size_t kMinPoints = 8;

  Grid1D(double length, std::size_t npoints);

  double length() const noexcept { return length_; }
  std::size_t size() const noexcept { return npoints_; }
  double spacing() const noexcept { return h_; }
  double x(std::size_t i) const noexcept { return (static_cast<double>(i) + 0.5) * h_; }

  friend bool operator==(const Grid1D&, const Grid1D&) = default;

 private:
  double length_;
  std::size_t npoints_;
  double h_;
};

/// Samples of a scalar field on a grid.
class Field {
 public:
  explicit Field(const Grid1D& grid, double fill = 0.0);
  Field(const Grid1D& grid, std::vector<double> values);

  template <class Fn>
  static Field from_function(const Grid1D& grid, Fn fn) {
    Field f(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      f.values_[i] = fn(grid.x(i));
    }
    return f;
  }

  const Grid1D& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  const std::vector<double>& data() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }

  double min() const;
  double max() const;
  double max_abs() const;
  bool all_finite() const;

 private:
  Grid1D grid_;
  std::vector<double> values_;
};

/// Throws InvalidArgument when the grids differ.
void require_same_grid(const Field& a, const Field& b);

Field laplacian(const Field& f);

/// Conservative discretisation of div(coeff grad g); see kernels::flux_divergence.
/// Coefficients in [-1e-14, 0) are treated as zero, anything lower throws.
Field divergence_of_flux(const Field& coeff, const Field& g);

/// Interior face fluxes -coeff_face * dg/dx (N-1 values).
std::vector<double> face_flux(const Field& coeff, const Field& g);

/// Midpoint rule h * sum f_i.
double integrate(const Field& f);
double inner_product(const Field& f, const Field& g);
/// sum over interior faces of h ((f_{i+1} - f_i)/h)^2.
double gradient_sq_norm(const Field& f);
/// sqrt(integrate(f^2)).
double l2_norm(const Field& f);
double l2_distance(const Field& a, const Field& b);
double max_abs_difference(const Field& a, const Field& b);

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(double s, const Field& a);

/// Two-column "x value" text with 17 significant digits.
void write_snapshot(const std::filesystem::path& path, const Field& f);
void write_snapshot(const std::filesystem::path& path, std::span<const double> x,
                    std::span<const double> values);

}  // namespace rdch
