#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace apmc {

/// Uniform Cartesian mesh on [x0,x1) (x [y0,y1) in 2D). Cells are half-open
/// so that every point of the domain belongs to exactly one cell.
class SpatialGrid {
 public:
  SpatialGrid() = default;
  static SpatialGrid line(double x0, double x1, std::size_t nx);
  static SpatialGrid plane(double x0, double x1, std::size_t nx, double y0, double y1,
                           std::size_t ny);

  int dimension() const { return dim_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t cell_count() const { return nx_ * ny_; }
  double x0() const { return x0_; }
  double x1() const { return x1_; }
  double y0() const { return y0_; }
  double y1() const { return y1_; }
  double dx() const { return (x1_ - x0_) / static_cast<double>(nx_); }
  double dy() const { return dim_ == 2 ? (y1_ - y0_) / static_cast<double>(ny_) : 1.0; }
  double cell_volume() const { return dx() * dy(); }
  double volume() const { return (x1_ - x0_) * (dim_ == 2 ? (y1_ - y0_) : 1.0); }

  std::size_t index(std::size_t i, std::size_t j) const { return j * nx_ + i; }
  std::array<double, 2> center(std::size_t cell) const;

  bool contains(const std::array<double, 2>& p) const;
  /// Cell holding p, or nullopt if p lies outside the domain.
  std::optional<std::size_t> locate(const std::array<double, 2>& p) const;
  /// Cell holding p after clamping p into the domain.
  std::size_t clamped_cell(const std::array<double, 2>& p) const;

  bool same_shape(const SpatialGrid& other, double tol = 1e-12) const;

 private:
  int dim_ = 1;
  std::size_t nx_ = 1, ny_ = 1;
  double x0_ = 0.0, x1_ = 1.0, y0_ = 0.0, y1_ = 1.0;
};

/// Cell values on a SpatialGrid.
struct GridFunction {
  SpatialGrid grid;
  std::vector<double> values;

  GridFunction() = default;
  GridFunction(SpatialGrid g, double fill = 0.0) : grid(g), values(g.cell_count(), fill) {}
  double& operator[](std::size_t c) { return values[c]; }
  double operator[](std::size_t c) const { return values[c]; }
  double integral() const;
};

/// Piecewise-constant coefficients per cell: scaling parameter eps,
/// scattering sigma_s and absorption sigma_a.
struct CoefficientField {
  std::vector<double> eps;
  std::vector<double> sigma_s;
  std::vector<double> sigma_a;

  static CoefficientField uniform(const SpatialGrid& grid, double eps, double sigma_s,
                                  double sigma_a);
  std::size_t size() const { return eps.size(); }
  /// Throws std::invalid_argument on negative entries or size mismatch.
  void validate(const SpatialGrid& grid) const;
};

}  // namespace apmc
