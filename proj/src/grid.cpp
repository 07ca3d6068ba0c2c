#include "apmc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace apmc {

SpatialGrid SpatialGrid::line(double x0, double x1, std::size_t nx) {
  if (!(x1 > x0) || nx == 0) throw std::invalid_argument("grid: need x1 > x0 and nx > 0");
  SpatialGrid g;
  g.dim_ = 1;
  g.x0_ = x0;
  g.x1_ = x1;
  g.nx_ = nx;
  g.ny_ = 1;
  return g;
}

SpatialGrid SpatialGrid::plane(double x0, double x1, std::size_t nx, double y0, double y1,
                               std::size_t ny) {
  if (!(x1 > x0) || !(y1 > y0) || nx == 0 || ny == 0)
    throw std::invalid_argument("grid: need x1 > x0, y1 > y0 and positive cell counts");
  SpatialGrid g;
  g.dim_ = 2;
  g.x0_ = x0;
  g.x1_ = x1;
  g.nx_ = nx;
  g.y0_ = y0;
  g.y1_ = y1;
  g.ny_ = ny;
  return g;
}

std::array<double, 2> SpatialGrid::center(std::size_t cell) const {
  const std::size_t i = cell % nx_;
  const std::size_t j = cell / nx_;
  const double cx = x0_ + (static_cast<double>(i) + 0.5) * dx();
  const double cy = dim_ == 2 ? y0_ + (static_cast<double>(j) + 0.5) * dy() : 0.0;
  return {cx, cy};
}

bool SpatialGrid::contains(const std::array<double, 2>& p) const {
  if (!(p[0] >= x0_ && p[0] < x1_)) return false;
  if (dim_ == 2 && !(p[1] >= y0_ && p[1] < y1_)) return false;
  return true;
}

namespace {
std::size_t bin(double v, double lo, double h, std::size_t n) {
  auto i = static_cast<std::size_t>(std::floor((v - lo) / h));
  return std::min(i, n - 1);  // v < hi but rounding can land on n
}
}  // namespace

std::optional<std::size_t> SpatialGrid::locate(const std::array<double, 2>& p) const {
  if (!contains(p)) return std::nullopt;
  const std::size_t i = bin(p[0], x0_, dx(), nx_);
  const std::size_t j = dim_ == 2 ? bin(p[1], y0_, dy(), ny_) : 0;
  return index(i, j);
}

std::size_t SpatialGrid::clamped_cell(const std::array<double, 2>& p) const {
  const double px = std::clamp(p[0], x0_, x1_);
  std::size_t i = px >= x1_ ? nx_ - 1 : bin(px, x0_, dx(), nx_);
  std::size_t j = 0;
  if (dim_ == 2) {
    const double py = std::clamp(p[1], y0_, y1_);
    j = py >= y1_ ? ny_ - 1 : bin(py, y0_, dy(), ny_);
  }
  return index(i, j);
}

bool SpatialGrid::same_shape(const SpatialGrid& o, double tol) const {
  if (dim_ != o.dim_ || nx_ != o.nx_ || ny_ != o.ny_) return false;
  auto close = [tol](double a, double b) { return std::abs(a - b) <= tol * (1.0 + std::abs(a)); };
  return close(x0_, o.x0_) && close(x1_, o.x1_) &&
         (dim_ == 1 || (close(y0_, o.y0_) && close(y1_, o.y1_)));
}

double GridFunction::integral() const {
  return std::accumulate(values.begin(), values.end(), 0.0) * grid.cell_volume();
}

CoefficientField CoefficientField::uniform(const SpatialGrid& grid, double eps, double sigma_s,
                                           double sigma_a) {
  const std::size_t n = grid.cell_count();
  return {std::vector<double>(n, eps), std::vector<double>(n, sigma_s),
          std::vector<double>(n, sigma_a)};
}

void CoefficientField::validate(const SpatialGrid& grid) const {
  const std::size_t n = grid.cell_count();
  if (eps.size() != n || sigma_s.size() != n || sigma_a.size() != n)
    throw std::invalid_argument("coefficients: field size does not match grid");
  for (std::size_t c = 0; c < n; ++c) {
    if (!(eps[c] >= 0.0) || !(sigma_s[c] >= 0.0) || !(sigma_a[c] >= 0.0))
      throw std::invalid_argument("coefficients: eps, sigma_s, sigma_a must be >= 0");
  }
}

}  // namespace apmc
