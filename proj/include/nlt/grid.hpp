#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nlt/error.hpp"
#include "nlt/quadrature.hpp"

namespace nlt {

/// Uniform 1-D grid of n_cells cells of width dx starting at x_left.
struct Grid {
  double x_left = 0.0;
  double dx = 1.0;
  std::size_t n_cells = 2;

  Grid() = default;
  Grid(double x_left_, double dx_, std::size_t n)
      : x_left(x_left_), dx(dx_), n_cells(n) {
    if (!(dx > 0.0) || !std::isfinite(dx)) throw Error(ErrorKind::precondition, "grid needs dx > 0");
    if (n_cells < 2) throw Error(ErrorKind::precondition, "grid needs at least 2 cells");
  }

  double center(std::size_t j) const { return x_left + (static_cast<double>(j) + 0.5) * dx; }
  double face(std::size_t j) const { return x_left + static_cast<double>(j) * dx; }
  double length() const { return static_cast<double>(n_cells) * dx; }
  double x_right() const { return face(n_cells); }

  friend bool operator==(const Grid&, const Grid&) = default;
};

/// Cell averages on a Grid. Values are fixed at construction.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.n_cells) {
      throw Error(ErrorKind::shape, "grid has " + std::to_string(grid_.n_cells) + " cells but " +
                                        std::to_string(values_.size()) + " values were given");
    }
    for (std::size_t j = 0; j < values_.size(); ++j) {
      if (!std::isfinite(values_[j])) {
        throw Error(ErrorKind::numeric, "non-finite value in cell " + std::to_string(j));
      }
    }
  }

  static GridFunction constant(Grid grid, double c) {
    return GridFunction(grid, std::vector<double>(grid.n_cells, c));
  }

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t j) const { return values_[j]; }

  /// Edge-extended access: indices outside the grid take the nearest edge value.
  double extended(std::ptrdiff_t j) const {
    if (j < 0) return values_.front();
    if (j >= static_cast<std::ptrdiff_t>(values_.size())) return values_.back();
    return values_[static_cast<std::size_t>(j)];
  }

  bool in_unit_interval(double tol = 0.0) const {
    for (double v : values_) {
      if (v < -tol || v > 1.0 + tol) return false;
    }
    return true;
  }

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Cell averages of a pointwise profile by 3-point Gauss quadrature per cell.
inline GridFunction cell_average(const Grid& grid, const std::function<double(double)>& f) {
  std::vector<double> v(grid.n_cells);
  for (std::size_t j = 0; j < grid.n_cells; ++j) {
    v[j] = quad::gauss<3>(f, grid.face(j), grid.face(j + 1)) / grid.dx;
  }
  return GridFunction(grid, std::move(v));
}

inline void require_same_grid(const GridFunction& f, const GridFunction& g) {
  if (!(f.grid() == g.grid())) throw Error(ErrorKind::shape, "grid functions live on different grids");
}

inline double l1_distance(const GridFunction& f, const GridFunction& g) {
  require_same_grid(f, g);
  quad::CompensatedSum s;
  for (std::size_t j = 0; j < f.size(); ++j) s += std::abs(f[j] - g[j]);
  return s.value() * f.grid().dx;
}

inline double l2_distance(const GridFunction& f, const GridFunction& g) {
  require_same_grid(f, g);
  quad::CompensatedSum s;
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double d = f[j] - g[j];
    s += d * d;
  }
  return std::sqrt(s.value() * f.grid().dx);
}

inline double l2_norm_squared(const GridFunction& f) {
  quad::CompensatedSum s;
  for (double v : f.values()) s += v * v;
  return s.value() * f.grid().dx;
}

inline double l1_norm(const GridFunction& f) {
  quad::CompensatedSum s;
  for (double v : f.values()) s += std::abs(v);
  return s.value() * f.grid().dx;
}

inline double total_variation(const GridFunction& f) {
  quad::CompensatedSum s;
  for (std::size_t j = 0; j + 1 < f.size(); ++j) s += std::abs(f[j + 1] - f[j]);
  return s.value();
}

inline double mass(const GridFunction& f) {
  quad::CompensatedSum s;
  for (double v : f.values()) s += v;
  return s.value() * f.grid().dx;
}

/// Average consecutive blocks of `factor` cells of a fine function onto the
/// coarse grid. The coarse grid must be nested in the fine one.
inline GridFunction project(const GridFunction& fine, const Grid& coarse) {
  const Grid& g = fine.grid();
  const double ratio = coarse.dx / g.dx;
  const auto factor = static_cast<std::size_t>(std::llround(ratio));
  const double offset = (coarse.x_left - g.x_left) / g.dx;
  const auto first = static_cast<std::ptrdiff_t>(std::llround(offset));
  if (factor < 1 || std::abs(ratio - static_cast<double>(factor)) > 1e-9 * ratio ||
      std::abs(offset - static_cast<double>(first)) > 1e-6 || first < 0 ||
      static_cast<std::size_t>(first) + factor * coarse.n_cells > g.n_cells) {
    throw Error(ErrorKind::shape, "coarse grid is not nested in the fine grid");
  }
  std::vector<double> v(coarse.n_cells);
  for (std::size_t j = 0; j < coarse.n_cells; ++j) {
    quad::CompensatedSum s;
    for (std::size_t k = 0; k < factor; ++k) s += fine[static_cast<std::size_t>(first) + j * factor + k];
    v[j] = s.value() / static_cast<double>(factor);
  }
  return GridFunction(coarse, std::move(v));
}

/// "x,value" CSV, one row per cell, 17 significant digits.
inline void write_csv(std::ostream& os, const GridFunction& f) {
  os << "x,value\n";
  char buf[64];
  for (std::size_t j = 0; j < f.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", f.grid().center(j), f[j]);
    os << buf;
  }
}

}  // namespace nlt
