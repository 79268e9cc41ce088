#pragma once

// Entropy solutions of the local law u_t + (u V(u))_x = 0: a Godunov scheme
// for general V and closed-form Riemann solutions for V(u) = 1 - u.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nlt/error.hpp"
#include "nlt/grid.hpp"
#include "nlt/kernel.hpp"
#include "nlt/quadrature.hpp"
#include "nlt/velocity.hpp"

namespace nlt {

struct FluxModel {
  VelocityModel model;
  double f_lip = 0.0;               // sup |f'| on [0, 1]
  std::optional<double> sonic;      // argmax of f, set when f is concave on [0, 1]

  double f(double u) const { return u * model.V(u); }
  double df(double u) const { return model.V(u) + u * model.dV(u); }
};

inline FluxModel make_flux(VelocityModel model) {
  FluxModel fl{std::move(model), 0.0, std::nullopt};
  constexpr int n = 1000;
  bool concave = true;
  for (int i = 0; i <= n; ++i) {
    const double u = static_cast<double>(i) / n;
    fl.f_lip = std::max(fl.f_lip, std::abs(fl.df(u)));
    if (i > 0 && i < n) {
      const double h = 1.0 / n;
      const double second = fl.f(u - h) - 2.0 * fl.f(u) + fl.f(u + h);
      if (second > 1e-14) concave = false;
    }
  }
  if (concave) fl.sonic = detail::golden_min([&](double u) { return -fl.f(u); }, 0.0, 1.0);
  return fl;
}

/// Godunov flux located by golden-section search on the Riemann interval,
/// compared against both endpoints.
inline double godunov_flux_search(double uL, double uR, const FluxModel& flux) {
  if (uL == uR) return flux.f(uL);
  if (uL < uR) {
    const double u = detail::golden_min([&](double v) { return flux.f(v); }, uL, uR);
    return std::min({flux.f(uL), flux.f(uR), flux.f(u)});
  }
  const double u = detail::golden_min([&](double v) { return -flux.f(v); }, uR, uL);
  return std::max({flux.f(uL), flux.f(uR), flux.f(u)});
}

/// Same value as godunov_flux_search; concave fluxes skip the search using the
/// precomputed sonic point.
inline double godunov_flux(double uL, double uR, const FluxModel& flux) {
  if (!flux.sonic) return godunov_flux_search(uL, uR, flux);
  if (uL <= uR) return std::min(flux.f(uL), flux.f(uR));
  return flux.f(std::clamp(*flux.sonic, uR, uL));
}

/// Conservative Godunov update with edge-extended ghost cells,
/// dt = cfl dx / f_lip (last step shortened to land on T).
inline GridFunction evolve(const GridFunction& u0, const FluxModel& flux, double T, double cfl) {
  if (!(cfl > 0.0) || cfl > 1.0) throw Error(ErrorKind::precondition, "cfl must lie in (0, 1]");
  if (!(T >= 0.0)) throw Error(ErrorKind::precondition, "T must be non-negative");
  const double dx = u0.grid().dx;
  const double dt_nominal = flux.f_lip > 0.0 ? cfl * dx / flux.f_lip : T;
  std::vector<double> u(u0.values().begin(), u0.values().end());
  const std::size_t n = u.size();
  std::vector<double> F(n + 1);
  double t = 0.0;
  while (t < T) {
    double dt = dt_nominal;
    bool lands = false;
    if (t + dt >= T * (1.0 - 1e-14)) {
      dt = T - t;
      lands = true;
    }
    const double lambda = dt / dx;
    F[0] = flux.f(u[0]);
    F[n] = flux.f(u[n - 1]);
    for (std::size_t i = 1; i < n; ++i) F[i] = godunov_flux(u[i - 1], u[i], flux);
    for (std::size_t j = 0; j < n; ++j) {
      const double v = u[j] - lambda * (F[j + 1] - F[j]);
      if (v < -1e-12 || v > 1.0 + 1e-12 || !std::isfinite(v)) {
        throw Error(ErrorKind::invariant_region, "Godunov update left [0,1] in cell " + std::to_string(j));
      }
      u[j] = std::clamp(v, 0.0, 1.0);
    }
    t = lands ? T : t + dt;
  }
  return GridFunction(u0.grid(), std::move(u));
}

/// Entropy solution of the Riemann problem for f(u) = u (1 - u) at (t, x),
/// with the jump initially at x = 0.
inline double exact_riemann(double uL, double uR, double t, double x) {
  if (t <= 0.0) return x < 0.0 ? uL : uR;
  if (uL == uR) return uL;
  const double xi = x / t;
  if (uL < uR) {
    const double s = 1.0 - (uL + uR);
    return xi < s ? uL : uR;
  }
  const double lo = 1.0 - 2.0 * uL;
  const double hi = 1.0 - 2.0 * uR;
  if (xi <= lo) return uL;
  if (xi >= hi) return uR;
  return std::clamp(0.5 * (1.0 - xi), uR, uL);
}

/// Exact Greenshields solution for piecewise-constant data, valid while the
/// waves issued from the jumps have not met.
class PiecewiseConstantOracle {
 public:
  PiecewiseConstantOracle(std::vector<double> jumps, std::vector<double> values)
      : jumps_(std::move(jumps)), values_(std::move(values)) {
    if (values_.size() != jumps_.size() + 1) {
      throw Error(ErrorKind::precondition, "piecewise-constant datum needs one more value than jumps");
    }
    if (!std::is_sorted(jumps_.begin(), jumps_.end())) {
      throw Error(ErrorKind::precondition, "jump positions must be increasing");
    }
  }

  /// First time at which neighbouring wave fans touch.
  double valid_until() const {
    double t_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < jumps_.size(); ++i) {
      const double closing = speeds(i).second - speeds(i + 1).first;
      if (closing > 0.0) t_min = std::min(t_min, (jumps_[i + 1] - jumps_[i]) / closing);
    }
    return t_min;
  }

  double operator()(double t, double x) const {
    require_valid(t);
    std::size_t left_of = 0;
    for (std::size_t i = 0; i < jumps_.size(); ++i) {
      const auto [lo, hi] = extent(i, t);
      if (x >= lo && x <= hi && t > 0.0) return exact_riemann(values_[i], values_[i + 1], t, x - jumps_[i]);
      if (x > hi || (t == 0.0 && x >= jumps_[i])) left_of = i + 1;
    }
    return values_[left_of];
  }

  /// Exact cell averages: each cell is split at the fan edges, where the
  /// profile is at most linear, and integrated with 2-point Gauss.
  GridFunction cell_averages(const Grid& grid, double t) const {
    require_valid(t);
    std::vector<double> edges;
    for (std::size_t i = 0; i < jumps_.size(); ++i) {
      const auto [lo, hi] = extent(i, t);
      edges.push_back(lo);
      edges.push_back(hi);
    }
    std::sort(edges.begin(), edges.end());
    std::vector<double> v(grid.n_cells);
    std::vector<double> cuts;
    for (std::size_t j = 0; j < grid.n_cells; ++j) {
      const double a = grid.face(j);
      const double b = grid.face(j + 1);
      cuts.assign({a});
      for (double e : edges) {
        if (e > a && e < b) cuts.push_back(e);
      }
      if (cuts.size() == 1) {
        v[j] = (*this)(t, 0.5 * (a + b));
        continue;
      }
      cuts.push_back(b);
      quad::CompensatedSum s;
      for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        s += quad::gauss<2>([&](double x) { return (*this)(t, x); }, cuts[k], cuts[k + 1]);
      }
      v[j] = s.value() / (b - a);
    }
    return GridFunction(grid, std::move(v));
  }

  const std::vector<double>& jumps() const { return jumps_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::pair<double, double> speeds(std::size_t i) const {
    const double uL = values_[i];
    const double uR = values_[i + 1];
    if (uL <= uR) {
      const double s = 1.0 - (uL + uR);
      return {s, s};
    }
    return {1.0 - 2.0 * uL, 1.0 - 2.0 * uR};
  }
  std::pair<double, double> extent(std::size_t i, double t) const {
    const auto [lo, hi] = speeds(i);
    return {jumps_[i] + lo * t, jumps_[i] + hi * t};
  }
  void require_valid(double t) const {
    if (t > valid_until()) {
      throw Error(ErrorKind::precondition, "waves interact before t = " + std::to_string(t) +
                                               "; closed-form oracle does not apply");
    }
  }

  std::vector<double> jumps_;
  std::vector<double> values_;
};

}  // namespace nlt
