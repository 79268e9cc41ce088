#pragma once

// Upwind finite-volume scheme for
//   u_t + (V(u * gamma_eps) u)_x = 0,
// with the velocity evaluated on the discrete look-ahead average w = Gamma * u.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "nlt/error.hpp"
#include "nlt/grid.hpp"
#include "nlt/kernel.hpp"
#include "nlt/quadrature.hpp"
#include "nlt/velocity.hpp"

namespace nlt {

/// Where the flux velocity reads the impact: `interface` uses the window that
/// starts at the downstream neighbour (monotone choice), `cell` reuses w_j.
enum class ImpactLocation { interface, cell };

struct NonlocalState {
  double t = 0.0;
  GridFunction u;
  std::shared_ptr<const DiscreteKernel> kernel;
  std::shared_ptr<const VelocityModel> model;
};

namespace detail {

// conv[s + 1] = sum_k Gamma_k u_ext(s + k) for s = -1 .. N.
inline std::vector<double> shifted_windows(const GridFunction& u, const DiscreteKernel& K) {
  const std::size_t n = u.size();
  const std::size_t m = K.size();
  std::vector<double> ext(n + m + 2);
  ext[0] = u[0];
  for (std::size_t j = 0; j < n; ++j) ext[j + 1] = u[j];
  for (std::size_t j = n + 1; j < ext.size(); ++j) ext[j] = u[n - 1];
  std::vector<double> conv(n + 2);
  for (std::size_t s = 0; s < n + 2; ++s) {
    const double* base = ext.data() + s;
    const double* wk = K.weights.data();
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    std::size_t k = 0;
    for (; k + 4 <= m; k += 4) {
      a0 += wk[k] * base[k];
      a1 += wk[k + 1] * base[k + 1];
      a2 += wk[k + 2] * base[k + 2];
      a3 += wk[k + 3] * base[k + 3];
    }
    for (; k < m; ++k) a0 += wk[k] * base[k];
    conv[s] = (a0 + a1) + (a2 + a3);
  }
  return conv;
}

inline void require_matching(const GridFunction& u, const DiscreteKernel& K) {
  if (std::abs(K.dx - u.grid().dx) > 1e-12 * u.grid().dx) {
    throw Error(ErrorKind::shape, "kernel dx does not match the grid");
  }
}

}  // namespace detail

/// w_j = sum_k Gamma_k u_{j+k}, edge-extended on the right.
inline GridFunction nonlocal_impact(const GridFunction& u, const DiscreteKernel& K) {
  detail::require_matching(u, K);
  const auto conv = detail::shifted_windows(u, K);
  return GridFunction(u.grid(), std::vector<double>(conv.begin() + 1, conv.end() - 1));
}

inline double cfl_timestep(const NonlocalState& state, double cfl) {
  if (!(cfl > 0.0) || cfl > 1.0) throw Error(ErrorKind::precondition, "cfl must lie in (0, 1]");
  const double dx = state.u.grid().dx;
  const double denom = state.model->V_max + dx * state.model->V_lip * state.kernel->gamma_eps_at_zero;
  if (denom <= 0.0) return cfl * dx;
  return cfl * dx / denom;
}

struct StepResult {
  NonlocalState state;
  double inflow = 0.0;        // mass entering through the left face
  double outflow = 0.0;       // mass leaving through the right face
  double clamp_adjust = 0.0;  // mass added by rounding values back into [0, 1]
};

inline StepResult step(const NonlocalState& state, double dt,
                       ImpactLocation location = ImpactLocation::interface) {
  const GridFunction& u = state.u;
  const DiscreteKernel& K = *state.kernel;
  const VelocityModel& V = *state.model;
  detail::require_matching(u, K);
  if (!(dt > 0.0)) throw Error(ErrorKind::precondition, "time step must be positive");
  const double dt_max = cfl_timestep(state, 1.0);
  if (dt > dt_max * (1.0 + 1e-12)) {
    throw Error(ErrorKind::cfl, "dt = " + std::to_string(dt) + " exceeds the stability limit " +
                                    std::to_string(dt_max));
  }

  const std::size_t n = u.size();
  const double lambda = dt / u.grid().dx;
  const auto conv = detail::shifted_windows(u, K);

  // speed[i]: velocity at the face between cells i-1 and i, i = 0 .. n.
  std::vector<double> speed(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double w = location == ImpactLocation::interface ? conv[i + 1] : conv[i];
    speed[i] = V(std::clamp(w, 0.0, 1.0));
  }

  std::vector<double> next(n);
  quad::CompensatedSum clamp;
  for (std::size_t j = 0; j < n; ++j) {
    const double upstream = j == 0 ? u[0] : u[j - 1];
    double v = u[j] * (1.0 - lambda * speed[j + 1]) + lambda * speed[j] * upstream;
    if (v < -1e-12 || v > 1.0 + 1e-12 || !std::isfinite(v)) {
      throw Error(ErrorKind::invariant_region, "cell " + std::to_string(j) + " left [0,1]: " +
                                                   std::to_string(v) + " (CFL misuse?)");
    }
    const double c = std::clamp(v, 0.0, 1.0);
    if (c != v) clamp += (c - v) * u.grid().dx;
    next[j] = c;
  }

  StepResult r;
  r.inflow = dt * speed[0] * u[0];
  r.outflow = dt * speed[n] * u[n - 1];
  r.clamp_adjust = clamp.value();
  r.state = NonlocalState{state.t + dt, GridFunction(u.grid(), std::move(next)), state.kernel, state.model};
  return r;
}

struct MassLedger {
  double initial = 0.0;
  double final = 0.0;
  double inflow = 0.0;
  double outflow = 0.0;
  double clamp_adjust = 0.0;

  /// final - (initial + inflow - outflow + clamp_adjust)
  double residual() const { return final - (initial + inflow - outflow + clamp_adjust); }
  double relative_residual() const {
    const double scale = std::max({std::abs(initial), std::abs(final), 1e-300});
    return std::abs(residual()) / scale;
  }
};

struct RunOptions {
  ImpactLocation location = ImpactLocation::interface;
  /// Called after every accepted step (and once for the initial state).
  std::function<void(const NonlocalState&)> observer;
};

struct RunResult {
  std::vector<NonlocalState> snapshots;  // t = 0, every snap time, and T
  MassLedger ledger;
  std::size_t steps = 0;
};

inline RunResult run(const GridFunction& u0, std::shared_ptr<const DiscreteKernel> K,
                     std::shared_ptr<const VelocityModel> model, double T, double cfl,
                     std::vector<double> snap_times, const RunOptions& options = {}) {
  if (!(T >= 0.0)) throw Error(ErrorKind::precondition, "T must be non-negative");
  if (!u0.in_unit_interval()) throw Error(ErrorKind::precondition, "initial datum must lie in [0,1]");
  for (double s : snap_times) {
    if (s < 0.0 || s > T) throw Error(ErrorKind::precondition, "snapshot time outside [0, T]");
  }
  snap_times.push_back(T);
  std::sort(snap_times.begin(), snap_times.end());
  snap_times.erase(std::unique(snap_times.begin(), snap_times.end()), snap_times.end());

  RunResult out;
  NonlocalState state{0.0, u0, std::move(K), std::move(model)};
  out.snapshots.push_back(state);
  if (options.observer) options.observer(state);

  quad::CompensatedSum inflow;
  quad::CompensatedSum outflow;
  quad::CompensatedSum clamp;
  for (double target : snap_times) {
    if (target == 0.0) continue;
    while (state.t < target) {
      double dt = cfl_timestep(state, cfl);
      bool lands = false;
      if (state.t + dt >= target * (1.0 - 1e-14)) {
        dt = target - state.t;
        lands = true;
      }
      StepResult r = step(state, dt, options.location);
      inflow += r.inflow;
      outflow += r.outflow;
      clamp += r.clamp_adjust;
      state = std::move(r.state);
      if (lands) state.t = target;
      ++out.steps;
      if (options.observer) options.observer(state);
    }
    out.snapshots.push_back(state);
  }
  out.ledger.initial = mass(u0);
  out.ledger.final = mass(state.u);
  out.ledger.inflow = inflow.value();
  out.ledger.outflow = outflow.value();
  out.ledger.clamp_adjust = clamp.value();
  return out;
}

}  // namespace nlt
