#pragma once

// Measurable counterparts of the Fourier-side estimates: unitary spectra of
// grid functions, high-frequency tail energies, the shift functional rho, and
// residuals of the Volterra identity  w' = gamma_eps' * u - gamma_eps(0) u.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "nlt/error.hpp"
#include "nlt/grid.hpp"
#include "nlt/kernel.hpp"
#include "nlt/nonlocal_solver.hpp"
#include "nlt/quadrature.hpp"

namespace nlt {

/// Samples of the unitary transform  u^(xi) = (2 pi)^{-1/2} int u(x) e^{-i xi x} dx
/// at xi_m = 2 pi m / L, m in the symmetric index range, ascending.
struct Spectrum {
  std::vector<double> freqs;
  std::vector<std::complex<double>> amps;
  double dx = 0.0;
  double domain_length = 0.0;

  double dxi() const { return 2.0 * std::numbers::pi / domain_length; }
  double nyquist() const { return std::numbers::pi / dx; }
  std::size_t size() const { return freqs.size(); }

  /// sum |u^_m|^2 dxi
  double energy() const {
    quad::CompensatedSum s;
    for (const auto& a : amps) s += std::norm(a);
    return s.value() * dxi();
  }
};

namespace detail {
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

struct SpectrumOptions {
  bool require_decay = true;
  double decay_tol = 1e-8;
};

inline Spectrum spectrum(const GridFunction& f, const SpectrumOptions& opts = {}) {
  const std::size_t n = f.size();
  if (opts.require_decay) {
    double peak = 0.0;
    for (double v : f.values()) peak = std::max(peak, std::abs(v));
    const double edge = std::max(std::abs(f[0]), std::abs(f[n - 1]));
    if (edge > opts.decay_tol * peak) {
      throw Error(ErrorKind::padding, "field does not decay at the boundary (edge " + std::to_string(edge) +
                                          ", peak " + std::to_string(peak) + "); enlarge the domain");
    }
  }

  std::vector<double> in(f.values().begin(), f.values().end());
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }

  Spectrum s;
  s.dx = f.grid().dx;
  s.domain_length = f.grid().length();
  const auto m_lo = -static_cast<std::ptrdiff_t>(n / 2);
  const auto m_hi = static_cast<std::ptrdiff_t>((n - 1) / 2);
  const double x0 = f.grid().center(0);
  const double norm = s.dx / std::sqrt(2.0 * std::numbers::pi);
  s.freqs.reserve(n);
  s.amps.reserve(n);
  for (std::ptrdiff_t m = m_lo; m <= m_hi; ++m) {
    const std::size_t idx = static_cast<std::size_t>(m < 0 ? -m : m);
    std::complex<double> X = out[idx];
    if (m < 0) X = std::conj(X);
    const double xi = 2.0 * std::numbers::pi * static_cast<double>(m) / s.domain_length;
    s.freqs.push_back(xi);
    s.amps.push_back(norm * X * std::polar(1.0, -xi * x0));
  }
  return s;
}

enum class BandPolicy {
  strict,  // a band starting beyond Nyquist is an error
  clip,    // ... or simply empty
};

/// sum over |eps xi_m| >= delta of |u^_m|^2 dxi.
inline double tail_energy(const Spectrum& s, double eps, double delta, BandPolicy policy = BandPolicy::strict) {
  if (!(delta > 0.0) || !(eps > 0.0)) throw Error(ErrorKind::precondition, "tail_energy needs eps, delta > 0");
  const double cutoff = delta / eps;
  if (cutoff > s.nyquist()) {
    if (policy == BandPolicy::clip) return 0.0;
    throw Error(ErrorKind::unresolved_band, "band |xi| >= " + std::to_string(cutoff) + " lies beyond Nyquist " +
                                                std::to_string(s.nyquist()));
  }
  quad::CompensatedSum acc;
  for (std::size_t m = 0; m < s.size(); ++m) {
    if (std::abs(eps * s.freqs[m]) >= delta) acc += std::norm(s.amps[m]);
  }
  return acc.value() * s.dxi();
}

struct RhoValue {
  double value = 0.0;
  std::ptrdiff_t cells = 0;  // shift actually used
  bool snapped = false;      // s was not a cell multiple
};

/// sum_j (u_{j-k} - u_j)^2 dx, edge-extended.
inline double rho_cells(const GridFunction& u, std::ptrdiff_t k) {
  quad::CompensatedSum s;
  const auto n = static_cast<std::ptrdiff_t>(u.size());
  // Outside [min(0,k), n + max(0,k)) both terms are the same edge value.
  for (std::ptrdiff_t j = std::min<std::ptrdiff_t>(0, k); j < n + std::max<std::ptrdiff_t>(0, k); ++j) {
    const double d = u.extended(j - k) - u.extended(j);
    s += d * d;
  }
  return s.value() * u.grid().dx;
}

inline RhoValue rho(const GridFunction& u, double shift) {
  const double r = shift / u.grid().dx;
  const auto k = static_cast<std::ptrdiff_t>(std::llround(r));
  return {rho_cells(u, k), k, std::abs(r - static_cast<double>(k)) > 1e-9};
}

/// Fourier route: sum_m 2 (1 - cos(s xi_m)) |u^_m|^2 dxi.
inline double rho_fourier(const Spectrum& s, double shift) {
  quad::CompensatedSum acc;
  for (std::size_t m = 0; m < s.size(); ++m) {
    const double sn = std::sin(0.5 * shift * s.freqs[m]);
    acc += 4.0 * sn * sn * std::norm(s.amps[m]);
  }
  return acc.value() * s.dxi();
}

struct BoundCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool pass = false;
};

inline BoundCheck check_bound(std::string name, double lhs, double rhs, double slack) {
  return {std::move(name), lhs, rhs, slack, std::isfinite(lhs) && lhs <= rhs * (1.0 + slack)};
}

/// lhs = int rho(u, s) gamma_eps'(s) ds over the truncated support, with exact
/// cell integrals of gamma_eps' and rho linearly interpolated between cell
/// multiples; rhs = 2 TV(u0).
inline BoundCheck rho_gamma_bound(const GridFunction& u, const KernelSpec& spec, double eps, double u0_tv,
                                  double tail_tol = 1e-10) {
  if (!spec.derivative) {
    throw Error(ErrorKind::unsupported_kernel, "kernel '" + spec.name + "' has no integrable derivative");
  }
  const DiscreteKernel K = discretize(spec, eps, u.grid().dx, tail_tol);
  const std::vector<double> D = derivative_weights(spec, K);
  std::vector<double> shifted(K.size() + 1);
  for (std::size_t k = 0; k <= K.size(); ++k) shifted[k] = rho_cells(u, -static_cast<std::ptrdiff_t>(k));
  quad::CompensatedSum lhs;
  for (std::size_t k = 0; k < K.size(); ++k) lhs += D[k] * 0.5 * (shifted[k] + shifted[k + 1]);
  return check_bound("rho_gamma", lhs.value(), 2.0 * u0_tv, 1e-8);
}

namespace detail {

inline std::vector<double> derivative_convolution(const GridFunction& u, const std::vector<double>& D) {
  std::vector<double> out(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < D.size(); ++k) acc += D[k] * u.extended(static_cast<std::ptrdiff_t>(j + k));
    out[j] = acc;
  }
  return out;
}

inline double centered_difference(const GridFunction& w, std::size_t j) {
  const auto i = static_cast<std::ptrdiff_t>(j);
  return (w.extended(i + 1) - w.extended(i - 1)) / (2.0 * w.grid().dx);
}

}  // namespace detail

/// sup_j | D_x w_j - ((gamma_eps' * u)_j - gamma_eps(0) u_j) |  with w = Gamma * u.
inline double volterra_residual(const GridFunction& u, const DiscreteKernel& K, const KernelSpec& spec) {
  const GridFunction w = nonlocal_impact(u, K);
  const auto conv = detail::derivative_convolution(u, derivative_weights(spec, K));
  double sup = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double r = detail::centered_difference(w, j) - (conv[j] - K.gamma_eps_at_zero * u[j]);
    sup = std::max(sup, std::abs(r));
  }
  return sup;
}

/// Exponential-kernel specialization: sup_j | eps D_x w_j - (w_j - u_j) |.
inline double exponential_residual(const GridFunction& u, const DiscreteKernel& K) {
  const GridFunction w = nonlocal_impact(u, K);
  double sup = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double r = K.eps * detail::centered_difference(w, j) - (w[j] - u[j]);
    sup = std::max(sup, std::abs(r));
  }
  return sup;
}

/// ||u(t)||^2 <= exp(V_lip gamma_eps(0) t) ||u0||^2 (1 + 1e-6).
inline BoundCheck energy_bound(const GridFunction& u_t, const GridFunction& u0, double V_lip,
                               double gamma_eps_at_zero, double t) {
  return check_bound("energy_gronwall", l2_norm_squared(u_t),
                     std::exp(V_lip * gamma_eps_at_zero * t) * l2_norm_squared(u0), 1e-6);
}

}  // namespace nlt
