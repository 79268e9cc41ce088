#pragma once

// Admissible look-ahead kernels gamma supported on ]-inf, 0], their
// discretization as cell weights of gamma_eps(z) = gamma(z / eps) / eps, and
// the kernel-side spectral objects: the symbol gamma^(c), the coercivity
// profile h(z), and the constants eta and C0 derived from them.
//
// All spectral functions take the dimensionless frequency c = eps * xi.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nlt/error.hpp"
#include "nlt/quadrature.hpp"

namespace nlt {

using RealMap = std::function<double(double)>;
using ComplexMap = std::function<std::complex<double>(double)>;

struct KernelSpec {
  std::string name;
  RealMap density;     // gamma(z) for z <= 0
  RealMap derivative;  // gamma'(z) for z < 0, a.e.
  double support_left = -std::numeric_limits<double>::infinity();
  double gamma_at_zero = 0.0;
  std::optional<double> first_moment;  // closed form of int |z| gamma, if known
  RealMap primitive;                   // optional: int_{-inf}^{z} gamma
  ComplexMap analytic_symbol;          // optional: c -> gamma^(c)
  RealMap analytic_h;                  // optional: z -> h(z)

  bool finite_support() const { return std::isfinite(support_left); }

  /// Density extended by zero outside the support.
  double operator()(double z) const {
    if (z > 0.0 || z < support_left) return 0.0;
    return density(z);
  }
  double slope(double z) const {
    if (z >= 0.0 || z < support_left || !derivative) return 0.0;
    return derivative(z);
  }
};

namespace kernels {

/// gamma(z) = exp(z) on ]-inf, 0].
inline KernelSpec exponential() {
  KernelSpec k;
  k.name = "exp";
  k.density = [](double z) { return std::exp(z); };
  k.derivative = [](double z) { return std::exp(z); };
  k.gamma_at_zero = 1.0;
  k.first_moment = 1.0;
  k.primitive = [](double z) { return std::exp(std::min(z, 0.0)); };
  k.analytic_symbol = [](double c) { return std::complex<double>(1.0, c) / (1.0 + c * c); };
  k.analytic_h = [](double z) { return 2.0 * z * z / (1.0 + z * z); };
  return k;
}

namespace detail {

// sum_n (i c)^n |mu_n| / n!, usable for |c| < 1/2.
template <class Moment>
std::complex<double> moment_series(double c, Moment abs_moment) {
  std::complex<double> acc = 0.0;
  std::complex<double> term = 1.0;
  for (int n = 0; n < 30; ++n) {
    acc += term * abs_moment(n);
    term *= std::complex<double>(0.0, c) / static_cast<double>(n + 1);
  }
  return acc;
}

}  // namespace detail

/// gamma(z) = 2 (1 + z) on [-1, 0].
inline KernelSpec hat() {
  KernelSpec k;
  k.name = "hat";
  k.density = [](double z) { return 2.0 * (1.0 + z); };
  k.derivative = [](double) { return 2.0; };
  k.support_left = -1.0;
  k.gamma_at_zero = 2.0;
  k.first_moment = 1.0 / 3.0;
  k.primitive = [](double z) {
    const double u = std::clamp(1.0 + z, 0.0, 1.0);
    return u * u;
  };
  k.analytic_symbol = [](double c) -> std::complex<double> {
    if (std::abs(c) < 0.5) {
      return detail::moment_series(c, [](int n) { return 2.0 / ((n + 1.0) * (n + 2.0)); });
    }
    const std::complex<double> i(0.0, 1.0);
    return 2.0 * (i / c + (1.0 - std::exp(i * c)) / (c * c));
  };
  k.analytic_h = [](double z) {
    if (std::abs(z) < 1e-3) {
      const double z2 = z * z;
      return 4.0 * (z2 / 6.0 - z2 * z2 / 120.0 + z2 * z2 * z2 / 5040.0);
    }
    return 4.0 * (1.0 - std::sin(z) / z);
  };
  return k;
}

/// gamma(z) = 3 (1 + z)^2 on [-1, 0].
inline KernelSpec quadratic() {
  KernelSpec k;
  k.name = "quadratic";
  k.density = [](double z) { return 3.0 * (1.0 + z) * (1.0 + z); };
  k.derivative = [](double z) { return 6.0 * (1.0 + z); };
  k.support_left = -1.0;
  k.gamma_at_zero = 3.0;
  k.first_moment = 0.25;
  k.primitive = [](double z) {
    const double u = std::clamp(1.0 + z, 0.0, 1.0);
    return u * u * u;
  };
  k.analytic_symbol = [](double c) -> std::complex<double> {
    if (std::abs(c) < 0.5) {
      return detail::moment_series(
          c, [](int n) { return 6.0 / ((n + 1.0) * (n + 2.0) * (n + 3.0)); });
    }
    // 3 e^{ic} int_0^1 u^2 e^{beta u} du with beta = -ic.
    const std::complex<double> beta(0.0, -c);
    const std::complex<double> eb = std::exp(beta);
    const std::complex<double> inner =
        eb * (1.0 / beta - 2.0 / (beta * beta) + 2.0 / (beta * beta * beta)) -
        2.0 / (beta * beta * beta);
    return 3.0 * std::exp(std::complex<double>(0.0, c)) * inner;
  };
  k.analytic_h = [](double z) {
    if (std::abs(z) < 1e-2) {
      const double z2 = z * z;
      // 12 (1/2 - (1 - cos z)/z^2) expanded.
      return 12.0 * (z2 / 24.0 - z2 * z2 / 720.0 + z2 * z2 * z2 / 40320.0);
    }
    return 6.0 - 12.0 * (1.0 - std::cos(z)) / (z * z);
  };
  return k;
}

inline const std::vector<std::string>& names() {
  static const std::vector<std::string> all{"exp", "hat", "quadratic"};
  return all;
}

inline KernelSpec by_name(const std::string& name) {
  if (name == "exp") return exponential();
  if (name == "hat") return hat();
  if (name == "quadratic") return quadratic();
  throw Error(ErrorKind::malformed_spec, "unknown kernel '" + name + "' (expected exp, hat, quadratic)");
}

}  // namespace kernels

struct Panel {
  double a;
  double b;
};

/// Panel decomposition of the (numerically) effective support, together with
/// the integrals that were needed to decide where to stop.
struct KernelQuadrature {
  std::vector<Panel> panels;
  double mass = 0.0;
  double first_moment = 0.0;
  double derivative_mass = 0.0;
  double extent = 0.0;  // |left end of the last panel|
};

/// Unit panels on finite supports. Infinite supports walk left with unit panels
/// for 64 lengths, then doubling widths, until mass, first moment and
/// derivative contributions are negligible.
inline KernelQuadrature make_quadrature(const KernelSpec& spec) {
  constexpr std::size_t N = quad::kPanelOrder;
  KernelQuadrature q;
  quad::CompensatedSum mass;
  quad::CompensatedSum moment;
  quad::CompensatedSum dmass;
  auto add_panel = [&](double a, double b) {
    const double pm = quad::gauss<N>([&](double z) { return spec(z); }, a, b);
    const double pz = quad::gauss<N>([&](double z) { return -z * spec(z); }, a, b);
    const double pd = quad::gauss<N>([&](double z) { return spec.slope(z); }, a, b);
    if (!std::isfinite(pm) || !std::isfinite(pz) || !std::isfinite(pd)) {
      throw Error(ErrorKind::malformed_spec, "kernel '" + spec.name + "' has non-finite values on [" +
                                                 std::to_string(a) + ", " + std::to_string(b) + "]");
    }
    q.panels.push_back({a, b});
    mass += pm;
    moment += pz;
    dmass += pd;
    return std::max({std::abs(pm), std::abs(pz), std::abs(pd)});
  };

  if (spec.finite_support()) {
    const double len = -spec.support_left;
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(len - 1e-12)));
    for (std::size_t i = 0; i < n; ++i) {
      const double b = -len * static_cast<double>(i) / static_cast<double>(n);
      const double a = -len * static_cast<double>(i + 1) / static_cast<double>(n);
      add_panel(a, b);
    }
  } else {
    double b = 0.0;
    double width = 1.0;
    int quiet = 0;
    constexpr int kMaxPanels = 64 + 96;
    for (int i = 0; i < kMaxPanels; ++i) {
      if (i >= 64) width *= 2.0;
      const double contribution = add_panel(b - width, b);
      b -= width;
      quiet = contribution < 1e-18 ? quiet + 1 : 0;
      if (quiet >= 2) break;
      if (i + 1 == kMaxPanels) {
        throw Error(ErrorKind::divergent_moment,
                    "kernel '" + spec.name + "': tail contributions do not decay");
      }
    }
  }
  q.mass = mass.value();
  q.first_moment = moment.value();
  q.derivative_mass = dmass.value();
  q.extent = -q.panels.back().a;
  return q;
}

// ---------------------------------------------------------------------------
// Admissibility

struct Violation {
  std::string invariant;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool admissible() const { return violations.empty(); }
  bool has(const std::string& invariant) const {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const Violation& v) { return v.invariant == invariant; });
  }
};

/// Sampled admissibility check: sign, monotonicity, midpoint convexity on
/// random triples, unit mass, finite first moment, and int gamma' = gamma(0)
/// (the last one flags derivatives with atoms).
inline ValidationReport validate(const KernelSpec& spec, std::size_t n_samples, double tol) {
  if (n_samples < 3) throw Error(ErrorKind::precondition, "validate needs n_samples >= 3");
  if (!(tol > 0.0)) throw Error(ErrorKind::precondition, "validate needs tol > 0");
  if (!spec.density) throw Error(ErrorKind::malformed_spec, "kernel '" + spec.name + "' has no density");

  ValidationReport report;
  auto flag = [&](std::string inv, std::string detail) {
    if (!report.has(inv)) report.violations.push_back({std::move(inv), std::move(detail)});
  };

  if (!(spec.support_left < 0.0)) flag("support", "support_left must be negative");

  KernelQuadrature q;
  bool moment_ok = true;
  try {
    q = make_quadrature(spec);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::divergent_moment) throw;
    moment_ok = false;
  }

  // Sampling window reaches past a finite support so that jumps at the left
  // end show up in the convexity test.
  double lo = 0.0;
  if (spec.finite_support()) {
    lo = spec.support_left * 1.5;
  } else {
    lo = -std::min(moment_ok ? q.extent : 64.0, 64.0);
  }

  auto eval = [&](double z) {
    const double v = spec(z);
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::malformed_spec,
                  "kernel '" + spec.name + "' density is not finite at z = " + std::to_string(z));
    }
    return v;
  };

  double prev = eval(lo);
  double scale = std::max(1.0, std::abs(spec.gamma_at_zero));
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double z = lo + (0.0 - lo) * static_cast<double>(i) / static_cast<double>(n_samples - 1);
    const double v = eval(z);
    if (v < -tol) flag("nonnegativity", "gamma(" + std::to_string(z) + ") = " + std::to_string(v));
    if (i > 0 && v < prev - tol * scale) {
      flag("monotonicity", "gamma decreases near z = " + std::to_string(z));
    }
    prev = v;
    if (spec.derivative && z < 0.0 && z > spec.support_left) {
      const double d = spec.derivative(z);
      if (!std::isfinite(d)) {
        throw Error(ErrorKind::malformed_spec,
                    "kernel '" + spec.name + "' derivative is not finite at z = " + std::to_string(z));
      }
      if (d < -tol) flag("derivative_sign", "gamma'(" + std::to_string(z) + ") < 0");
    }
  }

  std::mt19937_64 rng(0x6b65726e656cULL);
  std::uniform_real_distribution<double> pick(lo, 0.0);
  for (std::size_t i = 0; i < n_samples; ++i) {
    double z1 = pick(rng);
    double z2 = pick(rng);
    if (z1 > z2) std::swap(z1, z2);
    const double mid = 0.5 * (z1 + z2);
    if (eval(mid) > 0.5 * (eval(z1) + eval(z2)) + tol * scale) {
      flag("convexity", "midpoint test fails on [" + std::to_string(z1) + ", " + std::to_string(z2) + "]");
    }
  }

  if (!moment_ok) {
    flag("first_moment", "int |z| gamma(z) dz does not converge");
    return report;
  }
  if (std::abs(q.mass - 1.0) > tol) flag("normalization", "int gamma = " + std::to_string(q.mass));
  if (std::abs(eval(0.0) - spec.gamma_at_zero) > tol * scale) {
    flag("gamma_at_zero", "gamma_at_zero field disagrees with density(0)");
  }
  if (!spec.derivative) {
    flag("derivative_mass", "no derivative supplied");
  } else if (std::abs(q.derivative_mass - spec.gamma_at_zero) > tol * scale) {
    flag("derivative_mass", "int gamma' = " + std::to_string(q.derivative_mass) +
                                " differs from gamma(0); derivative has atoms or is inconsistent");
  }
  return report;
}

/// int |z| gamma(z) dz over the support.
inline double first_moment(const KernelSpec& spec) { return make_quadrature(spec).first_moment; }

inline double total_mass(const KernelSpec& spec) { return make_quadrature(spec).mass; }

// ---------------------------------------------------------------------------
// Discretization

struct DiscreteKernel {
  double eps = 0.0;
  double dx = 0.0;
  std::vector<double> weights;  // Gamma_k = int over [-(k+1)dx, -k dx] of gamma_eps
  double truncated_mass = 0.0;  // 1 - sum Gamma_k
  double gamma_eps_at_zero = 0.0;

  std::size_t size() const { return weights.size(); }
  double weight_sum() const { return quad::compensated_sum(weights); }
};

inline constexpr std::size_t kMaxKernelCells = 10'000'000;

/// Cell weights of gamma_eps on a grid of width dx. Only h = dx / eps enters the
/// weights, so (eps, dx) and (1, dx / eps) give identical results.
inline DiscreteKernel discretize(const KernelSpec& spec, double eps, double dx, double tail_tol) {
  if (!(eps > 0.0) || !(dx > 0.0) || !(tail_tol > 0.0)) {
    throw Error(ErrorKind::precondition, "discretize needs eps > 0, dx > 0, tail_tol > 0");
  }
  if (dx > eps) {
    throw Error(ErrorKind::under_resolved, "dx = " + std::to_string(dx) + " exceeds eps = " +
                                               std::to_string(eps) + "; kernel is under-resolved");
  }
  const double h = dx / eps;
  DiscreteKernel k;
  k.eps = eps;
  k.dx = dx;
  k.gamma_eps_at_zero = spec.gamma_at_zero / eps;

  auto cell = [&](std::size_t i) {
    const double b = -h * static_cast<double>(i);
    const double a = std::max(-h * static_cast<double>(i + 1), spec.support_left);
    if (a >= b) return 0.0;
    if (spec.primitive) return std::max(0.0, spec.primitive(b) - spec.primitive(a));
    return std::max(0.0, quad::gauss<32>([&](double z) { return spec(z); }, a, b));
  };

  quad::CompensatedSum sum;
  if (spec.finite_support()) {
    const auto m = static_cast<std::size_t>(std::ceil(-spec.support_left / h - 1e-9));
    if (m > kMaxKernelCells) throw Error(ErrorKind::truncation, "kernel window exceeds cell budget");
    k.weights.reserve(std::max<std::size_t>(m, 1));
    for (std::size_t i = 0; i < std::max<std::size_t>(m, 1); ++i) {
      k.weights.push_back(cell(i));
      sum += k.weights.back();
    }
  } else {
    for (std::size_t i = 0;; ++i) {
      if (i >= kMaxKernelCells) {
        throw Error(ErrorKind::truncation, "kernel '" + spec.name + "': tail tolerance " +
                                               std::to_string(tail_tol) + " not reached within " +
                                               std::to_string(kMaxKernelCells) + " cells");
      }
      k.weights.push_back(cell(i));
      sum += k.weights.back();
      const double tail = spec.primitive ? spec.primitive(-h * static_cast<double>(i + 1))
                                         : 1.0 - sum.value();
      if (tail <= tail_tol) break;
    }
  }

  double total = sum.value();
  if (total > 1.0) {
    for (double& w : k.weights) w /= total;
    total = k.weight_sum();
    if (total > 1.0) k.weights.front() -= (total - 1.0);
    total = k.weight_sum();
  }
  k.truncated_mass = std::max(0.0, 1.0 - total);
  if (k.truncated_mass > tail_tol) {
    throw Error(ErrorKind::truncation, "kernel '" + spec.name + "' loses mass " +
                                           std::to_string(k.truncated_mass) + " > tail_tol");
  }
  return k;
}

/// Exact cell integrals of gamma_eps' matching the cells of `k`. The
/// truncated tail is lumped into the last cell so that sum = gamma_eps(0).
inline std::vector<double> derivative_weights(const KernelSpec& spec, const DiscreteKernel& k) {
  const double h = k.dx / k.eps;
  std::vector<double> d(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double right = spec(-h * static_cast<double>(i));
    const double left = (i + 1 == k.size()) ? 0.0 : spec(-h * static_cast<double>(i + 1));
    d[i] = (right - left) / k.eps;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Spectral objects

/// gamma^(c) = int gamma(z) exp(-i c z) dz = a + i b.
inline std::complex<double> fourier_symbol(const KernelSpec& spec, const KernelQuadrature& q, double c) {
  std::complex<double> acc = 0.0;
  for (const Panel& p : q.panels) acc += quad::oscillatory([&](double z) { return spec(z); }, p.a, p.b, c);
  if (!std::isfinite(acc.real()) || !std::isfinite(acc.imag())) {
    throw Error(ErrorKind::numeric, "symbol quadrature failed at c = " + std::to_string(c));
  }
  return acc;
}

inline std::complex<double> fourier_symbol(const KernelSpec& spec, double c) {
  return fourier_symbol(spec, make_quadrature(spec), c);
}

/// h(z) = int 2 (1 - cos(z s)) gamma'(s) ds.
inline double h_function(const KernelSpec& spec, const KernelQuadrature& q, double z) {
  if (!spec.derivative) {
    throw Error(ErrorKind::unsupported_kernel, "kernel '" + spec.name + "' has no integrable derivative");
  }
  if (z == 0.0) return 0.0;
  quad::CompensatedSum acc;
  for (const Panel& p : q.panels) {
    const double half = 0.5 * (p.b - p.a);
    if (std::abs(z) * half <= 8.0) {
      acc += quad::gauss<quad::kPanelOrder>(
          [&](double s) {
            const double sn = std::sin(0.5 * z * s);
            return 4.0 * sn * sn * spec.slope(s);
          },
          p.a, p.b);
    } else {
      const double dm = quad::gauss<quad::kPanelOrder>([&](double s) { return spec.slope(s); }, p.a, p.b);
      const auto osc = quad::oscillatory([&](double s) { return spec.slope(s); }, p.a, p.b, z);
      acc += 2.0 * (dm - osc.real());
    }
  }
  const double v = acc.value();
  if (!std::isfinite(v)) throw Error(ErrorKind::numeric, "h quadrature failed at z = " + std::to_string(z));
  return v;
}

inline double h_function(const KernelSpec& spec, double z) {
  return h_function(spec, make_quadrature(spec), z);
}

struct SpectralConstants {
  double eta = 0.0;  // inf_{delta <= |z| <= z_max} h(z) / delta^2
  double C0 = 0.0;   // sup_{|c| <= delta} |1/gamma^(c) - 1| / delta
};

namespace detail {

template <class F>
double golden_min(F&& f, double a, double b, double tol = 1e-12) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol * std::max(1.0, std::abs(a) + std::abs(b))) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

/// Grid scan plus golden-section refinement around the best grid point. The
/// large-|z| asymptote 2 gamma(0) also competes for the infimum of h.
inline SpectralConstants spectral_constants(const KernelSpec& spec, double delta, double z_max,
                                            std::size_t n_grid) {
  if (!(delta > 0.0) || !(z_max > delta)) {
    throw Error(ErrorKind::precondition, "spectral_constants needs 0 < delta < z_max");
  }
  if (n_grid < 100) throw Error(ErrorKind::precondition, "spectral_constants needs n_grid >= 100");
  const KernelQuadrature q = make_quadrature(spec);

  auto hz = [&](double z) { return h_function(spec, q, z); };
  std::vector<double> zs(n_grid);
  std::size_t imin = 0;
  double hmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n_grid; ++i) {
    zs[i] = delta + (z_max - delta) * static_cast<double>(i) / static_cast<double>(n_grid - 1);
    const double v = hz(zs[i]);
    if (v < hmin) {
      hmin = v;
      imin = i;
    }
  }
  {
    const double a = zs[imin == 0 ? 0 : imin - 1];
    const double b = zs[std::min(imin + 1, n_grid - 1)];
    const double zr = detail::golden_min(hz, a, b);
    hmin = std::min(hmin, hz(zr));
  }
  hmin = std::min(hmin, 2.0 * spec.gamma_at_zero);

  auto dev = [&](double c) { return std::abs(1.0 / fourier_symbol(spec, q, c) - 1.0); };
  std::size_t imax = 0;
  double devmax = 0.0;
  std::vector<double> cs(n_grid);
  for (std::size_t i = 0; i < n_grid; ++i) {
    cs[i] = delta * static_cast<double>(i) / static_cast<double>(n_grid - 1);
    const double v = dev(cs[i]);
    if (v > devmax) {
      devmax = v;
      imax = i;
    }
  }
  {
    const double a = cs[imax == 0 ? 0 : imax - 1];
    const double b = cs[std::min(imax + 1, n_grid - 1)];
    const double cr = detail::golden_min([&](double c) { return -dev(c); }, a, b);
    devmax = std::max(devmax, dev(cr));
  }

  SpectralConstants out{hmin / (delta * delta), devmax / delta};
  if (!(out.eta > 0.0) || !std::isfinite(out.eta)) {
    throw Error(ErrorKind::inadmissible_kernel,
                "kernel '" + spec.name + "': h vanishes on [delta, z_max] (eta = " + std::to_string(out.eta) + ")");
  }
  if (!(out.C0 > 0.0) || !std::isfinite(out.C0)) {
    throw Error(ErrorKind::inadmissible_kernel, "kernel '" + spec.name + "': C0 is not positive and finite");
  }
  return out;
}

struct KernelReport {
  std::string name;
  double mass = 0.0;
  double first_moment = 0.0;
  double gamma0 = 0.0;
  double delta = 0.0;
  SpectralConstants constants;
  ValidationReport validation;
};

inline KernelReport kernel_report(const KernelSpec& spec, double delta, double z_max = 50.0,
                                  std::size_t n_grid = 2000) {
  KernelReport r;
  r.name = spec.name;
  r.validation = validate(spec, 200, 1e-9);
  const KernelQuadrature q = make_quadrature(spec);
  r.mass = q.mass;
  r.first_moment = q.first_moment;
  r.gamma0 = spec.gamma_at_zero;
  r.delta = delta;
  r.constants = spectral_constants(spec, delta, z_max, n_grid);
  return r;
}

}  // namespace nlt
