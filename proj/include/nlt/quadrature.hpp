#pragma once

// Gauss-Legendre rules, compensated summation, and a Legendre-Filon rule for
// integrals of the form  int_a^b f(z) exp(-i omega z) dz  that stays accurate
// for arbitrarily large |omega|.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>

namespace nlt::quad {

/// Nodes on [-1, 1] and weights of the N-point Gauss-Legendre rule.
template <std::size_t N>
struct GaussLegendre {
  std::array<double, N> nodes{};
  std::array<double, N> weights{};

  static const GaussLegendre& get() {
    static const GaussLegendre rule = build();
    return rule;
  }

 private:
  static GaussLegendre build() {
    GaussLegendre r;
    for (std::size_t i = 0; i < N; ++i) {
      double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                          (static_cast<double>(N) + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t k = 2; k <= N; ++k) {
          const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
          p0 = p1;
          p1 = pk;
        }
        dp = static_cast<double>(N) * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      r.nodes[N - 1 - i] = x;
      r.weights[N - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
  }
};

/// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double v) {
    add(v);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

/// N-point Gauss-Legendre integral of f over [a, b].
template <std::size_t N, class F>
double gauss(F&& f, double a, double b) {
  const auto& rule = GaussLegendre<N>::get();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (std::size_t i = 0; i < N; ++i) acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return acc * half;
}

/// Spherical Bessel functions j_0(x) .. j_{n-1}(x) for x > 0.
/// Upward recurrence where it is stable (k < x), Miller's downward recurrence
/// for the remaining orders.
inline void spherical_bessel(double x, std::span<double> out) {
  const std::size_t n = out.size();
  if (n == 0) return;
  const double j0 = std::sin(x) / x;
  const double j1 = std::sin(x) / (x * x) - std::cos(x) / x;
  const std::size_t up_to = std::min<std::size_t>(n, static_cast<std::size_t>(std::floor(x)) + 1);
  out[0] = j0;
  if (n > 1) out[1] = j1;
  for (std::size_t k = 2; k < up_to; ++k) {
    out[k] = (2.0 * static_cast<double>(k) - 1.0) / x * out[k - 1] - out[k - 2];
  }
  if (up_to >= n) return;

  // Reached only for x < n - 1, so start < 2n + 24.
  const std::size_t start = n + 24 + static_cast<std::size_t>(std::ceil(x));
  std::array<double, 160> down{};
  if (start + 2 > down.size()) {
    for (std::size_t k = up_to; k < n; ++k) out[k] = std::sph_bessel(static_cast<unsigned>(k), x);
    return;
  }
  down[start + 1] = 0.0;
  down[start] = 1e-300;
  for (std::size_t k = start; k >= 1; --k) {
    down[k - 1] = (2.0 * static_cast<double>(k) + 1.0) / x * down[k] - down[k + 1];
    if (std::abs(down[k - 1]) > 1e250) {
      for (std::size_t m = k - 1; m <= start + 1; ++m) down[m] *= 1e-250;
    }
  }
  const double scale = std::abs(j0) >= std::abs(j1) ? j0 / down[0] : j1 / down[1];
  for (std::size_t k = up_to; k < n; ++k) out[k] = down[k] * scale;
}

inline constexpr std::size_t kPanelOrder = 24;

/// int_a^b f(z) exp(-i omega z) dz.
///
/// Small phase per panel: plain Gauss-Legendre on the oscillating integrand.
/// Large phase: f is expanded in Legendre polynomials from its values at the
/// Gauss nodes and each term is integrated exactly through
///   int_{-1}^{1} P_k(t) exp(-i theta t) dt = 2 (-i)^k j_k(theta).
template <class F>
std::complex<double> oscillatory(F&& f, double a, double b, double omega) {
  constexpr std::size_t N = kPanelOrder;
  const auto& rule = GaussLegendre<N>::get();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double theta = omega * half;

  std::array<double, N> fv{};
  for (std::size_t i = 0; i < N; ++i) fv[i] = f(mid + half * rule.nodes[i]);

  if (std::abs(theta) <= 8.0) {
    double re = 0.0;
    double im = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double phase = omega * (mid + half * rule.nodes[i]);
      re += rule.weights[i] * fv[i] * std::cos(phase);
      im -= rule.weights[i] * fv[i] * std::sin(phase);
    }
    return {re * half, im * half};
  }

  // Legendre coefficients of the degree N-1 interpolant.
  std::array<double, N> coef{};
  for (std::size_t i = 0; i < N; ++i) {
    const double t = rule.nodes[i];
    double p0 = 1.0;
    double p1 = t;
    coef[0] += rule.weights[i] * fv[i] * p0;
    coef[1] += rule.weights[i] * fv[i] * p1;
    for (std::size_t k = 2; k < N; ++k) {
      const double pk = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / static_cast<double>(k);
      p0 = p1;
      p1 = pk;
      coef[k] += rule.weights[i] * fv[i] * pk;
    }
  }
  std::array<double, N> jk{};
  spherical_bessel(std::abs(theta), jk);
  const double sgn = theta < 0.0 ? -1.0 : 1.0;
  // (-i)^k cycles 1, -i, -1, i; j_k(-x) = (-1)^k j_k(x).
  double re = 0.0;
  double im = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    const double ck = (2.0 * k + 1.0) / 2.0 * coef[k];
    const double jv = (k % 2 == 1 ? sgn : 1.0) * jk[k];
    const double term = 2.0 * ck * jv;
    switch (k % 4) {
      case 0: re += term; break;
      case 1: im -= term; break;
      case 2: re -= term; break;
      case 3: im += term; break;
    }
  }
  const std::complex<double> local{re, im};
  return half * std::polar(1.0, -omega * mid) * local;
}

}  // namespace nlt::quad
