#pragma once

// eps-sweeps of the nonlocal model against the local entropy solution, with
// every Fourier-side estimate of the L2 convergence argument evaluated on the
// measured fields, and log-log rate fits.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "nlt/datum.hpp"
#include "nlt/error.hpp"
#include "nlt/grid.hpp"
#include "nlt/kernel.hpp"
#include "nlt/local_solver.hpp"
#include "nlt/nonlocal_solver.hpp"
#include "nlt/spectral_diagnostics.hpp"
#include "nlt/velocity.hpp"

namespace nlt {

struct SweepConfig {
  std::string kernel = "hat";
  std::string model = "greenshields";
  std::string datum = "riemann:0.2:0.8";
  std::vector<double> eps_list{0.4, 0.2, 0.1, 0.05, 0.025};
  double ratio = 40.0;  // dx = eps / ratio
  double T = 0.5;
  std::vector<double> snap_times;
  double delta_exponent = 0.25;  // delta = eps^delta_exponent
  double cfl = 0.5;
  double tail_tol = 1e-10;
  double window = 1.5;       // half-length of the plateau for riemann data
  double ref_ratio = 8.0;    // Godunov reference refinement when no oracle applies
  double slack = 0.05;       // relative slack on the estimate checks
  bool certify_rate = false;
  ImpactLocation location = ImpactLocation::interface;
  unsigned jobs = 0;  // 0: hardware concurrency
};

/// Kernel constants at one eps.
struct EpsConstants {
  double eps = 0.0;
  double delta = 0.0;
  double eta = 0.0;
  double C0 = 0.0;
  double C1 = 0.0;  // 2 / eta
};

struct SweepRecord {
  double eps = 0.0;
  double dx = 0.0;
  double t = 0.0;
  double err_w_l1 = 0.0;
  double err_u_l2 = 0.0;
  double tv_w = 0.0;
  double tail = 0.0;     // sum_{|eps xi| >= delta} |u_eps^|^2 dxi
  double rho_lhs = 0.0;  // int rho_eps gamma_eps'
  std::array<double, 4> I{};  // measured I1..I4
  std::array<double, 4> B{};  // their bounds
  std::optional<bool> pass_tv;
  std::optional<bool> pass_energy;
  std::optional<bool> pass_rho;
  std::optional<bool> pass_tail;
  std::array<std::optional<bool>, 4> pass_I{};
  std::optional<bool> pass_dominance;
  bool ok = true;
  std::string diagnostic;

  /// Every evaluated flag holds; records that failed to compute never pass.
  bool all_pass() const {
    if (!ok) return false;
    auto holds = [](const std::optional<bool>& f) { return !f.has_value() || *f; };
    bool p = holds(pass_tv) && holds(pass_energy) && holds(pass_rho) && holds(pass_tail) &&
             holds(pass_dominance);
    for (const auto& f : pass_I) p = p && holds(f);
    return p;
  }
};

struct RateFit {
  double order = 0.0;     // p in err ~ C eps^p
  double constant = 0.0;  // C
  double residual = 0.0;  // RMS of log residuals
  std::size_t n_points = 0;
  std::size_t excluded = 0;  // zero errors dropped
};

/// Least-squares slope of log(err) against log(eps).
inline RateFit fit_rate(const std::vector<std::pair<double, double>>& points) {
  std::vector<std::pair<double, double>> logs;
  RateFit fit;
  for (const auto& [e, err] : points) {
    if (!(e > 0.0)) throw Error(ErrorKind::precondition, "fit_rate needs positive eps");
    if (!(err > 0.0)) {
      ++fit.excluded;
      continue;
    }
    logs.emplace_back(std::log(e), std::log(err));
  }
  if (logs.size() < 2) throw Error(ErrorKind::precondition, "fit_rate needs two points with positive error");
  const double n = static_cast<double>(logs.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : logs) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& [x, y] : logs) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0.0) throw Error(ErrorKind::precondition, "fit_rate needs distinct eps values");
  fit.order = sxy / sxx;
  const double intercept = my - fit.order * mx;
  fit.constant = std::exp(intercept);
  double ss = 0.0;
  for (const auto& [x, y] : logs) {
    const double r = y - (intercept + fit.order * x);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  fit.n_points = logs.size();
  return fit;
}

struct DatumStats {
  double l1 = 0.0;
  double tv = 0.0;
};

/// eps_0 = (1 + TV(u0))^{-2}
inline double eps_zero(double tv) { return 1.0 / ((1.0 + tv) * (1.0 + tv)); }

struct BoundReport {
  std::array<BoundCheck, 4> terms;
  BoundCheck dominance;
  bool pass() const {
    return dominance.pass && std::all_of(terms.begin(), terms.end(), [](const BoundCheck& c) { return c.pass; });
  }
};

/// Evaluates the four right-hand terms
///   4 ||w - u||_1,  C0^2 delta^2 ||u0||_1,  C1 TV(u0) eps / delta^2,  2 TV(u0)^2 eps / delta
/// with C1 = 2 / eta, checks each measured I_k against its term and
/// err_u_l2^2 against their sum.
inline BoundReport verify_bounds(const SweepRecord& rec, const std::optional<EpsConstants>& constants,
                                 const DatumStats& u0, double slack) {
  if (!constants || !(constants->eta > 0.0) || !(constants->delta > 0.0)) {
    throw Error(ErrorKind::incomplete_report, "verify_bounds needs kernel constants (eta, C0) at this eps");
  }
  const double eps = rec.eps;
  const double d = constants->delta;
  const double C1 = 2.0 / constants->eta;
  const std::array<double, 4> B{4.0 * rec.err_w_l1, constants->C0 * constants->C0 * d * d * u0.l1,
                                C1 * u0.tv * eps / (d * d), 2.0 * u0.tv * u0.tv * eps / d};
  BoundReport r;
  for (std::size_t k = 0; k < 4; ++k) r.terms[k] = check_bound("I" + std::to_string(k + 1), rec.I[k], B[k], slack);
  r.dominance = check_bound("four_term", rec.err_u_l2 * rec.err_u_l2, B[0] + B[1] + B[2] + B[3], slack);
  return r;
}

/// Everything produced for one eps of a sweep (or one simulate run).
struct EpsOutcome {
  double eps = 0.0;
  std::optional<EpsConstants> constants;
  DatumStats u0;
  std::vector<SweepRecord> records;
  RunResult run;
  std::vector<GridFunction> reference;  // aligned with run.snapshots
  std::optional<Grid> grid;
  bool ok = true;
  std::string diagnostic;
};

struct SweepResult {
  SweepConfig config;
  std::vector<EpsOutcome> outcomes;  // in eps_list order

  std::vector<SweepRecord> records() const {
    std::vector<SweepRecord> all;
    for (const auto& o : outcomes) all.insert(all.end(), o.records.begin(), o.records.end());
    return all;
  }
  bool all_pass() const {
    for (const auto& o : outcomes) {
      if (!o.ok) return false;
      for (const auto& r : o.records) {
        if (!r.all_pass()) return false;
      }
    }
    return true;
  }
};

inline void validate_config(const SweepConfig& cfg) {
  if (cfg.eps_list.empty()) throw Error(ErrorKind::parse, "eps_list must not be empty");
  for (std::size_t i = 0; i < cfg.eps_list.size(); ++i) {
    if (!(cfg.eps_list[i] > 0.0)) throw Error(ErrorKind::parse, "eps_list entries must be positive");
    if (i > 0 && !(cfg.eps_list[i] < cfg.eps_list[i - 1])) {
      throw Error(ErrorKind::parse, "eps_list must be decreasing");
    }
  }
  if (!(cfg.ratio >= 20.0)) throw Error(ErrorKind::parse, "ratio must be at least 20");
  if (!(cfg.T >= 0.0)) throw Error(ErrorKind::parse, "T must be non-negative");
  for (double s : cfg.snap_times) {
    if (s < 0.0 || s > cfg.T) throw Error(ErrorKind::parse, "snap_times must lie in [0, T]");
  }
  if (!(cfg.cfl > 0.0) || cfg.cfl > 1.0) throw Error(ErrorKind::parse, "cfl must lie in (0, 1]");
  if (!(cfg.tail_tol > 0.0)) throw Error(ErrorKind::parse, "tail_tol must be positive");
  if (!(cfg.delta_exponent > 0.0)) throw Error(ErrorKind::parse, "delta_exponent must be positive");
  if (!(cfg.ref_ratio >= 1.0) || std::floor(cfg.ref_ratio) != cfg.ref_ratio) {
    throw Error(ErrorKind::parse, "ref_ratio must be a positive integer");
  }
  if (!(cfg.slack > -1.0)) throw Error(ErrorKind::parse, "slack must exceed -1");
  kernels::by_name(cfg.kernel);
  velocities::by_name(cfg.model);
  const Datum d = parse_datum(cfg.datum, cfg.window);
  if (cfg.certify_rate) {
    // TV of the datum as it enters the runs.
    double tv = 0.0;
    if (d.pieces) {
      const auto& v = d.pieces->values();
      for (std::size_t i = 0; i + 1 < v.size(); ++i) tv += std::abs(v[i + 1] - v[i]);
    } else {
      tv = 2.0 * std::abs(d(0.5 * (d.support_left + d.support_right)));
    }
    const double e0 = eps_zero(tv);
    for (double e : cfg.eps_list) {
      if (!(e < e0)) {
        throw Error(ErrorKind::parse, "rate certification requires every eps < eps0 = " + std::to_string(e0));
      }
    }
  }
}

namespace detail {

/// Grid with faces on integer multiples of dx, covering the datum's support
/// plus room for waves (speed <= f_lip over [0, T]) and, downstream, five
/// kernel widths.
inline Grid sweep_grid(const Datum& d, double dx, double f_lip, double T, double kernel_width) {
  double a = d.support_left;
  double b = d.support_right;
  if (!std::isfinite(a)) a = d.pieces ? d.pieces->jumps().front() - 1.0 : -1.0;
  if (!std::isfinite(b)) b = d.pieces ? d.pieces->jumps().back() + 1.0 : 1.0;
  const double left = a - (f_lip * T + kernel_width + 0.5);
  const double right = b + f_lip * T + 5.0 * kernel_width + 0.5;
  const double n_left = std::ceil(-left / dx - 1e-9);
  const double x_left = -n_left * dx;
  const auto n = static_cast<std::size_t>(std::ceil((right - x_left) / dx - 1e-9));
  return Grid(x_left, dx, n);
}

inline std::optional<bool> flag(bool v) { return v; }

}  // namespace detail

inline bool uses_exact_oracle(const SweepConfig& cfg, const Datum& d) {
  return cfg.model == "greenshields" && d.pieces.has_value();
}

/// One nonlocal run at `eps` plus all diagnostics at every snapshot.
inline EpsOutcome evaluate_eps(const SweepConfig& cfg, double eps) {
  EpsOutcome out;
  out.eps = eps;
  try {
    const KernelSpec spec = kernels::by_name(cfg.kernel);
    const auto model = std::make_shared<const VelocityModel>(velocities::by_name(cfg.model));
    const FluxModel flux = make_flux(*model);
    const Datum datum = parse_datum(cfg.datum, cfg.window);
    const double dx = eps / cfg.ratio;
    auto K = std::make_shared<const DiscreteKernel>(discretize(spec, eps, dx, cfg.tail_tol));
    const Grid grid = detail::sweep_grid(datum, dx, flux.f_lip, cfg.T, static_cast<double>(K->size()) * dx);
    out.grid = grid;
    const GridFunction u0 = datum.cell_averages(grid);
    out.u0 = {l1_norm(u0), total_variation(u0)};

    out.run = run(u0, K, model, cfg.T, cfg.cfl, cfg.snap_times, RunOptions{cfg.location, {}});

    // Reference entropy solution at every snapshot.
    const bool exact = uses_exact_oracle(cfg, datum);
    if (exact) {
      for (const auto& s : out.run.snapshots) out.reference.push_back(datum.pieces->cell_averages(grid, s.t));
    } else {
      const auto r = static_cast<std::size_t>(cfg.ref_ratio);
      const Grid fine(grid.x_left, dx / cfg.ref_ratio, grid.n_cells * r);
      GridFunction uf = datum.cell_averages(fine);
      double t_prev = 0.0;
      for (const auto& s : out.run.snapshots) {
        if (s.t > t_prev) uf = evolve(uf, flux, s.t - t_prev, cfg.cfl);
        t_prev = s.t;
        out.reference.push_back(project(uf, grid));
      }
    }

    const bool spectral = datum.integrable();
    const double delta = std::pow(eps, cfg.delta_exponent);
    std::vector<std::complex<double>> symbol;  // gamma^(eps xi_m) on the low band
    if (spectral) {
      const double z_max = std::max(50.0, 1.01 * std::numbers::pi * cfg.ratio);
      const SpectralConstants sc = spectral_constants(spec, delta, z_max, 2000);
      out.constants = EpsConstants{eps, delta, sc.eta, sc.C0, 2.0 / sc.eta};
    }
    const KernelQuadrature kq = make_quadrature(spec);

    for (std::size_t i = 0; i < out.run.snapshots.size(); ++i) {
      const NonlocalState& s = out.run.snapshots[i];
      const GridFunction& ref = out.reference[i];
      SweepRecord rec;
      rec.eps = eps;
      rec.dx = dx;
      rec.t = s.t;
      try {
        const GridFunction w = nonlocal_impact(s.u, *K);
        rec.err_w_l1 = l1_distance(w, ref);
        rec.err_u_l2 = l2_distance(s.u, ref);
        rec.tv_w = total_variation(w);
        rec.pass_tv = rec.tv_w <= out.u0.tv + 1e-9;
        rec.pass_energy = energy_bound(s.u, u0, model->V_lip, K->gamma_eps_at_zero, s.t).pass;
        const BoundCheck rb = rho_gamma_bound(s.u, spec, eps, out.u0.tv, cfg.tail_tol);
        rec.rho_lhs = rb.lhs;
        rec.pass_rho = rb.pass;

        if (spectral) {
          const Spectrum su = spectrum(s.u);
          const Spectrum sw = spectrum(w);
          const Spectrum sr = spectrum(ref);
          if (symbol.empty()) {
            symbol.resize(su.size());
            for (std::size_t m = 0; m < su.size(); ++m) {
              if (std::abs(eps * su.freqs[m]) < delta) symbol[m] = fourier_symbol(spec, kq, eps * su.freqs[m]);
            }
          }
          const double dxi = su.dxi();
          quad::CompensatedSum I1, I2, tail_u, tail_ref;
          for (std::size_t m = 0; m < su.size(); ++m) {
            if (std::abs(eps * su.freqs[m]) < delta) {
              I1 += std::norm(sw.amps[m] - sr.amps[m]) / std::norm(symbol[m]);
              I2 += std::norm(1.0 / symbol[m] - 1.0) * std::norm(sr.amps[m]);
            } else {
              tail_u += std::norm(su.amps[m]);
              tail_ref += std::norm(sr.amps[m]);
            }
          }
          rec.tail = tail_energy(su, eps, delta);
          rec.I = {I1.value() * dxi, I2.value() * dxi, 2.0 * tail_u.value() * dxi, 2.0 * tail_ref.value() * dxi};
          const BoundReport br = verify_bounds(rec, out.constants, out.u0, cfg.slack);
          for (std::size_t k = 0; k < 4; ++k) {
            rec.B[k] = br.terms[k].rhs;
            rec.pass_I[k] = br.terms[k].pass;
          }
          rec.pass_dominance = br.dominance.pass;
          rec.pass_tail = check_bound("tail", rec.tail, rec.B[2], cfg.slack).pass;
        } else {
          rec.diagnostic = "spectral diagnostics skipped: datum is not integrable";
        }
      } catch (const Error& e) {
        rec.ok = false;
        rec.diagnostic = e.what();
      }
      out.records.push_back(std::move(rec));
    }
  } catch (const Error& e) {
    out.ok = false;
    out.diagnostic = e.what();
  }
  return out;
}

/// Runs every eps in its own job; outcomes keep eps_list order whatever the
/// completion order.
inline SweepResult sweep(const SweepConfig& cfg) {
  validate_config(cfg);
  SweepResult result;
  result.config = cfg;
  result.outcomes.resize(cfg.eps_list.size());
  unsigned jobs = cfg.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.jobs;
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(cfg.eps_list.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.eps_list.size(); i = next++) {
      result.outcomes[i] = evaluate_eps(cfg, cfg.eps_list[i]);
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  return result;
}

struct TimeFits {
  double t = 0.0;
  std::optional<RateFit> w_l1;
  std::optional<RateFit> u_l2;
};

/// Fits err_w_l1 and err_u_l2 against eps at every snapshot time t > 0.
inline std::vector<TimeFits> fit_sweep(const std::vector<SweepRecord>& records) {
  std::vector<double> times;
  for (const auto& r : records) {
    if (r.ok && r.t > 0.0) times.push_back(r.t);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  std::vector<TimeFits> fits;
  for (double t : times) {
    std::vector<std::pair<double, double>> pw, pu;
    for (const auto& r : records) {
      if (r.ok && r.t == t) {
        pw.emplace_back(r.eps, r.err_w_l1);
        pu.emplace_back(r.eps, r.err_u_l2);
      }
    }
    TimeFits tf;
    tf.t = t;
    try {
      tf.w_l1 = fit_rate(pw);
    } catch (const Error&) {
    }
    try {
      tf.u_l2 = fit_rate(pu);
    } catch (const Error&) {
    }
    fits.push_back(tf);
  }
  return fits;
}

}  // namespace nlt
