// nltlab: simulate, sweep, kernel, riemann and report front end.
//
// Exit codes: 0 success, 1 invalid input or failed computation, 2 a verified
// bound does not hold.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "nlt/config.hpp"
#include "nlt/convergence_lab.hpp"
#include "nlt/io.hpp"
#include "nlt/kernel.hpp"
#include "nlt/local_solver.hpp"

namespace fs = std::filesystem;
using nlt::io::json;

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kBoundFailure = 2;

struct Overrides {
  std::optional<double> delta_exponent;
  std::optional<double> cfl;
  std::optional<double> ratio;
  std::optional<double> slack;
  std::optional<unsigned> jobs;

  void apply(nlt::SweepConfig& c) const {
    if (delta_exponent) c.delta_exponent = *delta_exponent;
    if (cfl) c.cfl = *cfl;
    if (ratio) c.ratio = *ratio;
    if (slack) c.slack = *slack;
    if (jobs) c.jobs = *jobs;
  }
};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class OutputDir {
 public:
  explicit OutputDir(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

  template <class Writer>
  void write(const std::string& rel, Writer&& writer) {
    const fs::path p = root_ / rel;
    fs::create_directories(p.parent_path());
    std::ofstream os(p, std::ios::binary);
    if (!os) throw nlt::Error(nlt::ErrorKind::io, "cannot write " + p.string());
    writer(os);
    if (!os) throw nlt::Error(nlt::ErrorKind::io, "write failed for " + p.string());
    files_.push_back(rel);
  }
  void write_text(const std::string& rel, const std::string& text) {
    write(rel, [&](std::ostream& os) { os << text; });
  }
  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path root_;
  std::vector<std::string> files_;
};

void write_manifest(OutputDir& out, const std::string& command, const nlt::ExperimentConfig& cfg,
                    const std::string& started) {
  const std::string text = nlt::to_text(cfg);
  json m{{"tool", "nltlab"},
         {"version", kVersion},
         {"command", command},
         {"config_digest", nlt::digest(text)},
         {"config", text},
         {"started", started},
         {"finished", utc_now()},
         {"outputs", out.files()}};
  out.write_text("manifest.json", nlt::io::dump(m));
}

std::string padded(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03zu", i);
  return buf;
}

/// Bound checks of one record, rebuilt from its measured and bound columns.
json record_bounds(const nlt::SweepRecord& r, const nlt::DatumStats& u0, double slack) {
  json arr = json::array();
  if (r.pass_tv) arr.push_back(nlt::io::bound_json({"tv_impact", r.tv_w, u0.tv + 1e-9, 0.0, *r.pass_tv}));
  if (r.pass_rho) arr.push_back(nlt::io::bound_json({"rho_gamma", r.rho_lhs, 2.0 * u0.tv, 1e-8, *r.pass_rho}));
  if (r.pass_tail) arr.push_back(nlt::io::bound_json({"tail", r.tail, r.B[2], slack, *r.pass_tail}));
  for (std::size_t k = 0; k < 4; ++k) {
    if (r.pass_I[k]) arr.push_back(nlt::io::bound_json({"I" + std::to_string(k + 1), r.I[k], r.B[k], slack, *r.pass_I[k]}));
  }
  if (r.pass_dominance) {
    arr.push_back(nlt::io::bound_json(
        {"four_term", r.err_u_l2 * r.err_u_l2, r.B[0] + r.B[1] + r.B[2] + r.B[3], slack, *r.pass_dominance}));
  }
  return arr;
}

/// Snapshot fields, spectra, bounds and run metadata of one eps.
void write_outcome(OutputDir& out, const std::string& prefix, const nlt::SweepConfig& cfg,
                   const nlt::EpsOutcome& o) {
  json meta{{"eps", o.eps},       {"dx", o.eps / cfg.ratio}, {"cfl", cfg.cfl},     {"T", cfg.T},
            {"kernel", cfg.kernel}, {"model", cfg.model},     {"datum", cfg.datum}, {"ok", o.ok}};
  if (!o.ok) {
    meta["diagnostic"] = o.diagnostic;
    out.write_text(prefix + "run.json", nlt::io::dump(meta));
    return;
  }
  meta["steps"] = o.run.steps;
  meta["cells"] = o.grid->n_cells;
  meta["x_left"] = o.grid->x_left;
  meta["mass_ledger"] = nlt::io::ledger_json(o.run.ledger);
  out.write_text(prefix + "run.json", nlt::io::dump(meta));

  json bounds = json::array();
  for (std::size_t i = 0; i < o.run.snapshots.size(); ++i) {
    const auto& s = o.run.snapshots[i];
    const std::string tag = prefix + "t" + padded(i) + "_";
    const nlt::GridFunction w = nlt::nonlocal_impact(s.u, *s.kernel);
    out.write(tag + "u.csv", [&](std::ostream& os) { nlt::write_csv(os, s.u); });
    out.write(tag + "w.csv", [&](std::ostream& os) { nlt::write_csv(os, w); });
    out.write(tag + "reference.csv", [&](std::ostream& os) { nlt::write_csv(os, o.reference[i]); });
    try {
      const nlt::Spectrum sp = nlt::spectrum(s.u);
      out.write(tag + "spectrum.csv", [&](std::ostream& os) { nlt::io::write_spectrum_csv(os, sp); });
    } catch (const nlt::Error&) {
      // non-decaying fields have no spectrum file
    }
    const nlt::SweepRecord& r = o.records[i];
    json entry{{"t", s.t}, {"checks", record_bounds(r, o.u0, cfg.slack)}};
    if (!r.ok) entry["diagnostic"] = r.diagnostic;
    bounds.push_back(entry);
  }
  out.write_text(prefix + "bounds.json", nlt::io::dump(bounds));
}

int status_of(const std::vector<nlt::EpsOutcome>& outcomes) {
  bool invalid = false;
  bool bound_failure = false;
  for (const auto& o : outcomes) {
    if (!o.ok) invalid = true;
    for (const auto& r : o.records) {
      if (!r.ok) {
        invalid = true;
      } else if (!r.all_pass()) {
        bound_failure = true;
      }
    }
  }
  if (invalid) return kInvalid;
  return bound_failure ? kBoundFailure : kOk;
}

nlt::ExperimentConfig load(const std::string& path, const Overrides& ov) {
  nlt::ExperimentConfig cfg = nlt::parse_config(path);
  ov.apply(cfg.sweep);
  nlt::validate_config(cfg.sweep);
  return cfg;
}

int cmd_sweep(const std::string& config, const std::string& out_dir, const Overrides& ov) {
  const std::string started = utc_now();
  const nlt::ExperimentConfig cfg = load(config, ov);
  if (cfg.mode != nlt::RunMode::sweep) throw nlt::Error(nlt::ErrorKind::parse, config + ": expected a [sweep] config");
  const nlt::SweepResult res = nlt::sweep(cfg.sweep);
  OutputDir out(out_dir);
  const auto records = res.records();
  out.write("sweep.csv", [&](std::ostream& os) { nlt::io::write_sweep_csv(os, records); });
  out.write_text("rates.json", nlt::io::dump(nlt::io::rates_json(nlt::fit_sweep(records), res.outcomes)));
  for (std::size_t i = 0; i < res.outcomes.size(); ++i) {
    write_outcome(out, "snapshots/eps" + padded(i) + "/", cfg.sweep, res.outcomes[i]);
  }
  write_manifest(out, "sweep", cfg, started);
  const int status = status_of(res.outcomes);
  std::cerr << "sweep: " << records.size() << " records, "
            << (status == kOk ? "all bounds hold" : status == kBoundFailure ? "bound failure" : "errors") << "\n";
  return status;
}

int cmd_simulate(const std::string& config, const std::string& out_dir, const Overrides& ov) {
  const std::string started = utc_now();
  const nlt::ExperimentConfig cfg = load(config, ov);
  if (cfg.mode != nlt::RunMode::simulate) {
    throw nlt::Error(nlt::ErrorKind::parse, config + ": expected a [simulate] config");
  }
  const nlt::EpsOutcome o = nlt::evaluate_eps(cfg.sweep, cfg.sweep.eps_list.front());
  OutputDir out(out_dir);
  out.write("records.csv", [&](std::ostream& os) { nlt::io::write_sweep_csv(os, o.records); });
  write_outcome(out, "", cfg.sweep, o);
  write_manifest(out, "simulate", cfg, started);
  const int status = status_of({o});
  if (!o.ok) {
    std::cerr << "simulate: " << o.diagnostic << "\n";
  } else {
    std::cerr << "simulate: " << o.records.size() << " snapshots, "
              << (status == kOk ? "all bounds hold" : status == kBoundFailure ? "bound failure" : "errors") << "\n";
  }
  return status;
}

int cmd_kernel(const std::string& name, double delta, double z_max, std::size_t n_grid) {
  const nlt::KernelReport r = nlt::kernel_report(nlt::kernels::by_name(name), delta, z_max, n_grid);
  std::cout << nlt::io::dump(nlt::io::kernel_json(r));
  return r.validation.admissible() ? kOk : kInvalid;
}

int cmd_riemann(double uL, double uR, double t, double x) {
  for (double v : {uL, uR}) {
    if (v < 0.0 || v > 1.0) throw nlt::Error(nlt::ErrorKind::parse, "Riemann states must lie in [0, 1]");
  }
  std::cout << nlt::io::num(nlt::exact_riemann(uL, uR, t, x)) << "\n";
  return kOk;
}

int cmd_report(const std::string& path, const std::string& out_dir) {
  std::ifstream in(path);
  if (!in) throw nlt::Error(nlt::ErrorKind::io, "cannot open " + path);
  const auto records = nlt::io::read_sweep_csv(in);
  const std::string text = nlt::io::dump(nlt::io::rates_json(nlt::fit_sweep(records)));
  if (out_dir.empty()) {
    std::cout << text;
  } else {
    OutputDir out(out_dir);
    out.write_text("rates.json", text);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal-to-local traffic flow convergence lab"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config;
  std::string out_dir = ".";
  Overrides ov;
  auto add_run_options = [&](CLI::App* sub) {
    sub->add_option("--config", config, "config file or built-in name (std_shock, std_rarefaction)")->required();
    sub->add_option("--out-dir", out_dir, "output directory");
    sub->add_option("--jobs", ov.jobs, "parallel eps jobs (0: all cores)");
    sub->add_option("--delta-exponent", ov.delta_exponent, "delta = eps^exponent");
    sub->add_option("--cfl", ov.cfl, "CFL number in (0, 1]");
    sub->add_option("--ratio", ov.ratio, "eps / dx");
    sub->add_option("--slack", ov.slack, "relative slack of the estimate checks");
  };
  auto* sweep = app.add_subcommand("sweep", "eps sweep against the local entropy solution");
  add_run_options(sweep);
  auto* simulate = app.add_subcommand("simulate", "one nonlocal run with diagnostics");
  add_run_options(simulate);

  std::string kernel_name;
  double delta = 1.0;
  double z_max = 50.0;
  std::size_t n_grid = 2000;
  auto* kernel = app.add_subcommand("kernel", "admissibility and spectral constants of a kernel");
  kernel->add_option("--name", kernel_name, "exp, hat or quadratic")->required();
  kernel->add_option("--delta", delta, "band edge delta");
  kernel->add_option("--z-max", z_max, "upper end of the eta search");
  kernel->add_option("--n-grid", n_grid, "eta search grid size");

  double uL = 0.0, uR = 0.0, t = 0.0, x = 0.0;
  auto* riemann = app.add_subcommand("riemann", "exact Riemann solution for V(u) = 1 - u");
  riemann->add_option("--uL", uL, "left state in [0, 1]")->required();
  riemann->add_option("--uR", uR, "right state in [0, 1]")->required();
  riemann->add_option("--t", t, "time, t >= 0")->required();
  riemann->add_option("--x", x, "position; the jump sits at x = 0")->required();

  std::string sweep_csv;
  std::string report_dir;
  auto* report = app.add_subcommand("report", "re-fit rates from an existing sweep.csv");
  report->add_option("--sweep", sweep_csv, "path to sweep.csv")->required();
  report->add_option("--out-dir", report_dir, "write rates.json here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    if (*sweep) return cmd_sweep(config, out_dir, ov);
    if (*simulate) return cmd_simulate(config, out_dir, ov);
    if (*kernel) return cmd_kernel(kernel_name, delta, z_max, n_grid);
    if (*riemann) return cmd_riemann(uL, uR, t, x);
    if (*report) return cmd_report(sweep_csv, report_dir);
  } catch (const std::exception& e) {
    std::cerr << "nltlab: " << e.what() << "\n";
    return kInvalid;
  }
  return kInvalid;
}
