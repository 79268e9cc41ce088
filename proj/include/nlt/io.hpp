#pragma once

// Result files: sweep table, rate fits, bound checks, spectra, run metadata.
// Every number is written with 17 significant digits.

#include <nlohmann/json.hpp>

#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "nlt/convergence_lab.hpp"
#include "nlt/datum.hpp"
#include "nlt/error.hpp"
#include "nlt/kernel.hpp"
#include "nlt/nonlocal_solver.hpp"
#include "nlt/spectral_diagnostics.hpp"

namespace nlt::io {

using json = nlohmann::ordered_json;

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline const char* flag(const std::optional<bool>& f) {
  if (!f) return "na";
  return *f ? "1" : "0";
}

inline const std::vector<std::string>& sweep_columns() {
  static const std::vector<std::string> cols{
      "eps",  "dx",   "t",    "err_w_l1", "err_u_l2", "tv_w",      "tail",        "rho_lhs",   "I1",
      "I2",   "I3",   "I4",   "B1",       "B2",       "B3",        "B4",          "pass_tv",   "pass_energy",
      "pass_rho", "pass_tail", "pass_I1", "pass_I2", "pass_I3", "pass_I4", "pass_dominance", "status"};
  return cols;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
  const auto& cols = sweep_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << "\n";
  for (const auto& r : records) {
    os << num(r.eps) << ',' << num(r.dx) << ',' << num(r.t) << ',' << num(r.err_w_l1) << ',' << num(r.err_u_l2)
       << ',' << num(r.tv_w) << ',' << num(r.tail) << ',' << num(r.rho_lhs);
    for (double v : r.I) os << ',' << num(v);
    for (double v : r.B) os << ',' << num(v);
    os << ',' << flag(r.pass_tv) << ',' << flag(r.pass_energy) << ',' << flag(r.pass_rho) << ','
       << flag(r.pass_tail);
    for (const auto& f : r.pass_I) os << ',' << flag(f);
    os << ',' << flag(r.pass_dominance) << ',';
    if (r.ok) {
      os << (r.all_pass() ? "ok" : "bound_failure");
    } else {
      std::string msg = "error: " + r.diagnostic;
      for (char& ch : msg) {
        if (ch == ',' || ch == '\n') ch = ';';
      }
      os << msg;
    }
    os << "\n";
  }
}

/// Reads back the columns needed for re-fitting.
inline std::vector<SweepRecord> read_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::parse, "sweep table is empty");
  const auto header = detail::split(line, ',');
  if (header != sweep_columns()) throw Error(ErrorKind::parse, "unexpected sweep table header");
  std::vector<SweepRecord> out;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = detail::split(line, ',');
    if (f.size() != header.size()) {
      throw Error(ErrorKind::parse, "sweep table line " + std::to_string(line_no) + " has " +
                                        std::to_string(f.size()) + " fields");
    }
    const std::string ctx = "sweep table line " + std::to_string(line_no);
    SweepRecord r;
    r.eps = detail::parse_number(f[0], ctx);
    r.dx = detail::parse_number(f[1], ctx);
    r.t = detail::parse_number(f[2], ctx);
    r.err_w_l1 = detail::parse_number(f[3], ctx);
    r.err_u_l2 = detail::parse_number(f[4], ctx);
    r.tv_w = detail::parse_number(f[5], ctx);
    r.tail = detail::parse_number(f[6], ctx);
    r.rho_lhs = detail::parse_number(f[7], ctx);
    for (std::size_t k = 0; k < 4; ++k) {
      r.I[k] = detail::parse_number(f[8 + k], ctx);
      r.B[k] = detail::parse_number(f[12 + k], ctx);
    }
    auto read_flag = [&](const std::string& s) -> std::optional<bool> {
      if (s == "na") return std::nullopt;
      if (s == "1") return true;
      if (s == "0") return false;
      throw Error(ErrorKind::parse, ctx + ": bad pass flag '" + s + "'");
    };
    r.pass_tv = read_flag(f[16]);
    r.pass_energy = read_flag(f[17]);
    r.pass_rho = read_flag(f[18]);
    r.pass_tail = read_flag(f[19]);
    for (std::size_t k = 0; k < 4; ++k) r.pass_I[k] = read_flag(f[20 + k]);
    r.pass_dominance = read_flag(f[24]);
    r.ok = f[25].rfind("error", 0) != 0;
    if (!r.ok) r.diagnostic = f[25];
    out.push_back(std::move(r));
  }
  return out;
}

inline json fit_json(const std::optional<RateFit>& f) {
  if (!f) return nullptr;
  return json{{"order", f->order},
              {"constant", f->constant},
              {"residual", f->residual},
              {"n_points", f->n_points},
              {"excluded", f->excluded}};
}

inline json rates_json(const std::vector<TimeFits>& fits, const std::vector<EpsOutcome>& outcomes = {}) {
  json j;
  json arr = json::array();
  for (const auto& tf : fits) arr.push_back({{"t", tf.t}, {"err_w_l1", fit_json(tf.w_l1)}, {"err_u_l2", fit_json(tf.u_l2)}});
  j["fits"] = arr;
  if (!outcomes.empty()) {
    json consts = json::array();
    for (const auto& o : outcomes) {
      json c{{"eps", o.eps}, {"u0_l1", o.u0.l1}, {"u0_tv", o.u0.tv}};
      if (o.constants) {
        c["delta"] = o.constants->delta;
        c["eta"] = o.constants->eta;
        c["C0"] = o.constants->C0;
        c["C1"] = o.constants->C1;
      }
      consts.push_back(c);
    }
    j["constants"] = consts;
  }
  return j;
}

inline json bound_json(const BoundCheck& b) {
  return {{"name", b.name}, {"lhs", b.lhs}, {"rhs", b.rhs}, {"slack", b.slack}, {"pass", b.pass}};
}

inline json ledger_json(const MassLedger& l) {
  return {{"initial", l.initial},         {"final", l.final},
          {"inflow", l.inflow},           {"outflow", l.outflow},
          {"clamp_adjust", l.clamp_adjust}, {"relative_residual", l.relative_residual()}};
}

inline json kernel_json(const KernelReport& r) {
  json j{{"name", r.name}, {"admissible", r.validation.admissible()}};
  json v = json::array();
  for (const auto& viol : r.validation.violations) v.push_back({{"invariant", viol.invariant}, {"detail", viol.detail}});
  j["violations"] = v;
  j["mass"] = r.mass;
  j["first_moment"] = r.first_moment;
  j["gamma0"] = r.gamma0;
  j["delta"] = r.delta;
  j["eta"] = r.constants.eta;
  j["C0"] = r.constants.C0;
  return j;
}

inline void write_spectrum_csv(std::ostream& os, const Spectrum& s) {
  os << "xi,re,im,abs2\n";
  for (std::size_t m = 0; m < s.size(); ++m) {
    os << num(s.freqs[m]) << ',' << num(s.amps[m].real()) << ',' << num(s.amps[m].imag()) << ','
       << num(std::norm(s.amps[m])) << "\n";
  }
}

/// JSON text with a trailing newline.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace nlt::io
