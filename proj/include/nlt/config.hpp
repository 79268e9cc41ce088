#pragma once

// Sectioned "key = value" experiment files:
//
//   [sweep]                       or   [simulate]
//   kernel = hat                       eps = 0.1
//   model = greenshields               ...
//   datum = riemann:0.2:0.8
//   eps_list = 0.4, 0.2, 0.1
//
// '#' starts a comment. Unknown keys, duplicate keys and missing required keys
// are errors reported with their line number.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nlt/convergence_lab.hpp"
#include "nlt/datum.hpp"
#include "nlt/error.hpp"

namespace nlt {

enum class RunMode { sweep, simulate };

struct ExperimentConfig {
  RunMode mode = RunMode::sweep;
  SweepConfig sweep;  // simulate runs carry a single-entry eps_list
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Shortest text that parses back to the same double.
inline std::string shortest(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace detail

inline ExperimentConfig parse_config_text(const std::string& text, const std::string& source = "<config>") {
  struct Entry {
    std::string value;
    int line;
  };
  std::map<std::string, Entry> entries;
  std::string section;
  int section_line = 0;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  auto fail = [&](int line, const std::string& msg) -> Error {
    return Error(ErrorKind::parse, source + ":" + std::to_string(line) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw fail(line_no, "malformed section header '" + line + "'");
      if (!section.empty()) throw fail(line_no, "only one section is allowed per file");
      section = detail::trim(line.substr(1, line.size() - 2));
      section_line = line_no;
      if (section != "sweep" && section != "simulate") {
        throw fail(line_no, "unknown section '" + section + "' (expected [sweep] or [simulate])");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw fail(line_no, "expected 'key = value', got '" + line + "'");
    if (section.empty()) throw fail(line_no, "key outside of a section");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw fail(line_no, "empty key or value");
    if (entries.count(key)) throw fail(line_no, "duplicate key '" + key + "'");
    entries[key] = {value, line_no};
  }
  if (section.empty()) throw fail(line_no, "no [sweep] or [simulate] section");

  ExperimentConfig out;
  out.mode = section == "sweep" ? RunMode::sweep : RunMode::simulate;
  SweepConfig& c = out.sweep;
  c.snap_times.clear();

  const std::set<std::string> common{"kernel", "model", "datum", "ratio", "T", "snap_times", "delta_exponent",
                                     "cfl", "tail_tol", "window", "ref_ratio", "slack", "certify_rate",
                                     "impact", "jobs"};
  for (const auto& [key, e] : entries) {
    const bool known = common.count(key) || (out.mode == RunMode::sweep ? key == "eps_list" : key == "eps");
    if (!known) throw fail(e.line, "unknown key '" + key + "' in [" + section + "]");
  }
  for (const char* required : {"kernel", "model", "datum"}) {
    if (!entries.count(required)) throw fail(section_line, std::string("missing required key '") + required + "'");
  }
  if (out.mode == RunMode::simulate && !entries.count("eps")) {
    throw fail(section_line, "missing required key 'eps'");
  }

  auto number = [&](const std::string& key) {
    const Entry& e = entries.at(key);
    try {
      return detail::parse_number(e.value, "key '" + key + "'");
    } catch (const Error& err) {
      throw fail(e.line, err.what());
    }
  };
  auto list = [&](const std::string& key) {
    const Entry& e = entries.at(key);
    std::vector<double> v;
    for (const auto& item : detail::split(e.value, ',')) {
      try {
        v.push_back(detail::parse_number(detail::trim(item), "key '" + key + "'"));
      } catch (const Error& err) {
        throw fail(e.line, err.what());
      }
    }
    return v;
  };
  auto has = [&](const std::string& key) { return entries.count(key) > 0; };

  c.kernel = entries.at("kernel").value;
  c.model = entries.at("model").value;
  c.datum = entries.at("datum").value;
  if (has("ratio")) c.ratio = number("ratio");
  if (has("T")) c.T = number("T");
  if (has("snap_times")) c.snap_times = list("snap_times");
  if (has("delta_exponent")) c.delta_exponent = number("delta_exponent");
  if (has("cfl")) c.cfl = number("cfl");
  if (has("tail_tol")) c.tail_tol = number("tail_tol");
  if (has("window")) c.window = number("window");
  if (has("ref_ratio")) c.ref_ratio = number("ref_ratio");
  if (has("slack")) c.slack = number("slack");
  if (has("jobs")) c.jobs = static_cast<unsigned>(number("jobs"));
  if (has("certify_rate")) {
    const Entry& e = entries.at("certify_rate");
    if (e.value != "true" && e.value != "false") throw fail(e.line, "certify_rate must be true or false");
    c.certify_rate = e.value == "true";
  }
  if (has("impact")) {
    const Entry& e = entries.at("impact");
    if (e.value == "interface") {
      c.location = ImpactLocation::interface;
    } else if (e.value == "cell") {
      c.location = ImpactLocation::cell;
    } else {
      throw fail(e.line, "impact must be 'interface' or 'cell'");
    }
  }
  if (out.mode == RunMode::sweep) {
    if (has("eps_list")) {
      c.eps_list = list("eps_list");
      for (std::size_t i = 1; i < c.eps_list.size(); ++i) {
        if (!(c.eps_list[i] < c.eps_list[i - 1])) throw fail(entries.at("eps_list").line, "eps_list must be decreasing");
      }
    }
  } else {
    c.eps_list = {number("eps")};
  }

  const auto line_of = [&](const std::string& key) { return has(key) ? entries.at(key).line : section_line; };
  try {
    parse_datum(c.datum, c.window);
  } catch (const Error& err) {
    throw fail(line_of("datum"), err.what());
  }
  try {
    validate_config(c);
  } catch (const Error& err) {
    throw fail(section_line, err.what());
  }
  return out;
}

/// Built-in experiment names accepted wherever a config path is.
inline std::string builtin_config(const std::string& name) {
  if (name == "std_shock") {
    return "[sweep]\n"
           "kernel = hat\n"
           "model = greenshields\n"
           "datum = riemann:0.2:0.8\n"
           "eps_list = 0.4, 0.2, 0.1, 0.05, 0.025\n"
           "ratio = 40\n"
           "T = 0.5\n"
           "snap_times = 0.125, 0.25\n"
           "window = 1.5\n";
  }
  if (name == "std_rarefaction") {
    return "[simulate]\n"
           "kernel = exp\n"
           "model = greenshields\n"
           "datum = riemann:0.8:0.2\n"
           "eps = 0.05\n"
           "T = 1\n"
           "snap_times = 0.25, 0.5, 0.75\n"
           "window = 2\n";
  }
  return {};
}

inline ExperimentConfig parse_config(const std::string& path_or_name) {
  if (const std::string text = builtin_config(path_or_name); !text.empty()) {
    return parse_config_text(text, path_or_name);
  }
  std::ifstream in(path_or_name);
  if (!in) throw Error(ErrorKind::io, "cannot open config '" + path_or_name + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path_or_name);
}

/// Canonical text with every default materialized; the basis of the digest.
inline std::string to_text(const ExperimentConfig& cfg) {
  const SweepConfig& c = cfg.sweep;
  std::ostringstream os;
  auto join = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + detail::shortest(v[i]);
    return s;
  };
  os << (cfg.mode == RunMode::sweep ? "[sweep]\n" : "[simulate]\n");
  os << "kernel = " << c.kernel << "\n";
  os << "model = " << c.model << "\n";
  os << "datum = " << c.datum << "\n";
  if (cfg.mode == RunMode::sweep) {
    os << "eps_list = " << join(c.eps_list) << "\n";
  } else {
    os << "eps = " << detail::shortest(c.eps_list.front()) << "\n";
  }
  os << "ratio = " << detail::shortest(c.ratio) << "\n";
  os << "T = " << detail::shortest(c.T) << "\n";
  if (!c.snap_times.empty()) os << "snap_times = " << join(c.snap_times) << "\n";
  os << "delta_exponent = " << detail::shortest(c.delta_exponent) << "\n";
  os << "cfl = " << detail::shortest(c.cfl) << "\n";
  os << "tail_tol = " << detail::shortest(c.tail_tol) << "\n";
  os << "window = " << detail::shortest(c.window) << "\n";
  os << "ref_ratio = " << detail::shortest(c.ref_ratio) << "\n";
  os << "slack = " << detail::shortest(c.slack) << "\n";
  os << "certify_rate = " << (c.certify_rate ? "true" : "false") << "\n";
  os << "impact = " << (c.location == ImpactLocation::interface ? "interface" : "cell") << "\n";
  return os.str();
}

/// 64-bit FNV-1a, hex encoded.
inline std::string digest(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace nlt
