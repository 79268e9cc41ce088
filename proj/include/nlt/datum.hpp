#pragma once

// Initial data given by compact specifiers:
//   riemann:uL:uR               jump at x = 0; on a window W > 0 the plateau is
//                               [-W, W] with zero density outside
//   bump:center:width:height    C-infinity bump of the given full width
//   steps:x1:x2:...:v0:v1:...   general piecewise-constant profile

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nlt/error.hpp"
#include "nlt/local_solver.hpp"

namespace nlt {

struct Datum {
  std::string spec;
  std::function<double(double)> profile;
  double support_left = -std::numeric_limits<double>::infinity();
  double support_right = std::numeric_limits<double>::infinity();
  std::optional<PiecewiseConstantOracle> pieces;  // set for piecewise-constant data

  bool integrable() const { return std::isfinite(support_left) && std::isfinite(support_right); }
  double operator()(double x) const { return profile(x); }

  GridFunction cell_averages(const Grid& grid) const {
    return pieces ? pieces->cell_averages(grid, 0.0) : cell_average(grid, profile);
  }
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

inline double parse_number(const std::string& text, const std::string& context) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw Error(ErrorKind::parse, "'" + text + "' is not a number in " + context);
  }
  if (used != text.size() || !std::isfinite(v)) {
    throw Error(ErrorKind::parse, "'" + text + "' is not a finite number in " + context);
  }
  return v;
}

inline void require_admissible(double v, const std::string& spec) {
  if (v < 0.0 || v > 1.0) {
    throw Error(ErrorKind::parse, "datum '" + spec + "' has value " + std::to_string(v) +
                                      "; admissible data satisfy 0 <= u0 <= 1");
  }
}

inline Datum piecewise(std::string spec, std::vector<double> jumps, std::vector<double> values) {
  Datum d;
  d.spec = std::move(spec);
  PiecewiseConstantOracle oracle(jumps, values);
  d.profile = [oracle](double x) { return oracle(0.0, x); };
  if (values.front() == 0.0) d.support_left = jumps.front();
  if (values.back() == 0.0) d.support_right = jumps.back();
  d.pieces = std::move(oracle);
  return d;
}

}  // namespace detail

inline double smooth_bump(double x, double center, double width, double height) {
  const double r = (x - center) / (0.5 * width);
  if (std::abs(r) >= 1.0) return 0.0;
  return height * std::exp(1.0 - 1.0 / (1.0 - r * r));
}

inline Datum parse_datum(const std::string& spec, double window = 0.0) {
  const auto parts = detail::split(spec, ':');
  if (parts.empty()) throw Error(ErrorKind::parse, "empty datum specifier");
  const std::string& kind = parts[0];
  std::vector<double> nums;
  for (std::size_t i = 1; i < parts.size(); ++i) nums.push_back(detail::parse_number(parts[i], "datum '" + spec + "'"));

  if (kind == "riemann") {
    if (nums.size() != 2) throw Error(ErrorKind::parse, "riemann datum needs riemann:uL:uR");
    for (double v : nums) detail::require_admissible(v, spec);
    if (window < 0.0) throw Error(ErrorKind::parse, "window must be non-negative");
    if (window == 0.0) return detail::piecewise(spec, {0.0}, {nums[0], nums[1]});
    return detail::piecewise(spec, {-window, 0.0, window}, {0.0, nums[0], nums[1], 0.0});
  }
  if (kind == "bump") {
    if (nums.size() != 3) throw Error(ErrorKind::parse, "bump datum needs bump:center:width:height");
    const double c = nums[0];
    const double w = nums[1];
    const double h = nums[2];
    if (!(w > 0.0)) throw Error(ErrorKind::parse, "bump width must be positive");
    detail::require_admissible(h, spec);
    Datum d;
    d.spec = spec;
    d.profile = [c, w, h](double x) { return smooth_bump(x, c, w, h); };
    d.support_left = c - 0.5 * w;
    d.support_right = c + 0.5 * w;
    return d;
  }
  if (kind == "steps") {
    if (nums.size() < 3 || nums.size() % 2 == 0) {
      throw Error(ErrorKind::parse, "steps datum needs n jump positions followed by n+1 values");
    }
    const std::size_t n = (nums.size() - 1) / 2;
    std::vector<double> jumps(nums.begin(), nums.begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<double> values(nums.begin() + static_cast<std::ptrdiff_t>(n), nums.end());
    for (double v : values) detail::require_admissible(v, spec);
    for (std::size_t i = 0; i + 1 < jumps.size(); ++i) {
      if (!(jumps[i] < jumps[i + 1])) throw Error(ErrorKind::parse, "steps jump positions must increase");
    }
    return detail::piecewise(spec, std::move(jumps), std::move(values));
  }
  throw Error(ErrorKind::parse, "unknown datum kind '" + kind + "' (expected riemann, bump, steps)");
}

}  // namespace nlt
