#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "nlt/error.hpp"

namespace nlt {

/// Speed law V on [0, 1]: non-negative and non-increasing.
struct VelocityModel {
  std::string name;
  std::function<double(double)> V;
  std::function<double(double)> dV;
  double V_lip = 0.0;  // sup |V'|
  double V_max = 0.0;  // sup V

  double operator()(double u) const { return V(u); }
};

/// Fills V_lip and V_max by sampling, and rejects laws that break V >= 0 or
/// V' <= 0 on [0, 1].
inline VelocityModel make_velocity(std::string name, std::function<double(double)> V,
                                   std::function<double(double)> dV) {
  VelocityModel m{std::move(name), std::move(V), std::move(dV), 0.0, 0.0};
  constexpr int n = 1000;
  double prev = m.V(0.0);
  for (int i = 0; i <= n; ++i) {
    const double u = static_cast<double>(i) / n;
    const double v = m.V(u);
    const double d = m.dV(u);
    if (!std::isfinite(v) || !std::isfinite(d)) {
      throw Error(ErrorKind::malformed_spec, "velocity '" + m.name + "' is not finite on [0,1]");
    }
    if (v < 0.0) throw Error(ErrorKind::malformed_spec, "velocity '" + m.name + "' is negative on [0,1]");
    if (d > 1e-12 || v > prev + 1e-12) {
      throw Error(ErrorKind::malformed_spec, "velocity '" + m.name + "' is increasing on [0,1]");
    }
    prev = v;
    m.V_lip = std::max(m.V_lip, std::abs(d));
    m.V_max = std::max(m.V_max, v);
  }
  return m;
}

namespace velocities {

inline VelocityModel greenshields() {
  return make_velocity("greenshields", [](double u) { return 1.0 - u; }, [](double) { return -1.0; });
}

inline VelocityModel parabolic() {
  return make_velocity("parabolic", [](double u) { return 1.0 - u * u; }, [](double u) { return -2.0 * u; });
}

inline VelocityModel underwood() {
  return make_velocity("underwood", [](double u) { return std::exp(-u); },
                       [](double u) { return -std::exp(-u); });
}

inline VelocityModel constant(double speed = 1.0) {
  return make_velocity("constant", [speed](double) { return speed; }, [](double) { return 0.0; });
}

inline VelocityModel by_name(const std::string& name) {
  if (name == "greenshields") return greenshields();
  if (name == "parabolic") return parabolic();
  if (name == "underwood") return underwood();
  if (name == "constant") return constant();
  throw Error(ErrorKind::malformed_spec,
              "unknown velocity model '" + name + "' (expected greenshields, parabolic, underwood, constant)");
}

}  // namespace velocities

}  // namespace nlt
