#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "nlt/datum.hpp"
#include "nlt/kernel.hpp"
#include "nlt/nonlocal_solver.hpp"

using namespace nlt;

namespace {

auto shared_kernel(const std::string& name, double eps, double dx, double tol = 1e-10) {
  return std::make_shared<const DiscreteKernel>(discretize(kernels::by_name(name), eps, dx, tol));
}
auto shared_model(const std::string& name) {
  return std::make_shared<const VelocityModel>(velocities::by_name(name));
}

GridFunction random_admissible(const Grid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> v(g.n_cells);
  // piecewise-constant runs of random length, with occasional exact 0 and 1
  std::size_t j = 0;
  while (j < v.size()) {
    const std::size_t len = 1 + static_cast<std::size_t>(U(rng) * 8);
    const double r = U(rng);
    const double val = r < 0.1 ? 0.0 : r > 0.9 ? 1.0 : U(rng);
    for (std::size_t k = 0; k < len && j < v.size(); ++k) v[j++] = val;
  }
  return GridFunction(g, v);
}

}  // namespace

TEST(Impact, ConstantField) {
  const auto K = shared_kernel("exp", 0.1, 0.01);
  const auto w = nonlocal_impact(GridFunction::constant(Grid(0.0, 0.01, 50), 0.4), *K);
  for (std::size_t j = 0; j < w.size(); ++j) EXPECT_NEAR(w[j], 0.4 * K->weight_sum(), 1e-15);
}

TEST(Impact, ImpulseResponseIsReversedWeights) {
  const auto K = shared_kernel("hat", 0.1, 0.02);
  const Grid g(0.0, 0.02, 20);
  std::vector<double> v(20, 0.0);
  v[12] = 1.0;
  const auto w = nonlocal_impact(GridFunction(g, v), *K);
  for (std::size_t j = 0; j < 20; ++j) {
    const double expected = (j <= 12 && 12 - j < K->size()) ? K->weights[12 - j] : 0.0;
    EXPECT_EQ(w[j], expected) << j;
  }
}

TEST(Impact, HatTwoTermSum) {
  const auto K = shared_kernel("hat", 1.0, 0.5);
  const Grid g(0.0, 0.5, 6);
  const auto w = nonlocal_impact(GridFunction(g, {0, 0, 1, 1, 1, 1}), *K);
  EXPECT_DOUBLE_EQ(w[1], 0.25);
  EXPECT_DOUBLE_EQ(w[0], 0.0);
  EXPECT_DOUBLE_EQ(w[2], 1.0);
}

TEST(Cfl, DirectFormula) {
  const Grid g(0.0, 0.01, 10);
  NonlocalState s{0.0, GridFunction::constant(g, 0.0), shared_kernel("exp", 0.1, 0.01), shared_model("greenshields")};
  EXPECT_NEAR(cfl_timestep(s, 0.5), 0.5 * 0.01 / (1.0 + 0.01 * 1.0 * 10.0), 1e-16);
  NonlocalState c{0.0, GridFunction::constant(g, 0.0), shared_kernel("exp", 0.1, 0.01), shared_model("constant")};
  EXPECT_DOUBLE_EQ(cfl_timestep(c, 1.0), 0.01);
}

TEST(Cfl, HalvingDxLessThanHalvesDt) {
  auto dt = [](double dx) {
    NonlocalState s{0.0, GridFunction::constant(Grid(0.0, dx, 10), 0.0), shared_kernel("exp", 0.1, dx),
                    shared_model("greenshields")};
    return cfl_timestep(s, 0.5);
  };
  EXPECT_GT(dt(0.005), 0.5 * dt(0.01));
  EXPECT_LT(dt(0.005), dt(0.01));
}

TEST(Step, ConstantStateIsStationary) {
  const Grid g(0.0, 0.01, 40);
  NonlocalState s{0.0, GridFunction::constant(g, 0.35), shared_kernel("quadratic", 0.1, 0.01),
                  shared_model("greenshields")};
  const auto r = step(s, cfl_timestep(s, 0.9));
  for (std::size_t j = 0; j < g.n_cells; ++j) EXPECT_NEAR(r.state.u[j], 0.35, 1e-15);
}

TEST(Step, ThreeCellHandEvaluation) {
  const double eps = 0.1, dx = 0.1, dt = 0.04;
  const Grid g(0.0, dx, 3);
  const std::vector<double> u{0.2, 0.7, 0.4};
  const auto K = shared_kernel("exp", eps, dx);
  NonlocalState s{0.0, GridFunction(g, u), K, shared_model("greenshields")};
  const auto r = step(s, dt);

  // Gamma_k = e^{-k} - e^{-(k+1)} for dx / eps = 1; right ghost cells repeat u_2.
  auto ext = [&](long i) { return u[static_cast<std::size_t>(std::clamp(i, 0L, 2L))]; };
  auto impact = [&](long first) {
    double w = 0.0;
    for (long k = 0; k < static_cast<long>(K->size()); ++k) w += (std::exp(-k) - std::exp(-k - 1.0)) * ext(first + k);
    return w;
  };
  const double lambda = dt / dx;
  for (long j = 0; j < 3; ++j) {
    const double out_speed = 1.0 - impact(j + 1);
    const double in_speed = 1.0 - impact(j);
    const double expected = u[j] - lambda * (u[j] * out_speed - ext(j - 1) * in_speed);
    EXPECT_NEAR(r.state.u[static_cast<std::size_t>(j)], expected, 1e-9) << j;
  }
  EXPECT_NEAR(r.inflow, dt * 0.2 * (1.0 - impact(0)), 1e-9);
  EXPECT_NEAR(r.outflow, dt * 0.4 * (1.0 - impact(3)), 1e-9);
}

TEST(Step, RejectsCflViolation) {
  const Grid g(0.0, 0.01, 10);
  NonlocalState s{0.0, GridFunction::constant(g, 0.5), shared_kernel("exp", 0.1, 0.01), shared_model("greenshields")};
  try {
    step(s, 2.0 * cfl_timestep(s, 1.0));
    FAIL() << "expected a CFL error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::cfl);
  }
}

TEST(Run, ZeroHorizonReturnsInitialState) {
  const Grid g(0.0, 0.01, 10);
  const auto u0 = GridFunction::constant(g, 0.3);
  const auto r = run(u0, shared_kernel("hat", 0.1, 0.01), shared_model("greenshields"), 0.0, 0.5, {});
  ASSERT_EQ(r.snapshots.size(), 1u);
  EXPECT_EQ(r.steps, 0u);
  EXPECT_EQ(r.snapshots[0].t, 0.0);
}

TEST(Run, MassLedgerCloses) {
  const Grid g(-1.5, 0.005, 800);
  const auto u0 = cell_average(g, parse_datum("riemann:0.6:0.1").profile);
  const auto r = run(u0, shared_kernel("exp", 0.1, 0.005), shared_model("greenshields"), 0.5, 0.5, {0.25});
  EXPECT_LE(r.ledger.relative_residual(), 1e-12);
  EXPECT_EQ(r.snapshots.size(), 3u);
  EXPECT_GT(r.ledger.inflow, 0.0);
}

TEST(Run, RiemannImpactVariationBounded) {
  const double eps = 0.1, dx = eps / 40.0;
  const Grid g(-3.0, dx, static_cast<std::size_t>(std::llround(6.0 / dx)));
  const auto u0 = cell_average(g, parse_datum("riemann:0.2:0.8").profile);
  const auto K = shared_kernel("exp", eps, dx);
  const auto r = run(u0, K, shared_model("greenshields"), 1.0, 0.5, {0.25, 0.5, 0.75});
  for (const auto& s : r.snapshots) EXPECT_LE(total_variation(nonlocal_impact(s.u, *K)), 0.6 + 1e-9) << s.t;
}

TEST(Run, CellCenteredImpactSwitch) {
  const double dx = 0.005;
  const Grid g(-1.0, dx, 400);
  const auto u0 = cell_average(g, parse_datum("bump:0:0.8:0.9").profile);
  const auto K = shared_kernel("hat", 0.1, dx);
  const auto a = run(u0, K, shared_model("greenshields"), 0.3, 0.5, {});
  const auto b = run(u0, K, shared_model("greenshields"), 0.3, 0.5, {}, RunOptions{ImpactLocation::cell, {}});
  EXPECT_LE(b.ledger.relative_residual(), 1e-12);
  const double diff = l1_distance(a.snapshots.back().u, b.snapshots.back().u);
  EXPECT_GT(diff, 0.0);
  EXPECT_LT(diff, 10.0 * dx);
}

TEST(Property, InvariantRegionAndImpactBounds) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const std::vector<std::string> models{"greenshields", "parabolic", "underwood"};
  for (int trial = 0; trial < 1000; ++trial) {
    const double eps = 0.05 + 0.45 * U(rng);
    const double dx = eps / (2.0 + 10.0 * U(rng));
    const double tail_tol = 1e-10;
    const auto K = shared_kernel(kernels::names()[trial % 3], eps, dx, tail_tol);
    const auto model = shared_model(models[trial % 3]);
    const Grid g(0.0, dx, 60);
    const auto u0 = random_admissible(g, rng);
    const double tv0 = total_variation(u0);
    const double cfl = 0.1 + 0.9 * U(rng);
    NonlocalState s{0.0, u0, K, model};
    for (int it = 0; it < 20; ++it) {
      s = step(s, cfl_timestep(s, cfl)).state;
      ASSERT_TRUE(s.u.in_unit_interval()) << "trial " << trial;
      const auto w = nonlocal_impact(s.u, *K);
      const double ulo = *std::min_element(s.u.values().begin(), s.u.values().end());
      const double uhi = *std::max_element(s.u.values().begin(), s.u.values().end());
      for (std::size_t j = 0; j < w.size(); ++j) {
        ASSERT_GE(w[j], ulo * K->weight_sum() - 1e-14);
        ASSERT_LE(w[j], uhi * K->weight_sum() + 1e-14);
      }
      ASSERT_LE(total_variation(w), tv0 + 10.0 * tail_tol) << "trial " << trial;
    }
  }
}

TEST(Property, EnergyGrowthBound) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const double eps = 0.05 + 0.45 * U(rng);
    const double dx = eps / 10.0;
    const auto K = shared_kernel(kernels::names()[trial % 3], eps, dx);
    const Grid g(0.0, dx, 120);
    // zero inflow so the growth bound applies on the finite domain
    std::vector<double> v(120, 0.0);
    for (std::size_t j = 10; j < 70; ++j) v[j] = U(rng);
    const GridFunction u0(g, v);
    const auto model = shared_model("greenshields");
    const auto r = run(u0, K, model, 0.4, 0.5, {0.1, 0.2, 0.3});
    for (const auto& s : r.snapshots) {
      EXPECT_LE(l2_norm_squared(s.u),
                std::exp(model->V_lip * K->gamma_eps_at_zero * s.t) * l2_norm_squared(u0) * (1.0 + 1e-6));
    }
  }
}

TEST(Property, OrderPreservedForLinearTransport) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double eps = 0.05 + 0.45 * U(rng);
    const double dx = eps / 8.0;
    const auto K = shared_kernel(kernels::names()[trial % 3], eps, dx);
    const Grid g(0.0, dx, 60);
    const auto a0 = random_admissible(g, rng);
    std::vector<double> b(60);
    for (std::size_t j = 0; j < 60; ++j) b[j] = std::min(1.0, a0[j] + 0.3 * U(rng));
    NonlocalState sa{0.0, a0, K, shared_model("constant")};
    NonlocalState sb{0.0, GridFunction(g, b), K, shared_model("constant")};
    for (int it = 0; it < 30; ++it) {
      const double dt = cfl_timestep(sa, 0.9);
      sa = step(sa, dt).state;
      sb = step(sb, dt).state;
      for (std::size_t j = 0; j < 60; ++j) ASSERT_LE(sa.u[j], sb.u[j] + 1e-15);
    }
  }
}

// The nonlocal speed makes each cell decrease in some downstream values, so
// ordered data need not stay ordered: raising density ahead slows the inflow.
TEST(Property, OrderCanBreakForNonlocalSpeed) {
  const double eps = 0.1, dx = 0.01;
  const Grid g(0.0, dx, 40);
  std::vector<double> a(40, 0.0), b(40, 0.0);
  for (std::size_t j = 0; j < 15; ++j) a[j] = b[j] = 1.0;
  for (std::size_t j = 21; j < 40; ++j) b[j] = 1.0;  // b >= a, denser ahead
  const auto K = shared_kernel("exp", eps, dx);
  NonlocalState sa{0.0, GridFunction(g, a), K, shared_model("greenshields")};
  NonlocalState sb{0.0, GridFunction(g, b), K, shared_model("greenshields")};
  const double dt = cfl_timestep(sb, 0.5);
  sa = step(sa, dt).state;
  sb = step(sb, dt).state;
  EXPECT_GT(sa.u[15], sb.u[15]);
}
