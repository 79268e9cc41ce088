#include <gtest/gtest.h>

#include <cmath>

#include "nlt/convergence_lab.hpp"

using namespace nlt;

namespace {

// Closed-form least-squares slope, written independently of fit_rate.
double ls_slope(const std::vector<std::pair<double, double>>& pts) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(pts.size());
  for (const auto& [e, err] : pts) {
    const double x = std::log(e), y = std::log(err);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

SweepConfig shock_sweep() {
  SweepConfig c;
  c.eps_list = {0.4, 0.2, 0.1, 0.05};
  c.snap_times = {0.25};
  return c;
}

const SweepResult& shock_result() {
  static const SweepResult r = sweep(shock_sweep());
  return r;
}

}  // namespace

TEST(FitRate, ExactPowerLaw) {
  std::vector<std::pair<double, double>> pts;
  for (double e : {0.4, 0.2, 0.1, 0.05, 0.025}) pts.emplace_back(e, 3.0 * std::sqrt(e));
  const auto f = fit_rate(pts);
  EXPECT_NEAR(f.order, 0.5, 1e-12);
  EXPECT_NEAR(f.constant, 3.0, 1e-11);
  EXPECT_NEAR(f.residual, 0.0, 1e-12);
  EXPECT_EQ(f.n_points, 5u);
}

TEST(FitRate, TwoPoints) {
  EXPECT_NEAR(fit_rate({{0.2, 2.0}, {0.1, 1.0}}).order, 1.0, 1e-14);
}

TEST(FitRate, PerturbedPowerLaw) {
  std::vector<std::pair<double, double>> pts;
  int sign = 1;
  for (double e : {0.4, 0.2, 0.1, 0.05, 0.025}) {
    pts.emplace_back(e, std::sqrt(e) * (1.0 + 0.01 * sign));
    sign = -sign;
  }
  const auto f = fit_rate(pts);
  EXPECT_NEAR(f.order, ls_slope(pts), 1e-12);
  EXPECT_GE(f.order, 0.45);
  EXPECT_LE(f.order, 0.55);
  EXPECT_GT(f.residual, 0.0);
}

TEST(FitRate, ZeroErrorsAreExcluded) {
  const auto f = fit_rate({{0.4, 0.4}, {0.2, 0.0}, {0.1, 0.1}, {0.05, 0.05}});
  EXPECT_EQ(f.excluded, 1u);
  EXPECT_EQ(f.n_points, 3u);
  EXPECT_NEAR(f.order, 1.0, 1e-12);
  EXPECT_THROW(fit_rate({{0.2, 0.0}, {0.1, 1.0}}), Error);
}

TEST(VerifyBounds, ZeroErrorRecordPasses) {
  SweepRecord r;
  r.eps = 0.1;
  const auto b = verify_bounds(r, EpsConstants{0.1, std::pow(0.1, 0.25), 1.0, 1.0, 2.0}, DatumStats{1.5, 1.6}, 0.05);
  EXPECT_TRUE(b.pass());
}

TEST(VerifyBounds, TermsFromMeasuredQuantities) {
  SweepRecord r;
  r.eps = 0.1;
  r.err_w_l1 = 0.05;
  r.err_u_l2 = 0.2;
  const double d = std::pow(0.1, 0.25);
  const auto b = verify_bounds(r, EpsConstants{0.1, d, 0.5, 2.0, 4.0}, DatumStats{1.5, 1.6}, 0.05);
  EXPECT_DOUBLE_EQ(b.terms[0].rhs, 0.2);
  EXPECT_NEAR(b.terms[1].rhs, 4.0 * d * d * 1.5, 1e-15);
  EXPECT_NEAR(b.terms[2].rhs, 4.0 * 1.6 * 0.1 / (d * d), 1e-14);
  EXPECT_NEAR(b.terms[3].rhs, 2.0 * 1.6 * 1.6 * 0.1 / d, 1e-14);
}

TEST(VerifyBounds, MissingConstants) {
  try {
    verify_bounds(SweepRecord{}, std::nullopt, DatumStats{}, 0.05);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::incomplete_report);
  }
}

TEST(Sweep, InitialTimeErrorsAreProjectionErrors) {
  SweepConfig c;
  c.eps_list = {0.2};
  c.T = 0.0;
  const auto r = sweep(c);
  ASSERT_EQ(r.outcomes.size(), 1u);
  const auto& o = r.outcomes[0];
  ASSERT_TRUE(o.ok) << o.diagnostic;
  ASSERT_EQ(o.records.size(), 1u);
  const auto u0 = parse_datum(c.datum, c.window).cell_averages(*o.grid);
  const auto w0 = nonlocal_impact(u0, *o.run.snapshots[0].kernel);
  EXPECT_EQ(o.records[0].err_u_l2, l2_distance(u0, o.reference[0]));
  EXPECT_EQ(o.records[0].err_w_l1, l1_distance(w0, o.reference[0]));
  EXPECT_LT(o.records[0].err_u_l2, 1e-12);
  EXPECT_TRUE(o.records[0].all_pass());
}

TEST(Sweep, ShockErrorsDecreaseAndBoundsHold) {
  const auto& r = shock_result();
  ASSERT_TRUE(r.all_pass());
  for (double t : {0.25, 0.5}) {
    double pw = 1e300, pu = 1e300;
    for (const auto& rec : r.records()) {
      if (rec.t != t) continue;
      EXPECT_LT(rec.err_w_l1, pw) << "eps " << rec.eps;
      EXPECT_LT(rec.err_u_l2, pu) << "eps " << rec.eps;
      pw = rec.err_w_l1;
      pu = rec.err_u_l2;
    }
  }
}

TEST(Sweep, TailAndShiftTermsWithinBounds) {
  for (const auto& o : shock_result().outcomes) {
    ASSERT_TRUE(o.constants.has_value());
    const double C1 = 2.0 / o.constants->eta;
    const double d = std::pow(o.eps, 0.25);
    EXPECT_DOUBLE_EQ(o.constants->delta, d);
    for (const auto& rec : o.records) {
      EXPECT_LE(rec.I[2], C1 * o.u0.tv * o.eps / (d * d) * 1.05);
      EXPECT_LE(rec.I[3], 2.0 * o.u0.tv * o.u0.tv * o.eps / d * 1.05);
      EXPECT_LE(rec.tail, C1 * o.u0.tv * o.eps / (d * d) * 1.05);
      EXPECT_LE(rec.tv_w, o.u0.tv + 1e-9);
      EXPECT_LE(rec.rho_lhs, 2.0 * o.u0.tv * (1.0 + 1e-8));
      EXPECT_LE(rec.err_u_l2 * rec.err_u_l2, (rec.B[0] + rec.B[1] + rec.B[2] + rec.B[3]) * 1.05);
    }
    EXPECT_LE(o.run.ledger.relative_residual(), 1e-12);
  }
}

TEST(Sweep, DatumStatsOfWindowedShock) {
  const auto& o = shock_result().outcomes.front();
  EXPECT_NEAR(o.u0.tv, 1.6, 1e-12);
  EXPECT_NEAR(o.u0.l1, 1.5, 1e-12);
}

TEST(Sweep, ResolutionSanity) {
  SweepConfig a;
  a.eps_list = {0.1};
  SweepConfig b = a;
  b.ratio = 80.0;
  const double ea = sweep(a).outcomes[0].records.back().err_w_l1;
  const double eb = sweep(b).outcomes[0].records.back().err_w_l1;
  EXPECT_LT(std::abs(ea - eb), 0.1 * ea);
}

TEST(Sweep, DeterministicAcrossJobCounts) {
  SweepConfig c;
  c.eps_list = {0.4, 0.2, 0.1};
  c.jobs = 1;
  const auto one = sweep(c).records();
  c.jobs = 3;
  const auto three = sweep(c).records();
  ASSERT_EQ(one.size(), three.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].eps, three[i].eps);
    EXPECT_EQ(one[i].t, three[i].t);
    EXPECT_EQ(one[i].err_w_l1, three[i].err_w_l1);
    EXPECT_EQ(one[i].err_u_l2, three[i].err_u_l2);
    EXPECT_EQ(one[i].I, three[i].I);
  }
}

TEST(Sweep, GodunovReferenceForGeneralVelocity) {
  SweepConfig c;
  c.model = "parabolic";
  c.kernel = "quadratic";
  c.eps_list = {0.2, 0.1};
  c.ratio = 20.0;
  c.ref_ratio = 4.0;
  c.T = 0.25;
  const auto r = sweep(c);
  for (const auto& o : r.outcomes) ASSERT_TRUE(o.ok) << o.diagnostic;
  const auto recs = r.records();
  ASSERT_EQ(recs.size(), 4u);
  EXPECT_LT(recs[3].err_w_l1, recs[1].err_w_l1);
  EXPECT_TRUE(r.all_pass());
}

TEST(Sweep, SmoothBumpDatum) {
  SweepConfig c;
  c.datum = "bump:0:2:0.9";
  c.kernel = "exp";
  c.eps_list = {0.2, 0.1};
  c.ratio = 20.0;
  c.ref_ratio = 4.0;
  c.T = 0.3;
  const auto r = sweep(c);
  for (const auto& o : r.outcomes) ASSERT_TRUE(o.ok) << o.diagnostic;
  EXPECT_TRUE(r.all_pass());
}

TEST(Sweep, NonIntegrableDatumSkipsSpectralTerms) {
  SweepConfig c;
  c.eps_list = {0.2};
  c.window = 0.0;
  c.T = 0.2;
  const auto r = sweep(c);
  ASSERT_TRUE(r.outcomes[0].ok) << r.outcomes[0].diagnostic;
  const auto& rec = r.outcomes[0].records.back();
  EXPECT_FALSE(rec.pass_dominance.has_value());
  EXPECT_TRUE(rec.pass_tv.value());
}

TEST(FitSweep, RatesOfShockSweep) {
  const auto fits = fit_sweep(shock_result().records());
  ASSERT_EQ(fits.size(), 2u);
  for (const auto& f : fits) {
    ASSERT_TRUE(f.w_l1 && f.u_l2);
    EXPECT_GE(f.w_l1->order, 0.45);
    EXPECT_GE(f.u_l2->order, 0.25);
  }
}

TEST(Config, Validation) {
  SweepConfig c;
  c.eps_list = {0.1, 0.2};
  EXPECT_THROW(validate_config(c), Error);
  c = SweepConfig{};
  c.ratio = 10.0;
  EXPECT_THROW(validate_config(c), Error);
  c = SweepConfig{};
  c.certify_rate = true;
  EXPECT_THROW(validate_config(c), Error);  // 0.4 exceeds (1 + 1.6)^-2
  c.eps_list = {0.1, 0.05};
  EXPECT_NO_THROW(validate_config(c));
  EXPECT_NEAR(eps_zero(1.6), 1.0 / 6.76, 1e-15);
}
