#include <gtest/gtest.h>

#include <sstream>

#include "nlt/config.hpp"
#include "nlt/io.hpp"

using namespace nlt;

namespace {

std::string parse_error(const std::string& text) {
  try {
    parse_config_text(text, "test.ini");
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(ParseConfig, MinimalSweepGetsDefaults) {
  const auto c = parse_config_text("[sweep]\nkernel = exp\ndatum = riemann:0.2:0.8\nmodel = greenshields\n");
  EXPECT_EQ(c.mode, RunMode::sweep);
  EXPECT_EQ(c.sweep.kernel, "exp");
  EXPECT_EQ(c.sweep.cfl, 0.5);
  EXPECT_EQ(c.sweep.ratio, 40.0);
  EXPECT_EQ(c.sweep.tail_tol, 1e-10);
  EXPECT_EQ(c.sweep.delta_exponent, 0.25);
  EXPECT_EQ(c.sweep.eps_list, (std::vector<double>{0.4, 0.2, 0.1, 0.05, 0.025}));
  const std::string text = to_text(c);
  EXPECT_NE(text.find("cfl = 0.5"), std::string::npos);
  EXPECT_NE(text.find("tail_tol = 1e-10"), std::string::npos);
}

TEST(ParseConfig, CanonicalTextRoundTrips) {
  const auto c = parse_config("std_shock");
  const auto again = parse_config_text(to_text(c));
  EXPECT_EQ(to_text(again), to_text(c));
  EXPECT_EQ(digest(to_text(again)), digest(to_text(c)));
}

TEST(ParseConfig, SimulateSection) {
  const auto c = parse_config_text(
      "# single run\n[simulate]\nkernel = hat\nmodel = greenshields\ndatum = bump:0:1:0.5\neps = 0.05\n"
      "snap_times = 0.1, 0.2\nimpact = cell\n");
  EXPECT_EQ(c.mode, RunMode::simulate);
  EXPECT_EQ(c.sweep.eps_list, std::vector<double>{0.05});
  EXPECT_EQ(c.sweep.location, ImpactLocation::cell);
  EXPECT_EQ(c.sweep.snap_times.size(), 2u);
}

TEST(ParseConfig, EpsMustDecrease) {
  const auto msg = parse_error("[sweep]\nkernel = exp\nmodel = greenshields\ndatum = riemann:0.2:0.8\neps_list = 0.1, 0.2\n");
  EXPECT_NE(msg.find("eps_list must be decreasing"), std::string::npos) << msg;
  EXPECT_NE(msg.find("test.ini:5"), std::string::npos) << msg;
}

TEST(ParseConfig, DatumAdmissibility) {
  const auto msg = parse_error("[sweep]\nkernel = exp\nmodel = greenshields\ndatum = riemann:0.2:1.5\n");
  EXPECT_NE(msg.find("0 <= u0 <= 1"), std::string::npos) << msg;
  EXPECT_NE(msg.find("test.ini:4"), std::string::npos) << msg;
}

TEST(ParseConfig, RejectsUnknownDuplicateAndMissingKeys) {
  const std::string base = "[sweep]\nkernel = exp\nmodel = greenshields\ndatum = riemann:0.2:0.8\n";
  EXPECT_NE(parse_error(base + "colour = blue\n").find("unknown key 'colour'"), std::string::npos);
  EXPECT_NE(parse_error(base + "kernel = hat\n").find("duplicate key"), std::string::npos);
  EXPECT_NE(parse_error("[sweep]\nkernel = exp\n").find("missing required key"), std::string::npos);
  EXPECT_NE(parse_error(base + "eps = 0.1\n").find("unknown key 'eps'"), std::string::npos);
  EXPECT_NE(parse_error("kernel = exp\n").find("outside of a section"), std::string::npos);
  EXPECT_NE(parse_error(base + "ratio = forty\n").find("not a number"), std::string::npos);
  EXPECT_NE(parse_error("[other]\n").find("unknown section"), std::string::npos);
  EXPECT_FALSE(parse_error(base + "kernel2 = x\n").empty());
}

TEST(ParseConfig, MissingFile) {
  EXPECT_THROW(parse_config("/nonexistent/config.ini"), Error);
}

TEST(SweepCsv, RoundTripsRecords) {
  SweepRecord r;
  r.eps = 0.1;
  r.dx = 0.1 / 40;
  r.t = 0.5;
  r.err_w_l1 = 1.0 / 3.0;
  r.err_u_l2 = 0.2;
  r.I = {1e-3, 2e-4, 3e-5, 4e-6};
  r.B = {1, 2, 3, 4};
  r.pass_tv = true;
  r.pass_I = {true, true, false, true};
  SweepRecord bad;
  bad.ok = false;
  bad.diagnostic = "padding: edge 0.5, peak 0.8";
  std::ostringstream os;
  io::write_sweep_csv(os, {r, bad});
  std::istringstream in(os.str());
  const auto back = io::read_sweep_csv(in);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].err_w_l1, r.err_w_l1);
  EXPECT_EQ(back[0].dx, r.dx);
  EXPECT_EQ(back[0].I, r.I);
  EXPECT_EQ(back[0].pass_I[2], std::optional<bool>(false));
  EXPECT_FALSE(back[0].pass_energy.has_value());
  EXPECT_FALSE(back[1].ok);
  EXPECT_NE(os.str().find("bound_failure"), std::string::npos);
}
