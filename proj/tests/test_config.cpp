#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <string>

#include <rockcan/config.hpp>

using namespace rockcan;

namespace {
const std::string fixture_dir = ROCKCAN_FIXTURE_DIR;

int error_line(const std::string& text) {
  try {
    Config::parse_string(text);
  } catch (const ConfigError& e) {
    return e.line;
  }
  return -1;
}
}  // namespace

TEST(Config, ParsesScalarsSectionsAndComments) {
  const Config c = Config::parse_string(
      "top = 1\n"
      "# comment\n"
      "[run]\n"
      "t1 = 5.0   # trailing\n"
      "rtol = 1e-10\n"
      "n = -3\n"
      "big = 1_000\n"
      "plus = +2.5\n"
      "name = \"a # not a comment\"\n"
      "flag = true\n");
  EXPECT_EQ(*c.number("top"), 1.0);
  EXPECT_EQ(*c.number("run.t1"), 5.0);
  EXPECT_EQ(*c.number("run.rtol"), 1e-10);
  EXPECT_EQ(*c.number("run.n"), -3.0);
  EXPECT_EQ(*c.number("run.big"), 1000.0);
  EXPECT_EQ(*c.number("run.plus"), 2.5);
  EXPECT_EQ(*c.string("run.name"), "a # not a comment");
  EXPECT_TRUE(*c.boolean("run.flag"));
  EXPECT_FALSE(c.number("run.missing"));
  EXPECT_THROW(c.number("run.name"), ConfigError);
  EXPECT_THROW(c.string("run.t1"), ConfigError);
  EXPECT_THROW(c.boolean("run.t1"), ConfigError);
}

TEST(Config, ReportsLineOfBadInput) {
  EXPECT_EQ(error_line("a = 1\nb\n"), 2);
  EXPECT_EQ(error_line("[x]\na = 1\na = 2\n"), 3);
  EXPECT_EQ(error_line("[x\n"), 1);
  EXPECT_EQ(error_line("[[arr]]\n"), 1);
  EXPECT_EQ(error_line("a = \"open\n"), 1);
  EXPECT_EQ(error_line("a = [1, 2]\n"), 1);
  EXPECT_EQ(error_line("a = 1.0.0\n"), 1);
  EXPECT_EQ(error_line(" = 3\n"), 1);
  EXPECT_THROW(Config::load(fixture_dir + "/does_not_exist.toml"), ConfigError);
}

TEST(Config, ReferenceFixture) {
  const Config c = Config::load(fixture_dir + "/reference_can.toml");
  const CanParameters p = can_from_config(c);
  const CanParameters ref = reference_can();
  EXPECT_EQ(p.a, ref.a);
  EXPECT_EQ(p.c, ref.c);
  EXPECT_EQ(p.h, ref.h);
  EXPECT_EQ(p.time_scale, ref.time_scale);
  const auto ic = ic_from_config(c);
  ASSERT_TRUE(ic);
  EXPECT_EQ(ic->clock, RateClock::Physical);
  EXPECT_NEAR(ic->state.phi, std::numbers::pi / 100, 1e-17);
  EXPECT_EQ(ic->state.Psi, 0.1001);
  EXPECT_EQ(ic->state.Theta, -0.1);
  EXPECT_EQ(*c.number("run.t1"), 5.0);
}

TEST(Config, DimensionalFixture) {
  const CanParameters p = can_from_config(Config::load(fixture_dir + "/dimensional_can.toml"));
  const CanParameters q = derive(DimensionalCan{4.3e-2, 5.45e-2, 3.7e-2, 6.97e-5, 5.89e-5, 9.81});
  EXPECT_EQ(p.a, q.a);
  EXPECT_EQ(p.h, q.h);
  EXPECT_NEAR(p.h, 5.45 / 3.7, 1e-12);
  EXPECT_FALSE(ic_from_config(Config::load(fixture_dir + "/dimensional_can.toml")));
}

TEST(Config, CanSectionErrors) {
  EXPECT_THROW(can_from_config(Config::parse_string("[can]\na = 0.7\nc = 0.6\n")), ConfigError);
  EXPECT_THROW(can_from_config(Config::parse_string("[can]\na = 0.7\nc = 0.6\nh = 1\nm = 1\n")), ConfigError);
  EXPECT_THROW(can_from_config(Config::parse_string("[run]\nt1 = 1\n")), ConfigError);
  EXPECT_THROW(can_from_config(Config::parse_string("[can]\na = -0.7\nc = 0.6\nh = 1\n")), DomainError);
  const CanParameters p = can_from_config(Config::parse_string("[can]\na = 0.7\nc = 0.6\nh = 1\n"));
  EXPECT_EQ(p.R, 0.037);
  EXPECT_EQ(p.g, 9.81);
}

TEST(Config, RateClocks) {
  EXPECT_EQ(parse_rate_clock("physical"), RateClock::Physical);
  EXPECT_EQ(parse_rate_clock("full"), RateClock::Full);
  EXPECT_EQ(parse_rate_clock("reduced"), RateClock::Reduced);
  EXPECT_THROW(parse_rate_clock("Full"), ConfigError);
  for (RateClock c : {RateClock::Physical, RateClock::Full, RateClock::Reduced})
    EXPECT_EQ(parse_rate_clock(to_string(c)), c);
  const auto ic = ic_from_config(Config::parse_string("[ic]\nphi = 0.1\nclock = \"reduced\"\n"));
  ASSERT_TRUE(ic);
  EXPECT_EQ(ic->clock, RateClock::Reduced);
  EXPECT_EQ(ic->state.Psi, 0.0);
}
