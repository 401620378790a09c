#include <gtest/gtest.h>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

#include <rockcan/io.hpp>

using namespace rockcan;

TEST(Io, DoublesRoundTrip) {
  for (double v : {0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, std::numbers::pi, 1e-300, -2.5e17, 5e-324})
  {
    const std::string txt = fmt_double(v);
    double back = 1;
    std::from_chars(txt.data(), txt.data() + txt.size(), back);
    EXPECT_EQ(back, v) << txt;
    EXPECT_EQ(std::signbit(back), std::signbit(v));
  }
  EXPECT_EQ(fmt_double(0.5), "0.5");
  EXPECT_EQ(fmt_double(0.1), "0.10000000000000001");
}

TEST(Io, TrajectoryCsv) {
  FullTrajectory tr;
  tr.t = {0.0, 0.5};
  tr.y = {Vec<6>{1, 2, 3, 4, 5, 6}, Vec<6>{0.1, 0, 0, 0, 0, -1}};
  std::ostringstream os;
  write_trajectory_csv(os, tr);
  EXPECT_EQ(os.str(),
            "t,psi,theta,phi,Psi,Theta,Phi\n0,1,2,3,4,5,6\n0.5,0.10000000000000001,0,0,0,0,-1\n");
}

TEST(Io, GenericCsv) {
  std::ostringstream os;
  write_csv(os, {"a", "b"}, {{1, 2}, {3, 0.25}});
  EXPECT_EQ(os.str(), "a,b\n1,2\n3,0.25\n");
  std::ostringstream bad;
  EXPECT_THROW(write_csv(bad, {"a", "b"}, {{1}}), DomainError);
}

TEST(Io, Sha256KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Io, FilesAndJson) {
  const auto dir = std::filesystem::temp_directory_path() / "rockcan_test_io";
  std::filesystem::remove_all(dir);
  write_text(dir / "sub" / "x.txt", "abc");
  EXPECT_EQ(read_file(dir / "sub" / "x.txt"), "abc");
  EXPECT_EQ(sha256_file(dir / "sub" / "x.txt"), sha256_hex("abc"));
  write_json(dir / "j.json", nlohmann::json{{"v", 0.1}});
  EXPECT_EQ(nlohmann::json::parse(read_file(dir / "j.json"))["v"].get<double>(), 0.1);
  EXPECT_THROW(read_file(dir / "missing"), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST(Io, BounceEventsJson) {
  BounceEvent e;
  e.t_min = 1;
  e.phi_min = 1e-4;
  e.delta_psi = -std::numbers::pi;
  e.direction = -1;
  const auto rad = bounce_events_json({e});
  EXPECT_EQ(rad[0]["delta_psi"].get<double>(), -std::numbers::pi);
  EXPECT_EQ(rad[0]["abs_delta_psi"].get<double>(), std::numbers::pi);
  const auto d = bounce_events_json({e}, true);
  EXPECT_NEAR(d[0]["delta_psi"].get<double>(), -180.0, 1e-12);
  EXPECT_EQ(d[0]["direction"].get<int>(), -1);
}

TEST(Io, ErrorJson) {
  const IntegrationError ie(IntegrationFailure::PhiGuard, 2.0, {0.1, 0.2}, "guard");
  const auto j = error_json(ie);
  EXPECT_EQ(j["kind"], "phi_guard");
  EXPECT_EQ(j["t_last"].get<double>(), 2.0);
  EXPECT_EQ(j["y_last"].size(), 2u);
  EXPECT_EQ(error_json(ConfigError("bad", 7))["line"].get<int>(), 7);
  EXPECT_EQ(error_json(SingularityError(0.0, "x"))["kind"], "singularity");
  EXPECT_EQ(error_json(SurfaceLossError(-0.5, "x"))["normal"].get<double>(), -0.5);
  EXPECT_EQ(error_json(std::runtime_error("x"))["kind"], "internal");
}
