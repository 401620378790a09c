#pragma once

#include <charconv>
#include <cmath>
#include <numbers>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <json.hpp>

#include "error.hpp"
#include "integrate.hpp"

namespace rockcan {

inline constexpr const char* version_string = "0.1.0";

// 17 significant digits: exact round trip, byte-stable output.
inline std::string fmt_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

inline const char* trajectory_header = "t,psi,theta,phi,Psi,Theta,Phi";

inline void write_trajectory_csv(std::ostream& os, const FullTrajectory& traj) {
  os << trajectory_header << '\n';
  for (std::size_t i = 0; i < traj.size(); ++i) {
    os << fmt_double(traj.t[i]);
    for (double v : traj.y[i]) os << ',' << fmt_double(v);
    os << '\n';
  }
}

// Generic column table; every row must match the header width.
inline void write_csv(std::ostream& os, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  for (std::size_t j = 0; j < header.size(); ++j) os << (j ? "," : "") << header[j];
  os << '\n';
  for (const auto& r : rows) {
    if (r.size() != header.size()) throw DomainError("csv row width mismatch");
    for (std::size_t j = 0; j < r.size(); ++j) os << (j ? "," : "") << fmt_double(r[j]);
    os << '\n';
  }
}

inline nlohmann::json bounce_events_json(const std::vector<BounceEvent>& evs, bool degrees = false) {
  const double f = degrees ? 180.0 / std::numbers::pi : 1.0;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : evs)
    arr.push_back({{"t_min", e.t_min},
                   {"phi_min", e.phi_min * f},
                   {"delta_psi", e.delta_psi * f},
                   {"abs_delta_psi", std::abs(e.delta_psi) * f},
                   {"direction", e.direction}});
  return arr;
}

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw Error("EVP_MD_CTX_new failed");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) == 1 && EVP_DigestFinal_ex(ctx, md, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw Error("sha256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot read " + p.string());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

inline std::string sha256_file(const std::filesystem::path& p) { return sha256_hex(read_file(p)); }

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write " + p.string());
  f << text;
}

inline void write_json(const std::filesystem::path& p, const nlohmann::json& j) {
  // nlohmann prints the shortest round-trip form of each double.
  std::ostringstream os;
  os << j.dump(2) << '\n';
  write_text(p, os.str());
}

inline nlohmann::json error_json(const std::exception& e) {
  nlohmann::json j{{"error", e.what()}};
  if (auto r = dynamic_cast<const Error*>(&e)) {
    j["kind"] = r->kind();
    if (auto ie = dynamic_cast<const IntegrationError*>(&e)) {
      j["t_last"] = ie->t_last;
      j["y_last"] = ie->y_last;
    } else if (auto se = dynamic_cast<const SingularityError*>(&e)) {
      j["phi"] = se->phi;
    } else if (auto sl = dynamic_cast<const SurfaceLossError*>(&e)) {
      j["normal"] = sl->normal;
    } else if (auto ce = dynamic_cast<const ConfigError*>(&e)) {
      if (ce->line) j["line"] = ce->line;
    }
  } else {
    j["kind"] = "internal";
  }
  return j;
}

}  // namespace rockcan
