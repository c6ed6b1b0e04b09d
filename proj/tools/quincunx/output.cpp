#include "output.hpp"

#include <cmath>
#include <iostream>
#include <sstream>

#include "quincunx/errors.hpp"

#ifndef QUINCUNX_VERSION
#define QUINCUNX_VERSION "unknown"
#endif

namespace quincunx::cli {

Manifest::Manifest(std::string command, std::filesystem::path directory)
    : command_(std::move(command)), directory_(std::move(directory)), start_(std::chrono::steady_clock::now()) {
  std::error_code ec;
  std::filesystem::create_directories(directory_, ec);
  if (ec) throw ConfigError("cannot create output directory " + directory_.string() + ": " + ec.message());
}

std::ofstream Manifest::open(const std::string& name) {
  std::ofstream out(directory_ / name);
  if (!out) throw ConfigError("cannot write " + (directory_ / name).string());
  files_.push_back(name);
  return out;
}

void Manifest::warn(const std::string& message) {
  std::cerr << "warning: " << message << '\n';
  warnings_.push_back(message);
}

void Manifest::write() const {
  nlohmann::json j;
  j["command"] = command_;
  j["version"] = version_string();
  j["config"] = config_;
  j["seed"] = seed_ ? nlohmann::json(*seed_) : nlohmann::json(nullptr);
  j["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  j["files"] = files_;
  j["warnings"] = warnings_;
  for (const auto& [k, v] : extra_.items()) j[k] = v;
  std::ofstream out(directory_ / "manifest.json");
  if (!out) throw ConfigError("cannot write manifest.json");
  out << j.dump(2) << '\n';
}

std::string fmt(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s.precision(12);
  s << value;
  return s.str();
}

std::string version_string() { return QUINCUNX_VERSION; }

}  // namespace quincunx::cli
