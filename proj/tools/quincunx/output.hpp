#pragma once

// CSV emission at 12 significant digits and the run manifest.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace quincunx::cli {

class Manifest {
 public:
  Manifest(std::string command, std::filesystem::path directory);

  // Opens `name` in the output directory for writing and records it.
  std::ofstream open(const std::string& name);

  void warn(const std::string& message);
  nlohmann::json& extra() { return extra_; }
  void set_config(nlohmann::json config) { config_ = std::move(config); }
  void set_seed(std::uint64_t seed) { seed_ = seed; }

  const std::filesystem::path& directory() const { return directory_; }

  // manifest.json, written after every other file.
  void write() const;

 private:
  std::string command_;
  std::filesystem::path directory_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> files_;
  std::vector<std::string> warnings_;
  nlohmann::json config_ = nlohmann::json::object();
  nlohmann::json extra_ = nlohmann::json::object();
  std::optional<std::uint64_t> seed_;
};

// Writes a value as CSV text: 12 significant digits, inf and nan spelled out.
std::string fmt(double value);

std::string version_string();

}  // namespace quincunx::cli
