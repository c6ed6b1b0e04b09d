#pragma once

// INI run configuration. Sections [system], [walk], [rates], [output];
// frequencies and rates are f/2pi in MHz, times in us.

#include <boost/property_tree/ptree.hpp>
#include <filesystem>
#include <string>

#include "quincunx/protocol.hpp"

namespace quincunx::cli {

struct OutputSettings {
  std::filesystem::path directory = "out";
  int phase_points = 0;    // 0: 4 n_max + 1
  int dense_samples = 20;  // n_bar trace samples per segment
};

struct RunConfig {
  WalkConfig walk;
  OutputSettings output;
  boost::property_tree::ptree source;  // parsed file, echoed into manifests
};

// Throws ConfigError on unreadable files, unknown keys or malformed values.
RunConfig load_config(const std::filesystem::path& path);

// The reference configuration with no file.
RunConfig default_config();

// Keys accepted in each section, for --help.
std::string config_help();

}  // namespace quincunx::cli
