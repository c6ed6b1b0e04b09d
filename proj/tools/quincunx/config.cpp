#include "config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <map>
#include <set>
#include <sstream>

#include "quincunx/errors.hpp"

namespace quincunx::cli {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>> kKeys = {
    {"system", {"omega_a", "omega_r", "g", "epsilon", "qubit_shift", "n_max"}},
    {"walk", {"alpha", "alpha_im", "d", "steps", "tau", "pulse_mode", "safety", "min_steps_per_segment"}},
    {"rates", {"kappa", "gamma_1", "gamma_phi", "gamma_m", "t1", "t2"}},
    {"output", {"directory", "phase_points", "dense_samples"}},
};

template <typename T>
T get(const pt::ptree& tree, const std::string& key, T fallback) {
  try {
    return tree.get<T>(key, fallback);
  } catch (const pt::ptree_bad_data&) {
    throw ConfigError("malformed value for '" + key + "': " + tree.get<std::string>(key));
  }
}

void check_keys(const pt::ptree& tree) {
  for (const auto& [section, body] : tree) {
    const auto known = kKeys.find(section);
    if (known == kKeys.end()) throw ConfigError("unknown config section [" + section + "]");
    for (const auto& [key, value] : body) {
      if (!known->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
    }
  }
}

RunConfig from_tree(const pt::ptree& tree) {
  check_keys(tree);
  RunConfig cfg;
  cfg.source = tree;
  WalkConfig& w = cfg.walk;

  const SystemParams ref = SystemParams::reference();
  w.params = SystemParams::from_mhz(get(tree, "system.omega_a", to_mhz(ref.omega_a)),
                                    get(tree, "system.omega_r", to_mhz(ref.omega_r)),
                                    get(tree, "system.g", to_mhz(ref.g)),
                                    get(tree, "system.epsilon", to_mhz(ref.epsilon)));
  w.params.qubit_shift = from_mhz(get(tree, "system.qubit_shift", 0.0));
  const int n_max = get(tree, "system.n_max", 40);
  if (n_max < 1) throw ConfigError("system.n_max must be at least 1");
  w.cutoff = FockCutoff(n_max);

  w.alpha = {get(tree, "walk.alpha", 3.0), get(tree, "walk.alpha_im", 0.0)};
  w.d = get(tree, "walk.d", 21);
  w.n_steps = get(tree, "walk.steps", 15);
  if (w.n_steps < 0) throw ConfigError("walk.steps must be non-negative");
  if (const auto tau = tree.get_optional<std::string>("walk.tau")) w.tau = get(tree, "walk.tau", 0.0);
  w.pulse_mode = parse_pulse_mode(get<std::string>(tree, "walk.pulse_mode", "adaptive"));
  w.step.safety = get(tree, "walk.safety", w.step.safety);
  w.step.min_steps_per_segment = get(tree, "walk.min_steps_per_segment", w.step.min_steps_per_segment);
  if (!(w.step.safety > 0.0) || w.step.min_steps_per_segment < 1) throw ConfigError("invalid integrator step control");

  const bool has_t1 = tree.get_optional<std::string>("rates.t1").has_value();
  const bool has_t2 = tree.get_optional<std::string>("rates.t2").has_value();
  if (has_t1 != has_t2) throw ConfigError("rates.t1 and rates.t2 must be given together");
  if (has_t1) {
    if (tree.get_optional<std::string>("rates.gamma_1") || tree.get_optional<std::string>("rates.gamma_phi")) {
      throw ConfigError("give either t1/t2 or gamma_1/gamma_phi, not both");
    }
    w.rates = DecoherenceRates::from_t1_t2(get(tree, "rates.t1", 0.0), get(tree, "rates.t2", 0.0));
  } else {
    w.rates.gamma_1 = from_mhz(get(tree, "rates.gamma_1", 0.0));
    w.rates.gamma_phi = from_mhz(get(tree, "rates.gamma_phi", 0.0));
  }
  w.rates.kappa = from_mhz(get(tree, "rates.kappa", 0.0));
  w.rates.gamma_m = from_mhz(get(tree, "rates.gamma_m", 0.0));
  w.rates.check();

  cfg.output.directory = get<std::string>(tree, "output.directory", "out");
  cfg.output.phase_points = get(tree, "output.phase_points", 0);
  cfg.output.dense_samples = get(tree, "output.dense_samples", 20);
  if (cfg.output.dense_samples < 0) throw ConfigError("output.dense_samples must be non-negative");
  return cfg;
}

}  // namespace

RunConfig load_config(const std::filesystem::path& path) {
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("cannot read config: " + std::string(e.what()));
  }
  return from_tree(tree);
}

RunConfig default_config() { return from_tree({}); }

std::string config_help() {
  std::ostringstream out;
  out << "Config file (INI; f/2pi in MHz, times in us; every key optional):\n";
  for (const auto& [section, keys] : kKeys) {
    out << "  [" << section << "]";
    for (const auto& k : keys) out << ' ' << k;
    out << '\n';
  }
  return out.str();
}

}  // namespace quincunx::cli
