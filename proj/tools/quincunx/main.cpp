#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "config.hpp"
#include "output.hpp"
#include "quincunx/analysis.hpp"
#include "quincunx/errors.hpp"
#include "quincunx/observables.hpp"
#include "quincunx/reference.hpp"
#include "quincunx/tomography.hpp"

namespace qx = quincunx;
namespace cli = quincunx::cli;
using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Raised when validate_config reports errors; maps to exit code 2.
struct ValidationFailure : qx::ConfigError {
  using qx::ConfigError::ConfigError;
};

int default_jobs() {
  if (const char* env = std::getenv("QUINCUNX_JOBS")) {
    try {
      const int j = std::stoi(env);
      if (j >= 1) return j;
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring QUINCUNX_JOBS=" << env << '\n';
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

json tree_json(const boost::property_tree::ptree& tree) {
  json j = json::object();
  for (const auto& [section, body] : tree) {
    json s = json::object();
    for (const auto& [key, value] : body) s[key] = value.data();
    j[section] = s;
  }
  return j;
}

json walk_json(const qx::WalkConfig& w) {
  return {
      {"alpha", {w.alpha.real(), w.alpha.imag()}},
      {"d", w.d},
      {"steps", w.n_steps},
      {"tau_us", qx::resolved_tau(w)},
      {"tau_from_config", w.tau.has_value()},
      {"pulse_mode", qx::to_string(w.pulse_mode)},
      {"n_max", w.cutoff.n_max()},
      {"omega_a_MHz", qx::to_mhz(w.params.omega_a)},
      {"omega_r_MHz", qx::to_mhz(w.params.omega_r)},
      {"g_MHz", qx::to_mhz(w.params.g)},
      {"epsilon_MHz", qx::to_mhz(w.params.epsilon)},
      {"qubit_shift_MHz", qx::to_mhz(w.params.qubit_shift)},
      {"kappa_MHz", qx::to_mhz(w.rates.kappa)},
      {"gamma_1_MHz", qx::to_mhz(w.rates.gamma_1)},
      {"gamma_phi_MHz", qx::to_mhz(w.rates.gamma_phi)},
      {"gamma_m_MHz", qx::to_mhz(w.rates.gamma_m)},
      {"safety", w.step.safety},
      {"min_steps_per_segment", w.step.min_steps_per_segment},
  };
}

json validation_json(const qx::ValidationReport& report) {
  json checks = json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"severity", c.severity == qx::Severity::Error ? "error" : "warning"},
                      {"value", c.value},
                      {"lower", std::isfinite(c.lower) ? json(c.lower) : json(nullptr)},
                      {"upper", std::isfinite(c.upper) ? json(c.upper) : json(nullptr)},
                      {"margin", std::isfinite(c.margin) ? json(c.margin) : json(nullptr)},
                      {"message", c.message}});
  }
  return checks;
}

// Prints the report, records it, and throws on errors.
void validate(const qx::WalkConfig& walk, cli::Manifest& manifest) {
  const qx::ValidationReport report = qx::validate_config(walk);
  manifest.extra()["validation"] = validation_json(report);
  if (report.has_errors()) {
    std::cerr << report.to_string();
    throw ValidationFailure("configuration failed validation");
  }
  if (report.has_warnings()) {
    for (const auto& c : report.checks) {
      if (!c.passed) manifest.warn(c.name + ": " + c.message);
    }
  }
}

cli::RunConfig load(const std::string& path) { return path.empty() ? cli::default_config() : cli::load_config(path); }

std::filesystem::path output_dir(const std::string& flag, const cli::RunConfig& cfg) {
  return flag.empty() ? cfg.output.directory : std::filesystem::path(flag);
}

void write_series_header(std::ostream& out) { out << "step,t_us,sigma_h,sigma_qp,n_bar,delta_n\n"; }

void write_series(std::ostream& out, const qx::StepObservables& obs) {
  write_series_header(out);
  for (std::size_t j = 0; j < obs.times.size(); ++j) {
    out << j << ',' << cli::fmt(obs.times[j]) << ',' << cli::fmt(obs.sigma_h[j]) << ',' << cli::fmt(obs.sigma_qp[j])
        << ',' << cli::fmt(obs.n_bar[j]) << ',' << cli::fmt(obs.delta_n[j]) << '\n';
  }
}

json regression_json(const qx::RegressionRow& r) {
  return {{"s", r.s},          {"ds", r.ds},
          {"ln_sigma0", r.intercept}, {"d_ln_sigma0", r.d_intercept},
          {"r", std::isnan(r.r) ? json(nullptr) : json(r.r)}, {"n_points", r.n_points},
          {"excluded", r.excluded}, {"degenerate", r.degenerate}};
}

std::string regression_csv_row(const std::string& label, const qx::RegressionRow& r) {
  std::ostringstream out;
  out << label << ',' << cli::fmt(r.s) << ',' << cli::fmt(r.ds) << ',' << cli::fmt(r.intercept) << ','
      << cli::fmt(r.d_intercept) << ',' << cli::fmt(r.r) << ',' << r.n_points << ',' << r.excluded << '\n';
  return out.str();
}

constexpr const char* kRegressionHeader = "series,s,ds,ln_sigma0,d_ln_sigma0,r,n_points,excluded\n";

// ---------------------------------------------------------------- simulate

int cmd_simulate(const std::string& config_path, const std::string& out_flag) {
  cli::RunConfig cfg = load(config_path);
  cli::Manifest manifest("simulate", output_dir(out_flag, cfg));
  manifest.set_config({{"file", tree_json(cfg.source)}, {"resolved", walk_json(cfg.walk)}});
  validate(cfg.walk, manifest);

  qx::WalkConfig walk = cfg.walk;
  walk.step.dense_samples_per_segment = cfg.output.dense_samples;
  const int stride = walk.cutoff.walker_dim();
  std::vector<std::pair<double, double>> trace;
  auto observer = [&](double t, const qx::CMatrix& rho) {
    double n = 0.0;
    for (Eigen::Index i = 0; i < rho.rows(); ++i) n += (i % stride) * rho(i, i).real();
    trace.emplace_back(t, n);
  };
  const qx::WalkResult result = qx::run_walk(walk, nullptr, observer);
  if (result.diagnostics.leakage_warning) {
    manifest.warn("population near the Fock cutoff exceeded tolerance; increase system.n_max");
  }
  const qx::StepObservables obs = qx::step_observables(result.snapshots, walk.cutoff, cfg.output.phase_points);

  {
    auto out = manifest.open("sigma_h.csv");
    out << "step,t_us,sigma_h\n";
    for (std::size_t j = 0; j < obs.times.size(); ++j)
      out << j << ',' << cli::fmt(obs.times[j]) << ',' << cli::fmt(obs.sigma_h[j]) << '\n';
  }
  {
    auto out = manifest.open("sigma_qp.csv");
    out << "step,t_us,sigma_qp\n";
    for (std::size_t j = 0; j < obs.times.size(); ++j)
      out << j << ',' << cli::fmt(obs.times[j]) << ',' << cli::fmt(obs.sigma_qp[j]) << '\n';
  }
  {
    auto out = manifest.open("nbar.csv");
    out << "t_us,n_bar\n";
    if (trace.empty()) out << "0," << cli::fmt(obs.n_bar.front()) << '\n';
    for (const auto& [t, n] : trace) out << cli::fmt(t) << ',' << cli::fmt(n) << '\n';
  }
  {
    auto out = manifest.open("steps.csv");
    out << "step,t_us,t_h_us,omega_d_over_2pi_MHz,n_bar_schedule,n_bar,delta_n,sigma_h,sigma_qp\n";
    for (std::size_t j = 0; j < obs.times.size(); ++j) {
      out << j << ',' << cli::fmt(obs.times[j]) << ',';
      if (j >= 1 && j <= result.schedule.steps.size()) {
        const auto& s = result.schedule.steps[j - 1];
        out << cli::fmt(s.t_h) << ',' << cli::fmt(qx::to_mhz(s.omega_d)) << ','
            << cli::fmt(result.schedule.n_bar_sequence[j - 1]) << ',';
      } else {
        out << ",,,";
      }
      out << cli::fmt(obs.n_bar[j]) << ',' << cli::fmt(obs.delta_n[j]) << ',' << cli::fmt(obs.sigma_h[j]) << ','
          << cli::fmt(obs.sigma_qp[j]) << '\n';
    }
  }
  {
    auto out = manifest.open("pn.csv");
    out << "step,n,p\n";
    for (std::size_t j = 0; j < result.snapshots.size(); ++j) {
      const qx::PhotonStats stats = qx::photon_stats(qx::walker_density(result.snapshots[j]));
      for (std::size_t n = 0; n < stats.pn.size(); ++n) out << j << ',' << n << ',' << cli::fmt(stats.pn[n]) << '\n';
    }
  }
  const int M = cfg.output.phase_points > 0 ? cfg.output.phase_points : 4 * walk.cutoff.n_max() + 1;
  for (std::size_t j = 0; j < result.snapshots.size(); ++j) {
    const qx::AngularDistribution dist = qx::phase_distribution(qx::walker_density(result.snapshots[j]), M);
    auto out = manifest.open("phase_dist_step_" + std::to_string(j) + ".csv");
    out << "theta,p\n";
    for (std::size_t k = 0; k < dist.size(); ++k) out << cli::fmt(dist.theta[k]) << ',' << cli::fmt(dist.values[k]) << '\n';
  }

  json regressions = json::object();
  if (obs.times.size() >= 4) {
    auto out = manifest.open("regression.csv");
    out << kRegressionHeader;
    const std::vector<double> t(obs.times.begin() + 1, obs.times.end());
    for (const auto& [label, values] : {std::pair{"sigma_h", &obs.sigma_h}, std::pair{"sigma_qp", &obs.sigma_qp}}) {
      try {
        const qx::RegressionRow row = qx::loglog_regression({label, t, {values->begin() + 1, values->end()}});
        out << regression_csv_row(label, row);
        regressions[label] = regression_json(row);
      } catch (const qx::RegressionError& e) {
        manifest.warn(std::string(label) + " regression: " + e.what());
      }
    }
  }
  manifest.extra()["regression_vs_time"] = regressions;
  manifest.extra()["integrator"] = {{"total_steps", result.diagnostics.total_steps},
                                    {"max_trace_drift_per_segment", result.diagnostics.max_trace_drift_per_segment},
                                    {"max_top_population", result.diagnostics.max_top_population}};
  manifest.write();
  return 0;
}

// ------------------------------------------------------------------- sweep

std::string kappa_tag(double kappa) {
  std::ostringstream s;
  s.precision(12);
  s << kappa;
  return s.str();
}

int cmd_sweep(const std::string& config_path, const std::string& out_flag, std::vector<double> kappas, int jobs,
              bool compare_modes) {
  cli::RunConfig cfg = load(config_path);
  cli::Manifest manifest("sweep", output_dir(out_flag, cfg));
  manifest.set_config({{"file", tree_json(cfg.source)}, {"resolved", walk_json(cfg.walk)}, {"kappas_MHz", kappas}});
  validate(cfg.walk, manifest);

  const qx::SweepResult sweep = qx::sweep_kappa(cfg.walk, kappas, jobs);
  for (const auto& w : sweep.warnings) manifest.warn(w);

  json runs = json::array();
  for (const auto& run : sweep.runs) {
    json entry = {{"kappa_over_2pi_MHz", run.kappa}};
    if (run.error) {
      manifest.warn("kappa " + kappa_tag(run.kappa) + " failed: " + *run.error);
      entry["error"] = *run.error;
    } else {
      const std::string name = "series_kappa_" + kappa_tag(run.kappa) + ".csv";
      auto out = manifest.open(name);
      write_series(out, run.observables);
      entry["series"] = name;
      entry["sigma_h"] = regression_json(run.sigma_h);
      entry["sigma_qp"] = regression_json(run.sigma_qp);
    }
    runs.push_back(entry);
  }
  {
    auto out = manifest.open("table1.csv");
    qx::write_regression_table(out, sweep.table(false));
  }
  {
    auto out = manifest.open("table2.csv");
    qx::write_regression_table(out, sweep.table(true));
  }
  manifest.extra()["runs"] = runs;

  if (compare_modes) {
    const qx::ModeComparison cmp = qx::fixed_vs_adaptive_report(cfg.walk, 10, jobs);
    {
      auto out = manifest.open("series_fixed.csv");
      write_series(out, cmp.fixed);
    }
    {
      auto out = manifest.open("series_adaptive.csv");
      write_series(out, cmp.adaptive);
    }
    {
      auto out = manifest.open("local_slopes.csv");
      out << "step,fixed_sigma_h,adaptive_sigma_h\n";
      const std::size_t n = std::max(cmp.fixed_local_slopes.size(), cmp.adaptive_local_slopes.size());
      auto at = [](const std::vector<double>& v, std::size_t i) {
        return i < v.size() ? cli::fmt(v[i]) : std::string("nan");
      };
      for (std::size_t i = 0; i < n; ++i)
        out << i + 1 << ',' << at(cmp.fixed_local_slopes, i) << ',' << at(cmp.adaptive_local_slopes, i) << '\n';
    }
    {
      auto out = manifest.open("mode_regressions.csv");
      out << kRegressionHeader;
      out << regression_csv_row("fixed_sigma_h", cmp.fixed_sigma_h) << regression_csv_row("fixed_sigma_qp", cmp.fixed_sigma_qp)
          << regression_csv_row("adaptive_sigma_h", cmp.adaptive_sigma_h)
          << regression_csv_row("adaptive_sigma_qp", cmp.adaptive_sigma_qp);
    }
    auto opt = [](const std::optional<int>& s) { return s ? json(*s) : json(nullptr); };
    manifest.extra()["modes"] = {{"regressed_against", "step number"},
                                 {"fixed_window", {1, 10}},
                                 {"fixed_sigma_h", regression_json(cmp.fixed_sigma_h)},
                                 {"fixed_sigma_qp", regression_json(cmp.fixed_sigma_qp)},
                                 {"adaptive_sigma_h", regression_json(cmp.adaptive_sigma_h)},
                                 {"adaptive_sigma_qp", regression_json(cmp.adaptive_sigma_qp)},
                                 {"fixed_breakdown_step", opt(cmp.fixed_breakdown)},
                                 {"adaptive_breakdown_step", opt(cmp.adaptive_breakdown)}};
  }
  manifest.write();
  return 0;
}

// --------------------------------------------------------------- reference

struct ReferenceOptions {
  std::string model;
  int d = 21;
  int steps = 9;
  double p = 0.5;
  double lambda = 0.0;
  std::optional<double> dtheta;
  double alpha = 3.0;
  int n_max = 40;
};

void write_site_distributions(cli::Manifest& manifest, const std::vector<std::vector<double>>& dists) {
  auto out = manifest.open("distributions.csv");
  out << "step,site,theta,p\n";
  for (std::size_t j = 0; j < dists.size(); ++j) {
    const int d = static_cast<int>(dists[j].size());
    for (int m = 0; m < d; ++m) {
      const int centred = m <= d / 2 ? m : m - d;
      out << j << ',' << centred << ',' << cli::fmt(2.0 * kPi * centred / d) << ',' << cli::fmt(dists[j][m]) << '\n';
    }
  }
}

// Regression of sigma_H on step number over steps 1..N.
void write_step_regression(cli::Manifest& manifest, const std::vector<double>& sigma) {
  auto out = manifest.open("sigma.csv");
  out << "step,sigma_h\n";
  for (std::size_t j = 0; j < sigma.size(); ++j) out << j << ',' << cli::fmt(sigma[j]) << '\n';
  if (sigma.size() < 4) return;
  std::vector<double> steps;
  for (std::size_t j = 1; j < sigma.size(); ++j) steps.push_back(static_cast<double>(j));
  try {
    const qx::RegressionRow row = qx::loglog_regression({"sigma_h", steps, {sigma.begin() + 1, sigma.end()}});
    auto reg = manifest.open("regression.csv");
    reg << kRegressionHeader << regression_csv_row("sigma_h", row);
    manifest.extra()["regression_vs_step"] = regression_json(row);
  } catch (const qx::RegressionError& e) {
    manifest.warn(std::string("regression: ") + e.what());
  }
}

int cmd_reference(const ReferenceOptions& o, const std::string& out_flag) {
  cli::Manifest manifest("reference", out_flag.empty() ? "out" : out_flag);
  manifest.set_config({{"model", o.model}, {"d", o.d}, {"steps", o.steps}, {"p", o.p}, {"lambda", o.lambda},
                       {"dtheta", o.dtheta ? json(*o.dtheta) : json(nullptr)}, {"alpha", o.alpha}, {"n_max", o.n_max}});
  if (o.steps < 0) throw qx::ConfigError("--steps must be non-negative");

  if (o.model == "ideal_qw" || o.model == "classical_rw") {
    if (o.d < 3) throw qx::ConfigError("--d must be at least 3");
    std::vector<std::vector<double>> dists;
    qx::SigmaSequence seq;
    if (o.model == "ideal_qw") {
      qx::CycleWalkState state = qx::cycle_initial_state(o.d, qx::symmetric_coin());
      dists.push_back(state.site_probabilities());
      for (int j = 0; j < o.steps; ++j) {
        state = qx::ideal_qw_step(state);
        dists.push_back(state.site_probabilities());
      }
      seq = qx::ideal_qw_sigma(o.d, o.steps, qx::symmetric_coin());
    } else {
      if (o.p < 0.0 || o.p > 1.0) throw qx::ConfigError("--p must lie in [0, 1]");
      dists = qx::classical_rw_dist(o.d, o.steps, o.p);
      seq = qx::classical_rw_sigma(o.d, o.steps, o.p);
    }
    if (seq.wraparound_warning) manifest.warn("N >= d/2: the walk wraps around the circle");
    write_site_distributions(manifest, dists);
    write_step_regression(manifest, seq.sigma);
  } else if (o.model == "displaced_circle") {
    const qx::FockCutoff cutoff(o.n_max);
    const double dtheta = o.dtheta.value_or(2.0 * kPi / o.d);
    const qx::DisplacedCircleWalk walk(cutoff, dtheta, o.lambda);
    qx::JointState state = qx::prepare_initial_joint({o.alpha, 0.0}, cutoff);
    std::vector<double> sigma;
    auto photon = manifest.open("photon.csv");
    photon << "step,n_bar,delta_n\n";
    const int M = 4 * o.n_max + 1;
    for (int j = 0; j <= o.steps; ++j) {
      if (j > 0) state = walk.step(state);
      const qx::CMatrix rho_w = qx::partial_trace_coin(qx::JointDensity::from_state(state));
      const qx::PhotonStats stats = qx::photon_stats(rho_w);
      photon << j << ',' << cli::fmt(stats.n_bar) << ',' << cli::fmt(stats.delta_n) << '\n';
      sigma.push_back(qx::holevo_std(qx::phase_distribution(rho_w, M)));
    }
    photon.close();
    write_step_regression(manifest, sigma);
  } else {
    throw qx::ConfigError("unknown --model '" + o.model + "' (ideal_qw, classical_rw, displaced_circle)");
  }
  manifest.write();
  return 0;
}

// -------------------------------------------------------------- tomography

struct TomographyOptions {
  std::string state = "walk";
  int step = -1;  // -1: last step of the configured walk
  int shots = 100000;
  int angles = 24;
  double n_thermal = 20.0;
  std::uint64_t seed = 1;
  std::optional<double> cutoff;
  bool no_deconvolve = false;
  double half_width = 12.0;
  int grid_points = 97;
  bool write_records = true;
};

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << cli::fmt(m(i, j));
    out << '\n';
  }
}

int cmd_tomography(const std::string& config_path, const std::string& out_flag, const TomographyOptions& o) {
  cli::RunConfig cfg = load(config_path);
  cli::Manifest manifest("tomography", output_dir(out_flag, cfg));
  manifest.set_seed(o.seed);
  manifest.set_config({{"file", tree_json(cfg.source)},
                       {"state", o.state},
                       {"step", o.step},
                       {"shots", o.shots},
                       {"angles", o.angles},
                       {"n_thermal", o.n_thermal},
                       {"cutoff", o.cutoff ? json(*o.cutoff) : json(nullptr)},
                       {"deconvolve", !o.no_deconvolve},
                       {"half_width", o.half_width},
                       {"grid_points", o.grid_points}});
  if (o.angles < 12) throw qx::ConfigError("--angles must be at least 12 to span [0, pi)");
  if (o.shots < 1) throw qx::ConfigError("--shots must be positive");
  if (o.n_thermal < 0.0) throw qx::ConfigError("--nthermal must be non-negative");
  if (o.grid_points < 3 || !(o.half_width > 0.0)) throw qx::ConfigError("invalid reconstruction grid");

  qx::CMatrix rho_w;
  const qx::FockCutoff cutoff = cfg.walk.cutoff;
  if (o.state == "walk") {
    qx::WalkConfig walk = cfg.walk;
    if (o.step >= 0) walk.n_steps = o.step;
    manifest.extra()["walk"] = walk_json(walk);
    validate(walk, manifest);
    const qx::WalkResult result = qx::run_walk(walk);
    rho_w = qx::walker_density(result.snapshots.back());
  } else if (o.state == "coherent") {
    const qx::CVector c = qx::coherent_state(cfg.walk.alpha, cutoff);
    rho_w = c * c.adjoint();
  } else if (o.state == "vacuum") {
    rho_w = qx::CMatrix::Zero(cutoff.walker_dim(), cutoff.walker_dim());
    rho_w(0, 0) = 1.0;
  } else {
    throw qx::ConfigError("unknown --state '" + o.state + "' (walk, coherent, vacuum)");
  }

  const auto records = qx::simulate_homodyne_scan(rho_w, o.angles, o.shots, o.n_thermal, o.seed);
  if (o.write_records) {
    auto out = manifest.open("records.csv");
    out << "phi,sample\n";
    for (const auto& r : records) {
      const std::string phi = cli::fmt(r.phi);
      for (double s : r.samples) out << phi << ',' << cli::fmt(s) << '\n';
    }
  }

  qx::ReconstructionOptions ropt;
  ropt.half_width = o.half_width;
  ropt.grid_points = o.grid_points;
  ropt.cutoff = o.cutoff;
  ropt.deconvolve = !o.no_deconvolve;
  const qx::ReconstructionResult rec = qx::reconstruct(records, ropt);
  for (const auto& w : rec.diagnostics.warnings) manifest.warn(w);

  const qx::WignerGrid exact = qx::wigner(rho_w, rec.wigner.x, rec.wigner.p);
  const int M = static_cast<int>(rec.phase_dist.size());
  const qx::AngularDistribution exact_phase = qx::phase_distribution(rho_w, std::max(M, 4 * cutoff.n_max() + 1));
  {
    auto out = manifest.open("wigner_axes.csv");
    out << "index,x,p\n";
    for (std::size_t i = 0; i < rec.wigner.x.size(); ++i)
      out << i << ',' << cli::fmt(rec.wigner.x[i]) << ',' << cli::fmt(rec.wigner.p[i]) << '\n';
  }
  {
    auto out = manifest.open("wigner_reconstructed.csv");
    write_matrix(out, rec.wigner.values);
  }
  {
    auto out = manifest.open("wigner_exact.csv");
    write_matrix(out, exact.values);
  }
  {
    auto out = manifest.open("phase_dist.csv");
    out << "theta,p_reconstructed\n";
    for (std::size_t k = 0; k < rec.phase_dist.size(); ++k)
      out << cli::fmt(rec.phase_dist.theta[k]) << ',' << cli::fmt(rec.phase_dist.values[k]) << '\n';
  }

  // Grid node nearest the origin.
  auto nearest = [](const std::vector<double>& g) {
    return static_cast<Eigen::Index>(std::min_element(g.begin(), g.end(),
                                                      [](double a, double b) { return std::abs(a) < std::abs(b); }) -
                                     g.begin());
  };
  const Eigen::Index i0 = nearest(rec.wigner.x), j0 = nearest(rec.wigner.p);
  const auto [px, pp] = qx::wigner_peak(rec.wigner);
  const auto [ex, ep] = qx::wigner_peak(exact);
  const double sh_rec = qx::holevo_std(rec.phase_dist);
  const double sh_exact = qx::holevo_std(exact_phase);
  const json diag = {
      {"w_origin", {{"x", rec.wigner.x[i0]}, {"p", rec.wigner.p[j0]}, {"reconstructed", rec.wigner.values(i0, j0)},
                    {"exact", exact.values(i0, j0)}}},
      {"peak", {{"reconstructed", {px, pp}}, {"exact", {ex, ep}}, {"distance", std::hypot(px - ex, pp - ep)}}},
      {"sigma_h", {{"reconstructed", std::isfinite(sh_rec) ? json(sh_rec) : json(nullptr)},
                   {"exact", std::isfinite(sh_exact) ? json(sh_exact) : json(nullptr)}}},
      {"wigner_integral", rec.wigner.integral()},
      {"max_abs_error", (rec.wigner.values - exact.values).cwiseAbs().maxCoeff()},
      {"cutoff", rec.diagnostics.cutoff},
      {"bins", rec.diagnostics.bins},
      {"bin_width", rec.diagnostics.bin_width},
      {"max_amplification", rec.diagnostics.max_amplification},
      {"negative_phase_bins", rec.diagnostics.negative_phase_bins},
  };
  {
    auto out = manifest.open("diagnostics.json");
    out << diag.dump(2) << '\n';
  }
  manifest.extra()["diagnostics"] = diag;
  manifest.write();
  return 0;
}

// ----------------------------------------------------------------- regress

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream s(line);
  std::string cell;
  while (std::getline(s, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell) {
  if (cell == "inf") return std::numeric_limits<double>::infinity();
  if (cell == "nan" || cell.empty()) return std::numeric_limits<double>::quiet_NaN();
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw qx::ConfigError("not a number: '" + cell + "'");
  }
}

struct RegressOptions {
  std::string input;
  std::string column = "sigma_h";
  std::string x_column = "t_us";
  int first = 1;
  int last = -1;
};

int cmd_regress(const RegressOptions& o, const std::string& out_flag) {
  std::ifstream in(o.input);
  if (!in) throw qx::ConfigError("cannot read " + o.input);
  std::string line;
  if (!std::getline(in, line)) throw qx::ConfigError(o.input + " is empty");
  const auto header = split_csv(line);
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw qx::ConfigError("column '" + name + "' not in " + o.input);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t cy = column(o.column), cx = column(o.x_column), cs = column("step");

  std::vector<double> steps, xs, ys;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) throw qx::ConfigError("ragged row in " + o.input + ": " + line);
    const double step = parse_cell(cells[cs]);
    if (step < o.first || (o.last >= 0 && step > o.last)) continue;
    steps.push_back(step);
    xs.push_back(parse_cell(cells[cx]));
    ys.push_back(parse_cell(cells[cy]));
  }
  const qx::RegressionRow row = qx::loglog_regression({o.column, xs, ys});
  const auto slopes = qx::local_slopes(steps, ys);
  const auto breakdown = qx::breakdown_step(steps, ys);

  std::cout << kRegressionHeader << regression_csv_row(o.column, row);
  std::cout << "breakdown_step," << (breakdown ? std::to_string(*breakdown) : "none") << '\n';

  if (!out_flag.empty()) {
    cli::Manifest manifest("regress", out_flag);
    manifest.set_config({{"input", o.input}, {"column", o.column}, {"x", o.x_column}, {"first", o.first},
                         {"last", o.last}});
    {
      auto out = manifest.open("regression.csv");
      out << kRegressionHeader << regression_csv_row(o.column, row);
    }
    {
      auto out = manifest.open("local_slopes.csv");
      out << "step,local_slope\n";
      for (std::size_t i = 0; i < steps.size(); ++i) out << cli::fmt(steps[i]) << ',' << cli::fmt(slopes[i]) << '\n';
    }
    manifest.extra()["regression"] = regression_json(row);
    manifest.extra()["breakdown_step"] = breakdown ? json(*breakdown) : json(nullptr);
    manifest.write();
  }
  return 0;
}

constexpr const char* kSchemas = R"(Output schemas (CSV, 12 significant digits; inf marks a saturated Holevo spread):
  simulate   sigma_h.csv step,t_us,sigma_h | sigma_qp.csv step,t_us,sigma_qp | nbar.csv t_us,n_bar
             steps.csv step,t_us,t_h_us,omega_d_over_2pi_MHz,n_bar_schedule,n_bar,delta_n,sigma_h,sigma_qp
             pn.csv step,n,p | phase_dist_step_{j}.csv theta,p | regression.csv (below)
  sweep      table1.csv (sigma_H) and table2.csv (sigma_QP): kappa_over_2pi_MHz,s,ds,ln_sigma0,d_ln_sigma0,r
             series_kappa_{k}.csv step,t_us,sigma_h,sigma_qp,n_bar,delta_n
             --compare-modes: series_fixed.csv, series_adaptive.csv, local_slopes.csv, mode_regressions.csv
  reference  sigma.csv step,sigma_h | distributions.csv step,site,theta,p | photon.csv step,n_bar,delta_n
  tomography records.csv phi,sample | wigner_axes.csv index,x,p | wigner_{reconstructed,exact}.csv (rows x, cols p)
             phase_dist.csv theta,p_reconstructed | diagnostics.json
  regression.csv series,s,ds,ln_sigma0,d_ln_sigma0,r,n_points,excluded
Every command finishes by writing manifest.json. Exit codes: 0 ok, 2 invalid configuration, 3 numerical failure.
)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated quantum walk of a resonator field on phase-space circles"};
  app.footer(std::string(kSchemas) + "\n" + cli::config_help());
  app.require_subcommand(1);
  int jobs = default_jobs();
  app.add_option("-j,--jobs", jobs, "Worker threads for sweeps (fallback: QUINCUNX_JOBS, then all cores)")
      ->check(CLI::PositiveNumber);

  std::string config_path, out_dir;
  auto add_common = [&](CLI::App* sub, bool with_config) {
    if (with_config) sub->add_option("config", config_path, "INI config file (reference parameters if omitted)");
    sub->add_option("-o,--output", out_dir, "Output directory (overrides [output] directory)");
  };

  auto* simulate = app.add_subcommand("simulate", "Run one walk and write per-step observables");
  add_common(simulate, true);

  auto* sweep = app.add_subcommand("sweep", "Kappa sweep with log-log regressions of sigma_H and sigma_QP");
  add_common(sweep, true);
  std::vector<double> kappas{0.0, 0.05, 0.1, 0.3, 0.5};
  bool compare_modes = false;
  sweep->add_option("-k,--kappa", kappas, "Resonator decay rates kappa/2pi in MHz")->delimiter(',');
  sweep->add_flag("--compare-modes", compare_modes, "Also compare fixed and adaptive pulses at the config rates");

  auto* reference = app.add_subcommand("reference", "Closed-form reference walks");
  add_common(reference, false);
  ReferenceOptions ref;
  reference->add_option("-m,--model", ref.model, "ideal_qw, classical_rw or displaced_circle")->required();
  reference->add_option("-d,--d", ref.d, "Circle sites");
  reference->add_option("-n,--steps", ref.steps, "Steps");
  reference->add_option("-p,--p", ref.p, "Classical step-up probability");
  reference->add_option("--lambda", ref.lambda, "Displacement strength (displaced_circle)");
  reference->add_option("--dtheta", ref.dtheta, "Rotation per step (displaced_circle; default 2 pi / d)");
  reference->add_option("--alpha", ref.alpha, "Initial coherent amplitude (displaced_circle)");
  reference->add_option("--n-max", ref.n_max, "Fock cutoff (displaced_circle)");

  auto* tomography = app.add_subcommand("tomography", "Homodyne simulation and filtered back-projection");
  add_common(tomography, true);
  TomographyOptions tom;
  bool no_records = false;
  tomography->add_option("--state", tom.state, "walk (walker after --step), coherent (config alpha) or vacuum");
  tomography->add_option("--step", tom.step, "Walk step to reconstruct (default: walk.steps)");
  tomography->add_option("--shots", tom.shots, "Samples per angle");
  tomography->add_option("--angles", tom.angles, "LO phases k pi / angles");
  tomography->add_option("--nthermal", tom.n_thermal, "Mean thermal photon number of the added noise");
  tomography->add_option("--seed", tom.seed, "Random seed");
  tomography->add_option("--cutoff", tom.cutoff, "Radon-slice frequency cutoff (default from the noise level)");
  tomography->add_flag("--no-deconvolve", tom.no_deconvolve, "Skip the Gaussian division");
  tomography->add_option("--half-width", tom.half_width, "Reconstruction square [-L, L]^2");
  tomography->add_option("--grid-points", tom.grid_points, "Grid points per axis");
  tomography->add_flag("--no-records", no_records, "Do not write records.csv");

  auto* regress = app.add_subcommand("regress", "Log-log regression of a series CSV column");
  RegressOptions reg;
  regress->add_option("input", reg.input, "CSV with a step column")->required();
  regress->add_option("-c,--column", reg.column, "Column to regress");
  regress->add_option("-x,--x", reg.x_column, "Abscissa column (t_us or step)");
  regress->add_option("--first", reg.first, "First step included");
  regress->add_option("--last", reg.last, "Last step included (default: all)");
  regress->add_option("-o,--output", out_dir, "Also write regression.csv, local_slopes.csv and a manifest here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  tom.write_records = !no_records;

  try {
    if (*simulate) return cmd_simulate(config_path, out_dir);
    if (*sweep) return cmd_sweep(config_path, out_dir, kappas, jobs, compare_modes);
    if (*reference) return cmd_reference(ref, out_dir);
    if (*tomography) return cmd_tomography(config_path, out_dir, tom);
    if (*regress) return cmd_regress(reg, out_dir);
  } catch (const qx::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const qx::DispersiveViolationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const qx::CutoffTooSmallError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
