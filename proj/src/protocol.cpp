#include "quincunx/protocol.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "quincunx/errors.hpp"

namespace quincunx {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kSamplesPerSegment = 50;

BoundCheck make_check(std::string name, Severity severity, double value, double lower, double upper) {
  BoundCheck c;
  c.name = std::move(name);
  c.severity = severity;
  c.value = value;
  c.lower = lower;
  c.upper = upper;
  c.margin = std::min(value - lower, upper - value);
  c.passed = c.margin > 0.0;
  return c;
}

}  // namespace

std::string to_string(PulseMode mode) {
  switch (mode) {
    case PulseMode::Adaptive:
      return "adaptive";
    case PulseMode::Fixed:
      return "fixed";
    case PulseMode::FrequencyOnly:
      return "frequency";
  }
  return "unknown";
}

PulseMode parse_pulse_mode(const std::string& name) {
  if (name == "adaptive") return PulseMode::Adaptive;
  if (name == "fixed") return PulseMode::Fixed;
  if (name == "frequency" || name == "frequency_only") return PulseMode::FrequencyOnly;
  throw ConfigError("unknown pulse_mode '" + name + "' (expected adaptive, fixed or frequency)");
}

bool ValidationReport::has_errors() const {
  for (const auto& c : checks) {
    if (!c.passed && c.severity == Severity::Error) return true;
  }
  return false;
}

bool ValidationReport::has_warnings() const {
  for (const auto& c : checks) {
    if (!c.passed && c.severity == Severity::Warning) return true;
  }
  return false;
}

std::string ValidationReport::to_string() const {
  std::ostringstream out;
  out.precision(6);
  for (const auto& c : checks) {
    const char* status = c.passed ? "ok" : (c.severity == Severity::Error ? "ERROR" : "warning");
    out << status << ": " << c.name << " value=" << c.value << " bounds=(" << c.lower << ", " << c.upper
        << ") margin=" << c.margin;
    if (!c.message.empty()) out << " -- " << c.message;
    out << '\n';
  }
  return out.str();
}

ValidationReport validate_config(const WalkConfig& config) {
  ValidationReport report;
  const double n0 = config.n_bar0();
  const double root = std::sqrt(n0);
  const double inf = std::numeric_limits<double>::infinity();

  {
    BoundCheck lo = make_check("d lower bound n0+sqrt(n0) < d", Severity::Error, config.d, n0 + root, inf);
    if (!lo.passed) lo.message = "too few circle sites for the initial photon-number spread";
    report.checks.push_back(lo);
    BoundCheck hi = make_check("d upper bound d < 2pi sqrt(n0)", Severity::Warning, config.d, -inf, kTwoPi * root);
    if (!hi.passed) hi.message = "sites closer than the phase resolution of the initial state";
    report.checks.push_back(hi);
  }
  {
    BoundCheck c = make_check("step count N < 2pi sqrt(n0)", Severity::Error, config.n_steps, -inf, kTwoPi * root);
    if (!c.passed) c.message = "walk longer than the phase resolution allows";
    report.checks.push_back(c);
  }
  {
    BoundCheck c = make_check("n0 < n_crit", Severity::Error, n0, -inf, config.params.n_crit());
    if (!c.passed) c.message = "initial photon number beyond the dispersive critical photon number";
    report.checks.push_back(c);
  }
  {
    const double ratio = std::abs(config.params.delta()) / config.params.g;
    BoundCheck c = make_check("dispersive ratio |Delta|/g >= 10", Severity::Error, ratio, 10.0, inf);
    c.passed = ratio >= 10.0;
    if (c.passed && ratio < 20.0) {
      c.severity = Severity::Warning;
      c.passed = false;
      c.message = "weakly dispersive (|Delta|/g < 20)";
    }
    report.checks.push_back(c);
  }
  const double tau = resolved_tau(config);
  {
    BoundCheck c = make_check("tau > 0", Severity::Error, tau, 0.0, inf);
    if (!c.passed) c.message = "free evolution time must be positive";
    report.checks.push_back(c);
  }
  {
    const double dtheta = step_angle(hadamard_duration(n0, config.params), tau, config.params);
    BoundCheck c = make_check("dtheta sqrt(n0) > 1", Severity::Warning, dtheta * root, 1.0, inf);
    if (!c.passed) c.message = "step angle not resolved by the photon-number spread";
    report.checks.push_back(c);
  }
  return report;
}

double hadamard_duration(double n_bar, const SystemParams& params) {
  if (n_bar < 0.0) throw DurationError("hadamard_duration: n_bar must be non-negative");
  const double delta = params.delta();
  const double ge = params.g * params.epsilon;
  if (ge == 0.0) throw DurationError("hadamard_duration: g * epsilon is zero");
  const double t = std::numbers::pi * (delta + 2.0 * (n_bar + 1.0) * params.chi() - 2.0 * ge / delta) / (4.0 * ge);
  if (!(t > 0.0)) {
    std::ostringstream msg;
    msg << "hadamard_duration: non-positive pulse duration " << t << " us";
    throw DurationError(msg.str());
  }
  return t;
}

double drive_frequency(double n_bar, const SystemParams& params) {
  if (params.g == 0.0) return params.omega_a;
  return 2.0 * n_bar * params.chi() - 2.0 * params.g * params.epsilon / params.delta() + params.omega_a;
}

double step_angle(double t_h, double tau, const SystemParams& params) {
  if (params.g == 0.0) return 0.0;
  return params.chi() * (tau + t_h);
}

double default_tau(int d, double n_bar0, const SystemParams& params) {
  return (kTwoPi / d) / params.chi() - hadamard_duration(n_bar0, params);
}

double resolved_tau(const WalkConfig& config) {
  return config.tau ? *config.tau : default_tau(config.d, config.n_bar0(), config.params);
}

double window_average(const std::vector<double>& t, const std::vector<double>& y, double t0, double t1) {
  const double eps = 1e-12 * std::max(1.0, std::abs(t1));
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    if (t[i] >= t0 - eps && t[i + 1] <= t1 + eps) acc += 0.5 * (y[i] + y[i + 1]) * (t[i + 1] - t[i]);
  }
  return acc / (t1 - t0);
}

PhotonTrajectory precompute_photon_trajectory(const WalkConfig& config) {
  PhotonTrajectory out;
  const double n0 = config.n_bar0();
  if (config.n_steps <= 0) return out;
  const double t_h0 = hadamard_duration(n0, config.params);
  const double w0 = drive_frequency(n0, config.params);
  const double tau = resolved_tau(config);
  std::vector<DriveSegment> segments;
  for (int j = 0; j < config.n_steps; ++j) {
    segments.push_back({t_h0, true, w0});
    segments.push_back({tau, false, w0});
  }
  StepControl control = config.step;
  control.dense_samples_per_segment = std::max(control.dense_samples_per_segment, kSamplesPerSegment);
  const FockCutoff cutoff = config.cutoff;
  const int nw = cutoff.walker_dim();
  auto observer = [&](double t, const CMatrix& rho) {
    double n = 0.0;
    for (int c = 0; c < 2; ++c) {
      for (int k = 0; k < nw; ++k) n += k * rho(cutoff.index(c, k), cutoff.index(c, k)).real();
    }
    out.t.push_back(t);
    out.n_bar.push_back(n);
  };
  const OperatorSet ops(cutoff);
  evolve(prepare_initial_joint(config.alpha, cutoff), segments, config.params, DecoherenceRates{}, ops, control,
         observer);
  const double period = t_h0 + tau;
  for (int j = 0; j < config.n_steps; ++j) {
    out.n_bar_steps.push_back(window_average(out.t, out.n_bar, j * period, (j + 1) * period));
  }
  return out;
}

std::vector<DriveSegment> PulseSchedule::segments() const {
  std::vector<DriveSegment> out;
  out.reserve(2 * steps.size());
  for (const auto& s : steps) {
    out.push_back({s.t_h, true, s.omega_d});
    out.push_back({s.tau, false, s.omega_d});
  }
  return out;
}

double PulseSchedule::total_duration() const {
  double total = 0.0;
  for (const auto& s : steps) total += s.t_h + s.tau;
  return total;
}

PulseSchedule build_schedule(const WalkConfig& config, const PhotonTrajectory* trajectory) {
  PulseSchedule schedule;
  if (config.n_steps <= 0) return schedule;
  const double n0 = config.n_bar0();
  const double tau = resolved_tau(config);
  if (!(tau > 0.0)) throw DurationError("free evolution time tau must be positive");

  PhotonTrajectory computed;
  if (config.pulse_mode != PulseMode::Fixed && trajectory == nullptr) {
    computed = precompute_photon_trajectory(config);
    trajectory = &computed;
  }
  for (int j = 0; j < config.n_steps; ++j) {
    double n_j = n0;
    if (config.pulse_mode != PulseMode::Fixed) {
      if (static_cast<int>(trajectory->n_bar_steps.size()) < config.n_steps) {
        throw ConfigError("photon trajectory has fewer step averages than n_steps");
      }
      n_j = trajectory->n_bar_steps[j];
    }
    PulseStep step;
    step.t_h = config.pulse_mode == PulseMode::Adaptive ? hadamard_duration(n_j, config.params)
                                                        : hadamard_duration(n0, config.params);
    step.omega_d = drive_frequency(n_j, config.params);
    step.tau = tau;
    schedule.steps.push_back(step);
    schedule.n_bar_sequence.push_back(n_j);
  }
  return schedule;
}

WalkResult run_walk(const WalkConfig& config, const PhotonTrajectory* trajectory, const DenseObserver& observer) {
  WalkResult result;
  result.schedule = build_schedule(config, trajectory);
  const OperatorSet ops(config.cutoff);
  const JointState psi0 = prepare_initial_joint(config.alpha, config.cutoff);
  if (result.schedule.steps.empty()) {
    result.snapshots.push_back({0.0, JointDensity::from_state(psi0), {}});
    return result;
  }
  const Trajectory traj =
      evolve(psi0, result.schedule.segments(), config.params, config.rates, ops, config.step, observer);
  // Segment snapshots alternate pulse / free; keep the initial state and the
  // end of every free segment.
  for (std::size_t i = 0; i < traj.snapshots.size(); i += 2) result.snapshots.push_back(traj.snapshots[i]);
  result.diagnostics = traj.diagnostics;
  return result;
}

}  // namespace quincunx
