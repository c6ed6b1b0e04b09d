#pragma once

// Quantum-walk pulse program: photon-number pre-simulation, per-step Hadamard
// durations and drive frequencies, configuration checks and walk execution.

#include <optional>
#include <string>
#include <vector>

#include "quincunx/dynamics.hpp"

namespace quincunx {

enum class PulseMode {
  Adaptive,       // t_H and omega_d follow n_bar_j
  Fixed,          // t_H^(0) and omega_d(n_bar_0) every step
  FrequencyOnly,  // t_H^(0) every step, omega_d follows n_bar_j
};

std::string to_string(PulseMode mode);
PulseMode parse_pulse_mode(const std::string& name);

struct WalkConfig {
  cplx alpha{3.0, 0.0};
  int d = 21;
  int n_steps = 15;
  std::optional<double> tau;  // free evolution per step (us); default from d
  PulseMode pulse_mode = PulseMode::Adaptive;
  SystemParams params = SystemParams::reference();
  DecoherenceRates rates;
  FockCutoff cutoff{40};
  StepControl step;

  double n_bar0() const { return std::norm(alpha); }
};

enum class Severity { Error, Warning };

struct BoundCheck {
  std::string name;
  bool passed = true;
  Severity severity = Severity::Error;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  // Distance to the nearest violated or binding bound; negative if violated.
  double margin = 0.0;
  std::string message;
};

struct ValidationReport {
  std::vector<BoundCheck> checks;

  bool has_errors() const;
  bool has_warnings() const;
  std::string to_string() const;
};

// Checks n_bar0 + sqrt(n_bar0) < d < 2 pi sqrt(n_bar0), N < 2 pi sqrt(n_bar0),
// n_bar0 < n_crit, the dispersive ratio, dtheta sqrt(n_bar0) > 1 and tau > 0.
// The upper d bound is a warning only: the reference configuration (alpha=3,
// d=21) violates it.
ValidationReport validate_config(const WalkConfig& config);

// t_H = pi [Delta + 2(n_bar+1) chi - 2 g eps/Delta] / (4 g eps).
double hadamard_duration(double n_bar, const SystemParams& params);

// omega_d = 2 n_bar chi - 2 g eps / Delta + omega_a.
double drive_frequency(double n_bar, const SystemParams& params);

// dtheta = chi (tau + t_H).
double step_angle(double t_h, double tau, const SystemParams& params);

// tau solving step_angle(t_H^(0), tau) = 2 pi / d. May be non-positive for
// pathological parameters; validate_config reports that.
double default_tau(int d, double n_bar0, const SystemParams& params);

double resolved_tau(const WalkConfig& config);

struct PhotonTrajectory {
  std::vector<double> t;      // dense sample times (us)
  std::vector<double> n_bar;  // Tr(n rho_w) at those times
  std::vector<double> n_bar_steps;  // time average over each step window
};

// Closed-system run with t_H^(0) and omega_d(n_bar0) on every pulse, sampled
// at >= 50 points per step window; n_bar_j by trapezoidal quadrature.
PhotonTrajectory precompute_photon_trajectory(const WalkConfig& config);

// Time average of a sampled curve over [t0, t1] by trapezoidal quadrature.
double window_average(const std::vector<double>& t, const std::vector<double>& y, double t0, double t1);

struct PulseStep {
  double t_h = 0.0;
  double omega_d = 0.0;
  double tau = 0.0;
};

struct PulseSchedule {
  std::vector<PulseStep> steps;
  std::vector<double> n_bar_sequence;

  std::vector<DriveSegment> segments() const;
  double total_duration() const;
};

// Requires a photon trajectory for the adaptive and frequency-only modes; it
// is computed when not supplied.
PulseSchedule build_schedule(const WalkConfig& config, const PhotonTrajectory* trajectory = nullptr);

struct WalkResult {
  PulseSchedule schedule;
  std::vector<Snapshot> snapshots;  // initial plus one after each free segment
  EvolveDiagnostics diagnostics;
};

WalkResult run_walk(const WalkConfig& config, const PhotonTrajectory* trajectory = nullptr,
                    const DenseObserver& observer = {});

}  // namespace quincunx
