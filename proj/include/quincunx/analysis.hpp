#pragma once

// Log-log regressions of walker spreads, kappa sweeps and the fixed versus
// adaptive pulse comparison.

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "quincunx/protocol.hpp"

namespace quincunx {

struct RegressionRow {
  double kappa = 0.0;  // rate in the config unit (f/2pi in MHz)
  double s = 0.0;
  double ds = 0.0;
  double intercept = 0.0;
  double d_intercept = 0.0;
  double r = 0.0;  // NaN when degenerate
  int n_points = 0;
  int excluded = 0;  // non-finite points left out
  bool degenerate = false;
};

struct SigmaSeries {
  std::string label;  // "sigma_H" or "sigma_QP"
  std::vector<double> times;
  std::vector<double> values;
};

// OLS of ln(value) on ln(time) with (n-2)-dof standard errors. Non-finite
// values (the saturated Holevo marker) are dropped and counted. Throws
// RegressionError for fewer than 3 usable points or non-positive data.
RegressionRow loglog_regression(const SigmaSeries& series);

// Restrict a series to entries first..last (0-based, inclusive).
SigmaSeries window(const SigmaSeries& series, std::size_t first, std::size_t last);

// Per-step walker observables of one run.
struct StepObservables {
  std::vector<double> times;
  std::vector<double> sigma_h;
  std::vector<double> sigma_qp;  // quadrature std at phi = 0 in the walker frame
  std::vector<double> n_bar;
  std::vector<double> delta_n;
};

// Phase grid of 4 n_max + 1 points unless given.
StepObservables step_observables(const std::vector<Snapshot>& snapshots, FockCutoff cutoff, int phase_points = 0);

// Resonator state in its own rotating frame, where phi = 0 is in phase with the
// walker at t = 0.
CMatrix walker_density(const Snapshot& snapshot);

struct KappaRun {
  double kappa = 0.0;
  StepObservables observables;
  RegressionRow sigma_h;
  RegressionRow sigma_qp;
  std::optional<std::string> error;
};

struct SweepResult {
  std::vector<KappaRun> runs;  // sorted by kappa
  std::vector<std::string> warnings;

  std::vector<RegressionRow> table(bool qp) const;
};

// One walk per kappa (config units f/2pi MHz, converted like every rate), the
// closed-system photon trajectory shared by all. Steps 1..N are regressed on
// cumulative time. Failures are recorded per kappa. Duplicate kappas are
// dropped with a warning. Runs use up to `jobs` threads.
SweepResult sweep_kappa(const WalkConfig& config, std::vector<double> kappas, int jobs = 1);

// Slope of the 4-point log-log fit ending at each step (NaN for the first 3).
std::vector<double> local_slopes(const std::vector<double>& steps, const std::vector<double>& sigma, int width = 4);

// First step whose local slope drops below `threshold`, or nullopt.
std::optional<int> breakdown_step(const std::vector<double>& steps, const std::vector<double>& sigma,
                                  double threshold = 0.7, int width = 4);

struct ModeComparison {
  StepObservables fixed;
  StepObservables adaptive;
  RegressionRow fixed_sigma_h;  // steps 1..10 against N
  RegressionRow fixed_sigma_qp;
  RegressionRow adaptive_sigma_h;  // steps 1..N against N
  RegressionRow adaptive_sigma_qp;
  std::vector<double> fixed_local_slopes;  // sigma_H
  std::vector<double> adaptive_local_slopes;
  std::optional<int> fixed_breakdown;
  std::optional<int> adaptive_breakdown;
};

ModeComparison fixed_vs_adaptive_report(const WalkConfig& config, int fixed_window = 10, int jobs = 1);

// kappa_over_2pi_MHz,s,ds,ln_sigma0,d_ln_sigma0,r with 12 significant digits.
void write_regression_table(std::ostream& out, const std::vector<RegressionRow>& rows);

}  // namespace quincunx
