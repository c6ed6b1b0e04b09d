#pragma once

// Simulated homodyne readout with additive Gaussian amplifier noise, and
// filtered back-projection of the quadrature histograms with a Gaussian
// deconvolution in the Radon-slice frequency domain.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "quincunx/observables.hpp"

namespace quincunx {

struct HomodyneRecord {
  double phi = 0.0;
  std::vector<double> samples;
  double n_thermal = 0.0;  // the added noise has variance n_thermal
};

// Draws from P_phi(x) (inverse CDF on a fine grid) plus zero-mean Gaussian
// noise of variance n_thermal. Vacuum gives total variance 1/2 + n_thermal.
// Deterministic for a given seed.
HomodyneRecord simulate_homodyne(const CMatrix& rho_w, double phi, int shots, double n_thermal, std::uint64_t seed);

// `angles` LO phases k pi / angles, each with its own seed derived from `seed`.
std::vector<HomodyneRecord> simulate_homodyne_scan(const CMatrix& rho_w, int angles, int shots, double n_thermal,
                                                   std::uint64_t seed);

struct ReconstructionOptions {
  double half_width = 12.0;  // reconstruction square [-L, L]^2 in x and p
  int grid_points = 97;
  // Highest Radon-slice frequency kept. Default: where
  // exp(-(n_th + 1/2) k^2 / 2) reaches 1e-2.
  std::optional<double> cutoff;
  bool deconvolve = true;
  int phase_points = 0;  // phase distribution grid; default 4 * 40 + 1
};

struct ReconstructionDiagnostics {
  int angles = 0;
  int bins = 0;
  double bin_width = 0.0;
  double cutoff = 0.0;
  double max_amplification = 1.0;
  int negative_phase_bins = 0;
  std::vector<std::string> warnings;
};

struct ReconstructionResult {
  WignerGrid wigner;
  AngularDistribution phase_dist;
  ReconstructionDiagnostics diagnostics;
};

// Requires >= 12 distinct angles spanning [0, pi) (TomographyError otherwise).
ReconstructionResult reconstruct(const std::vector<HomodyneRecord>& records, const ReconstructionOptions& options = {});

// Freedman-Diaconis bin count for the samples over a range, at least 64.
int freedman_diaconis_bins(const std::vector<double>& samples, double range);

// P(theta) = int_0^inf W(r cos theta, r sin theta) r dr by bilinear
// interpolation. Negative bins are kept (clipping them biases the spread
// upward) and counted.
AngularDistribution angular_marginal(const WignerGrid& w, int points, int* negative_bins = nullptr);

// Location of the maximum of a Wigner grid.
std::pair<double, double> wigner_peak(const WignerGrid& w);

}  // namespace quincunx
