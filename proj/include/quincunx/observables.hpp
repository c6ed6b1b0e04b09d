#pragma once

// Walker observables computed from the reduced resonator density matrix.
//
// Quadratures use a = (x + i p)/sqrt(2), [x, p] = i, so the vacuum has
// variance 1/2. The rotated quadrature is x_phi = x cos(phi) + p sin(phi).

#include <vector>

#include "quincunx/hilbert.hpp"

namespace quincunx {

struct AngularDistribution {
  std::vector<double> theta;   // M points on [0, 2 pi)
  std::vector<double> values;  // density, sum(values) * dtheta = 1

  double dtheta() const;
  std::size_t size() const { return values.size(); }
};

// P(theta) = (1/2pi) sum_{m,n} exp(i(n-m)theta) rho_mn on M equally spaced
// points. Requires M >= 4 n_max (GridError otherwise).
AngularDistribution phase_distribution(const CMatrix& rho_w, int M);

// Density built from site probabilities on a d-point grid (reference walks).
AngularDistribution distribution_from_sites(const std::vector<double>& probabilities);

// Grid estimate of <exp(i theta)>.
cplx circular_moment(const AngularDistribution& dist);

// sqrt(|<e^{i theta}>|^-2 - 1); +infinity when |<e^{i theta}>| < 1e-12.
double holevo_std(const AngularDistribution& dist);

// Root mean square of the wrapped deviation from the circular mean.
double rms_circular_std(const AngularDistribution& dist);

// Third standardized moment of the wrapped deviation from the circular mean.
double circular_skewness(const AngularDistribution& dist);

struct QuadratureDistribution {
  double phi = 0.0;
  std::vector<double> x;
  std::vector<double> values;
  double mean = 0.0;  // grid moments
  double std = 0.0;
  double operator_mean = 0.0;  // <x_phi>, <x_phi^2> from the density matrix
  double operator_std = 0.0;
};

// Uniform grid of `points` on [-half_width, half_width].
std::vector<double> uniform_grid(double half_width, int points);

// Half-width covering the coherent excursion and the highest retained Fock
// function: max(sqrt(2)|<a>| + 5, sqrt(2 n_max + 1) + 5).
double default_quadrature_half_width(const CMatrix& rho_w);

// Hermite-function expansion of rho_w rotated by exp(-i phi n). The grid must
// be uniform and span at least +-(sqrt(2)|<a>| + 5) (GridError otherwise).
QuadratureDistribution quadrature_distribution(const CMatrix& rho_w, double phi, const std::vector<double>& x_grid);

// <x_phi> and sqrt(<x_phi^2> - <x_phi>^2) from the density matrix, exact for
// states supported on the truncated space.
double quadrature_mean(const CMatrix& rho_w, double phi);
double quadrature_std(const CMatrix& rho_w, double phi);

// rho -> exp(-i phi n) rho exp(i phi n)
CMatrix rotate_phase(const CMatrix& rho_w, double phi);

// Normalized Hermite functions psi_0..psi_{n_max} at x.
Eigen::VectorXd hermite_functions(int n_max, double x);

struct WignerGrid {
  std::vector<double> x;
  std::vector<double> p;
  Eigen::MatrixXd values;  // values(i, j) = W(x[i], p[j])

  double integral() const;  // rectangle rule on the (uniform) grids
};

// W(x, p) = (1/pi) Tr[rho D(beta) Pi D(beta)^dag], beta = (x + i p)/sqrt(2).
WignerGrid wigner(const CMatrix& rho_w, const std::vector<double>& x_grid, const std::vector<double>& p_grid);

// <n|D(gamma)|m> for n, m <= n_max.
CMatrix displacement_matrix(cplx gamma, int n_max);

struct PhotonStats {
  double n_bar = 0.0;
  double delta_n = 0.0;
  std::vector<double> pn;  // P(n) = <n|rho_w|n>
};

PhotonStats photon_stats(const CMatrix& rho_w);

// Predicted photon-number spread after N steps of the displaced-circle walk,
//   sqrt(sqrt(n0)(1 + cos dth)/2)
//     + lambda [2 + cos dth - cos(N dth) + cos((1-N) dth) / sin^2(dth/2)] / (2 sqrt(2) sqrt(1 + cos dth)).
// Throws SingularityError when sin(dth/2) vanishes.
double analytic_delta_n(double n_bar0, double delta_theta, double lambda, int n_steps);

}  // namespace quincunx
