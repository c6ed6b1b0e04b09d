#include "quincunx/observables.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "quincunx/errors.hpp"

namespace quincunx {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kClip = 1e-10;

double wrap(double angle) {
  double w = std::remainder(angle, kTwoPi);
  if (w <= -std::numbers::pi) w += kTwoPi;
  return w;
}

// Clip tiny negatives; anything below -kClip means a broken state.
void clip_probabilities(std::vector<double>& values, const char* what) {
  for (double& v : values) {
    if (v < -kClip) {
      std::ostringstream msg;
      msg << what << ": negative probability " << v;
      throw InvalidStateError(msg.str());
    }
    if (v < 0.0) v = 0.0;
  }
}

cplx expect_a(const CMatrix& rho) {
  cplx s = 0.0;
  for (int n = 1; n < rho.rows(); ++n) s += std::sqrt(static_cast<double>(n)) * rho(n, n - 1);
  return s;
}

cplx expect_a2(const CMatrix& rho) {
  cplx s = 0.0;
  for (int n = 2; n < rho.rows(); ++n) s += std::sqrt(static_cast<double>(n) * (n - 1)) * rho(n, n - 2);
  return s;
}

double expect_n(const CMatrix& rho) {
  double s = 0.0;
  for (int n = 1; n < rho.rows(); ++n) s += n * rho(n, n).real();
  return s;
}

}  // namespace

double AngularDistribution::dtheta() const { return values.empty() ? 0.0 : kTwoPi / values.size(); }

AngularDistribution phase_distribution(const CMatrix& rho_w, int M) {
  const int nw = static_cast<int>(rho_w.rows());
  const int n_max = nw - 1;
  if (M < 4 * n_max || M < 1) {
    std::ostringstream msg;
    msg << "phase grid of " << M << " points too coarse for n_max=" << n_max << " (need >= " << 4 * n_max << ")";
    throw GridError(msg.str());
  }
  // s_k = sum_m rho_{m, m+k}; P(theta) = (1/2pi)[tr + 2 Re sum_k s_k e^{ik theta}]
  std::vector<cplx> s(nw, 0.0);
  for (int k = 0; k < nw; ++k) {
    for (int m = 0; m + k < nw; ++m) s[k] += rho_w(m, m + k);
  }
  AngularDistribution dist;
  dist.theta.resize(M);
  dist.values.resize(M);
  for (int j = 0; j < M; ++j) {
    const double theta = kTwoPi * j / M;
    double v = s[0].real();
    for (int k = 1; k < nw; ++k) v += 2.0 * (s[k] * std::exp(kI * (k * theta))).real();
    dist.theta[j] = theta;
    dist.values[j] = v / kTwoPi;
  }
  clip_probabilities(dist.values, "phase_distribution");
  double total = 0.0;
  for (double v : dist.values) total += v;
  total *= dist.dtheta();
  for (double& v : dist.values) v /= total;
  return dist;
}

AngularDistribution distribution_from_sites(const std::vector<double>& probabilities) {
  AngularDistribution dist;
  const int d = static_cast<int>(probabilities.size());
  const double width = kTwoPi / d;
  for (int m = 0; m < d; ++m) {
    dist.theta.push_back(width * m);
    dist.values.push_back(probabilities[m] / width);
  }
  return dist;
}

cplx circular_moment(const AngularDistribution& dist) {
  cplx z = 0.0;
  for (std::size_t j = 0; j < dist.size(); ++j) z += dist.values[j] * std::exp(kI * dist.theta[j]);
  return z * dist.dtheta();
}

double holevo_std(const AngularDistribution& dist) {
  // Normalized by the grid mass so a single occupied site gives exactly zero.
  double mass = 0.0;
  for (double v : dist.values) mass += v;
  const double r = std::abs(circular_moment(dist)) / (mass * dist.dtheta());
  if (r < 1e-12) return std::numeric_limits<double>::infinity();
  return std::sqrt(std::max(0.0, 1.0 / (r * r) - 1.0));
}

double rms_circular_std(const AngularDistribution& dist) {
  const double mu = std::arg(circular_moment(dist));
  double acc = 0.0;
  for (std::size_t j = 0; j < dist.size(); ++j) {
    const double w = wrap(dist.theta[j] - mu);
    acc += dist.values[j] * w * w;
  }
  return std::sqrt(acc * dist.dtheta());
}

double circular_skewness(const AngularDistribution& dist) {
  const double mu = std::arg(circular_moment(dist));
  double m1 = 0.0, m2 = 0.0, m3 = 0.0;
  for (std::size_t j = 0; j < dist.size(); ++j) {
    const double w = wrap(dist.theta[j] - mu);
    m1 += dist.values[j] * w;
  }
  m1 *= dist.dtheta();
  for (std::size_t j = 0; j < dist.size(); ++j) {
    const double w = wrap(dist.theta[j] - mu) - m1;
    m2 += dist.values[j] * w * w;
    m3 += dist.values[j] * w * w * w;
  }
  m2 *= dist.dtheta();
  m3 *= dist.dtheta();
  return m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
}

std::vector<double> uniform_grid(double half_width, int points) {
  if (points < 2) throw GridError("grid needs at least 2 points");
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = -half_width + 2.0 * half_width * i / (points - 1);
  return g;
}

double default_quadrature_half_width(const CMatrix& rho_w) {
  const double n_max = static_cast<double>(rho_w.rows() - 1);
  return std::max(std::sqrt(2.0) * std::abs(expect_a(rho_w)) + 5.0, std::sqrt(2.0 * n_max + 1.0) + 5.0);
}

CMatrix rotate_phase(const CMatrix& rho_w, double phi) {
  const int nw = static_cast<int>(rho_w.rows());
  CVector u(nw);
  for (int n = 0; n < nw; ++n) u(n) = std::exp(-kI * (phi * n));
  return u.asDiagonal() * rho_w * u.conjugate().asDiagonal();
}

Eigen::VectorXd hermite_functions(int n_max, double x) {
  Eigen::VectorXd psi(n_max + 1);
  psi(0) = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
  if (n_max >= 1) psi(1) = std::sqrt(2.0) * x * psi(0);
  for (int n = 1; n < n_max; ++n) {
    psi(n + 1) = std::sqrt(2.0 / (n + 1)) * x * psi(n) - std::sqrt(static_cast<double>(n) / (n + 1)) * psi(n - 1);
  }
  return psi;
}

double quadrature_mean(const CMatrix& rho_w, double phi) {
  return std::sqrt(2.0) * (expect_a(rho_w) * std::exp(-kI * phi)).real();
}

double quadrature_std(const CMatrix& rho_w, double phi) {
  const double mean = quadrature_mean(rho_w, phi);
  const double second = (expect_a2(rho_w) * std::exp(-2.0 * kI * phi)).real() + expect_n(rho_w) + 0.5;
  return std::sqrt(std::max(0.0, second - mean * mean));
}

QuadratureDistribution quadrature_distribution(const CMatrix& rho_w, double phi, const std::vector<double>& x_grid) {
  if (x_grid.size() < 2) throw GridError("quadrature grid needs at least 2 points");
  const double need = std::sqrt(2.0) * std::abs(expect_a(rho_w)) + 5.0;
  if (x_grid.front() > -need || x_grid.back() < need) {
    std::ostringstream msg;
    msg << "quadrature grid [" << x_grid.front() << ", " << x_grid.back() << "] must span +-" << need;
    throw GridError(msg.str());
  }
  const double dx = x_grid[1] - x_grid[0];
  for (std::size_t i = 1; i < x_grid.size(); ++i) {
    if (std::abs(x_grid[i] - x_grid[i - 1] - dx) > 1e-9 * std::max(1.0, std::abs(dx))) {
      throw GridError("quadrature grid must be uniform");
    }
  }

  const CMatrix rotated = rotate_phase(rho_w, phi);
  const int n_max = static_cast<int>(rho_w.rows()) - 1;
  QuadratureDistribution q;
  q.phi = phi;
  q.x = x_grid;
  q.values.resize(x_grid.size());
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    const Eigen::VectorXcd psi = hermite_functions(n_max, x_grid[i]).cast<cplx>();
    q.values[i] = (psi.transpose() * rotated * psi).value().real();
  }
  clip_probabilities(q.values, "quadrature_distribution");

  double w = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    w += q.values[i];
    m1 += q.values[i] * x_grid[i];
  }
  q.mean = m1 / w;
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    const double dev = x_grid[i] - q.mean;
    m2 += q.values[i] * dev * dev;
  }
  q.std = std::sqrt(m2 / w);
  q.operator_mean = quadrature_mean(rho_w, phi);
  q.operator_std = quadrature_std(rho_w, phi);
  return q;
}

double WignerGrid::integral() const {
  if (x.size() < 2 || p.size() < 2) return 0.0;
  const double dx = x[1] - x[0];
  const double dp = p[1] - p[0];
  return values.sum() * dx * dp;
}

CMatrix displacement_matrix(cplx gamma, int n_max) {
  const int nw = n_max + 1;
  CMatrix D(nw, nw);
  // Column 0 is the coherent state |gamma>; D|m> = (a^dag - conj(gamma)) D|m-1> / sqrt(m)
  // only needs rows <= n_max of the previous column, so the truncation is exact.
  D(0, 0) = std::exp(-0.5 * std::norm(gamma));
  for (int n = 1; n < nw; ++n) D(n, 0) = D(n - 1, 0) * gamma / std::sqrt(static_cast<double>(n));
  const cplx gc = std::conj(gamma);
  for (int m = 1; m < nw; ++m) {
    const double inv = 1.0 / std::sqrt(static_cast<double>(m));
    D(0, m) = -gc * D(0, m - 1) * inv;
    for (int n = 1; n < nw; ++n) {
      D(n, m) = (std::sqrt(static_cast<double>(n)) * D(n - 1, m - 1) - gc * D(n, m - 1)) * inv;
    }
  }
  return D;
}

WignerGrid wigner(const CMatrix& rho_w, const std::vector<double>& x_grid, const std::vector<double>& p_grid) {
  if (x_grid.empty() || p_grid.empty()) throw GridError("wigner: empty grid");
  const int nw = static_cast<int>(rho_w.rows());
  WignerGrid w;
  w.x = x_grid;
  w.p = p_grid;
  w.values.resize(x_grid.size(), p_grid.size());
  // W = (1/pi) sum_{m,n} rho_mn (-1)^m <n|D(2 beta)|m>, from D(b) Pi D(b)^dag = D(2b) Pi.
  CMatrix rho_parity = rho_w;
  for (int m = 1; m < nw; m += 2) rho_parity.row(m) *= -1.0;
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    for (std::size_t j = 0; j < p_grid.size(); ++j) {
      const cplx beta = cplx(x_grid[i], p_grid[j]) / std::sqrt(2.0);
      const CMatrix D = displacement_matrix(2.0 * beta, nw - 1);
      // sum_{m,n} rho'_mn D_nm = sum elementwise rho' .* D^T
      w.values(i, j) = (rho_parity.cwiseProduct(D.transpose())).sum().real() / std::numbers::pi;
    }
  }
  return w;
}

PhotonStats photon_stats(const CMatrix& rho_w) {
  PhotonStats s;
  const int nw = static_cast<int>(rho_w.rows());
  s.pn.resize(nw);
  for (int n = 0; n < nw; ++n) s.pn[n] = rho_w(n, n).real();
  clip_probabilities(s.pn, "photon_stats");
  double m1 = 0.0, m2 = 0.0;
  for (int n = 0; n < nw; ++n) {
    m1 += n * s.pn[n];
    m2 += static_cast<double>(n) * n * s.pn[n];
  }
  s.n_bar = m1;
  s.delta_n = std::sqrt(std::max(0.0, m2 - m1 * m1));
  return s;
}

double analytic_delta_n(double n_bar0, double delta_theta, double lambda, int n_steps) {
  const double half = std::sin(0.5 * delta_theta);
  if (std::abs(half) < 1e-12) throw SingularityError("analytic_delta_n: sin(dtheta/2) vanishes");
  const double c = std::cos(delta_theta);
  const double base = std::sqrt(std::sqrt(n_bar0) * (1.0 + c) / 2.0);
  if (lambda == 0.0) return base;
  if (1.0 + c <= 0.0) throw SingularityError("analytic_delta_n: 1 + cos(dtheta) vanishes");
  const double N = n_steps;
  const double bracket = 2.0 + c - std::cos(N * delta_theta) + std::cos((1.0 - N) * delta_theta) / (half * half);
  return base + lambda * bracket / (2.0 * std::sqrt(2.0) * std::sqrt(1.0 + c));
}

}  // namespace quincunx
