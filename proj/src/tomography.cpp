#include "quincunx/tomography.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "quincunx/errors.hpp"

namespace quincunx {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMinAngles = 12;
constexpr int kSamplingPoints = 4001;

double quantile(std::vector<double> v, double q) {
  const std::size_t k = static_cast<std::size_t>(q * (v.size() - 1));
  std::nth_element(v.begin(), v.begin() + k, v.end());
  return v[k];
}

double interpolate(const std::vector<double>& y, double s0, double ds, double s) {
  const double pos = (s - s0) / ds;
  if (pos < 0.0 || pos > static_cast<double>(y.size() - 1)) return 0.0;
  const std::size_t i = std::min(static_cast<std::size_t>(pos), y.size() - 2);
  const double f = pos - i;
  return (1.0 - f) * y[i] + f * y[i + 1];
}

double bilinear(const WignerGrid& w, double x, double p) {
  const double dx = w.x[1] - w.x[0];
  const double dp = w.p[1] - w.p[0];
  const double fx = (x - w.x.front()) / dx;
  const double fp = (p - w.p.front()) / dp;
  const int nx = static_cast<int>(w.x.size());
  const int np = static_cast<int>(w.p.size());
  if (fx < 0.0 || fp < 0.0 || fx > nx - 1 || fp > np - 1) return 0.0;
  const int i = std::min(static_cast<int>(fx), nx - 2);
  const int j = std::min(static_cast<int>(fp), np - 2);
  const double a = fx - i;
  const double b = fp - j;
  return (1 - a) * (1 - b) * w.values(i, j) + a * (1 - b) * w.values(i + 1, j) + (1 - a) * b * w.values(i, j + 1) +
         a * b * w.values(i + 1, j + 1);
}

// Vertex of the parabola through three equally spaced samples, as an offset in
// units of the spacing.
double parabolic_offset(double left, double mid, double right) {
  const double denom = left - 2.0 * mid + right;
  if (denom >= 0.0) return 0.0;
  return std::clamp(0.5 * (left - right) / denom, -0.5, 0.5);
}

}  // namespace

HomodyneRecord simulate_homodyne(const CMatrix& rho_w, double phi, int shots, double n_thermal, std::uint64_t seed) {
  if (shots < 1) throw ConfigError("simulate_homodyne: shots must be >= 1");
  if (n_thermal < 0.0) throw ConfigError("simulate_homodyne: n_thermal must be >= 0");
  const auto grid = uniform_grid(default_quadrature_half_width(rho_w), kSamplingPoints);
  const QuadratureDistribution q = quadrature_distribution(rho_w, phi, grid);

  std::vector<double> cdf(grid.size(), 0.0);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    cdf[i] = cdf[i - 1] + 0.5 * (q.values[i] + q.values[i - 1]) * (grid[i] - grid[i - 1]);
  }
  const double total = cdf.back();
  for (double& c : cdf) c /= total;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, std::sqrt(n_thermal));
  HomodyneRecord record;
  record.phi = phi;
  record.n_thermal = n_thermal;
  record.samples.reserve(shots);
  for (int i = 0; i < shots; ++i) {
    const double u = uniform(rng);
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t k = std::clamp<std::size_t>(it - cdf.begin(), 1, cdf.size() - 1);
    const double span = cdf[k] - cdf[k - 1];
    const double f = span > 0.0 ? (u - cdf[k - 1]) / span : 0.5;
    double x = grid[k - 1] + f * (grid[k] - grid[k - 1]);
    if (n_thermal > 0.0) x += noise(rng);
    record.samples.push_back(x);
  }
  return record;
}

std::vector<HomodyneRecord> simulate_homodyne_scan(const CMatrix& rho_w, int angles, int shots, double n_thermal,
                                                   std::uint64_t seed) {
  std::vector<HomodyneRecord> records;
  std::seed_seq seq{seed};
  std::vector<std::uint64_t> seeds(angles);
  seq.generate(seeds.begin(), seeds.end());
  for (int k = 0; k < angles; ++k) {
    records.push_back(simulate_homodyne(rho_w, kPi * k / angles, shots, n_thermal, seeds[k]));
  }
  return records;
}

int freedman_diaconis_bins(const std::vector<double>& samples, double range) {
  if (samples.size() < 4) return 64;
  const double iqr = quantile(samples, 0.75) - quantile(samples, 0.25);
  if (!(iqr > 0.0)) return 64;
  const double h = 2.0 * iqr / std::cbrt(static_cast<double>(samples.size()));
  return std::max(64, static_cast<int>(std::ceil(range / h)));
}

ReconstructionResult reconstruct(const std::vector<HomodyneRecord>& records, const ReconstructionOptions& options) {
  // Angles folded into [0, pi); a record at phi + pi is the mirrored projection.
  std::vector<double> angles;
  for (const auto& r : records) angles.push_back(std::fmod(std::fmod(r.phi, kPi) + kPi, kPi));
  std::vector<double> distinct = angles;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                 distinct.end());
  if (static_cast<int>(distinct.size()) < kMinAngles) {
    std::ostringstream msg;
    msg << "tomography needs at least " << kMinAngles << " distinct LO phases in [0, pi), got " << distinct.size();
    throw TomographyError(msg.str());
  }
  if (options.grid_points < 2 || !(options.half_width > 0.0)) throw GridError("invalid reconstruction grid");

  ReconstructionResult result;
  auto& diag = result.diagnostics;
  diag.angles = static_cast<int>(distinct.size());

  // Common projection axis covering the reconstruction square and all samples.
  double reach = options.half_width * std::sqrt(2.0);
  for (const auto& r : records) {
    for (double s : r.samples) reach = std::max(reach, std::abs(s));
  }
  reach *= 1.0001;
  int bins = 64;
  for (const auto& r : records) bins = std::max(bins, freedman_diaconis_bins(r.samples, 2.0 * reach));
  const double ds = 2.0 * reach / bins;
  const double s0 = -reach + 0.5 * ds;  // first bin centre
  diag.bins = bins;
  diag.bin_width = ds;

  int fft_size = 1;
  while (fft_size < 2 * bins) fft_size *= 2;
  const double dk = 2.0 * kPi / (fft_size * ds);
  const double nyquist = kPi / ds;

  double sigma2 = 0.0;
  for (const auto& r : records) sigma2 = std::max(sigma2, r.n_thermal);
  // Default cutoff: where the quadrature kernel of a thermal state,
  // exp(-(n_th + 1/2) k^2 / 2), falls to 1e-2. Beyond it the histograms carry
  // mostly shot noise even without added amplifier noise.
  double cutoff = nyquist;
  if (options.cutoff) {
    cutoff = std::min(*options.cutoff, nyquist);
  } else {
    cutoff = std::min(nyquist, std::sqrt(2.0 * std::log(100.0) / (sigma2 + 0.5)));
  }
  diag.cutoff = cutoff;

  // Back-projection weights: half the angular gap to each neighbour on the
  // pi-periodic circle of projections.
  std::vector<double> weight(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    double before = kPi, after = kPi;
    for (std::size_t j = 0; j < records.size(); ++j) {
      if (std::abs(angles[j] - angles[i]) < 1e-12) continue;
      const double fwd = std::fmod(angles[j] - angles[i] + 2.0 * kPi, kPi);
      after = std::min(after, fwd);
      before = std::min(before, kPi - fwd);
    }
    // Repeated angles share their slot.
    int copies = 0;
    for (std::size_t j = 0; j < records.size(); ++j) copies += std::abs(angles[j] - angles[i]) < 1e-12;
    weight[i] = 0.5 * (before + after) / copies;
  }

  const int n_grid = options.grid_points;
  WignerGrid& w = result.wigner;
  w.x = uniform_grid(options.half_width, n_grid);
  w.p = w.x;
  w.values = Eigen::MatrixXd::Zero(n_grid, n_grid);

  Eigen::FFT<double> fft;
  // Band-limited ramp |k|: the spatial Ram-Lak kernel h_0 = pi/(2 ds^2),
  // h_n = -2/(pi n^2 ds^2) for odd n. Sampling |k| directly in frequency
  // would drop the DC contribution of the ramp and bias the reconstruction.
  std::vector<cplx> ramp;
  {
    std::vector<double> kernel(fft_size, 0.0);
    kernel[0] = kPi / (2.0 * ds * ds);
    for (int n = 1; n < fft_size / 2; n += 2) {
      const double v = -2.0 / (kPi * n * n * ds * ds);
      kernel[n] = v;
      kernel[fft_size - n] = v;
    }
    fft.fwd(ramp, kernel);
  }
  std::vector<cplx> spectrum(fft_size);
  std::vector<double> padded(fft_size), filtered(fft_size);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    std::fill(padded.begin(), padded.end(), 0.0);
    for (double s : rec.samples) {
      const int b = static_cast<int>(std::floor((s + reach) / ds));
      if (b >= 0 && b < bins) padded[b] += 1.0;
    }
    const double norm = 1.0 / (rec.samples.size() * ds);
    for (int b = 0; b < bins; ++b) padded[b] *= norm;

    fft.fwd(spectrum, padded);
    for (int j = 0; j < fft_size; ++j) {
      const double k = dk * (j <= fft_size / 2 ? j : j - fft_size);
      double f = std::abs(k) <= cutoff ? ramp[j].real() * ds : 0.0;
      if (f != 0.0 && options.deconvolve && rec.n_thermal > 0.0) {
        const double gain = std::exp(0.5 * rec.n_thermal * k * k);
        diag.max_amplification = std::max(diag.max_amplification, gain);
        f *= gain;
      }
      spectrum[j] *= f;
    }
    fft.inv(filtered, spectrum);
    filtered.resize(bins);

    const double c = std::cos(rec.phi), sn = std::sin(rec.phi);
    const double scale = weight[i] / (2.0 * kPi);
    for (int a = 0; a < n_grid; ++a) {
      for (int b = 0; b < n_grid; ++b) {
        w.values(a, b) += scale * interpolate(filtered, s0, ds, w.x[a] * c + w.p[b] * sn);
      }
    }
    filtered.resize(fft_size);
  }
  if (diag.max_amplification > 1e3) {
    std::ostringstream msg;
    msg << "ill-conditioned deconvolution: amplification " << diag.max_amplification << " exceeds 1e3";
    diag.warnings.push_back(msg.str());
  }

  const int points = options.phase_points > 0 ? options.phase_points : 4 * 40 + 1;
  result.phase_dist = angular_marginal(w, points, &diag.negative_phase_bins);
  return result;
}

AngularDistribution angular_marginal(const WignerGrid& w, int points, int* negative_bins) {
  if (w.x.size() < 2 || w.p.size() < 2) throw GridError("angular_marginal: grid too small");
  const double radius = std::min({-w.x.front(), w.x.back(), -w.p.front(), w.p.back()});
  const double dr = 0.25 * (w.x[1] - w.x[0]);
  const int nr = static_cast<int>(radius / dr);
  AngularDistribution dist;
  for (int j = 0; j < points; ++j) {
    const double theta = 2.0 * kPi * j / points;
    const double c = std::cos(theta), s = std::sin(theta);
    double acc = 0.0;
    for (int k = 0; k <= nr; ++k) {
      const double r = k * dr;
      const double wt = (k == 0 || k == nr) ? 0.5 : 1.0;
      acc += wt * r * bilinear(w, r * c, r * s);
    }
    acc *= dr;
    dist.theta.push_back(theta);
    dist.values.push_back(acc);
  }
  double total = 0.0;
  for (double v : dist.values) total += v;
  total *= dist.dtheta();
  if (!(total > 0.0)) throw TomographyError("reconstructed phase distribution has no positive mass");
  for (double& v : dist.values) v /= total;
  if (negative_bins) {
    // Truncation error in the tails of an exact Wigner function is not a negative bin.
    const double floor = -1e-6 * *std::max_element(dist.values.begin(), dist.values.end());
    *negative_bins = static_cast<int>(std::count_if(dist.values.begin(), dist.values.end(), [&](double v) { return v < floor; }));
  }
  return dist;
}

std::pair<double, double> wigner_peak(const WignerGrid& w) {
  Eigen::Index i = 0, j = 0;
  w.values.maxCoeff(&i, &j);
  double x = w.x[i], p = w.p[j];
  const Eigen::Index nx = w.values.rows(), np = w.values.cols();
  if (i > 0 && i + 1 < nx) {
    x += parabolic_offset(w.values(i - 1, j), w.values(i, j), w.values(i + 1, j)) * (w.x[1] - w.x[0]);
  }
  if (j > 0 && j + 1 < np) {
    p += parabolic_offset(w.values(i, j - 1), w.values(i, j), w.values(i, j + 1)) * (w.p[1] - w.p[0]);
  }
  return {x, p};
}

}  // namespace quincunx
