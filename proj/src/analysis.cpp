#include "quincunx/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

#include "quincunx/errors.hpp"
#include "quincunx/observables.hpp"

namespace quincunx {

namespace {

template <typename Fn>
void parallel_for(int count, int jobs, Fn&& fn) {
  jobs = std::max(1, std::min(jobs, count));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

SigmaSeries make_series(std::string label, const std::vector<double>& x, const std::vector<double>& y) {
  return {std::move(label), x, y};
}

// Drop the initial snapshot (t = 0 cannot enter a log-log fit).
std::vector<double> tail(const std::vector<double>& v) {
  return v.size() > 1 ? std::vector<double>(v.begin() + 1, v.end()) : std::vector<double>{};
}

std::vector<double> step_numbers(std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(i + 1);
  return out;
}

}  // namespace

RegressionRow loglog_regression(const SigmaSeries& series) {
  if (series.times.size() != series.values.size()) throw RegressionError("series times and values differ in length");
  std::vector<double> lx, ly;
  RegressionRow row;
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    const double t = series.times[i];
    const double v = series.values[i];
    if (!std::isfinite(v)) {
      ++row.excluded;
      continue;
    }
    if (!(v > 0.0) || !(t > 0.0)) {
      std::ostringstream msg;
      msg << "log-log regression needs positive data, got (" << t << ", " << v << ")";
      throw RegressionError(msg.str());
    }
    lx.push_back(std::log(t));
    ly.push_back(std::log(v));
  }
  const int n = static_cast<int>(lx.size());
  if (n < 3) throw RegressionError("log-log regression needs at least 3 finite points");
  row.n_points = n;

  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx <= 0.0) throw RegressionError("log-log regression needs distinct abscissae");
  row.s = sxy / sxx;
  row.intercept = my - row.s * mx;
  double sse = 0.0;
  for (int i = 0; i < n; ++i) {
    const double res = ly[i] - (row.intercept + row.s * lx[i]);
    sse += res * res;
  }
  const double var = sse / (n - 2);
  row.ds = std::sqrt(var / sxx);
  row.d_intercept = std::sqrt(var * (1.0 / n + mx * mx / sxx));
  const double scale = std::max(1.0, std::abs(my));
  if (syy <= 1e-24 * scale * scale * n) {
    row.degenerate = true;
    row.r = std::numeric_limits<double>::quiet_NaN();
  } else {
    row.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  }
  return row;
}

SigmaSeries window(const SigmaSeries& series, std::size_t first, std::size_t last) {
  SigmaSeries out{series.label, {}, {}};
  for (std::size_t i = first; i <= last && i < series.values.size(); ++i) {
    out.times.push_back(series.times[i]);
    out.values.push_back(series.values[i]);
  }
  return out;
}

CMatrix walker_density(const Snapshot& snapshot) {
  const FockCutoff cutoff = snapshot.rho.cutoff();
  return partial_trace_coin(to_walker_frame(snapshot.rho.matrix(), snapshot.frame, cutoff), cutoff);
}

StepObservables step_observables(const std::vector<Snapshot>& snapshots, FockCutoff cutoff, int phase_points) {
  const int M = phase_points > 0 ? phase_points : 4 * cutoff.n_max() + 1;
  StepObservables obs;
  for (const auto& snap : snapshots) {
    const CMatrix rho_w = walker_density(snap);
    const PhotonStats stats = photon_stats(rho_w);
    obs.times.push_back(snap.t);
    obs.sigma_h.push_back(holevo_std(phase_distribution(rho_w, M)));
    obs.sigma_qp.push_back(quadrature_std(rho_w, 0.0));
    obs.n_bar.push_back(stats.n_bar);
    obs.delta_n.push_back(stats.delta_n);
  }
  return obs;
}

std::vector<RegressionRow> SweepResult::table(bool qp) const {
  std::vector<RegressionRow> rows;
  for (const auto& run : runs) {
    if (!run.error) rows.push_back(qp ? run.sigma_qp : run.sigma_h);
  }
  return rows;
}

SweepResult sweep_kappa(const WalkConfig& config, std::vector<double> kappas, int jobs) {
  SweepResult result;
  std::sort(kappas.begin(), kappas.end());
  const auto dup = std::adjacent_find(kappas.begin(), kappas.end());
  if (dup != kappas.end()) {
    std::ostringstream msg;
    msg << "duplicate kappa values removed (e.g. " << *dup << ")";
    result.warnings.push_back(msg.str());
    kappas.erase(std::unique(kappas.begin(), kappas.end()), kappas.end());
  }
  for (double k : kappas) {
    if (k < 0.0) throw ConfigError("kappa values must be non-negative");
  }

  std::optional<PhotonTrajectory> trajectory;
  if (config.pulse_mode != PulseMode::Fixed) trajectory = precompute_photon_trajectory(config);

  result.runs.resize(kappas.size());
  parallel_for(static_cast<int>(kappas.size()), jobs, [&](int i) {
    KappaRun& run = result.runs[i];
    run.kappa = kappas[i];
    try {
      WalkConfig c = config;
      c.rates.kappa = from_mhz(kappas[i]);
      const WalkResult walk = run_walk(c, trajectory ? &*trajectory : nullptr);
      run.observables = step_observables(walk.snapshots, c.cutoff);
      const auto t = tail(run.observables.times);
      run.sigma_h = loglog_regression(make_series("sigma_H", t, tail(run.observables.sigma_h)));
      run.sigma_qp = loglog_regression(make_series("sigma_QP", t, tail(run.observables.sigma_qp)));
      run.sigma_h.kappa = run.sigma_qp.kappa = kappas[i];
    } catch (const std::exception& e) {
      run.error = e.what();
    }
  });
  return result;
}

std::vector<double> local_slopes(const std::vector<double>& steps, const std::vector<double>& sigma, int width) {
  std::vector<double> out(sigma.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t end = width - 1; end < sigma.size(); ++end) {
    const std::size_t first = end + 1 - width;
    SigmaSeries s{"local", {steps.begin() + first, steps.begin() + end + 1}, {sigma.begin() + first, sigma.begin() + end + 1}};
    try {
      const RegressionRow row = loglog_regression(s);
      if (row.excluded == 0) out[end] = row.s;
    } catch (const RegressionError&) {
    }
  }
  return out;
}

std::optional<int> breakdown_step(const std::vector<double>& steps, const std::vector<double>& sigma, double threshold,
                                  int width) {
  const auto slopes = local_slopes(steps, sigma, width);
  for (std::size_t i = 0; i < slopes.size(); ++i) {
    // A saturated (non-finite) point inside the window also counts as breakdown.
    const bool saturated = !std::isfinite(sigma[i]);
    if (saturated || (!std::isnan(slopes[i]) && slopes[i] < threshold)) return static_cast<int>(std::lround(steps[i]));
  }
  return std::nullopt;
}

ModeComparison fixed_vs_adaptive_report(const WalkConfig& config, int fixed_window, int jobs) {
  ModeComparison report;
  WalkConfig fixed = config;
  fixed.pulse_mode = PulseMode::Fixed;
  WalkConfig adaptive = config;
  adaptive.pulse_mode = PulseMode::Adaptive;

  std::vector<WalkResult> walks(2);
  parallel_for(2, jobs, [&](int i) { walks[i] = run_walk(i == 0 ? fixed : adaptive); });
  report.fixed = step_observables(walks[0].snapshots, config.cutoff);
  report.adaptive = step_observables(walks[1].snapshots, config.cutoff);

  const auto n_fixed = tail(report.fixed.sigma_h).size();
  const auto steps_fixed = step_numbers(n_fixed);
  const auto steps_adaptive = step_numbers(tail(report.adaptive.sigma_h).size());
  const std::size_t last = std::min<std::size_t>(fixed_window, n_fixed) - 1;

  report.fixed_sigma_h = loglog_regression(window(make_series("sigma_H", steps_fixed, tail(report.fixed.sigma_h)), 0, last));
  report.fixed_sigma_qp =
      loglog_regression(window(make_series("sigma_QP", steps_fixed, tail(report.fixed.sigma_qp)), 0, last));
  report.adaptive_sigma_h = loglog_regression(make_series("sigma_H", steps_adaptive, tail(report.adaptive.sigma_h)));
  report.adaptive_sigma_qp = loglog_regression(make_series("sigma_QP", steps_adaptive, tail(report.adaptive.sigma_qp)));

  report.fixed_local_slopes = local_slopes(steps_fixed, tail(report.fixed.sigma_h));
  report.adaptive_local_slopes = local_slopes(steps_adaptive, tail(report.adaptive.sigma_h));
  report.fixed_breakdown = breakdown_step(steps_fixed, tail(report.fixed.sigma_h));
  report.adaptive_breakdown = breakdown_step(steps_adaptive, tail(report.adaptive.sigma_h));
  return report;
}

void write_regression_table(std::ostream& out, const std::vector<RegressionRow>& rows) {
  out << "kappa_over_2pi_MHz,s,ds,ln_sigma0,d_ln_sigma0,r\n";
  out << std::setprecision(12);
  for (const auto& r : rows) {
    out << r.kappa << ',' << r.s << ',' << r.ds << ',' << r.intercept << ',' << r.d_intercept << ',' << r.r << '\n';
  }
}

}  // namespace quincunx
