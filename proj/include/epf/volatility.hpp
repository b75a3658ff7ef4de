// Local volatility beta(tau) = 1/(2 var_tau), model volatility
// nu(t) = 1/sigma(t)^2, the kurtosis-based long-time-scale scan, and the
// comparison report between the two volatility views.
//
// Note the deliberate factor 2 between the two definitions: beta uses
// 1/(2 sigma^2), nu uses 1/sigma^2. Both are implemented exactly as
// defined and compare_volatilities documents the factor.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "epf/error.hpp"
#include "epf/forecast.hpp"
#include "epf/timeutil.hpp"

namespace epf {

struct WindowSeries {
  std::vector<std::size_t> start;  // window start index in the source series
  std::vector<double> value;
  int window = 0;
  std::int64_t skipped = 0;  // degenerate windows
};

// Non-overlapping windows; beta = 1/(2 * sample variance) with the n-1
// denominator. Windows with variance < 1e-12 are skipped and counted.
inline WindowSeries local_volatility(const std::vector<double>& x, int tau) {
  if (tau < 8) fail(ErrorClass::config, "local_volatility: tau must be at least 8");
  if (x.size() < static_cast<std::size_t>(tau))
    fail(ErrorClass::data, "local_volatility: series shorter than one window");
  WindowSeries out;
  out.window = tau;
  const std::size_t w = static_cast<std::size_t>(tau);
  for (std::size_t lo = 0; lo + w <= x.size(); lo += w) {
    double mean = 0.0;
    for (std::size_t i = lo; i < lo + w; ++i) mean += x[i];
    mean /= static_cast<double>(w);
    double ss = 0.0;
    for (std::size_t i = lo; i < lo + w; ++i) ss += (x[i] - mean) * (x[i] - mean);
    double var = ss / static_cast<double>(w - 1);
    if (var < 1e-12) {
      ++out.skipped;
      continue;
    }
    out.start.push_back(lo);
    out.value.push_back(1.0 / (2.0 * var));
  }
  return out;
}

// nu(t) = 1/sigma(t)^2, aligned with the forecast's times.
inline std::vector<double> lstm_volatility(const ForecastDistribution& fc) {
  std::vector<double> nu(fc.sigma.size());
  for (std::size_t i = 0; i < fc.sigma.size(); ++i) {
    if (!(fc.sigma[i] > 0.0)) fail(ErrorClass::numeric, "lstm_volatility: sigma must be positive");
    nu[i] = 1.0 / (fc.sigma[i] * fc.sigma[i]);
  }
  return nu;
}

// Per non-overlapping window: m4/m2^2 with central sample moments
// (population normalization). Zero-variance windows are skipped.
inline WindowSeries local_kurtosis(const std::vector<double>& x, int window) {
  if (window < 8) fail(ErrorClass::config, "local_kurtosis: window must be at least 8");
  if (x.size() < static_cast<std::size_t>(window))
    fail(ErrorClass::data, "local_kurtosis: series shorter than one window");
  WindowSeries out;
  out.window = window;
  const std::size_t w = static_cast<std::size_t>(window);
  for (std::size_t lo = 0; lo + w <= x.size(); lo += w) {
    double mean = 0.0;
    for (std::size_t i = lo; i < lo + w; ++i) mean += x[i];
    mean /= static_cast<double>(w);
    double m2 = 0.0, m4 = 0.0;
    for (std::size_t i = lo; i < lo + w; ++i) {
      double d = x[i] - mean;
      m2 += d * d;
      m4 += d * d * d * d;
    }
    m2 /= static_cast<double>(w);
    m4 /= static_cast<double>(w);
    if (m2 == 0.0) {
      ++out.skipped;
      continue;
    }
    out.start.push_back(lo);
    out.value.push_back(m4 / (m2 * m2));
  }
  return out;
}

struct TimescaleEstimate {
  int tau_hat = 0;
  bool reached = false;  // false: threshold never hit, tau_hat is the grid end
  std::vector<int> grid;
  std::vector<double> mean_kurtosis;  // aligned with grid
};

// Smallest window in the scan grid where the mean local kurtosis first
// reaches 3. Diagnostic only — the pipeline uses 96 h regardless.
inline TimescaleEstimate estimate_timescale(const std::vector<double>& x) {
  if (x.size() < 500) fail(ErrorClass::data, "estimate_timescale: series too short (need 500)");
  static const int kGrid[] = {8, 12, 16, 24, 32, 48, 64, 96, 128, 192, 256, 384, 512};
  TimescaleEstimate est;
  bool any_window = false;
  for (int tau : kGrid) {
    if (x.size() < static_cast<std::size_t>(tau)) break;
    WindowSeries kurt = local_kurtosis(x, tau);
    if (kurt.value.empty()) continue;  // every window degenerate at this scale
    any_window = true;
    double mean = 0.0;
    for (double v : kurt.value) mean += v;
    mean /= static_cast<double>(kurt.value.size());
    est.grid.push_back(tau);
    est.mean_kurtosis.push_back(mean);
    est.tau_hat = tau;
    if (!est.reached && mean >= 3.0) {
      est.reached = true;
      break;
    }
  }
  if (!any_window) fail(ErrorClass::data, "estimate_timescale: series has no variation");
  return est;
}

// Spearman rank correlation with average ranks for ties; nullopt when
// either side has zero rank variance.
inline std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2)
    fail(ErrorClass::data, "spearman: need two equal-length series");
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    std::size_t i = 0;
    while (i < idx.size()) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // average 1-based rank
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  std::vector<double> ra = ranks(a), rb = ranks(b);
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= static_cast<double>(ra.size());
  mb /= static_cast<double>(rb.size());
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

struct VolatilitySeries {
  std::vector<HourStamp> beta_start;  // window start instants
  std::vector<double> beta;
  int tau_hours = 0;
  std::int64_t skipped_windows = 0;
  std::vector<HourStamp> nu_time;
  std::vector<double> nu;
};

struct VolatilityComparison {
  // per-window alignment: mean nu over the hours inside each beta window
  std::vector<HourStamp> window_start;
  std::vector<double> beta;
  std::vector<double> nu_mean;
  double median_beta = 0.0;
  double median_nu = 0.0;
  std::optional<double> spearman_rank;  // nullopt: undefined (zero variance)
  // shared log-spaced histogram of the two volatility samples
  std::vector<double> bin_edges;  // size bins + 1
  std::vector<double> beta_density, nu_density;
};

namespace detail {

inline double median_of(std::vector<double> v) {
  std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2), v.end());
  double hi = v[n / 2];
  if (n % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2 - 1), v.end());
  return 0.5 * (v[n / 2 - 1] + hi);
}

}  // namespace detail

inline VolatilityComparison compare_volatilities(const VolatilitySeries& vol,
                                                 const ForecastDistribution& fc, int bins = 40) {
  if (vol.beta.empty()) fail(ErrorClass::data, "compare_volatilities: empty beta series");
  if (fc.times.empty()) fail(ErrorClass::data, "compare_volatilities: empty forecast");
  VolatilityComparison cmp;

  std::vector<double> nu = lstm_volatility(fc);
  // forecast hours are sorted; average nu inside each beta window
  for (std::size_t wi = 0; wi < vol.beta.size(); ++wi) {
    HourStamp lo = vol.beta_start[wi];
    HourStamp hi = lo + vol.tau_hours;
    auto first = std::lower_bound(fc.times.begin(), fc.times.end(), lo);
    auto last = std::lower_bound(fc.times.begin(), fc.times.end(), hi);
    if (first == last) continue;
    double acc = 0.0;
    for (auto it = first; it != last; ++it)
      acc += nu[static_cast<std::size_t>(it - fc.times.begin())];
    cmp.window_start.push_back(lo);
    cmp.beta.push_back(vol.beta[wi]);
    cmp.nu_mean.push_back(acc / static_cast<double>(last - first));
  }
  if (cmp.beta.empty()) fail(ErrorClass::data, "compare_volatilities: no overlapping coverage");

  cmp.median_beta = detail::median_of(cmp.beta);
  cmp.median_nu = detail::median_of(cmp.nu_mean);
  cmp.spearman_rank = spearman(cmp.nu_mean, cmp.beta);

  // shared log-spaced bins over both samples
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  auto scan = [&](const std::vector<double>& v) {
    for (double x : v)
      if (x > 0.0) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
  };
  scan(vol.beta);
  scan(nu);
  if (!(hi > 0.0) || !std::isfinite(lo)) fail(ErrorClass::data, "compare_volatilities: no positive volatilities");
  if (lo == hi) {
    lo *= 0.5;
    hi *= 2.0;
  }
  cmp.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
  double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i <= bins; ++i)
    cmp.bin_edges[static_cast<std::size_t>(i)] =
        std::exp(llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(bins));
  cmp.bin_edges.front() = lo;
  cmp.bin_edges.back() = hi;
  auto histogram = [&](const std::vector<double>& v) {
    std::vector<double> density(static_cast<std::size_t>(bins), 0.0);
    std::size_t total = 0;
    for (double x : v)
      if (x > 0.0) ++total;
    if (total == 0) return density;
    for (double x : v) {
      if (!(x > 0.0)) continue;
      auto it = std::upper_bound(cmp.bin_edges.begin(), cmp.bin_edges.end(), x);
      std::size_t bin = static_cast<std::size_t>(
          std::clamp<std::ptrdiff_t>(it - cmp.bin_edges.begin() - 1, 0, bins - 1));
      density[bin] += 1.0;
    }
    for (int i = 0; i < bins; ++i) {
      double width = cmp.bin_edges[static_cast<std::size_t>(i) + 1] - cmp.bin_edges[static_cast<std::size_t>(i)];
      density[static_cast<std::size_t>(i)] /= static_cast<double>(total) * width;
    }
    return density;
  };
  cmp.beta_density = histogram(vol.beta);
  cmp.nu_density = histogram(nu);
  return cmp;
}

}  // namespace epf
