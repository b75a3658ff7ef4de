// Empirical Mode Decomposition: sifting with natural-cubic-spline
// envelopes, mirrored boundary extrema, the classic SD < 0.2 stopping
// rule, and the detrending step that removes the slowest modes.
#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "epf/csv.hpp"
#include "epf/error.hpp"
#include "epf/spline.hpp"

namespace epf {

struct ImfDecomposition {
  std::vector<std::vector<double>> imfs;  // fastest first
  std::vector<double> residual;
  std::size_t source_length = 0;
};

struct EmdOptions {
  double sd_threshold = 0.2;
  int max_sifts = 50;
  int max_imfs = 12;
};

namespace detail {

// Interior extrema with plateau handling: a flat run flanked by lower
// (higher) values counts once, at the middle of the run.
inline void find_extrema(const std::vector<double>& x, std::vector<std::size_t>& maxima,
                         std::vector<std::size_t>& minima) {
  maxima.clear();
  minima.clear();
  const std::size_t n = x.size();
  if (n < 3) return;
  std::size_t i = 1;
  while (i + 1 < n) {
    if (x[i] == x[i - 1]) {
      ++i;
      continue;
    }
    std::size_t j = i;  // plateau [i, j] of equal values
    while (j + 1 < n && x[j + 1] == x[i]) ++j;
    if (j + 1 >= n) break;
    bool rising = x[i] > x[i - 1];
    bool falling = x[j + 1] < x[j];
    std::size_t mid = (i + j) / 2;
    if (rising && falling)
      maxima.push_back(mid);
    else if (!rising && !falling)
      minima.push_back(mid);
    i = j + 1;
  }
}

// Spline envelope through the given extrema, with up to two extrema
// mirrored across each boundary sample.
inline std::vector<double> envelope(const std::vector<double>& x,
                                    const std::vector<std::size_t>& extrema) {
  const std::size_t n = x.size();
  std::vector<double> kt, kv;
  std::size_t mirror_left = std::min<std::size_t>(2, extrema.size());
  for (std::size_t k = mirror_left; k-- > 0;) {
    kt.push_back(-static_cast<double>(extrema[k]));
    kv.push_back(x[extrema[k]]);
  }
  for (std::size_t e : extrema) {
    kt.push_back(static_cast<double>(e));
    kv.push_back(x[e]);
  }
  // mirror the last extrema in reverse so the knots keep increasing
  std::size_t mirror_right = std::min<std::size_t>(2, extrema.size());
  for (std::size_t k = extrema.size(); k-- > extrema.size() - mirror_right;) {
    kt.push_back(2.0 * static_cast<double>(n - 1) - static_cast<double>(extrema[k]));
    kv.push_back(x[extrema[k]]);
  }
  CubicSpline spline(std::move(kt), std::move(kv));
  std::vector<double> env(n);
  for (std::size_t t = 0; t < n; ++t) env[t] = spline(static_cast<double>(t));
  return env;
}

}  // namespace detail

inline ImfDecomposition decompose(const std::vector<double>& x, const EmdOptions& opt = {}) {
  const std::size_t n = x.size();
  if (n < 8) fail(ErrorClass::data, "emd: series too short (need at least 8 samples)");
  for (double v : x)
    if (!std::isfinite(v)) fail(ErrorClass::data, "emd: non-finite value in input");

  ImfDecomposition out;
  out.source_length = n;
  out.residual = x;

  std::vector<std::size_t> maxima, minima;
  std::vector<double> h, h_next(n), mean(n);
  while (static_cast<int>(out.imfs.size()) < opt.max_imfs) {
    detail::find_extrema(out.residual, maxima, minima);
    if (maxima.size() + minima.size() < 2) break;  // residual reached

    h = out.residual;
    for (int sift = 0; sift < opt.max_sifts; ++sift) {
      detail::find_extrema(h, maxima, minima);
      if (maxima.empty() || minima.empty()) break;
      std::vector<double> upper = detail::envelope(h, maxima);
      std::vector<double> lower = detail::envelope(h, minima);
      double sd_num = 0.0, sd_den = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        mean[t] = 0.5 * (upper[t] + lower[t]);
        h_next[t] = h[t] - mean[t];
        sd_num += mean[t] * mean[t];
        sd_den += h[t] * h[t];
      }
      h.swap(h_next);
      if (sd_den == 0.0 || sd_num / sd_den < opt.sd_threshold) break;
    }
    for (std::size_t t = 0; t < n; ++t) out.residual[t] -= h[t];
    out.imfs.push_back(h);
  }
  return out;
}

// Removes the slow end of the decomposition from x. With
// include_residual (default), that is the residual plus the n_slow
// lowest-frequency IMFs; without it, the residual itself counts as one
// of the n_slow modes. Fewer IMFs than requested removes all of them.
inline std::vector<double> detrend(const std::vector<double>& x, int n_slow = 5,
                                   bool include_residual = true) {
  if (n_slow < 0) fail(ErrorClass::config, "detrend: n_slow must be nonnegative");
  ImfDecomposition d = decompose(x);
  std::vector<double> out = x;
  int remove_imfs = include_residual ? n_slow : (n_slow == 0 ? 0 : n_slow - 1);
  bool remove_residual = include_residual || n_slow > 0;
  if (remove_residual)
    for (std::size_t t = 0; t < out.size(); ++t) out[t] -= d.residual[t];
  int imf_count = static_cast<int>(d.imfs.size());
  int k = std::min(remove_imfs, imf_count);
  for (int j = 0; j < k; ++j) {
    const auto& imf = d.imfs[static_cast<std::size_t>(imf_count - 1 - j)];  // slowest first
    for (std::size_t t = 0; t < out.size(); ++t) out[t] -= imf[t];
  }
  return out;
}

// Dump as CSV: t,imf1..imfK,residual.
inline void write_imfs_csv(const std::string& path, const ImfDecomposition& d) {
  CsvWriter out(path);
  std::vector<std::string> header{"t"};
  for (std::size_t k = 0; k < d.imfs.size(); ++k)
    header.push_back("imf" + std::to_string(k + 1));
  header.push_back("residual");
  out.row(header);
  for (std::size_t t = 0; t < d.source_length; ++t) {
    std::vector<std::string> row{std::to_string(t)};
    for (const auto& imf : d.imfs) row.push_back(format_double(imf[t]));
    row.push_back(format_double(d.residual[t]));
    out.row(row);
  }
  out.close();
}

}  // namespace epf
