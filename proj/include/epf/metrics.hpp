// Point and probabilistic evaluation metrics plus the per-year report.
// All metrics evaluate in price units (EUR/MWh).
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "epf/csv.hpp"
#include "epf/error.hpp"
#include "epf/timeutil.hpp"

namespace epf {

inline double mae(const std::vector<double>& y, const std::vector<double>& yhat) {
  if (y.empty()) fail(ErrorClass::data, "mae: empty input");
  if (y.size() != yhat.size()) fail(ErrorClass::data, "mae: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) acc += std::abs(y[i] - yhat[i]);
  return acc / static_cast<double>(y.size());
}

struct SmapeResult {
  double value = 0.0;        // percent, in [0, 200]
  std::int64_t skipped = 0;  // terms with |y| + |yhat| == 0
};

// Symmetric MAPE in percent. Terms with a zero denominator are skipped
// and counted; N in the mean is the number of retained terms.
inline SmapeResult smape(const std::vector<double>& y, const std::vector<double>& yhat) {
  if (y.empty()) fail(ErrorClass::data, "smape: empty input");
  if (y.size() != yhat.size()) fail(ErrorClass::data, "smape: length mismatch");
  double acc = 0.0;
  std::int64_t used = 0, skipped = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double denom = 0.5 * (std::abs(y[i]) + std::abs(yhat[i]));
    if (denom == 0.0) {
      ++skipped;
      continue;
    }
    acc += std::abs(y[i] - yhat[i]) / denom;
    ++used;
  }
  if (used == 0) fail(ErrorClass::data, "smape: all terms degenerate");
  return {100.0 * acc / static_cast<double>(used), skipped};
}

// Mean Gaussian negative log-likelihood of y under per-point (mu, sigma).
inline double nll_metric(const std::vector<double>& y, const std::vector<double>& mu,
                         const std::vector<double>& sigma) {
  if (y.empty()) fail(ErrorClass::data, "nll: empty input");
  if (y.size() != mu.size() || y.size() != sigma.size())
    fail(ErrorClass::data, "nll: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(sigma[i] > 0.0)) fail(ErrorClass::numeric, "nll: sigma must be positive");
    double r = y[i] - mu[i];
    acc += 0.5 * std::log(2.0 * M_PI * sigma[i] * sigma[i]) + r * r / (2.0 * sigma[i] * sigma[i]);
  }
  return acc / static_cast<double>(y.size());
}

struct YearMetrics {
  std::string label;  // "2019", ..., or "all"
  std::size_t count = 0;
  double nll = 0.0;
  double mae = 0.0;
  double smape = 0.0;
  std::int64_t smape_skipped = 0;
};

// Aligns forecasts with a truth series by timestamp and computes the
// metrics per UTC calendar year plus an "all" row over every aligned
// point. Years that end up empty after alignment are absent.
inline std::vector<YearMetrics> yearly_report(
    const std::vector<HourStamp>& times, const std::vector<double>& mu,
    const std::vector<double>& sigma, const std::vector<std::pair<HourStamp, double>>& truth) {
  if (times.size() != mu.size() || times.size() != sigma.size())
    fail(ErrorClass::data, "yearly report: forecast vectors misaligned");
  std::map<HourStamp, double> truth_by_time(truth.begin(), truth.end());
  struct Bucket {
    std::vector<double> y, m, s;
  };
  std::map<int, Bucket> years;
  Bucket all;
  for (std::size_t i = 0; i < times.size(); ++i) {
    auto it = truth_by_time.find(times[i]);
    if (it == truth_by_time.end()) continue;
    Bucket& b = years[utc_year(times[i])];
    b.y.push_back(it->second);
    b.m.push_back(mu[i]);
    b.s.push_back(sigma[i]);
    all.y.push_back(it->second);
    all.m.push_back(mu[i]);
    all.s.push_back(sigma[i]);
  }
  if (all.y.empty()) fail(ErrorClass::data, "yearly report: no overlapping timestamps");
  std::vector<YearMetrics> rows;
  auto emit = [&](const std::string& label, const Bucket& b) {
    YearMetrics r;
    r.label = label;
    r.count = b.y.size();
    r.nll = nll_metric(b.y, b.m, b.s);
    r.mae = mae(b.y, b.m);
    auto sm = smape(b.y, b.m);
    r.smape = sm.value;
    r.smape_skipped = sm.skipped;
    rows.push_back(r);
  };
  for (const auto& [year, bucket] : years) emit(std::to_string(year), bucket);
  emit("all", all);
  return rows;
}

inline void write_report_csv(const std::string& path, const std::vector<YearMetrics>& rows,
                             const std::string& config_hash = {}) {
  CsvWriter out(path);
  if (!config_hash.empty()) out.comment("config_hash=" + config_hash);
  out.row({"year", "nll", "mae", "smape"});
  for (const auto& r : rows)
    out.row({r.label, format_fixed(r.nll, 2), format_fixed(r.mae, 2), format_fixed(r.smape, 2)});
  out.close();
}

}  // namespace epf
