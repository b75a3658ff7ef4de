// Feature engineering for the canonical frame: residual load, the
// 24-hour fuel price shift with forward fill, nuclear availability and
// regression imputation of a partially missing solar series.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "epf/error.hpp"
#include "epf/timeutil.hpp"

namespace epf {

inline std::vector<double> compute_residual_load(const std::vector<double>& load,
                                                 const std::vector<double>& solar,
                                                 const std::vector<double>& wind) {
  if (load.size() != solar.size() || load.size() != wind.size())
    fail(ErrorClass::data, "residual load: input length mismatch");
  std::vector<double> out(load.size());
  for (std::size_t i = 0; i < load.size(); ++i)
    out[i] = load[i] - solar[i] - wind[i];
  return out;
}

inline std::vector<double> compute_nuclear_availability(
    const std::vector<double>& installed, const std::vector<double>& planned_unavailable) {
  if (installed.size() != planned_unavailable.size())
    fail(ErrorClass::data, "nuclear availability: input length mismatch");
  std::vector<double> out(installed.size());
  for (std::size_t i = 0; i < installed.size(); ++i) {
    if (installed[i] < 0.0 || planned_unavailable[i] < 0.0)
      fail(ErrorClass::data, "nuclear availability: negative input at row " + std::to_string(i));
    out[i] = installed[i] - planned_unavailable[i];
  }
  return out;
}

struct DailyOpen {
  std::int64_t day;  // days since epoch (trading day of the opening price)
  double price;
};

// Daily opening prices shifted by 24 hours: all of day d+1 carries the
// opening price of day d, and days without a fresh shifted value carry
// the most recent one forward. Hours before the first covered day have
// no price and querying them is an error.
struct ShiftedDailySeries {
  std::int64_t first_day = 0;
  std::vector<double> daily;  // one value per day starting at first_day

  bool covers(HourStamp h) const {
    std::int64_t day = h >= 0 ? h / kHoursPerDay : (h - kHoursPerDay + 1) / kHoursPerDay;
    return day >= first_day;
  }

  double value_at(HourStamp h) const {
    if (!covers(h))
      fail(ErrorClass::data, "no shifted fuel price available at " + format_timestamp(h));
    std::int64_t day = h >= 0 ? h / kHoursPerDay : (h - kHoursPerDay + 1) / kHoursPerDay;
    std::size_t idx = static_cast<std::size_t>(day - first_day);
    if (idx >= daily.size()) idx = daily.size() - 1;  // forward fill past the end
    return daily[idx];
  }
};

inline ShiftedDailySeries shift_fuel_prices(std::vector<DailyOpen> opens) {
  if (opens.empty()) fail(ErrorClass::data, "fuel price shift: empty input");
  std::sort(opens.begin(), opens.end(),
            [](const DailyOpen& a, const DailyOpen& b) { return a.day < b.day; });
  for (std::size_t i = 1; i < opens.size(); ++i)
    if (opens[i].day == opens[i - 1].day)
      fail(ErrorClass::data, "fuel price shift: duplicate opening price for " +
                                 format_date(opens[i].day));
  ShiftedDailySeries out;
  out.first_day = opens.front().day + 1;
  std::int64_t last_day = opens.back().day + 1;
  out.daily.reserve(static_cast<std::size_t>(last_day - out.first_day + 1));
  std::size_t next = 0;
  double current = opens.front().price;
  for (std::int64_t day = out.first_day; day <= last_day; ++day) {
    if (next < opens.size() && opens[next].day == day - 1) {
      current = opens[next].price;
      ++next;
    }
    out.daily.push_back(current);
  }
  return out;
}

struct ImputeResult {
  std::vector<double> series;
  std::int64_t imputed_count = 0;
  bool rank_deficient = false;
  std::vector<double> coefficients;  // intercept first
};

// OLS fit (intercept + one coefficient per neighbor) on the observed
// rows of `target`; missing rows (NaN) are replaced by fitted values
// clipped below at 0 MW. A rank-deficient design falls back to the
// minimum-norm least-squares solution.
inline ImputeResult impute_solar_by_regression(
    const std::vector<double>& target,
    const std::vector<std::vector<double>>& neighbors) {
  const std::size_t n = target.size();
  for (const auto& nb : neighbors) {
    if (nb.size() != n) fail(ErrorClass::data, "impute: neighbor length mismatch");
    for (double v : nb)
      if (!std::isfinite(v)) fail(ErrorClass::data, "impute: neighbor series has missing values");
  }

  std::vector<std::size_t> observed;
  for (std::size_t i = 0; i < n; ++i)
    if (std::isfinite(target[i])) observed.push_back(i);
  if (observed.size() < 2)
    fail(ErrorClass::data, "impute: need at least 2 observed rows");

  const std::size_t p = neighbors.size() + 1;
  Eigen::MatrixXd x(observed.size(), p);
  Eigen::VectorXd y(observed.size());
  for (std::size_t r = 0; r < observed.size(); ++r) {
    x(r, 0) = 1.0;
    for (std::size_t c = 0; c < neighbors.size(); ++c)
      x(r, c + 1) = neighbors[c][observed[r]];
    y(r) = target[observed[r]];
  }

  ImputeResult res;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  Eigen::VectorXd beta;
  if (qr.rank() < static_cast<Eigen::Index>(p)) {
    res.rank_deficient = true;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(x);
    beta = cod.solve(y);
  } else {
    beta = qr.solve(y);
  }
  res.coefficients.assign(beta.data(), beta.data() + beta.size());

  res.series = target;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isfinite(target[i])) continue;
    double fitted = beta(0);
    for (std::size_t c = 0; c < neighbors.size(); ++c)
      fitted += beta(c + 1) * neighbors[c][i];
    res.series[i] = std::max(0.0, fitted);
    ++res.imputed_count;
  }
  return res;
}

}  // namespace epf
