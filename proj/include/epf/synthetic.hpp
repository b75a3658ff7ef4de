// Synthetic datasets with known ground truth: a superstatistical block
// series (Gamma-distributed precision per block) and a desk-scale
// forecastable frame whose price is a known function of the features
// with heteroskedastic noise tied to the gas price.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "epf/csv.hpp"
#include "epf/error.hpp"
#include "epf/frame.hpp"
#include "epf/rng.hpp"
#include "epf/timeutil.hpp"

namespace epf {

struct SuperstatSeries {
  std::vector<double> series;
  std::vector<double> true_beta;  // one per block
  int block_len = 0;
};

// Per block: beta ~ Gamma(k, theta), then block_len i.i.d. draws from
// Normal(0, 1/sqrt(2 beta)). Blocks use derived seeds so generation is
// order-independent.
inline SuperstatSeries gen_superstat_series(double k, double theta, int block_len, int n_blocks,
                                            std::uint64_t seed) {
  if (!(k > 0.0) || !(theta > 0.0))
    fail(ErrorClass::config, "gen_superstat: shape and scale must be positive");
  if (block_len < 8) fail(ErrorClass::config, "gen_superstat: block_len must be at least 8");
  if (n_blocks < 1) fail(ErrorClass::config, "gen_superstat: need at least one block");
  SuperstatSeries out;
  out.block_len = block_len;
  out.series.reserve(static_cast<std::size_t>(block_len) * static_cast<std::size_t>(n_blocks));
  out.true_beta.reserve(static_cast<std::size_t>(n_blocks));
  for (int b = 0; b < n_blocks; ++b) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
    double beta = rng.gamma(k, theta);
    double sd = 1.0 / std::sqrt(2.0 * beta);
    out.true_beta.push_back(beta);
    for (int i = 0; i < block_len; ++i) out.series.push_back(rng.normal(0.0, sd));
  }
  return out;
}

struct GenOptions {
  double noise_scale = 1.0;    // 0 makes the price exactly deterministic
  bool constant_sigma = false;  // sigma(t) = 4 instead of the gas link
};

struct GeneratedFrame {
  TimeSeriesFrame frame;
  std::vector<double> true_mu;     // per hour, EUR/MWh
  std::vector<double> true_sigma;  // per hour, EUR/MWh (already noise-scaled)
};

// Table-I-shaped frame from seeded daily/weekly sinusoids plus noise.
// price = affine + mildly quadratic function of current-hour features;
// noise sigma(t) = 2.5 + 0.09 * gas_price unless constant_sigma.
inline GeneratedFrame gen_forecastable_frame(std::int64_t n_hours, std::uint64_t seed,
                                             const GenOptions& opt = {}) {
  if (n_hours < 20000) fail(ErrorClass::config, "gen_forecastable_frame: need at least 20000 hours");
  Rng rng(seed);

  GeneratedFrame out;
  TimeSeriesFrame& f = out.frame;
  f.start = hour_stamp(2015, 1, 1, 0);
  f.columns = canonical_feature_columns();
  f.features.resize(n_hours, static_cast<Eigen::Index>(f.columns.size()));
  f.target.resize(n_hours);
  f.valid.assign(static_cast<std::size_t>(n_hours), 1);
  out.true_mu.resize(static_cast<std::size_t>(n_hours));
  out.true_sigma.resize(static_cast<std::size_t>(n_hours));

  std::unordered_map<std::string, Eigen::Index> col;
  for (std::size_t c = 0; c < f.columns.size(); ++c)
    col[f.columns[c]] = static_cast<Eigen::Index>(c);

  // mean-reverting daily fuel walks, constant within each day
  const std::int64_t n_days = (n_hours + kHoursPerDay - 1) / kHoursPerDay;
  struct Walk {
    double level, mean, kappa, step, floor;
  };
  Walk walks[4] = {{35.0, 35.0, 0.02, 1.2, 5.0},    // gas EUR/MWh
                   {75.0, 75.0, 0.01, 1.0, 20.0},   // oil USD/bbl
                   {90.0, 90.0, 0.01, 1.0, 20.0},   // coal USD/t
                   {60.0, 60.0, 0.02, 0.8, 5.0}};   // co2 EUR/t
  std::vector<double> gas(n_days), oil(n_days), coal(n_days), co2(n_days), sun_day(n_days);
  for (std::int64_t d = 0; d < n_days; ++d) {
    double* out_fuel[4] = {&gas[static_cast<std::size_t>(d)], &oil[static_cast<std::size_t>(d)],
                           &coal[static_cast<std::size_t>(d)], &co2[static_cast<std::size_t>(d)]};
    for (int w = 0; w < 4; ++w) {
      Walk& wk = walks[w];
      wk.level += wk.kappa * (wk.mean - wk.level) + rng.normal(0.0, wk.step);
      if (wk.level < wk.floor) wk.level = wk.floor;
      *out_fuel[w] = wk.level;
    }
    sun_day[static_cast<std::size_t>(d)] = 0.7 + 0.3 * rng.uniform();  // daily cloud factor
  }

  struct Zone {
    const char* name;
    double size, solar_share, wind_share;
  };
  const Zone zones[] = {{"res_load_at", 7000, 0.5, 0.4},  {"res_load_be", 9000, 0.6, 0.5},
                        {"res_load_ch", 6500, 0.4, 0.2},  {"res_load_cz", 7500, 0.5, 0.3},
                        {"res_load_dk1", 2500, 0.4, 1.2}, {"res_load_dk2", 1800, 0.4, 1.0},
                        {"res_load_fr", 55000, 0.5, 0.4}, {"res_load_nl", 12000, 0.8, 0.7},
                        {"res_load_no2", 3000, 0.1, 0.5}, {"res_load_pl", 18000, 0.3, 0.4}};

  for (std::int64_t t = 0; t < n_hours; ++t) {
    std::int64_t d = t / kHoursPerDay;
    double h = static_cast<double>(t % kHoursPerDay);
    double dow = static_cast<double>(weekday((f.start + t) / kHoursPerDay));
    double daily = std::sin(2.0 * M_PI * (h - 8.0) / 24.0);
    double weekly = std::sin(2.0 * M_PI * dow / 7.0);
    double season = std::sin(2.0 * M_PI * static_cast<double>(d) / 365.0);

    double load = 45000.0 + 9000.0 * daily + 3000.0 * weekly + 1500.0 * season +
                  rng.normal(0.0, 800.0);
    double solar_shape = std::max(0.0, std::sin(M_PI * (h - 6.0) / 12.0));
    double solar = std::max(0.0, 12000.0 * (0.6 + 0.4 * season) * solar_shape *
                                     sun_day[static_cast<std::size_t>(d)] +
                                 rng.normal(0.0, 300.0) * solar_shape);
    double wind = std::max(0.0, 6000.0 + 4500.0 * std::sin(2.0 * M_PI * static_cast<double>(t) / 171.0) +
                                    rng.normal(0.0, 1200.0));

    auto F = [&](const char* name) -> double& { return f.features(t, col[name]); };
    F("load_da_delu") = load;
    F("solar_da_delu") = solar;
    F("wind_da_delu") = wind;
    for (const Zone& z : zones)
      F(z.name) = z.size * (0.85 + 0.2 * daily + 0.08 * weekly) -
                  z.solar_share * solar * (z.size / 45000.0) -
                  z.wind_share * wind * (z.size / 45000.0) + rng.normal(0.0, 0.02 * z.size);
    double nuc_de = 7000.0 + 1500.0 * std::sin(2.0 * M_PI * static_cast<double>(d) / 120.0) +
                    rng.normal(0.0, 150.0);
    double nuc_fr = 45000.0 + 8000.0 * std::sin(2.0 * M_PI * static_cast<double>(d) / 90.0 + 1.0) +
                    rng.normal(0.0, 400.0);
    F("nuc_avail_delu") = nuc_de;
    F("nuc_avail_fr") = nuc_fr;
    double gas_t = gas[static_cast<std::size_t>(d)];
    F("gas_price_eur_mwh") = gas_t;
    F("oil_price_usd_bbl") = oil[static_cast<std::size_t>(d)];
    F("coal_price_usd_t") = coal[static_cast<std::size_t>(d)];
    F("co2_price_eur_t") = co2[static_cast<std::size_t>(d)];

    double res = load - 0.9 * solar - 0.85 * wind;
    double mu = -15.0 + 0.0022 * res + 1.2e-8 * res * res + 1.1 * gas_t +
                0.45 * co2[static_cast<std::size_t>(d)] +
                0.25 * oil[static_cast<std::size_t>(d)] - 3.0e-4 * nuc_fr;
    double sigma = opt.constant_sigma ? 4.0 : 2.5 + 0.09 * gas_t;
    sigma *= opt.noise_scale;
    out.true_mu[static_cast<std::size_t>(t)] = mu;
    out.true_sigma[static_cast<std::size_t>(t)] = sigma;
    double noise = rng.normal(0.0, 1.0);
    f.target(t) = mu + sigma * noise;
  }
  return out;
}

// Ground-truth sidecar: timestamp,true_mu,true_sigma.
inline void write_truth_csv(const std::string& path, const TimeSeriesFrame& frame,
                            const std::vector<double>& mu, const std::vector<double>& sigma) {
  CsvWriter out(path);
  out.row({"timestamp", "true_mu", "true_sigma"});
  for (std::size_t i = 0; i < mu.size(); ++i)
    out.row({format_timestamp(frame.start + static_cast<HourStamp>(i)), format_double(mu[i]),
             format_double(sigma[i])});
  out.close();
}

struct TruthFile {
  std::vector<HourStamp> times;
  std::vector<double> mu, sigma;
};

inline TruthFile read_truth_csv(const std::string& path) {
  CsvTable table = read_csv(path);
  auto ct = static_cast<std::size_t>(table.column_or_fail("timestamp", path));
  auto cm = static_cast<std::size_t>(table.column_or_fail("true_mu", path));
  auto cs = static_cast<std::size_t>(table.column_or_fail("true_sigma", path));
  TruthFile out;
  for (const auto& row : table.rows) {
    out.times.push_back(parse_timestamp_or_fail(row[ct]));
    out.mu.push_back(parse_cell_or_fail(row[cm], path + ": true_mu"));
    out.sigma.push_back(parse_cell_or_fail(row[cs], path + ": true_sigma"));
  }
  return out;
}

}  // namespace epf
