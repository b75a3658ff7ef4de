// Prediction over a frame range: eval-mode forward per complete window,
// denormalized back to price units.
#pragma once

#include <string>
#include <vector>

#include "epf/csv.hpp"
#include "epf/error.hpp"
#include "epf/frame.hpp"
#include "epf/lstm.hpp"
#include "epf/timeutil.hpp"
#include "epf/windows.hpp"

namespace epf {

struct ForecastDistribution {
  std::vector<HourStamp> times;
  std::vector<double> mu;     // EUR/MWh
  std::vector<double> sigma;  // EUR/MWh
};

// Hours in `range` without a complete valid window are absent from the
// output.
template <typename S>
ForecastDistribution predict(const LstmModel<S>& model, const TimeSeriesFrame& frame,
                             IndexRange range) {
  if (!model.norm.matches(frame))
    fail(ErrorClass::data, "predict: normalization columns do not match frame columns");
  std::vector<SampleWindow> windows = make_windows(frame, model.norm, range, model.config.seq_len);
  ForecastDistribution fc;
  if (windows.empty()) return fc;

  Rng rng(0);
  std::vector<MatX<S>> seq;
  ForwardCache<S> cache;
  const std::size_t bs = static_cast<std::size_t>(std::max(1, model.config.batch_size));
  const double scale = model.norm.target_scale;
  for (std::size_t begin = 0; begin < windows.size(); begin += bs) {
    std::size_t count = std::min(bs, windows.size() - begin);
    const Eigen::Index steps = windows[begin].inputs.rows();
    seq.resize(static_cast<std::size_t>(steps));
    for (Eigen::Index t = 0; t < steps; ++t) {
      MatX<S>& m = seq[static_cast<std::size_t>(t)];
      m.resize(static_cast<Eigen::Index>(count), windows[begin].inputs.cols());
      for (std::size_t b = 0; b < count; ++b)
        m.row(static_cast<Eigen::Index>(b)) =
            windows[begin + b].inputs.row(t).template cast<S>();
    }
    lstm_forward_batch(model, seq, ForwardMode::eval, rng, cache);
    for (std::size_t b = 0; b < count; ++b) {
      fc.times.push_back(windows[begin + b].target_time);
      fc.mu.push_back(static_cast<double>(cache.mu(static_cast<Eigen::Index>(b))) * scale);
      fc.sigma.push_back(static_cast<double>(cache.sigma(static_cast<Eigen::Index>(b))) * scale);
    }
  }
  return fc;
}

// forecast.csv: `timestamp,mu,sigma,price_true`. Truth values are looked
// up in the frame; hours whose truth is missing keep an empty cell.
inline void write_forecast_csv(const std::string& path, const ForecastDistribution& fc,
                               const TimeSeriesFrame& frame, const std::string& config_hash = {}) {
  CsvWriter out(path);
  if (!config_hash.empty()) out.comment("config_hash=" + config_hash);
  out.row({"timestamp", "mu", "sigma", "price_true"});
  for (std::size_t i = 0; i < fc.times.size(); ++i) {
    std::string truth;
    Eigen::Index row = frame.index_of(fc.times[i]);
    if (row >= 0 && frame.row_valid(row)) truth = format_double(frame.target(row));
    out.row({format_timestamp(fc.times[i]), format_double(fc.mu[i]), format_double(fc.sigma[i]),
             truth});
  }
  out.close();
}

struct ForecastFile {
  ForecastDistribution forecast;
  std::vector<std::pair<HourStamp, double>> truth;  // rows with a price_true cell
};

inline ForecastFile read_forecast_csv(const std::string& path) {
  CsvTable table = read_csv(path);
  auto c_time = static_cast<std::size_t>(table.column_or_fail("timestamp", path));
  auto c_mu = static_cast<std::size_t>(table.column_or_fail("mu", path));
  auto c_sigma = static_cast<std::size_t>(table.column_or_fail("sigma", path));
  auto c_true = static_cast<std::size_t>(table.column_or_fail("price_true", path));
  ForecastFile out;
  for (const auto& row : table.rows) {
    HourStamp t = parse_timestamp_or_fail(row[c_time]);
    out.forecast.times.push_back(t);
    out.forecast.mu.push_back(parse_cell_or_fail(row[c_mu], path + ": mu"));
    out.forecast.sigma.push_back(parse_cell_or_fail(row[c_sigma], path + ": sigma"));
    if (!row[c_true].empty())
      out.truth.emplace_back(t, parse_cell_or_fail(row[c_true], path + ": price_true"));
  }
  return out;
}

}  // namespace epf
