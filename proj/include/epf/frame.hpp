// TimeSeriesFrame: an hourly feature matrix plus the day-ahead price
// target and a per-row validity mask. Timestamps form a contiguous
// hourly grid; hours that are missing from a source file become rows
// with valid = false so that indexing stays aligned with wall time.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "epf/csv.hpp"
#include "epf/error.hpp"
#include "epf/timeutil.hpp"

namespace epf {

inline const std::string kTimestampColumn = "timestamp";
inline const std::string kTargetColumn = "price_da_eur_mwh";

// Feature set and units: MW for power columns, EUR/MWh gas, USD/bbl oil,
// USD/t coal, EUR/t CO2.
inline std::vector<std::string> canonical_feature_columns() {
  return {
      "load_da_delu", "solar_da_delu", "wind_da_delu",
      "res_load_at", "res_load_be", "res_load_ch", "res_load_cz",
      "res_load_dk1", "res_load_dk2", "res_load_fr", "res_load_nl",
      "res_load_no2", "res_load_pl",
      "nuc_avail_delu", "nuc_avail_fr",
      "gas_price_eur_mwh", "oil_price_usd_bbl",
      "coal_price_usd_t", "co2_price_eur_t",
  };
}

// Half-open interval of row indices.
struct IndexRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::int64_t size() const { return hi - lo; }
  bool empty() const { return hi <= lo; }
};

struct TimeSeriesFrame {
  HourStamp start = 0;                 // timestamp of row 0
  std::vector<std::string> columns;    // feature column names
  Eigen::MatrixXd features;            // rows() x columns.size(), NaN where missing
  Eigen::VectorXd target;              // NaN where missing
  std::vector<char> valid;             // complete-data mask per row

  std::int64_t rows() const { return static_cast<std::int64_t>(valid.size()); }
  std::int64_t n_features() const { return static_cast<std::int64_t>(columns.size()); }
  HourStamp time_at(std::int64_t row) const { return start + row; }

  std::int64_t index_of(HourStamp t) const { return t - start; }

  bool row_valid(std::int64_t row) const {
    return row >= 0 && row < rows() && valid[static_cast<std::size_t>(row)];
  }

  std::int64_t count_valid(IndexRange r) const {
    std::int64_t lo = std::max<std::int64_t>(r.lo, 0);
    std::int64_t hi = std::min<std::int64_t>(r.hi, rows());
    std::int64_t n = 0;
    for (std::int64_t i = lo; i < hi; ++i) n += valid[static_cast<std::size_t>(i)];
    return n;
  }
};

struct FrameLoadStats {
  std::int64_t rows_read = 0;
  std::int64_t rows_masked = 0;   // present rows with missing/unparsable cells
  std::int64_t rows_inserted = 0; // grid rows inserted for skipped hours
};

// Loads a canonical frame CSV. When `schema` is non-empty the header's
// feature set must equal it exactly (order-insensitive; columns are
// stored in schema order).
inline TimeSeriesFrame load_frame_csv(const std::string& path,
                                      const std::vector<std::string>& schema = {},
                                      FrameLoadStats* stats = nullptr) {
  CsvTable t = read_csv(path);
  if (t.header.empty() || t.header[0] != kTimestampColumn)
    fail(ErrorClass::schema, path + ": first column must be '" + kTimestampColumn + "'");
  int target_col = t.column_or_fail(kTargetColumn, path);

  std::vector<std::string> feature_names;
  std::vector<int> feature_cols;
  for (std::size_t c = 1; c < t.header.size(); ++c) {
    if (static_cast<int>(c) == target_col) continue;
    feature_names.push_back(t.header[c]);
    feature_cols.push_back(static_cast<int>(c));
  }

  if (!schema.empty()) {
    std::set<std::string> have(feature_names.begin(), feature_names.end());
    std::set<std::string> want(schema.begin(), schema.end());
    if (have != want) {
      std::string msg = path + ": header does not match schema;";
      for (const auto& w : want)
        if (!have.count(w)) msg += " missing '" + w + "'";
      for (const auto& h : have)
        if (!want.count(h)) msg += " unexpected '" + h + "'";
      fail(ErrorClass::schema, msg);
    }
    // reorder to schema order
    std::vector<int> reordered;
    for (const auto& name : schema) {
      for (std::size_t i = 0; i < feature_names.size(); ++i)
        if (feature_names[i] == name) reordered.push_back(feature_cols[i]);
    }
    feature_names = schema;
    feature_cols = reordered;
  }

  if (t.rows.empty()) fail(ErrorClass::data, path + ": no data rows");

  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::int64_t f = static_cast<std::int64_t>(feature_names.size());

  // first pass: timestamps
  std::vector<HourStamp> times(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.rows[r].empty()) fail(ErrorClass::io, path + ": empty row");
    times[r] = parse_timestamp_or_fail(t.rows[r][0]);
    if (r > 0 && times[r] <= times[r - 1])
      fail(ErrorClass::data, path + ": non-monotone timestamps at row " + std::to_string(r + 1));
  }

  TimeSeriesFrame frame;
  frame.start = times.front();
  frame.columns = feature_names;
  const std::int64_t n = times.back() - times.front() + 1;
  frame.features = Eigen::MatrixXd::Constant(n, f, nan);
  frame.target = Eigen::VectorXd::Constant(n, nan);
  frame.valid.assign(static_cast<std::size_t>(n), 0);

  FrameLoadStats st;
  st.rows_read = static_cast<std::int64_t>(t.rows.size());
  st.rows_inserted = n - st.rows_read;

  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& cells = t.rows[r];
    std::int64_t row = times[r] - frame.start;
    bool complete = true;
    for (std::int64_t c = 0; c < f; ++c) {
      double v = nan;
      std::size_t col = static_cast<std::size_t>(feature_cols[c]);
      if (col >= cells.size() || !parse_cell(cells[col], v)) complete = false;
      frame.features(row, c) = v;
    }
    double tv = nan;
    if (static_cast<std::size_t>(target_col) >= cells.size() ||
        !parse_cell(cells[static_cast<std::size_t>(target_col)], tv))
      complete = false;
    frame.target(row) = tv;
    frame.valid[static_cast<std::size_t>(row)] = complete ? 1 : 0;
    if (!complete) ++st.rows_masked;
  }

  if (stats) *stats = st;
  return frame;
}

inline void write_frame_csv(const TimeSeriesFrame& frame, const std::string& path,
                            const std::string& config_hash = {}) {
  CsvWriter w(path);
  if (!config_hash.empty()) w.comment("config_hash=" + config_hash);
  std::vector<std::string> header{kTimestampColumn};
  header.insert(header.end(), frame.columns.begin(), frame.columns.end());
  header.push_back(kTargetColumn);
  w.row(header);
  std::vector<std::string> cells(header.size());
  for (std::int64_t r = 0; r < frame.rows(); ++r) {
    cells[0] = format_timestamp(frame.time_at(r));
    for (std::int64_t c = 0; c < frame.n_features(); ++c) {
      double v = frame.features(r, c);
      cells[static_cast<std::size_t>(c) + 1] = std::isfinite(v) ? format_double(v) : "";
    }
    double tv = frame.target(r);
    cells.back() = std::isfinite(tv) ? format_double(tv) : "";
    w.row(cells);
  }
  w.close();
}

}  // namespace epf
