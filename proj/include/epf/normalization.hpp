// Max-normalization fitted on a training range. Prices can be negative,
// so scales are maxima of absolute values, keeping normalized data in
// [-1, 1]; an all-zero column falls back to scale 1.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "epf/error.hpp"
#include "epf/frame.hpp"

namespace epf {

struct NormalizationSpec {
  std::vector<std::string> columns;  // feature names the scales refer to
  std::vector<double> scales;        // one per feature column
  double target_scale = 1.0;

  bool matches(const TimeSeriesFrame& frame) const {
    return columns == frame.columns;
  }
};

inline NormalizationSpec fit_normalization(const TimeSeriesFrame& frame, IndexRange train_range) {
  if (train_range.empty())
    fail(ErrorClass::data, "fit_normalization: empty train range");
  std::int64_t lo = std::max<std::int64_t>(train_range.lo, 0);
  std::int64_t hi = std::min<std::int64_t>(train_range.hi, frame.rows());

  NormalizationSpec spec;
  spec.columns = frame.columns;
  spec.scales.assign(frame.columns.size(), 0.0);

  std::int64_t n_valid = 0;
  double target_max = 0.0;
  for (std::int64_t r = lo; r < hi; ++r) {
    if (!frame.valid[static_cast<std::size_t>(r)]) continue;
    ++n_valid;
    for (std::int64_t c = 0; c < frame.n_features(); ++c)
      spec.scales[static_cast<std::size_t>(c)] =
          std::max(spec.scales[static_cast<std::size_t>(c)], std::abs(frame.features(r, c)));
    target_max = std::max(target_max, std::abs(frame.target(r)));
  }
  if (n_valid == 0)
    fail(ErrorClass::data, "fit_normalization: no valid rows in train range");

  for (double& s : spec.scales)
    if (s == 0.0) s = 1.0;
  spec.target_scale = target_max == 0.0 ? 1.0 : target_max;
  return spec;
}

}  // namespace epf
