// Training sample construction: one normalized 96-hour feature block per
// hour whose trailing window is fully valid.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "epf/frame.hpp"
#include "epf/normalization.hpp"
#include "epf/timeutil.hpp"

namespace epf {

inline constexpr int kDefaultSequenceLength = 96;

struct SampleWindow {
  Eigen::MatrixXd inputs;   // seq_len x F, normalized
  double target = 0.0;      // normalized price at target_time
  HourStamp target_time = 0;
};

// Emits one window per hour t in `range` such that rows t-seq_len+1 .. t
// are all valid. Inputs and target are z-scored with the given normalization.
inline std::vector<SampleWindow> make_windows(const TimeSeriesFrame& frame,
                                              const NormalizationSpec& spec,
                                              IndexRange range,
                                              int seq_len = kDefaultSequenceLength) {
  if (!spec.matches(frame))
    fail(ErrorClass::data, "make_windows: normalization spec does not match frame columns");
  const std::int64_t f = frame.n_features();
  std::vector<SampleWindow> out;

  std::int64_t lo = std::max<std::int64_t>(range.lo, 0);
  std::int64_t hi = std::min<std::int64_t>(range.hi, frame.rows());

  // run length of valid rows ending at each candidate target
  std::int64_t run = 0;
  for (std::int64_t r = std::max<std::int64_t>(0, lo - seq_len + 1); r < lo; ++r)
    run = frame.valid[static_cast<std::size_t>(r)] ? run + 1 : 0;

  for (std::int64_t t = lo; t < hi; ++t) {
    run = frame.valid[static_cast<std::size_t>(t)] ? run + 1 : 0;
    if (run < seq_len || t - seq_len + 1 < 0) continue;
    SampleWindow w;
    w.inputs.resize(seq_len, f);
    for (int i = 0; i < seq_len; ++i) {
      std::int64_t row = t - seq_len + 1 + i;
      for (std::int64_t c = 0; c < f; ++c)
        w.inputs(i, c) = frame.features(row, c) / spec.scales[static_cast<std::size_t>(c)];
    }
    w.target = frame.target(t) / spec.target_scale;
    w.target_time = frame.time_at(t);
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace epf
