// Rolling weekly fold planning. Test weeks tile the post-warmup period
// on ISO week boundaries (Monday 00:00 UTC); each fold trains on exactly
// the `train_hours` valid hours preceding its test week, with the most
// recent fraction forming the validation range. Weeks with fewer than
// `min_week_hours` valid hours are dropped.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "epf/error.hpp"
#include "epf/frame.hpp"
#include "epf/timeutil.hpp"

namespace epf {

struct Fold {
  IndexRange train;
  IndexRange val;
  IndexRange test;
};

struct FoldPlan {
  std::vector<Fold> folds;
};

struct FoldOptions {
  std::int64_t train_hours = 17000;  // valid hours of train+val history
  double val_fraction = 0.10;        // chronological tail of the history
  std::int64_t min_week_hours = 120; // valid hours a test week must keep
};

inline FoldPlan plan_folds(const TimeSeriesFrame& frame, const FoldOptions& opts = {}) {
  const std::int64_t n = frame.rows();
  if (opts.train_hours < 1) fail(ErrorClass::config, "plan_folds: train_hours must be positive");

  // prefix[i] = number of valid rows before index i
  std::vector<std::int64_t> prefix(static_cast<std::size_t>(n) + 1, 0);
  for (std::int64_t i = 0; i < n; ++i)
    prefix[static_cast<std::size_t>(i) + 1] =
        prefix[static_cast<std::size_t>(i)] + (frame.valid[static_cast<std::size_t>(i)] ? 1 : 0);

  const std::int64_t val_hours =
      static_cast<std::int64_t>(opts.train_hours * opts.val_fraction + 0.5);

  // index of the k-th valid row counted backwards from (exclusive) `end`
  auto backtrack_valid = [&](std::int64_t end, std::int64_t count) -> std::int64_t {
    std::int64_t i = end;
    std::int64_t seen = 0;
    while (i > 0 && seen < count) {
      --i;
      seen += frame.valid[static_cast<std::size_t>(i)];
    }
    return seen == count ? i : -1;
  };

  // first Monday 00:00 with at least train_hours valid rows before it
  HourStamp first_monday = week_start(frame.start);
  if (first_monday < frame.start) first_monday += kHoursPerWeek;

  FoldPlan plan;
  for (HourStamp monday = first_monday; monday - frame.start < n; monday += kHoursPerWeek) {
    std::int64_t test_lo = monday - frame.start;
    std::int64_t test_hi = std::min<std::int64_t>(test_lo + kHoursPerWeek, n);
    if (prefix[static_cast<std::size_t>(test_lo)] < opts.train_hours) continue;

    std::int64_t valid_in_week = prefix[static_cast<std::size_t>(test_hi)] -
                                 prefix[static_cast<std::size_t>(test_lo)];
    if (valid_in_week < opts.min_week_hours) continue;

    std::int64_t val_lo = backtrack_valid(test_lo, val_hours);
    std::int64_t train_lo = backtrack_valid(val_lo, opts.train_hours - val_hours);
    if (val_lo < 0 || train_lo < 0) continue;

    plan.folds.push_back(Fold{IndexRange{train_lo, val_lo},
                              IndexRange{val_lo, test_lo},
                              IndexRange{test_lo, test_hi}});
  }

  if (plan.folds.empty())
    fail(ErrorClass::data,
         "plan_folds: insufficient history (need " + std::to_string(opts.train_hours) +
             " valid hours before a test week with >= " + std::to_string(opts.min_week_hours) +
             " valid hours)");
  return plan;
}

}  // namespace epf
