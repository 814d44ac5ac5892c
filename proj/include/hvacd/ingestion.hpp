#pragma once

#include <chrono>
#include <iosfwd>
#include <string>
#include <vector>

#include "hvacd/timeseries.hpp"
#include "hvacd/types.hpp"

namespace hvacd {

/// N x D grid of interval-average power (kW), one column per calendar day.
struct DailyLoadMatrix {
  Matrix samples;
  std::vector<Date> day_dates;

  int samples_per_day() const { return static_cast<int>(samples.rows()); }
  int days() const { return static_cast<int>(samples.cols()); }
  /// Column index of `d`, or -1.
  int index_of(Date d) const;
  /// Sub-matrix restricted to `dates` (each must be present).
  DailyLoadMatrix select(const std::vector<Date>& dates) const;
  /// Throws DataError if any invariant is broken.
  void validate() const;
};

/// 24 x D hourly outdoor temperature (degC), aligned with a DailyLoadMatrix.
struct TemperatureMatrix {
  Matrix temps;
  std::vector<Date> day_dates;

  int days() const { return static_cast<int>(temps.cols()); }
  int index_of(Date d) const;
  TemperatureMatrix select(const std::vector<Date>& dates) const;
};

struct DayMatrixBuild {
  DailyLoadMatrix matrix;
  std::vector<Date> dropped;  // days over the missing-bin budget
};

enum class DuplicatePolicy { Reject, KeepFirst };

/// Reads a two-column CSV whose header must be `timestamp,<value_column>`.
/// Negative values are rejected when `nonnegative` is set.
TimeSeries load_series_csv(std::istream& in, const std::string& value_column, bool nonnegative,
                           DuplicatePolicy duplicates = DuplicatePolicy::Reject);

inline TimeSeries load_power_csv(std::istream& in, DuplicatePolicy dup = DuplicatePolicy::Reject) {
  return load_series_csv(in, "kw", true, dup);
}
inline TimeSeries load_temperature_csv(std::istream& in, DuplicatePolicy dup = DuplicatePolicy::Reject) {
  return load_series_csv(in, "temp_c", false, dup);
}
inline TimeSeries load_truth_csv(std::istream& in, DuplicatePolicy dup = DuplicatePolicy::Reject) {
  return load_series_csv(in, "kw_hvac", true, dup);
}

TimeSeries load_series_file(const std::string& path, const std::string& value_column, bool nonnegative,
                            DuplicatePolicy duplicates = DuplicatePolicy::Reject);

void write_series_csv(std::ostream& out, const std::string& value_column, const TimeSeries& ts);

/// Arithmetic mean over bins [t, t + interval) anchored at midnight. Empty
/// bins are not emitted. The interval must divide 24 h.
TimeSeries resample_mean(const TimeSeries& ts, std::chrono::minutes interval);

/// Places a 15-minute series into day columns. Days with at most
/// `max_missing_fraction` missing bins are kept and gaps linearly
/// interpolated; the rest are dropped and listed.
DayMatrixBuild build_day_matrix(const TimeSeries& ts, double max_missing_fraction);

/// Hourly means per day for each date in `day_dates`. Up to 6 missing hours
/// per day are interpolated.
TemperatureMatrix build_temperature_matrix(const TimeSeries& ts, const std::vector<Date>& day_dates);

/// Flattens day columns back into a 15-minute series.
TimeSeries to_series(const DailyLoadMatrix& m);

}  // namespace hvacd
