#pragma once

#include <chrono>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hvacd {

// All timestamps are naive local time. They are carried on the system clock
// without any zone conversion so that every calendar day has 24 hours.
using TimePoint = std::chrono::sys_seconds;
using Date = std::chrono::sys_days;

/// Parses `YYYY-MM-DD[T| ]HH:MM[:SS]`. Throws DataError on anything else.
TimePoint parse_timestamp(std::string_view text);
/// Parses `YYYY-MM-DD`.
Date parse_date(std::string_view text);

std::string format_timestamp(TimePoint tp);
std::string format_date(Date d);

inline Date date_of(TimePoint tp) { return std::chrono::floor<std::chrono::days>(tp); }

/// Ordered samples of one quantity (kW or degC).
///
/// Timestamps are strictly increasing and every value is finite. Gaps are
/// allowed; resampling marks a bin as missing simply by not emitting it.
class TimeSeries {
 public:
  TimeSeries() = default;
  /// Validates ordering and finiteness; throws DataError on violation.
  TimeSeries(std::vector<TimePoint> timestamps, std::vector<double> values);

  std::size_t size() const { return timestamps_.size(); }
  bool empty() const { return timestamps_.empty(); }

  std::span<const TimePoint> timestamps() const { return timestamps_; }
  std::span<const double> values() const { return values_; }

 private:
  std::vector<TimePoint> timestamps_;
  std::vector<double> values_;
};

}  // namespace hvacd
