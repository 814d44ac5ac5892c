#include "hvacd/ingestion.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "hvacd/errors.hpp"

namespace hvacd {

namespace {

constexpr auto kDay = std::chrono::minutes{24 * 60};

// Fills NaN entries by linear interpolation between the nearest finite
// neighbours; leading/trailing gaps take the nearest finite value.
void interpolate_gaps(Eigen::Ref<Vector> v) {
  const Eigen::Index n = v.size();
  Eigen::Index prev = -1;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isnan(v[i])) continue;
    if (prev + 1 < i) {
      for (Eigen::Index k = prev + 1; k < i; ++k) {
        if (prev < 0) {
          v[k] = v[i];
        } else {
          const double w = double(k - prev) / double(i - prev);
          v[k] = (1.0 - w) * v[prev] + w * v[i];
        }
      }
    }
    prev = i;
  }
  if (prev >= 0) {
    for (Eigen::Index k = prev + 1; k < n; ++k) v[k] = v[prev];
  }
}

}  // namespace

int DailyLoadMatrix::index_of(Date d) const {
  const auto it = std::lower_bound(day_dates.begin(), day_dates.end(), d);
  return (it != day_dates.end() && *it == d) ? static_cast<int>(it - day_dates.begin()) : -1;
}

DailyLoadMatrix DailyLoadMatrix::select(const std::vector<Date>& dates) const {
  DailyLoadMatrix out;
  out.samples.resize(samples.rows(), static_cast<Eigen::Index>(dates.size()));
  out.day_dates = dates;
  for (std::size_t j = 0; j < dates.size(); ++j) {
    const int idx = index_of(dates[j]);
    if (idx < 0) throw DataError("day " + format_date(dates[j]) + " not present in load matrix");
    out.samples.col(static_cast<Eigen::Index>(j)) = samples.col(idx);
  }
  return out;
}

void DailyLoadMatrix::validate() const {
  if (static_cast<std::size_t>(samples.cols()) != day_dates.size()) {
    throw DataError("day matrix column count does not match dates");
  }
  for (std::size_t j = 1; j < day_dates.size(); ++j) {
    if (day_dates[j] <= day_dates[j - 1]) throw DataError("day dates not sorted/unique");
  }
  if (!samples.allFinite() || (samples.size() > 0 && samples.minCoeff() < 0.0)) {
    throw DataError("day matrix contains negative or non-finite samples");
  }
}

int TemperatureMatrix::index_of(Date d) const {
  const auto it = std::lower_bound(day_dates.begin(), day_dates.end(), d);
  return (it != day_dates.end() && *it == d) ? static_cast<int>(it - day_dates.begin()) : -1;
}

TemperatureMatrix TemperatureMatrix::select(const std::vector<Date>& dates) const {
  TemperatureMatrix out;
  out.temps.resize(temps.rows(), static_cast<Eigen::Index>(dates.size()));
  out.day_dates = dates;
  for (std::size_t j = 0; j < dates.size(); ++j) {
    const int idx = index_of(dates[j]);
    if (idx < 0) throw DataError("day " + format_date(dates[j]) + " not present in temperature matrix");
    out.temps.col(static_cast<Eigen::Index>(j)) = temps.col(idx);
  }
  return out;
}

TimeSeries resample_mean(const TimeSeries& ts, std::chrono::minutes interval) {
  if (interval.count() <= 0 || kDay.count() % interval.count() != 0) {
    throw DataError("resample interval must be a positive divisor of 24 h");
  }
  if (ts.empty()) throw DataError("empty series");
  const auto width = std::chrono::duration_cast<std::chrono::seconds>(interval);

  std::vector<TimePoint> out_t;
  std::vector<double> out_v;
  TimePoint bin_start = TimePoint{std::chrono::floor<std::chrono::minutes>(ts.timestamps()[0])};
  bin_start = TimePoint{} + (bin_start.time_since_epoch() / width) * width;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const TimePoint t = ts.timestamps()[i];
    const TimePoint b = TimePoint{} + (t.time_since_epoch() / width) * width;
    if (b != bin_start) {
      if (count > 0) {
        out_t.push_back(bin_start);
        out_v.push_back(sum / double(count));
      }
      bin_start = b;
      sum = 0.0;
      count = 0;
    }
    sum += ts.values()[i];
    ++count;
  }
  if (count > 0) {
    out_t.push_back(bin_start);
    out_v.push_back(sum / double(count));
  }
  return TimeSeries(std::move(out_t), std::move(out_v));
}

DayMatrixBuild build_day_matrix(const TimeSeries& ts, double max_missing_fraction) {
  if (ts.empty()) throw DataError("empty series");
  if (!(max_missing_fraction >= 0.0 && max_missing_fraction <= 1.0)) {
    throw DataError("max_missing_fraction must lie in [0, 1]");
  }
  const auto slot = std::chrono::seconds{kMinutesPerSlot * 60};

  std::map<Date, Vector> days;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const TimePoint t = ts.timestamps()[i];
    const Date d = date_of(t);
    const auto offset = t - TimePoint{d};
    if (offset % slot != std::chrono::seconds{0}) {
      throw DataError("timestamp " + format_timestamp(t) + " is not on the 15-minute grid");
    }
    auto [it, inserted] = days.try_emplace(d);
    if (inserted) it->second = Vector::Constant(kSlotsPerDay, std::nan(""));
    it->second[offset / slot] = ts.values()[i];
  }

  // Fill the calendar range so that fully absent days are reported as dropped.
  DayMatrixBuild out;
  std::vector<Vector> kept;
  const Date first = days.begin()->first;
  const Date last = days.rbegin()->first;
  for (Date d = first; d <= last; d += std::chrono::days{1}) {
    const auto it = days.find(d);
    if (it == days.end()) {
      out.dropped.push_back(d);
      continue;
    }
    Vector& col = it->second;
    const auto missing = col.array().isNaN().count();
    if (double(missing) > max_missing_fraction * kSlotsPerDay || missing == kSlotsPerDay) {
      out.dropped.push_back(d);
      continue;
    }
    interpolate_gaps(col);
    kept.push_back(col);
    out.matrix.day_dates.push_back(d);
  }
  if (kept.empty()) throw DataError("no usable days: every day exceeds the missing-bin budget");

  out.matrix.samples.resize(kSlotsPerDay, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) out.matrix.samples.col(static_cast<Eigen::Index>(j)) = kept[j];
  return out;
}

TemperatureMatrix build_temperature_matrix(const TimeSeries& ts, const std::vector<Date>& day_dates) {
  constexpr int kMaxMissingHours = 6;
  const TimeSeries hourly = resample_mean(ts, std::chrono::minutes{60});

  std::map<Date, Vector> days;
  for (std::size_t i = 0; i < hourly.size(); ++i) {
    const TimePoint t = hourly.timestamps()[i];
    const Date d = date_of(t);
    auto [it, inserted] = days.try_emplace(d);
    if (inserted) it->second = Vector::Constant(kHoursPerDay, std::nan(""));
    it->second[std::chrono::duration_cast<std::chrono::hours>(t - TimePoint{d}).count()] = hourly.values()[i];
  }

  TemperatureMatrix out;
  out.day_dates = day_dates;
  out.temps.resize(kHoursPerDay, static_cast<Eigen::Index>(day_dates.size()));
  for (std::size_t j = 0; j < day_dates.size(); ++j) {
    const auto it = days.find(day_dates[j]);
    if (it == days.end()) {
      throw DataError("temperature series does not cover " + format_date(day_dates[j]));
    }
    Vector col = it->second;
    const auto missing = col.array().isNaN().count();
    if (missing > kMaxMissingHours) {
      throw DataError("temperature for " + format_date(day_dates[j]) + " has " + std::to_string(missing) +
                      " missing hours (max 6)");
    }
    interpolate_gaps(col);
    if (col.minCoeff() < -40.0 || col.maxCoeff() > 60.0) {
      throw DataError("temperature for " + format_date(day_dates[j]) + " outside [-40, 60] degC");
    }
    out.temps.col(static_cast<Eigen::Index>(j)) = col;
  }
  return out;
}

TimeSeries to_series(const DailyLoadMatrix& m) {
  std::vector<TimePoint> ts;
  std::vector<double> vs;
  const auto slot = std::chrono::minutes{kMinutesPerSlot};
  for (int j = 0; j < m.days(); ++j) {
    for (int i = 0; i < m.samples_per_day(); ++i) {
      ts.push_back(TimePoint{m.day_dates[j]} + i * slot);
      vs.push_back(m.samples(i, j));
    }
  }
  return TimeSeries(std::move(ts), std::move(vs));
}

}  // namespace hvacd
