#include "hvacd/timeseries.hpp"

#include <cmath>
#include <cstdio>

#include "hvacd/errors.hpp"

namespace hvacd {

namespace {

bool read_digits(std::string_view text, std::size_t pos, std::size_t count, int& out) {
  if (pos + count > text.size()) return false;
  int v = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const char c = text[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
    s.remove_suffix(1);
  return s;
}

}  // namespace

Date parse_date(std::string_view text) {
  text = trim(text);
  int y = 0, m = 0, d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !read_digits(text, 0, 4, y) ||
      !read_digits(text, 5, 2, m) || !read_digits(text, 8, 2, d)) {
    throw DataError("invalid date '" + std::string(text) + "'");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(m)},
                                        std::chrono::day{unsigned(d)}};
  if (!ymd.ok()) throw DataError("invalid date '" + std::string(text) + "'");
  return Date{ymd};
}

TimePoint parse_timestamp(std::string_view text) {
  text = trim(text);
  if (text.size() < 16 || (text[10] != 'T' && text[10] != ' ')) {
    throw DataError("invalid timestamp '" + std::string(text) + "'");
  }
  const Date day = parse_date(text.substr(0, 10));
  int hh = 0, mm = 0, ss = 0;
  bool ok = read_digits(text, 11, 2, hh) && text[13] == ':' && read_digits(text, 14, 2, mm);
  if (ok && text.size() > 16) {
    ok = text[16] == ':' && text.size() == 19 && read_digits(text, 17, 2, ss);
  }
  if (!ok || hh > 23 || mm > 59 || ss > 59) {
    throw DataError("invalid timestamp '" + std::string(text) + "'");
  }
  return TimePoint{day} + std::chrono::hours{hh} + std::chrono::minutes{mm} + std::chrono::seconds{ss};
}

std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                unsigned(ymd.day()));
  return buf;
}

std::string format_timestamp(TimePoint tp) {
  const Date d = date_of(tp);
  const auto secs = (tp - TimePoint{d}).count();
  char buf[16];
  std::snprintf(buf, sizeof buf, "T%02lld:%02lld:%02lld", static_cast<long long>(secs / 3600),
                static_cast<long long>((secs / 60) % 60), static_cast<long long>(secs % 60));
  return format_date(d) + buf;
}

TimeSeries::TimeSeries(std::vector<TimePoint> timestamps, std::vector<double> values)
    : timestamps_(std::move(timestamps)), values_(std::move(values)) {
  if (timestamps_.size() != values_.size()) {
    throw DataError("timestamp/value length mismatch");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw DataError("non-finite value at " + format_timestamp(timestamps_[i]));
    }
    if (i > 0 && timestamps_[i] <= timestamps_[i - 1]) {
      throw DataError("timestamps not strictly increasing at " + format_timestamp(timestamps_[i]));
    }
  }
}

}  // namespace hvacd
