#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "hvacd/errors.hpp"
#include "hvacd/ingestion.hpp"

namespace hvacd {

namespace {

std::string_view strip(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = strip(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

}  // namespace

TimeSeries load_series_csv(std::istream& in, const std::string& value_column, bool nonnegative,
                           DuplicatePolicy duplicates) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty series: missing header");
  std::string_view header = line;
  if (header.size() >= 3 && header.substr(0, 3) == "\xEF\xBB\xBF") header.remove_prefix(3);
  header = strip(header);
  const std::string expected = "timestamp," + value_column;
  if (header != expected) {
    throw DataError("malformed header '" + std::string(header) + "', expected '" + expected + "'");
  }

  struct Row {
    TimePoint t;
    double v;
  };
  std::vector<Row> rows;
  std::vector<std::size_t> bad_rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = strip(line);
    if (body.empty()) continue;
    const auto comma = body.find(',');
    bool ok = comma != std::string_view::npos && body.find(',', comma + 1) == std::string_view::npos;
    Row row{};
    if (ok) {
      try {
        row.t = parse_timestamp(body.substr(0, comma));
      } catch (const DataError&) {
        ok = false;
      }
    }
    ok = ok && parse_double(body.substr(comma + 1), row.v) && std::isfinite(row.v) &&
         (!nonnegative || row.v >= 0.0);
    if (ok) {
      rows.push_back(row);
    } else {
      bad_rows.push_back(line_no);
    }
  }
  if (!bad_rows.empty()) {
    std::ostringstream msg;
    msg << "unparseable rows (line numbers):";
    for (std::size_t i = 0; i < bad_rows.size() && i < 10; ++i) msg << ' ' << bad_rows[i];
    if (bad_rows.size() > 10) msg << " ... (" << bad_rows.size() << " total)";
    throw DataError(msg.str());
  }
  if (rows.empty()) throw DataError("empty series");

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.t < b.t; });
  std::vector<TimePoint> ts;
  std::vector<double> vs;
  ts.reserve(rows.size());
  vs.reserve(rows.size());
  for (const Row& r : rows) {
    if (!ts.empty() && ts.back() == r.t) {
      if (duplicates == DuplicatePolicy::Reject) {
        throw DataError("duplicate timestamp " + format_timestamp(r.t));
      }
      continue;  // first occurrence wins
    }
    ts.push_back(r.t);
    vs.push_back(r.v);
  }
  return TimeSeries(std::move(ts), std::move(vs));
}

TimeSeries load_series_file(const std::string& path, const std::string& value_column, bool nonnegative,
                            DuplicatePolicy duplicates) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  try {
    return load_series_csv(in, value_column, nonnegative, duplicates);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_series_csv(std::ostream& out, const std::string& value_column, const TimeSeries& ts) {
  out << "timestamp," << value_column << '\n';
  char buf[32];
  for (std::size_t i = 0; i < ts.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6f", ts.values()[i]);
    out << format_timestamp(ts.timestamps()[i]) << ',' << buf << '\n';
  }
}

}  // namespace hvacd
