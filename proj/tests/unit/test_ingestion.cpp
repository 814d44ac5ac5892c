#include <catch_amalgamated.hpp>

#include <sstream>

#include "hvacd/errors.hpp"
#include "hvacd/ingestion.hpp"

using namespace hvacd;
using Catch::Matchers::ContainsSubstring;
using std::chrono::minutes;

namespace {

const Date kDay = parse_date("2023-07-01");

TimeSeries minute_series(Date day, const std::vector<double>& values, int first_minute = 0) {
  std::vector<TimePoint> ts;
  for (std::size_t i = 0; i < values.size(); ++i) ts.push_back(TimePoint{day} + minutes{first_minute + int(i)});
  return TimeSeries(ts, values);
}

TimeSeries slot_series(Date first, const Matrix& days) {
  std::vector<TimePoint> ts;
  std::vector<double> vs;
  for (int d = 0; d < days.cols(); ++d) {
    for (int i = 0; i < days.rows(); ++i) {
      ts.push_back(TimePoint{first + std::chrono::days{d}} + minutes{15 * i});
      vs.push_back(days(i, d));
    }
  }
  return TimeSeries(ts, vs);
}

}  // namespace

TEST_CASE("power csv parses rows in order", "[ingestion]") {
  std::istringstream in("timestamp,kw\n2023-07-01T00:00,1.0\n2023-07-01T00:01,2.0\n2023-07-01 00:02:00,3.0\n");
  const TimeSeries ts = load_power_csv(in);
  REQUIRE(ts.size() == 3);
  CHECK(ts.values()[0] == 1.0);
  CHECK(ts.values()[1] == 2.0);
  CHECK(ts.values()[2] == 3.0);
}

TEST_CASE("power csv errors", "[ingestion]") {
  SECTION("header only") {
    std::istringstream in("timestamp,kw\n");
    CHECK_THROWS_WITH(load_power_csv(in), ContainsSubstring("empty series"));
  }
  SECTION("duplicate timestamp names it") {
    std::istringstream in("timestamp,kw\n2023-07-01T00:00,1\n2023-07-01T00:01,2\n2023-07-01T00:01,3\n");
    CHECK_THROWS_WITH(load_power_csv(in), ContainsSubstring("duplicate") && ContainsSubstring("00:01"));
  }
  SECTION("duplicate kept first when asked") {
    std::istringstream in("timestamp,kw\n2023-07-01T00:01,2\n2023-07-01T00:01,3\n");
    const TimeSeries ts = load_power_csv(in, DuplicatePolicy::KeepFirst);
    REQUIRE(ts.size() == 1);
    CHECK(ts.values()[0] == 2.0);
  }
  SECTION("malformed header") {
    std::istringstream in("time,power\n2023-07-01T00:00,1\n");
    CHECK_THROWS_WITH(load_power_csv(in), ContainsSubstring("header"));
  }
  SECTION("bad rows are listed by line number") {
    std::istringstream in("timestamp,kw\n2023-07-01T00:00,1\nnot-a-time,2\n2023-07-01T00:02,abc\n");
    CHECK_THROWS_WITH(load_power_csv(in), ContainsSubstring("3") && ContainsSubstring("4"));
  }
  SECTION("negative power rejected") {
    std::istringstream in("timestamp,kw\n2023-07-01T00:00,-1\n");
    CHECK_THROWS_AS(load_power_csv(in), DataError);
  }
  SECTION("unsorted rows are sorted") {
    std::istringstream in("timestamp,kw\n2023-07-01T00:02,3\n2023-07-01T00:00,1\n");
    const TimeSeries ts = load_power_csv(in);
    CHECK(ts.values()[0] == 1.0);
  }
}

TEST_CASE("temperature csv allows negatives", "[ingestion]") {
  std::istringstream in("timestamp,temp_c\n2023-01-01T00:00,-3.5\n");
  CHECK(load_temperature_csv(in).values()[0] == -3.5);
}

TEST_CASE("series csv round trip", "[ingestion]") {
  const TimeSeries ts = minute_series(kDay, {0.25, 1.5, 3.125});
  std::ostringstream out;
  write_series_csv(out, "kw", ts);
  std::istringstream in(out.str());
  const TimeSeries back = load_power_csv(in);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.timestamps()[i] == ts.timestamps()[i]);
    CHECK(back.values()[i] == ts.values()[i]);
  }
}

TEST_CASE("resample_mean bins", "[ingestion]") {
  SECTION("constant") {
    const TimeSeries r = resample_mean(minute_series(kDay, std::vector<double>(15, 2.0)), minutes{15});
    REQUIRE(r.size() == 1);
    CHECK(r.values()[0] == 2.0);
  }
  SECTION("0..14 averages to 7") {
    std::vector<double> v;
    double oracle = 0.0;
    for (int i = 0; i < 15; ++i) {
      v.push_back(i);
      oracle += i;
    }
    oracle /= 15.0;
    const TimeSeries r = resample_mean(minute_series(kDay, v), minutes{15});
    CHECK(r.values()[0] == Catch::Approx(oracle).epsilon(1e-15));
    CHECK(oracle == 7.0);
  }
  SECTION("partial bin still emitted") {
    const TimeSeries r = resample_mean(minute_series(kDay, {1, 2, 3, 4, 5}, 30), minutes{15});
    REQUIRE(r.size() == 1);
    CHECK(r.timestamps()[0] == TimePoint{kDay} + minutes{30});
    CHECK(r.values()[0] == 3.0);
  }
  SECTION("interval must divide a day") {
    CHECK_THROWS_AS(resample_mean(minute_series(kDay, {1}), minutes{7}), DataError);
    CHECK_THROWS_AS(resample_mean(minute_series(kDay, {1}), minutes{0}), DataError);
  }
}

TEST_CASE("resample_mean is idempotent and conserves energy", "[ingestion]") {
  std::vector<double> v(1440);
  for (int i = 0; i < 1440; ++i) v[i] = 1.0 + std::sin(i * 0.01) + (i % 7) * 0.3;
  const TimeSeries once = resample_mean(minute_series(kDay, v), minutes{15});
  const TimeSeries twice = resample_mean(once, minutes{15});
  REQUIRE(once.size() == 96);
  REQUIRE(twice.size() == once.size());
  for (std::size_t i = 0; i < once.size(); ++i) CHECK(twice.values()[i] == once.values()[i]);
  double raw = 0.0, res = 0.0;
  for (double x : v) raw += x;
  for (double x : once.values()) res += x * 15.0;
  CHECK(std::abs(raw - res) <= 1e-9 * raw);
}

TEST_CASE("build_day_matrix", "[ingestion]") {
  Matrix two = Matrix::Constant(96, 2, 1.0);
  two.col(1).setConstant(2.0);
  SECTION("complete days") {
    const DayMatrixBuild b = build_day_matrix(slot_series(kDay, two), 0.05);
    CHECK(b.matrix.samples.rows() == 96);
    CHECK(b.matrix.samples.cols() == 2);
    CHECK(b.dropped.empty());
  }
  SECTION("one missing bin interpolated from neighbours") {
    Matrix one(96, 1);
    for (int i = 0; i < 96; ++i) one(i, 0) = i;
    TimeSeries full = slot_series(kDay, one);
    std::vector<TimePoint> ts(full.timestamps().begin(), full.timestamps().end());
    std::vector<double> vs(full.values().begin(), full.values().end());
    ts.erase(ts.begin() + 40);
    vs.erase(vs.begin() + 40);
    const DayMatrixBuild b = build_day_matrix(TimeSeries(ts, vs), 0.05);
    REQUIRE(b.matrix.days() == 1);
    CHECK(b.matrix.samples(40, 0) == Catch::Approx((39.0 + 41.0) / 2.0));
    CHECK(b.matrix.samples.allFinite());
  }
  SECTION("day over the budget dropped and listed") {
    Matrix m = Matrix::Constant(96, 2, 1.0);
    TimeSeries full = slot_series(kDay, m);
    std::vector<TimePoint> ts;
    std::vector<double> vs;
    for (std::size_t i = 0; i < full.size(); ++i) {
      if (i >= 96 && i < 96 + 50) continue;
      ts.push_back(full.timestamps()[i]);
      vs.push_back(full.values()[i]);
    }
    const DayMatrixBuild b = build_day_matrix(TimeSeries(ts, vs), 0.05);
    CHECK(b.matrix.days() == 1);
    REQUIRE(b.dropped.size() == 1);
    CHECK(b.dropped[0] == kDay + std::chrono::days{1});
  }
  SECTION("no usable days") {
    const TimeSeries sparse = minute_series(kDay, {1.0});
    CHECK_THROWS_AS(build_day_matrix(sparse, 0.05), DataError);
  }
}

TEST_CASE("build_temperature_matrix", "[ingestion]") {
  std::vector<TimePoint> ts;
  std::vector<double> vs;
  for (int h = 0; h < 24; ++h) {
    if (h == 13) continue;
    ts.push_back(TimePoint{kDay} + std::chrono::hours{h});
    vs.push_back(h == 12 ? 30.0 : h == 14 ? 32.0 : 30.0);
  }
  const TimeSeries series(ts, vs);
  SECTION("gap interpolated") {
    const TemperatureMatrix t = build_temperature_matrix(series, {kDay});
    CHECK(t.temps(13, 0) == Catch::Approx(31.0));
    CHECK(t.temps(0, 0) == 30.0);
  }
  SECTION("uncovered date named") {
    CHECK_THROWS_WITH(build_temperature_matrix(series, {parse_date("2023-07-05")}),
                      ContainsSubstring("2023-07-05"));
  }
  SECTION("constant series") {
    std::vector<TimePoint> t2;
    for (int h = 0; h < 24; ++h) t2.push_back(TimePoint{kDay} + std::chrono::hours{h});
    const TemperatureMatrix t = build_temperature_matrix(TimeSeries(t2, std::vector<double>(24, 30.0)), {kDay});
    CHECK((t.temps.array() == 30.0).all());
  }
}

TEST_CASE("day matrix select and validate", "[ingestion]") {
  DailyLoadMatrix m;
  m.samples = Matrix::Ones(96, 3);
  m.day_dates = {kDay, kDay + std::chrono::days{1}, kDay + std::chrono::days{2}};
  CHECK_NOTHROW(m.validate());
  const DailyLoadMatrix s = m.select({kDay + std::chrono::days{2}});
  CHECK(s.days() == 1);
  CHECK_THROWS_AS(m.select({kDay - std::chrono::days{1}}), DataError);
  m.samples(0, 0) = -1.0;
  CHECK_THROWS_AS(m.validate(), DataError);
}

TEST_CASE("timestamp parsing", "[ingestion]") {
  CHECK(parse_timestamp("2023-07-01T01:15") == TimePoint{kDay} + minutes{75});
  CHECK(parse_timestamp("2023-07-01 01:15:30") == TimePoint{kDay} + minutes{75} + std::chrono::seconds{30});
  CHECK_THROWS_AS(parse_timestamp("2023-13-01T00:00"), DataError);
  CHECK_THROWS_AS(parse_timestamp("yesterday"), DataError);
  CHECK(format_date(kDay) == "2023-07-01");
}
