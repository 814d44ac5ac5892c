#include <catch_amalgamated.hpp>

#include <numbers>
#include <random>

#include "hvacd/errors.hpp"
#include "hvacd/preprocessing.hpp"
#include "hvacd/synth.hpp"
#include "oracles.hpp"

using namespace hvacd;
using Catch::Matchers::ContainsSubstring;

namespace {

const Date kDay = parse_date("2023-07-01");

std::span<const double> as_span(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

DailyLoadMatrix days_of(const Matrix& m, Date first = kDay) {
  DailyLoadMatrix d;
  d.samples = m;
  for (int j = 0; j < m.cols(); ++j) d.day_dates.push_back(first + std::chrono::days{j});
  return d;
}

}  // namespace

TEST_CASE("filter_liul examples", "[preprocessing]") {
  const LiulParams params;
  SECTION("flat profile untouched") {
    const Vector p = Vector::Constant(96, 1.0);
    const LiulFilterResult r = filter_liul(as_span(p), params);
    CHECK(r.events.empty());
    CHECK(r.filtered == p);
  }
  SECTION("4.5 kW block of 4 slots removed") {
    Vector p = Vector::Constant(96, 0.5);
    p.segment(40, 4).setConstant(4.5);
    const LiulFilterResult r = filter_liul(as_span(p), params);
    REQUIRE(r.events.size() == 1);
    CHECK(r.events[0].magnitude == Catch::Approx(4.0));
    CHECK(r.events[0].start_index == 40);
    CHECK(r.events[0].end_index == 43);
    CHECK(r.filtered.isApproxToConstant(0.5, 1e-12));
  }
  SECTION("small sinusoid has no qualifying jump") {
    Vector p(96);
    for (int i = 0; i < 96; ++i) p[i] = 1.0 + 0.3 * std::sin(2.0 * std::numbers::pi * i / 96.0);
    double max_jump = 0.0;
    for (int i = 1; i < 96; ++i) max_jump = std::max(max_jump, p[i] - p[i - 1]);
    REQUIRE(max_jump < params.min_jump_kw);
    const LiulFilterResult r = filter_liul(as_span(p), params);
    CHECK(r.events.empty());
    CHECK(r.filtered == p);
  }
  SECTION("pulse longer than the duration limit kept") {
    Vector p = Vector::Constant(96, 0.5);
    p.segment(20, 20).setConstant(4.5);
    CHECK(filter_liul(as_span(p), params).events.empty());
  }
  SECTION("frequent slot kept by the rarity test") {
    Vector p = Vector::Constant(96, 0.5);
    p.segment(40, 4).setConstant(4.5);
    Vector freq = Vector::Zero(96);
    freq[40] = 0.5;
    CHECK(filter_liul(as_span(p), params, as_span(freq)).events.empty());
  }
}

TEST_CASE("filter_liul never raises a sample", "[preprocessing]") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 6.0);
  for (int trial = 0; trial < 200; ++trial) {
    Vector p(96);
    for (int i = 0; i < 96; ++i) p[i] = u(rng);
    const LiulFilterResult r = filter_liul(as_span(p), LiulParams{});
    CHECK(((r.filtered.array() <= p.array()) && (r.filtered.array() >= 0.0)).all());
    for (const LiulEvent& e : r.events) {
      CHECK(e.end_index >= e.start_index);
      CHECK(e.magnitude > 0.0);
    }
  }
}

TEST_CASE("rare pulses are removed across days, common ones kept", "[preprocessing]") {
  Matrix m = Matrix::Constant(96, 10, 0.5);
  m.block(30, 0, 3, 1).setConstant(4.0);  // one day only
  for (int d = 0; d < 10; ++d) m.block(70, d, 3, 1).setConstant(4.0);  // every day
  const LiulMatrixResult r = filter_liul_days(days_of(m), LiulParams{});
  REQUIRE(r.events.size() == 1);
  CHECK(r.events[0].date == kDay);
  CHECK(r.events[0].start_index == 30);
  CHECK(r.filtered.samples(71, 3) == 4.0);
}

TEST_CASE("ks statistic agrees with brute force", "[preprocessing]") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> small(0, 4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(30 + trial), b(50);
    // Odd trials use heavily tied integer data.
    for (double& x : a) x = trial % 2 ? small(rng) : g(rng);
    for (double& x : b) x = trial % 2 ? small(rng) : g(rng) + 0.3;
    CHECK(ks_statistic(a, b) == Catch::Approx(oracle::ks_brute(a, b)).margin(1e-15));
  }
}

TEST_CASE("verify_mild_distribution examples", "[preprocessing]") {
  const std::vector<double> pool(96 * 3, 1.25);
  const std::vector<double> same(96, 1.25);
  KsResult r = verify_mild_distribution(same, pool, 0.3);
  CHECK(r.ks_stat == 0.0);
  CHECK(r.pass);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(1.0, 0.2);
  std::vector<double> base(96), shifted(96);
  for (int i = 0; i < 96; ++i) {
    base[i] = std::clamp(g(rng), 0.0, 2.0);
    shifted[i] = base[i] + 3.0;
  }
  r = verify_mild_distribution(shifted, base, 0.3);
  CHECK(r.ks_stat == 1.0);
  CHECK_FALSE(r.pass);
  CHECK_THROWS_AS(verify_mild_distribution(same, std::vector<double>{}, 0.3), DataError);
}

TEST_CASE("same-distribution KS stays below 0.3 with probability >= 0.99", "[preprocessing]") {
  std::mt19937_64 rng(20231);
  std::normal_distribution<double> g(1.0, 0.4);
  constexpr int kTrials = 10000;
  int below = 0;
  std::vector<double> a(96), b(96);
  for (int t = 0; t < kTrials; ++t) {
    for (double& x : a) x = g(rng);
    for (double& x : b) x = g(rng);
    below += verify_mild_distribution(a, b, 0.3).pass;
  }
  CHECK(double(below) / kTrials >= 0.99);
}

TEST_CASE("classify_days labels", "[preprocessing]") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(1.0, 0.1);
  Matrix loads(96, 12);
  for (int i = 0; i < loads.size(); ++i) loads.data()[i] = std::max(0.0, g(rng));
  loads.col(0).array() += 3.0;  // hot day carries HVAC
  Matrix temps(24, 12);
  temps.col(0).setConstant(35.0);
  temps.col(1).setConstant(25.0);
  for (int d = 2; d < 12; ++d) temps.col(d).setConstant(18.0);
  TemperatureMatrix t;
  t.temps = temps;
  t.day_dates = days_of(loads).day_dates;

  const auto labels = classify_days(days_of(loads), t, ClassifyParams{});
  REQUIRE(labels.size() == 12);
  CHECK(labels[0].label == DayKind::Hot);
  CHECK(labels[1].label == DayKind::Excluded);
  CHECK(std::find(labels[1].reasons.begin(), labels[1].reasons.end(), "temperature-band") != labels[1].reasons.end());
  for (int d = 2; d < 12; ++d) CHECK(labels[d].label == DayKind::Mild);
  CHECK(dates_with(labels, DayKind::Mild).size() == 10);

  SECTION("mismatching distribution is excluded") {
    Matrix l2 = loads;
    l2.col(5).array() += 2.0;
    const auto lab2 = classify_days(days_of(l2), t, ClassifyParams{});
    CHECK(lab2[5].label == DayKind::Excluded);
    CHECK(lab2[5].reasons.back() == "distribution-mismatch");
  }
  SECTION("too few mild days is an error that suggests widening") {
    ClassifyParams p;
    p.min_mild_days = 11;
    CHECK_THROWS_WITH(classify_days(days_of(loads), t, p), ContainsSubstring("widen"));
  }
  SECTION("deterministic") {
    const auto again = classify_days(days_of(loads), t, ClassifyParams{});
    for (int d = 0; d < 12; ++d) CHECK(again[d].label == labels[d].label);
  }
}

TEST_CASE("residual ensemble examples", "[preprocessing]") {
  const Vector hot = Vector::LinSpaced(96, 0.5, 2.0);
  Matrix mild(96, 3);
  for (int k = 0; k < 3; ++k) mild.col(k) = hot;
  SECTION("self subtraction") {
    const ResidualEnsemble e = build_residual_ensemble(as_span(hot), kDay + std::chrono::days{5}, days_of(mild), 3);
    CHECK(e.residuals.rows() == 96);
    CHECK(e.residuals.cols() == 3);
    CHECK(e.residuals.isZero(0.0));
  }
  SECTION("constant offset") {
    const Vector hot2 = hot.array() + 2.0;
    const ResidualEnsemble e = build_residual_ensemble(as_span(hot2), kDay, days_of(mild), 3);
    CHECK(e.residuals.isApproxToConstant(2.0, 1e-12));
  }
  SECTION("too few mild days") {
    CHECK_THROWS_AS(build_residual_ensemble(as_span(hot), kDay, days_of(mild.leftCols(2)), 3), DataError);
  }
}

TEST_CASE("residual ensemble picks the nearest mild days", "[preprocessing]") {
  Matrix mild(96, 6);
  for (int k = 0; k < 6; ++k) mild.col(k).setConstant(k);
  const Vector hot = Vector::Constant(96, 10.0);
  // mild dates: day 0..5; hot date day 4 -> nearest are 4,3,5 (ties to earlier)
  const ResidualEnsemble e = build_residual_ensemble(as_span(hot), kDay + std::chrono::days{4}, days_of(mild), 3);
  REQUIRE(e.mild_dates.size() == 3);
  CHECK(e.mild_dates[0] == kDay + std::chrono::days{3});
  CHECK(e.mild_dates[1] == kDay + std::chrono::days{4});
  CHECK(e.mild_dates[2] == kDay + std::chrono::days{5});
}

TEST_CASE("residual ensemble matches generator decomposition", "[preprocessing]") {
  HouseholdSpec spec = random_household_spec(99);
  spec.liul_events_per_week = 0.0;
  TemperatureMatrix hot_t = generate_temperature(1, WeatherProfile::Hot, 1, kDay);
  TemperatureMatrix mild_t = generate_temperature(5, WeatherProfile::Mild, 2, kDay + std::chrono::days{1});
  TemperatureMatrix all;
  all.temps.resize(24, 6);
  all.temps << hot_t.temps, mild_t.temps;
  all.day_dates = hot_t.day_dates;
  all.day_dates.insert(all.day_dates.end(), mild_t.day_dates.begin(), mild_t.day_dates.end());
  const SyntheticHousehold h = generate_household(spec, all);

  const Vector hot = h.total.samples.col(0);
  const DailyLoadMatrix mild = h.total.select(mild_t.day_dates);
  const ResidualEnsemble e = build_residual_ensemble(as_span(hot), kDay, mild, 10);
  REQUIRE(e.residuals.cols() == 5);
  for (int k = 0; k < 5; ++k) {
    const int j = h.base.index_of(e.mild_dates[k]);
    REQUIRE(h.hvac.samples.col(j).isZero(0.0));
    const Vector oracle = h.hvac.samples.col(0) + (h.base.samples.col(0) - h.base.samples.col(j));
    CHECK((e.residuals.col(k) - oracle).cwiseAbs().maxCoeff() <= 1e-12);
    // residual + mild column reconstructs the hot profile.
    CHECK((e.residuals.col(k) + mild.samples.col(mild.index_of(e.mild_dates[k])) - hot).cwiseAbs().maxCoeff() <=
          1e-12);
  }
}
