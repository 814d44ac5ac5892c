#include "hvacd/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hvacd/errors.hpp"

namespace hvacd {

namespace {

void check_shapes(const Matrix& est, const Matrix& truth) {
  if (est.rows() != truth.rows() || est.cols() != truth.cols()) {
    throw DataError("estimate and truth shapes differ");
  }
  if (est.cols() == 0) throw DataError("no days to score");
}

double quantile_sorted(const std::vector<double>& s, double q) {
  const double pos = q * double(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, s.size() - 1);
  const double w = pos - double(lo);
  return s[lo] + w * (s[hi] - s[lo]);
}

}  // namespace

double nmae(const Matrix& est, const Matrix& truth, double rating_kw) {
  check_shapes(est, truth);
  if (!(rating_kw > 0.0)) throw DataError("rating must be positive");
  const double total_abs = (est - truth).cwiseAbs().sum();
  return 100.0 * total_abs / rating_kw / double(est.cols());
}

double nee(const Matrix& est, const Matrix& truth) {
  check_shapes(est, truth);
  const double t = truth.sum();
  if (!(t > 0.0)) throw DataError("zero total truth energy");
  return 100.0 * std::abs(est.sum() - t) / t;
}

QuartileRow quartiles(std::vector<double> values) {
  if (values.empty()) throw DataError("quartiles of an empty sample");
  std::sort(values.begin(), values.end());
  return {values.front(), quantile_sorted(values, 0.25), quantile_sorted(values, 0.5),
          quantile_sorted(values, 0.75), values.back()};
}

std::vector<QuartileRow> hourly_error_stats(std::span<const ScoredSet> sets) {
  std::vector<std::vector<double>> per_hour(kHoursPerDay);
  for (const ScoredSet& s : sets) {
    check_shapes(s.est, s.truth);
    if (!(s.rating_kw > 0.0)) throw DataError("rating must be positive");
    const int per = static_cast<int>(s.est.rows()) / kHoursPerDay;
    for (Eigen::Index j = 0; j < s.est.cols(); ++j) {
      for (int h = 0; h < kHoursPerDay; ++h) {
        const double err = (s.est.col(j).segment(h * per, per) - s.truth.col(j).segment(h * per, per))
                               .cwiseAbs()
                               .sum();
        per_hour[h].push_back(100.0 * err / s.rating_kw);
      }
    }
  }
  std::vector<QuartileRow> rows;
  rows.reserve(kHoursPerDay);
  for (auto& v : per_hour) rows.push_back(quartiles(std::move(v)));
  return rows;
}

std::vector<QuartileRow> hourly_error_stats(const Matrix& est, const Matrix& truth, double rating_kw) {
  const ScoredSet s{est, truth, rating_kw};
  return hourly_error_stats(std::span<const ScoredSet>(&s, 1));
}

Matrix benchmark_average_mild(const DailyLoadMatrix& hot, const DailyLoadMatrix& mild) {
  if (mild.days() < 1) throw DataError("average benchmark needs at least one mild day");
  if (hot.samples_per_day() != mild.samples_per_day()) throw DataError("hot/mild resolution mismatch");
  const Vector base = mild.samples.rowwise().mean();
  return (hot.samples.colwise() - base).cwiseMax(0.0);
}

Histogram nmae_histogram(std::span<const double> values, double bin_width, double upper) {
  if (values.empty()) throw DataError("nMAE histogram of an empty sample");
  if (!(bin_width > 0.0) || !(upper > 0.0)) throw DataError("invalid histogram bins");
  Histogram h;
  const int bins = static_cast<int>(std::llround(upper / bin_width));
  for (int b = 0; b <= bins; ++b) h.edges.push_back(b * bin_width);
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double v : values) {
    if (v >= h.edges.back()) {
      ++h.overflow;
      continue;
    }
    // Edge-exact placement so that e.g. 0.10 falls in [0.10, 0.15).
    int b = static_cast<int>(std::floor(v / bin_width));
    b = std::clamp(b, 0, bins - 1);
    while (b + 1 < bins && v >= h.edges[b + 1]) ++b;
    while (b > 0 && v < h.edges[b]) --b;
    ++h.counts[b];
  }
  return h;
}

double rating_from_truth(const Matrix& truth, double fallback_kw) {
  if (truth.size() > 0) {
    std::vector<double> v(truth.data(), truth.data() + truth.size());
    std::sort(v.begin(), v.end());
    const double p99 = quantile_sorted(v, 0.99);
    if (p99 > 0.0) return p99;
  }
  if (!(fallback_kw > 0.0)) throw DataError("no positive rating available");
  return fallback_kw;
}

double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / double(v.size() - 1));
}

EvalReport evaluate_method(const std::string& method, const std::vector<std::string>& names,
                           std::span<const ScoredSet> sets) {
  if (names.size() != sets.size()) throw DataError("customer names and score sets differ in length");
  if (sets.empty()) throw DataError("no customers to evaluate");
  EvalReport r;
  r.method = method;
  r.customers = names;
  for (const ScoredSet& s : sets) {
    r.per_customer_nmae.push_back(nmae(s.est, s.truth, s.rating_kw));
    r.per_customer_nee.push_back(nee(s.est, s.truth));
    r.rating_kw.push_back(s.rating_kw);
  }
  auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size()); };
  r.mean_nmae = mean(r.per_customer_nmae);
  r.std_nmae = sample_std(r.per_customer_nmae);
  r.mean_nee = mean(r.per_customer_nee);
  r.std_nee = sample_std(r.per_customer_nee);
  r.hourly = hourly_error_stats(sets);
  return r;
}

}  // namespace hvacd
