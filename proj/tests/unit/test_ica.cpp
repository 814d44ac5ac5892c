#include <catch_amalgamated.hpp>

#include <random>

#include "hvacd/errors.hpp"
#include "hvacd/ica.hpp"
#include "oracles.hpp"

using namespace hvacd;
using Catch::Matchers::ContainsSubstring;

namespace {

std::span<const double> as_span(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

Matrix random_matrix(std::uint64_t seed, int n, int k) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(n, k);
  for (int i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

}  // namespace

TEST_CASE("whitening of two exact patterns", "[ica]") {
  Vector a(96), b(96);
  for (int i = 0; i < 96; ++i) {
    a[i] = (i / 8) % 2 ? 1.0 : -1.0;
    b[i] = std::sin(0.37 * i);
  }
  Matrix r(96, 6);
  for (int k = 0; k < 6; ++k) r.col(k) = k % 2 ? a : b;
  const Whitened w = center_and_whiten(r);
  CHECK((oracle::covariance_loops(w.data) - Matrix::Identity(2, 2)).norm() <= 1e-10);
}

TEST_CASE("whitening rejects degenerate ensembles", "[ica]") {
  Matrix same(96, 4);
  for (int k = 0; k < 4; ++k) same.col(k) = Vector::LinSpaced(96, 0.0, 1.0);
  CHECK_THROWS_WITH(center_and_whiten(same), ContainsSubstring("insufficient ensemble rank"));
  CHECK_THROWS_AS(center_and_whiten(Matrix::Ones(96, 2)), NumericError);
}

TEST_CASE("whitened covariance is the identity on random ensembles", "[ica]") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Whitened w = center_and_whiten(random_matrix(seed, 96, 10));
    CHECK((oracle::covariance_loops(w.data) - Matrix::Identity(2, 2)).norm() <= 1e-8);
    // whitening o dewhitening is the projector onto the top-2 principal plane.
    const Matrix proj = w.model.dewhitening * w.model.whitening;
    CHECK((proj * proj - proj).norm() <= 1e-10);
  }
}

TEST_CASE("fastica recovers independent non-Gaussian sources", "[ica]") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::exponential_distribution<double> ex(1.0);
  const int n = 2000;
  Matrix s(n, 2);
  for (int i = 0; i < n; ++i) {
    s(i, 0) = (i / 13) % 2 ? 1.0 : -1.0;
    s(i, 1) = (u(rng) < 0 ? -1.0 : 1.0) * ex(rng);
  }
  Matrix a(2, 5);
  for (int i = 0; i < a.size(); ++i) a.data()[i] = u(rng);
  const Matrix x = s * a;
  const IcaModel m = run_ica(x, IcaOptions{});
  CHECK(m.converged);
  for (int c = 0; c < 2; ++c) {
    const double best = std::max(std::abs(oracle::pearson_loops(m.sources.col(0), s.col(c))),
                                 std::abs(oracle::pearson_loops(m.sources.col(1), s.col(c))));
    CHECK(best >= 0.95);
  }
  // Rotation rows orthonormal.
  CHECK((m.rotation * m.rotation.transpose() - Eigen::Matrix2d::Identity()).norm() <= 1e-8);
}

TEST_CASE("fastica boundaries", "[ica]") {
  const Whitened w = center_and_whiten(random_matrix(3, 96, 6));
  IcaOptions o;
  o.max_iters = 0;
  const FastIcaRotation r0 = fastica_rotation(w.data, o);
  CHECK_FALSE(r0.converged);
  CHECK(r0.iterations == 0);
  CHECK((r0.rotation * r0.rotation.transpose() - Eigen::Matrix2d::Identity()).norm() <= 1e-12);

  // Gaussian input: may or may not converge, must not throw.
  IcaOptions o2;
  o2.max_iters = 50;
  IcaModel gm;
  CHECK_NOTHROW(gm = fastica_2comp(random_matrix(3, 96, 6), w, o2));
  CHECK(gm.sources.allFinite());
}

TEST_CASE("ica model invariants", "[ica]") {
  const oracle::IcaEnsemble e = oracle::ica_ensemble(5);
  const IcaModel m = run_ica(e.residuals, IcaOptions{});
  CHECK((m.sources - e.residuals * m.unmixing).norm() <= 1e-12 * std::max(1.0, m.sources.norm()));
  const Matrix centered = e.residuals.rowwise() - e.residuals.colwise().mean();
  const Matrix centered_sources = m.sources.rowwise() - m.sources.colwise().mean();
  // Rank-2 part of the centered data via an independent SVD.
  Eigen::JacobiSVD<Matrix> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Matrix rank2 = svd.matrixU().leftCols(2) * svd.singularValues().head(2).asDiagonal() *
                       svd.matrixV().leftCols(2).transpose();
  CHECK((centered_sources * m.mixing - rank2).norm() <= 1e-6 * rank2.norm());
}

TEST_CASE("ica is deterministic for a fixed seed", "[ica]") {
  const oracle::IcaEnsemble e = oracle::ica_ensemble(9);
  IcaOptions o;
  o.seed = 1234;
  const IcaModel a = run_ica(e.residuals, o);
  const IcaModel b = run_ica(e.residuals, o);
  CHECK(a.unmixing == b.unmixing);
  CHECK(a.sources == b.sources);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("select_hvac picks the temperature-linked source", "[ica]") {
  const oracle::IcaEnsemble e = oracle::ica_ensemble(21);
  IcaModel m;
  m.sources.resize(96, 2);
  m.sources.col(0) = e.noise;
  m.sources.col(1) = e.hvac;
  const Vector mean = e.hvac;
  HvacIcaEstimate est = select_hvac(m, as_span(e.temps), mean);
  CHECK(est.component == 1);
  CHECK(est.temperature_correlation > 0.0);
  CHECK_FALSE(est.weak_linkage);

  SECTION("flipped sign") {
    m.sources.col(1) = -e.hvac;
    est = select_hvac(m, as_span(e.temps), mean);
    Vector hourly = Vector::Zero(24);
    for (int i = 0; i < 96; ++i) hourly[i / 4] += est.hvac[i];
    CHECK(oracle::pearson_loops(hourly, e.temps) > 0.0);
    CHECK((est.hvac.array() >= 0.0).all());
  }
}

TEST_CASE("select_hvac restores the amplitude", "[ica]") {
  const oracle::IcaEnsemble e = oracle::ica_ensemble(33);
  const double sd = std::sqrt(oracle::covariance_loops(e.hvac)(0, 0));
  IcaModel m;
  m.sources.resize(96, 2);
  m.sources.col(0) = e.hvac / sd;  // unit-variance HVAC source
  m.sources.col(1) = e.noise;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 0.05);
  Vector mean = e.hvac;
  for (int i = 0; i < 96; ++i) mean[i] += g(rng);
  const HvacIcaEstimate est = select_hvac(m, as_span(e.temps), mean);
  CHECK(est.hvac.maxCoeff() == Catch::Approx(3.0).epsilon(0.10));
}

TEST_CASE("select_hvac is invariant to source sign and order", "[ica]") {
  const oracle::IcaEnsemble e = oracle::ica_ensemble(44);
  const IcaModel m = run_ica(e.residuals, IcaOptions{});
  const Vector mean = e.residuals.rowwise().mean();
  const HvacIcaEstimate ref = select_hvac(m, as_span(e.temps), mean);
  for (int flip = 0; flip < 4; ++flip) {
    IcaModel v = m;
    if (flip & 1) v.sources.col(0) = -v.sources.col(0);
    if (flip & 2) v.sources.col(1) = -v.sources.col(1);
    CHECK(select_hvac(v, as_span(e.temps), mean).hvac == ref.hvac);
  }
  IcaModel swapped = m;
  swapped.sources.col(0) = m.sources.col(1);
  swapped.sources.col(1) = m.sources.col(0);
  CHECK(select_hvac(swapped, as_span(e.temps), mean).hvac == ref.hvac);
}

TEST_CASE("select_hvac flags weak linkage", "[ica]") {
  IcaModel m;
  m.sources.resize(96, 2);
  for (int i = 0; i < 96; ++i) {
    m.sources(i, 0) = (i % 4 == 0) ? 1.0 : 0.0;  // identical every hour
    m.sources(i, 1) = (i % 4 == 1) ? 1.0 : 0.0;
  }
  Vector temps = Vector::LinSpaced(24, 25.0, 35.0);
  const HvacIcaEstimate est = select_hvac(m, as_span(temps), Vector::Ones(96));
  CHECK(est.weak_linkage);
}

TEST_CASE("ica recovers the HVAC source on most synthetic ensembles", "[ica]") {
  int good = 0;
  for (std::uint64_t seed = 100; seed < 140; ++seed) {
    const oracle::IcaEnsemble e = oracle::ica_ensemble(seed);
    IcaOptions o;
    o.seed = seed;
    const IcaModel m = run_ica(e.residuals, o);
    const HvacIcaEstimate est = select_hvac(m, as_span(e.temps), e.residuals.rowwise().mean());
    good += oracle::pearson_loops(est.hvac, e.hvac) >= 0.95;
  }
  CHECK(good >= 38);
}
