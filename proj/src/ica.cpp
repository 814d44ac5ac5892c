#include "hvacd/ica.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include "hvacd/errors.hpp"

namespace hvacd {

Whitened center_and_whiten(const Matrix& residuals) {
  const Eigen::Index n = residuals.rows();
  const Eigen::Index k = residuals.cols();
  if (k < 3) throw NumericError("insufficient ensemble rank: need at least 3 columns");
  if (n < 3) throw NumericError("insufficient ensemble rank: need at least 3 samples");

  Whitened out;
  out.model.mean = residuals.colwise().mean().transpose();
  const Matrix centered = residuals.rowwise() - out.model.mean.transpose();
  const Matrix cov = (centered.transpose() * centered) / double(n - 1);

  const Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
  const Vector& values = eig.eigenvalues();  // ascending
  const double top = values[k - 1];
  const double second = values[k - 2];
  if (!(top > 1e-300) || second <= 1e-10 * top) throw NumericError("insufficient ensemble rank");

  Matrix basis(k, 2);
  basis.col(0) = eig.eigenvectors().col(k - 1);
  basis.col(1) = eig.eigenvectors().col(k - 2);
  const Eigen::Vector2d lambda(top, second);

  out.model.whitening = lambda.cwiseSqrt().cwiseInverse().asDiagonal() * basis.transpose();
  out.model.dewhitening = basis * lambda.cwiseSqrt().asDiagonal();
  out.data = centered * out.model.whitening.transpose();
  return out;
}

namespace {

Eigen::Matrix2d symmetric_decorrelation(const Eigen::Matrix2d& w) {
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(w * w.transpose());
  const Eigen::Vector2d inv_sqrt = eig.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  return eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose() * w;
}

}  // namespace

FastIcaRotation fastica_rotation(const Matrix& whitened, const IcaOptions& opts) {
  if (whitened.cols() != 2) throw NumericError("fastica_rotation expects two whitened components");
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> angle_dist(0.0, 2.0 * std::numbers::pi);
  const double phi = angle_dist(rng);
  Eigen::Matrix2d w;
  w << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);

  FastIcaRotation out;
  out.rotation = w;
  const double n = double(whitened.rows());
  for (int it = 0; it < opts.max_iters; ++it) {
    const Matrix y = whitened * w.transpose();  // N x 2
    const Matrix g = y.array().tanh().matrix();
    const Eigen::Vector2d g_prime_mean = (1.0 - g.array().square()).colwise().mean().transpose();
    Eigen::Matrix2d w_new = (g.transpose() * whitened) / n;
    w_new -= g_prime_mean.asDiagonal() * w;
    w_new = symmetric_decorrelation(w_new);

    const double change = ((w_new * w.transpose()).diagonal().cwiseAbs().array() - 1.0).abs().maxCoeff();
    w = w_new;
    out.iterations = it + 1;
    if (change < opts.tol) {
      out.converged = true;
      break;
    }
  }
  out.rotation = w;
  return out;
}

IcaModel fastica_2comp(const Matrix& residuals, const Whitened& whitened, const IcaOptions& opts) {
  const FastIcaRotation rot = fastica_rotation(whitened.data, opts);
  IcaModel m;
  m.rotation = rot.rotation;
  m.iterations = rot.iterations;
  m.converged = rot.converged;
  m.whitening = whitened.model;
  m.unmixing = whitened.model.whitening.transpose() * rot.rotation.transpose();
  m.mixing = rot.rotation * whitened.model.dewhitening.transpose();
  m.sources = residuals * m.unmixing;
  return m;
}

IcaModel run_ica(const Matrix& residuals, const IcaOptions& opts) {
  return fastica_2comp(residuals, center_and_whiten(residuals), opts);
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const auto n = static_cast<Eigen::Index>(a.size());
  if (n != static_cast<Eigen::Index>(b.size()) || n < 2) return 0.0;
  const Eigen::Map<const Vector> x(a.data(), n);
  const Eigen::Map<const Vector> y(b.data(), n);
  const Vector xc = x.array() - x.mean();
  const Vector yc = y.array() - y.mean();
  const double denom = std::sqrt(xc.squaredNorm() * yc.squaredNorm());
  return denom > 0.0 ? xc.dot(yc) / denom : 0.0;
}

HvacIcaEstimate select_hvac(const IcaModel& model, std::span<const double> hot_temps,
                            const Vector& residual_mean) {
  if (model.sources.cols() != 2) throw NumericError("select_hvac expects two sources");
  if (hot_temps.size() != static_cast<std::size_t>(kHoursPerDay)) {
    throw NumericError("select_hvac expects 24 hourly temperatures");
  }
  const Eigen::Index n = model.sources.rows();
  const Eigen::Index per_hour = n / kHoursPerDay;

  double corr[2];
  for (int c = 0; c < 2; ++c) {
    Vector hourly = Vector::Zero(kHoursPerDay);
    for (Eigen::Index i = 0; i < n; ++i) hourly[i / per_hour] += model.sources(i, c);
    corr[c] = pearson(std::span<const double>(hourly.data(), kHoursPerDay), hot_temps);
  }

  HvacIcaEstimate est;
  est.component = std::abs(corr[1]) > std::abs(corr[0]) ? 1 : 0;
  est.weak_linkage = std::abs(corr[0]) < 0.1 && std::abs(corr[1]) < 0.1;
  const double sign = corr[est.component] < 0.0 ? -1.0 : 1.0;
  est.temperature_correlation = sign * corr[est.component];

  const Vector source = sign * model.sources.col(est.component);
  const double power = source.squaredNorm();
  est.scale = power > 0.0 ? std::max(0.0, source.dot(residual_mean) / power) : 0.0;
  est.hvac = (est.scale * source).cwiseMax(0.0);
  return est;
}

void write_sources_csv(std::ostream& out, const IcaModel& model) {
  out << "slot,source0,source1\n";
  for (Eigen::Index i = 0; i < model.sources.rows(); ++i) {
    out << i << ',' << model.sources(i, 0) << ',' << model.sources(i, 1) << '\n';
  }
}

}  // namespace hvacd
