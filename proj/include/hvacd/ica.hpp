#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>

#include "hvacd/types.hpp"

namespace hvacd {

struct IcaOptions {
  double tol = 1e-6;
  int max_iters = 500;
  std::uint64_t seed = 0x1ca5eedULL;
};

/// Centering and projection onto the top two principal directions of a
/// residual ensemble (rows are time samples, columns are mixtures).
struct WhiteningModel {
  Vector mean;          // K column means
  Matrix whitening;     // 2 x K, whitened = (X - mean) * whitening^T
  Matrix dewhitening;   // K x 2, whitened * dewhitening^T = rank-2 part of (X - mean)
};

struct Whitened {
  Matrix data;  // N x 2, zero mean, identity sample covariance
  WhiteningModel model;
};

/// Throws NumericError("insufficient ensemble rank") when the ensemble has
/// fewer than two non-degenerate directions.
Whitened center_and_whiten(const Matrix& residuals);

struct FastIcaRotation {
  Eigen::Matrix2d rotation;  // rows are the unmixing directions in whitened space
  int iterations = 0;
  bool converged = false;
};

/// Symmetric fixed-point FastICA, log-cosh contrast (a = 1), two components.
FastIcaRotation fastica_rotation(const Matrix& whitened, const IcaOptions& opts);

struct IcaModel {
  Matrix unmixing;   // K x 2 (W): sources = residuals * W
  Matrix mixing;     // 2 x K (A_hat): centered sources * A_hat = rank-2 part of centered residuals
  Matrix sources;    // N x 2, residuals * W (uncentered)
  Eigen::Matrix2d rotation;
  WhiteningModel whitening;
  int iterations = 0;
  bool converged = false;
};

/// Composes whitening and rotation into the K x 2 unmixing matrix.
IcaModel fastica_2comp(const Matrix& residuals, const Whitened& whitened, const IcaOptions& opts);

/// center_and_whiten followed by fastica_2comp.
IcaModel run_ica(const Matrix& residuals, const IcaOptions& opts);

struct HvacIcaEstimate {
  Vector hvac;                 // N kW, nonnegative
  int component = 0;           // which source was chosen
  double temperature_correlation = 0.0;  // after sign fix
  double scale = 0.0;
  bool weak_linkage = false;   // both |corr| < 0.1
};

/// Picks the source whose hourly sums track temperature, fixes its sign,
/// rescales it against the mean residual and clips at zero.
HvacIcaEstimate select_hvac(const IcaModel& model, std::span<const double> hot_temps,
                            const Vector& residual_mean);

double pearson(std::span<const double> a, std::span<const double> b);

void write_sources_csv(std::ostream& out, const IcaModel& model);

}  // namespace hvacd
