#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "hvacd/types.hpp"

namespace hvacd {

/// Half-open slot range [begin, end).
struct SlotWindow {
  int begin = 0;
  int end = 0;
  int size() const { return end - begin; }
};

enum class PdfMode { Off, SingleUser, MultiUser };
enum class KlSign { Penalize, PaperLiteral };

struct SolverOptions {
  int max_iters = 2000;
  double step = 1.0;          // initial step, relative to per-block curvature
  double tol = 1e-7;          // relative objective change
  double penalty_initial = 1.0;
  int penalty_double_every = 50;
};

struct FineTuneConfig {
  double lambda1 = 0.1;
  double lambda2 = 0.1;
  double lambda3 = 1.0;
  double epsilon_kwh = 0.25;
  PdfMode pdf_mode = PdfMode::MultiUser;
  KlSign kl_sign = KlSign::Penalize;
  SlotWindow diurnal{36, 68};   // 09:00-17:00
  SlotWindow nocturnal{0, 20};  // 00:00-05:00
  SolverOptions solver;
  int outer_passes = 3;

  /// Throws ConfigError on invalid weights or windows.
  void validate(int samples_per_day = kSlotsPerDay) const;
};

struct FineTuneVars {
  double alpha = 1.0;
  Vector beta;
  Vector theta_h;
  Vector theta_b;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
};

/// Daily (diurnal, nocturnal) base-load energy distribution, kWh.
struct BivariateGaussian {
  Eigen::Vector2d mu = Eigen::Vector2d::Zero();
  Eigen::Matrix2d sigma = Eigen::Matrix2d::Identity();

  /// Throws NumericError unless sigma is symmetric with eigenvalues > 1e-9.
  void validate() const;
};

struct TracePoint {
  int iteration = 0;
  double objective = 0.0;
  double penalty_weight = 0.0;
};

struct DisaggregationResult {
  Vector hvac_hat;
  Vector base_hat;
  Vector hourly_hvac_bound;  // 24 kWh
  std::vector<TracePoint> objective_trace;
  FineTuneVars vars;
  double max_bound_violation = 0.0;  // max_k |hourly hvac - bound| - epsilon, clipped at 0
  int iterations = 0;
  bool feasible = false;
};

/// kWh over the two windows: 1/4 of the summed 15-minute kW samples.
Eigen::Vector2d diurnal_nocturnal_energy(std::span<const double> profile, SlotWindow diurnal,
                                         SlotWindow nocturnal);

/// Closed-form KL(p || q) between bivariate Gaussians.
double kl_bivariate_gaussian(const BivariateGaussian& p, const BivariateGaussian& q);

/// Sample mean and covariance (D - 1 denominator) of per-day window energies
/// of the columns of `base_profiles`; +1e-6 I when the covariance is
/// near-singular. Throws DataError when fewer than 3 days are given.
BivariateGaussian estimate_base_stats(const Matrix& base_profiles, SlotWindow diurnal, SlotWindow nocturnal);

/// Same as estimate_base_stats but from precomputed (e_di, e_noc) rows.
BivariateGaussian estimate_energy_stats(const std::vector<Eigen::Vector2d>& energies);

/// Hourly kWh of a 15-minute kW profile.
Vector hourly_energy(std::span<const double> profile);

/// max(0, gamma1 * T + gamma2 * T^2) per hour.
Vector hourly_bound_model(std::span<const double> temps, double gamma1, double gamma2);

/// Ridge added to candidate covariances built from a point pool.
inline constexpr double kCandidateRidge = 1e-6;

/// Least-squares (gamma1, gamma2), no intercept, from paired hourly HVAC
/// energies and temperatures (both 24 x D).
Eigen::Vector2d fit_hourly_bound(const Matrix& hourly_hvac, const Matrix& temps);

/// One day's fine-tuning inputs.
struct FineTuneProblem {
  Vector total;        // N kW (LIUL-filtered)
  Vector ica_hvac;     // N kW
  Matrix mild;         // N x K
  Vector temps;        // 24 degC
  BivariateGaussian mild_stats;
  /// Candidate side of the KL term. Empty: N(this day's energies,
  /// mild_stats.sigma). Otherwise the sample Gaussian of these frozen
  /// (e_di, e_noc) points of other hot days plus this day's point, with a
  /// fixed 1e-6 ridge on the covariance.
  std::vector<Eigen::Vector2d> candidate_pool;
  /// Initial (gamma1, gamma2); fitted from this day's ICA estimate if unset.
  std::optional<Eigen::Vector2d> gamma_init;
  /// Warm start, e.g. from a previous outer pass.
  std::optional<FineTuneVars> warm_start;
};

/// Smooth part of the fine-tuning objective over the packed variable vector
/// [alpha, beta(K), theta_h(N), theta_b(N), gamma1, gamma2].
class FineTuneObjective {
 public:
  FineTuneObjective(const FineTuneProblem& problem, const FineTuneConfig& cfg);

  int dimension() const { return 1 + k_ + 2 * n_ + 2; }
  Vector pack(const FineTuneVars& v) const;
  FineTuneVars unpack(const Vector& x) const;

  /// Shape loss + regularizers + signed lambda3 * KL + penalty * sum of
  /// squared hourly-band excesses.
  double value(const Vector& x, double penalty_weight) const;
  double value_and_gradient(const Vector& x, double penalty_weight, Vector& grad) const;

  Vector hvac(const Vector& x) const;
  Vector base(const Vector& x) const;
  /// max_k (|hourly hvac - bound| - epsilon), clipped at 0.
  double bound_violation(const Vector& x) const;

  /// Clamps assembled profiles into [0, total] (folding corrections into
  /// theta) and alpha, beta onto the nonnegative orthant.
  void project(Vector& x) const;

  /// Per-coordinate curvature estimates at `x` used to scale gradient
  /// steps; the band penalty contributes only for hours near their edge.
  Vector curvature(const Vector& x, double penalty_weight) const;

  /// Scaled descent direction: diagonal scaling by `curv`, except that each
  /// slot's (theta_h, theta_b) pair, coupled through the shape loss, is
  /// scaled by the inverse of its 2 x 2 curvature block unless either
  /// coordinate sits on the box at `x` with the gradient pushing outward.
  Vector precondition(const Vector& x, const Vector& grad, const Vector& curv) const;

  /// Hours whose HVAC energy lies at or beyond half a tolerance from the bound.
  std::array<bool, kHoursPerDay> band_active(const Vector& x) const;

 private:
  const FineTuneProblem& p_;
  const FineTuneConfig& cfg_;
  int n_;
  int k_;
  double kl_weight_;  // signed lambda3, 0 when the PDF term is off
  Eigen::Matrix2d q_sigma_inv_;
  double q_log_det_;
  double kl_const_;   // point mode: trace/log-det part of KL, independent of x
  // Pool mode: sums over the frozen points.
  double pool_count_;
  Eigen::Vector2d pool_sum_;
  Eigen::Matrix2d pool_outer_;
  double kl_curv_;

  /// KL term and its gradient with respect to this day's (e_di, e_noc).
  double kl_term(const Eigen::Vector2d& e, Eigen::Vector2d& grad) const;
  double mild_gram_max_eig_;
};

/// Projects a day's HVAC profile onto {0 <= h <= total} intersected with the
/// hourly band |hourly(h) - bound| <= epsilon, hour by hour.
Vector project_hourly_band(const Vector& hvac, const Vector& total, const Vector& bound, double epsilon);

/// Projected, diagonally scaled gradient descent with a doubling quadratic
/// penalty on the hourly band, followed by an exact band projection.
/// Throws NumericError if the objective becomes non-finite.
DisaggregationResult fine_tune(const FineTuneProblem& problem, const FineTuneConfig& cfg);

}  // namespace hvacd
