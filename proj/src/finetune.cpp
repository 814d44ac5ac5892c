#include "hvacd/finetune.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hvacd/errors.hpp"

namespace hvacd {

void FineTuneConfig::validate(int samples_per_day) const {
  auto window_ok = [&](SlotWindow w) { return w.begin >= 0 && w.end <= samples_per_day && w.begin < w.end; };
  if (!(lambda1 >= 0.0 && lambda2 >= 0.0 && lambda3 >= 0.0)) throw ConfigError("finetune weights must be >= 0");
  if (!(epsilon_kwh > 0.0)) throw ConfigError("finetune epsilon_kwh must be > 0");
  if (!window_ok(diurnal) || !window_ok(nocturnal)) throw ConfigError("finetune windows must be nonempty and in range");
  if (diurnal.begin < nocturnal.end && nocturnal.begin < diurnal.end) {
    throw ConfigError("diurnal and nocturnal windows overlap");
  }
  if (solver.max_iters < 0 || !(solver.step > 0.0) || !(solver.tol >= 0.0) || !(solver.penalty_initial > 0.0) ||
      solver.penalty_double_every < 1) {
    throw ConfigError("invalid finetune solver options");
  }
  if (outer_passes < 1) throw ConfigError("finetune outer_passes must be >= 1");
}

void BivariateGaussian::validate() const {
  if (!mu.allFinite() || !sigma.allFinite()) throw NumericError("Gaussian has non-finite parameters");
  if (std::abs(sigma(0, 1) - sigma(1, 0)) > 1e-12 * (1.0 + sigma.cwiseAbs().maxCoeff())) {
    throw NumericError("covariance is not symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(sigma);
  if (eig.eigenvalues().minCoeff() <= 1e-9) throw NumericError("covariance is not positive definite");
}

Eigen::Vector2d diurnal_nocturnal_energy(std::span<const double> profile, SlotWindow diurnal,
                                         SlotWindow nocturnal) {
  const int n = static_cast<int>(profile.size());
  if (diurnal.begin < 0 || diurnal.end > n || nocturnal.begin < 0 || nocturnal.end > n) {
    throw DataError("energy window outside the profile");
  }
  double di = 0.0, noc = 0.0;
  for (int i = diurnal.begin; i < diurnal.end; ++i) di += profile[i];
  for (int i = nocturnal.begin; i < nocturnal.end; ++i) noc += profile[i];
  return {di / 4.0, noc / 4.0};
}

double kl_bivariate_gaussian(const BivariateGaussian& p, const BivariateGaussian& q) {
  p.validate();
  q.validate();
  if (p.mu == q.mu && p.sigma == q.sigma) return 0.0;
  const Eigen::LLT<Eigen::Matrix2d> q_llt(q.sigma);
  const Eigen::Vector2d dmu = q.mu - p.mu;
  const double trace_term = q_llt.solve(p.sigma).trace();
  const double quad = dmu.dot(q_llt.solve(dmu));
  const double log_det = std::log(q.sigma.determinant() / p.sigma.determinant());
  return std::max(0.0, 0.5 * (trace_term + quad - 2.0 + log_det));
}

BivariateGaussian estimate_energy_stats(const std::vector<Eigen::Vector2d>& energies) {
  const auto d = energies.size();
  if (d < 3) throw DataError("base statistics need at least 3 days, have " + std::to_string(d));
  BivariateGaussian g;
  g.mu.setZero();
  for (const auto& e : energies) g.mu += e;
  g.mu /= double(d);
  g.sigma.setZero();
  for (const auto& e : energies) {
    const Eigen::Vector2d c = e - g.mu;
    g.sigma += c * c.transpose();
  }
  g.sigma /= double(d - 1);
  g.sigma(1, 0) = g.sigma(0, 1);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(g.sigma);
  if (eig.eigenvalues().minCoeff() < 1e-6) g.sigma += 1e-6 * Eigen::Matrix2d::Identity();
  return g;
}

BivariateGaussian estimate_base_stats(const Matrix& base_profiles, SlotWindow diurnal, SlotWindow nocturnal) {
  std::vector<Eigen::Vector2d> energies;
  energies.reserve(static_cast<std::size_t>(base_profiles.cols()));
  for (Eigen::Index j = 0; j < base_profiles.cols(); ++j) {
    const Vector col = base_profiles.col(j);
    energies.push_back(
        diurnal_nocturnal_energy(std::span<const double>(col.data(), col.size()), diurnal, nocturnal));
  }
  return estimate_energy_stats(energies);
}

Vector hourly_energy(std::span<const double> profile) {
  const auto n = static_cast<int>(profile.size());
  const int per_hour = n / kHoursPerDay;
  Vector out = Vector::Zero(kHoursPerDay);
  for (int i = 0; i < n; ++i) out[i / per_hour] += profile[i];
  return out * (double(kMinutesPerSlot) / 60.0);
}

Vector hourly_bound_model(std::span<const double> temps, double gamma1, double gamma2) {
  Vector out(static_cast<Eigen::Index>(temps.size()));
  for (std::size_t k = 0; k < temps.size(); ++k) {
    out[static_cast<Eigen::Index>(k)] = std::max(0.0, gamma1 * temps[k] + gamma2 * temps[k] * temps[k]);
  }
  return out;
}

Eigen::Vector2d fit_hourly_bound(const Matrix& hourly_hvac, const Matrix& temps) {
  if (hourly_hvac.rows() != temps.rows() || hourly_hvac.cols() != temps.cols()) {
    throw DataError("hourly HVAC and temperature shapes differ");
  }
  Eigen::Matrix2d ata = Eigen::Matrix2d::Zero();
  Eigen::Vector2d atb = Eigen::Vector2d::Zero();
  for (Eigen::Index j = 0; j < temps.cols(); ++j) {
    for (Eigen::Index k = 0; k < temps.rows(); ++k) {
      const double t = temps(k, j);
      const Eigen::Vector2d a(t, t * t);
      ata += a * a.transpose();
      atb += a * hourly_hvac(k, j);
    }
  }
  if (std::abs(ata.determinant()) < 1e-12 * (1.0 + ata.squaredNorm())) return Eigen::Vector2d::Zero();
  return ata.ldlt().solve(atb);
}

// ---------------------------------------------------------------------------
// Objective
// ---------------------------------------------------------------------------

FineTuneObjective::FineTuneObjective(const FineTuneProblem& problem, const FineTuneConfig& cfg)
    : p_(problem), cfg_(cfg) {
  n_ = static_cast<int>(problem.total.size());
  k_ = static_cast<int>(problem.mild.cols());
  if (n_ != kSlotsPerDay || problem.ica_hvac.size() != n_ || problem.mild.rows() != n_ || k_ < 1) {
    throw DataError("fine-tuning inputs have inconsistent shapes");
  }
  if (problem.temps.size() != kHoursPerDay) throw DataError("fine-tuning needs 24 hourly temperatures");

  kl_weight_ = 0.0;
  kl_const_ = 0.0;
  q_log_det_ = 0.0;
  kl_curv_ = 0.0;
  pool_count_ = 0.0;
  pool_sum_.setZero();
  pool_outer_.setZero();
  q_sigma_inv_.setZero();
  if (cfg.pdf_mode != PdfMode::Off && cfg.lambda3 > 0.0) {
    problem.mild_stats.validate();
    kl_weight_ = cfg.kl_sign == KlSign::Penalize ? cfg.lambda3 : -cfg.lambda3;
    q_sigma_inv_ = problem.mild_stats.sigma.inverse();
    q_log_det_ = std::log(problem.mild_stats.sigma.determinant());
    const double q_inv_max = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(q_sigma_inv_).eigenvalues().maxCoeff();
    if (problem.candidate_pool.empty()) {
      const Eigen::Matrix2d& sp = problem.mild_stats.sigma;
      kl_const_ = 0.5 * ((q_sigma_inv_ * sp).trace() - 2.0 + q_log_det_ - std::log(sp.determinant()));
      kl_curv_ = q_inv_max;
    } else {
      for (const Eigen::Vector2d& e : problem.candidate_pool) {
        pool_sum_ += e;
        pool_outer_ += e * e.transpose();
      }
      pool_count_ = static_cast<double>(problem.candidate_pool.size());
      // Curvature scale from the pool-only covariance.
      const double d = pool_count_ + 1.0;
      Eigen::Matrix2d c = Eigen::Matrix2d::Identity() * kCandidateRidge;
      if (pool_count_ >= 2.0) {
        const Eigen::Vector2d m = pool_sum_ / pool_count_;
        c += (pool_outer_ - pool_count_ * m * m.transpose()) / (pool_count_ - 1.0);
      }
      const double c_inv_max = 1.0 / Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(c).eigenvalues().minCoeff();
      kl_curv_ = q_inv_max / d + (q_inv_max + c_inv_max) / (d - 1.0);
    }
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(problem.mild.transpose() * problem.mild,
                                                  Eigen::EigenvaluesOnly);
  mild_gram_max_eig_ = std::max(eig.eigenvalues().maxCoeff(), 1e-12);
}

Vector FineTuneObjective::pack(const FineTuneVars& v) const {
  Vector x(dimension());
  x[0] = v.alpha;
  x.segment(1, k_) = v.beta;
  x.segment(1 + k_, n_) = v.theta_h;
  x.segment(1 + k_ + n_, n_) = v.theta_b;
  x[1 + k_ + 2 * n_] = v.gamma1;
  x[2 + k_ + 2 * n_] = v.gamma2;
  return x;
}

FineTuneVars FineTuneObjective::unpack(const Vector& x) const {
  FineTuneVars v;
  v.alpha = x[0];
  v.beta = x.segment(1, k_);
  v.theta_h = x.segment(1 + k_, n_);
  v.theta_b = x.segment(1 + k_ + n_, n_);
  v.gamma1 = x[1 + k_ + 2 * n_];
  v.gamma2 = x[2 + k_ + 2 * n_];
  return v;
}

Vector FineTuneObjective::hvac(const Vector& x) const { return x[0] * p_.ica_hvac + x.segment(1 + k_, n_); }

Vector FineTuneObjective::base(const Vector& x) const {
  return p_.mild * x.segment(1, k_) + x.segment(1 + k_ + n_, n_);
}

double FineTuneObjective::value(const Vector& x, double penalty_weight) const {
  Vector scratch;
  return value_and_gradient(x, penalty_weight, scratch);
}

double FineTuneObjective::value_and_gradient(const Vector& x, double penalty_weight, Vector& grad) const {
  const auto theta_h = x.segment(1 + k_, n_);
  const auto theta_b = x.segment(1 + k_ + n_, n_);
  const double g1 = x[1 + k_ + 2 * n_];
  const double g2 = x[2 + k_ + 2 * n_];
  const Vector h = hvac(x);
  const Vector b = base(x);
  const Vector r = p_.total - h - b;

  double f = r.squaredNorm() + cfg_.lambda1 * theta_h.squaredNorm() + cfg_.lambda2 * theta_b.squaredNorm();
  Vector d_hvac = -2.0 * r;
  Vector d_base = -2.0 * r;

  if (kl_weight_ != 0.0) {
    const Eigen::Vector2d e =
        diurnal_nocturnal_energy(std::span<const double>(b.data(), b.size()), cfg_.diurnal, cfg_.nocturnal);
    Eigen::Vector2d g_e;
    f += kl_weight_ * kl_term(e, g_e);
    d_base.segment(cfg_.diurnal.begin, cfg_.diurnal.size()).array() += 0.25 * kl_weight_ * g_e[0];
    d_base.segment(cfg_.nocturnal.begin, cfg_.nocturnal.size()).array() += 0.25 * kl_weight_ * g_e[1];
  }

  double d_g1 = 0.0, d_g2 = 0.0;
  for (int k = 0; k < kHoursPerDay; ++k) {
    const double t = p_.temps[k];
    const double raw = g1 * t + g2 * t * t;
    const double bound = std::max(0.0, raw);
    const double hour = 0.25 * h.segment(k * kSlotsPerHour, kSlotsPerHour).sum();
    const double v = hour - bound;
    const double excess = std::abs(v) - cfg_.epsilon_kwh;
    if (excess <= 0.0) continue;
    f += penalty_weight * excess * excess;
    const double d_hour = 2.0 * penalty_weight * excess * (v > 0.0 ? 1.0 : -1.0);
    d_hvac.segment(k * kSlotsPerHour, kSlotsPerHour).array() += 0.25 * d_hour;
    if (raw > 0.0) {
      d_g1 -= d_hour * t;
      d_g2 -= d_hour * t * t;
    }
  }

  grad.resize(dimension());
  grad[0] = p_.ica_hvac.dot(d_hvac);
  grad.segment(1, k_) = p_.mild.transpose() * d_base;
  grad.segment(1 + k_, n_) = d_hvac + 2.0 * cfg_.lambda1 * theta_h;
  grad.segment(1 + k_ + n_, n_) = d_base + 2.0 * cfg_.lambda2 * theta_b;
  grad[1 + k_ + 2 * n_] = d_g1;
  grad[2 + k_ + 2 * n_] = d_g2;
  return f;
}

double FineTuneObjective::kl_term(const Eigen::Vector2d& e, Eigen::Vector2d& grad) const {
  if (pool_count_ == 0.0) {
    const Eigen::Vector2d delta = e - p_.mild_stats.mu;
    grad = q_sigma_inv_ * delta;
    return 0.5 * delta.dot(grad) + kl_const_;
  }
  // Candidate = sample Gaussian of the pool plus e.
  const double d = pool_count_ + 1.0;
  const Eigen::Vector2d mu_c = (pool_sum_ + e) / d;
  const Eigen::Matrix2d sigma_c = (pool_outer_ + e * e.transpose() - d * mu_c * mu_c.transpose()) / (d - 1.0) +
                                  Eigen::Matrix2d::Identity() * kCandidateRidge;
  const Eigen::Matrix2d c_inv = sigma_c.inverse();
  const Eigen::Vector2d dmu = mu_c - p_.mild_stats.mu;
  const double kl = 0.5 * ((q_sigma_inv_ * sigma_c).trace() + dmu.dot(q_sigma_inv_ * dmu) - 2.0 + q_log_det_ -
                           std::log(sigma_c.determinant()));
  grad = (q_sigma_inv_ - c_inv) * (e - mu_c) / (d - 1.0) + q_sigma_inv_ * dmu / d;
  return kl;
}

double FineTuneObjective::bound_violation(const Vector& x) const {
  const Vector h = hvac(x);
  const Vector bound = hourly_bound_model(std::span<const double>(p_.temps.data(), p_.temps.size()),
                                          x[1 + k_ + 2 * n_], x[2 + k_ + 2 * n_]);
  double worst = 0.0;
  for (int k = 0; k < kHoursPerDay; ++k) {
    const double hour = 0.25 * h.segment(k * kSlotsPerHour, kSlotsPerHour).sum();
    worst = std::max(worst, std::abs(hour - bound[k]) - cfg_.epsilon_kwh);
  }
  return worst;
}

void FineTuneObjective::project(Vector& x) const {
  x[0] = std::max(0.0, x[0]);
  x.segment(1, k_) = x.segment(1, k_).cwiseMax(0.0);
  const Vector h = hvac(x).cwiseMax(0.0).cwiseMin(p_.total);
  x.segment(1 + k_, n_) = h - x[0] * p_.ica_hvac;
  const Vector mild_part = p_.mild * x.segment(1, k_);
  const Vector b = (mild_part + x.segment(1 + k_ + n_, n_)).cwiseMax(0.0).cwiseMin(p_.total);
  x.segment(1 + k_ + n_, n_) = b - mild_part;
}

std::array<bool, kHoursPerDay> FineTuneObjective::band_active(const Vector& x) const {
  const Vector h = hvac(x);
  const double g1 = x[1 + k_ + 2 * n_];
  const double g2 = x[2 + k_ + 2 * n_];
  std::array<bool, kHoursPerDay> active{};
  for (int k = 0; k < kHoursPerDay; ++k) {
    const double t = p_.temps[k];
    const double hour = 0.25 * h.segment(k * kSlotsPerHour, kSlotsPerHour).sum();
    active[k] = std::abs(hour - std::max(0.0, g1 * t + g2 * t * t)) >= 0.5 * cfg_.epsilon_kwh;
  }
  return active;
}

Vector FineTuneObjective::curvature(const Vector& x, double penalty_weight) const {
  const double kl_curv =
      std::abs(kl_weight_) * kl_curv_ * double(std::max(cfg_.diurnal.size(), cfg_.nocturnal.size())) / 16.0;
  // The band penalty only curves hours at or near their band edge.
  const auto active = band_active(x);
  Vector band = Vector::Zero(n_);
  double alpha_band = 0.0, t2 = 0.0, t4 = 0.0;
  for (int k = 0; k < kHoursPerDay; ++k) {
    if (!active[k]) continue;
    const double t = p_.temps[k];
    band.segment(k * kSlotsPerHour, kSlotsPerHour).setConstant(penalty_weight / 2.0);
    const double ica_hour = 0.25 * p_.ica_hvac.segment(k * kSlotsPerHour, kSlotsPerHour).sum();
    alpha_band += 2.0 * penalty_weight * ica_hour * ica_hour;
    t2 += 2.0 * penalty_weight * t * t;
    t4 += 2.0 * penalty_weight * t * t * t * t;
  }
  Vector c(dimension());
  c[0] = std::max(2.0 * p_.ica_hvac.squaredNorm() + alpha_band, 1e-9);
  c.segment(1, k_).setConstant((2.0 + kl_curv) * mild_gram_max_eig_);
  c.segment(1 + k_, n_) = band.array() + 2.0 + 2.0 * cfg_.lambda1;
  c.segment(1 + k_ + n_, n_).setConstant(2.0 + 2.0 * cfg_.lambda2 + kl_curv);
  c[1 + k_ + 2 * n_] = std::max(t2, 1e-9);
  c[2 + k_ + 2 * n_] = std::max(t4, 1e-9);
  return c;
}

Vector FineTuneObjective::precondition(const Vector& x, const Vector& grad, const Vector& curv) const {
  Vector d = grad.cwiseQuotient(curv);
  const Vector h = hvac(x);
  const Vector b = base(x);
  auto pinned = [](double v, double cap, double g) { return (v <= 1e-12 && g > 0.0) || (v >= cap - 1e-12 && g < 0.0); };
  for (int i = 0; i < n_; ++i) {
    const int ih = 1 + k_ + i;
    const int ib = 1 + k_ + n_ + i;
    // A non-diagonal metric on a pinned coordinate can point out of the box
    // and stall the projected step; fall back to diagonal scaling there.
    if (pinned(h[i], p_.total[i], grad[ih]) || pinned(b[i], p_.total[i], grad[ib])) continue;
    const double a = curv[ih];
    const double b = curv[ib];
    // Shape-loss cross curvature is 2; keep the block safely invertible.
    const double det = std::max(a * b - 4.0, 1e-3 * a * b);
    d[ih] = (b * grad[ih] - 2.0 * grad[ib]) / det;
    d[ib] = (a * grad[ib] - 2.0 * grad[ih]) / det;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Solver
// ---------------------------------------------------------------------------

Vector project_hourly_band(const Vector& hvac, const Vector& total, const Vector& bound, double epsilon) {
  Vector out = hvac.cwiseMax(0.0).cwiseMin(total);
  const int per_hour = static_cast<int>(hvac.size()) / kHoursPerDay;
  for (int k = 0; k < kHoursPerDay; ++k) {
    auto seg = out.segment(k * per_hour, per_hour);
    const auto cap = total.segment(k * per_hour, per_hour);
    auto hour_energy = [&](const Vector& v) { return 0.25 * v.sum(); };
    const double lo = bound[k] - epsilon;
    const double hi = bound[k] + epsilon;
    const double current = hour_energy(seg);
    if (current >= lo && current <= hi) continue;
    const double target = current < lo ? lo : hi;
    if (current < lo && hour_energy(cap) <= lo) {
      seg = cap;  // band unreachable under the box; closest point
      continue;
    }
    const Vector base_seg = seg;
    auto shifted = [&](double tau) { return Vector((base_seg.array() + tau).max(0.0).min(cap.array())); };
    // Monotone in tau; bracket and bisect.
    double a = current < lo ? 0.0 : -(base_seg.maxCoeff() + 1.0);
    double b = current < lo ? cap.maxCoeff() + 1.0 : 0.0;
    for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
      const double mid = 0.5 * (a + b);
      if (hour_energy(shifted(mid)) < target) {
        a = mid;
      } else {
        b = mid;
      }
    }
    seg = shifted(current < lo ? b : a);
  }
  return out;
}

DisaggregationResult fine_tune(const FineTuneProblem& problem, const FineTuneConfig& cfg) {
  cfg.validate(static_cast<int>(problem.total.size()));
  const FineTuneObjective obj(problem, cfg);
  const int n = static_cast<int>(problem.total.size());
  const int k = static_cast<int>(problem.mild.cols());
  const std::span<const double> temps(problem.temps.data(), problem.temps.size());

  FineTuneVars init;
  if (problem.warm_start) {
    init = *problem.warm_start;
  } else {
    init.alpha = 1.0;
    init.beta = Vector::Constant(k, 1.0 / k);
    init.theta_h = Vector::Zero(n);
    init.theta_b = Vector::Zero(n);
    Eigen::Vector2d gamma;
    if (problem.gamma_init) {
      gamma = *problem.gamma_init;
    } else {
      const Vector hourly = hourly_energy(std::span<const double>(problem.ica_hvac.data(), n));
      gamma = fit_hourly_bound(hourly, problem.temps);
    }
    init.gamma1 = gamma[0];
    init.gamma2 = gamma[1];
  }

  Vector x = obj.pack(init);
  obj.project(x);

  DisaggregationResult res;
  double rho = cfg.solver.penalty_initial;
  Vector grad;
  double f = obj.value_and_gradient(x, rho, grad);
  if (!std::isfinite(f)) throw NumericError("fine-tuning objective non-finite at iteration 0");
  res.objective_trace.push_back({0, f, rho});
  Vector curv = obj.curvature(x, rho);
  double step = cfg.solver.step;
  const double max_step = 1024.0 * cfg.solver.step;

  // The loop only needs the band approximately; the final projection makes it exact.
  constexpr double kBandSlack = 1e-3;
  constexpr double kMaxPenalty = 1e12;
  constexpr double kArmijo = 1e-4;
  auto raise_penalty = [&](int it) {
    rho = std::min(2.0 * rho, kMaxPenalty);
    f = obj.value_and_gradient(x, rho, grad);
    curv = obj.curvature(x, rho);
    step = cfg.solver.step;
    res.objective_trace.push_back({it, f, rho});
  };

  // Accelerated projected gradient; momentum restarts whenever the
  // extrapolated step fails to decrease the objective.
  Vector x_prev = x;
  double t_mom = 1.0;
  auto restart = [&] {
    x_prev = x;
    t_mom = 1.0;
  };
  int it = 1;
  for (; it <= cfg.solver.max_iters; ++it) {
    if (it % cfg.solver.penalty_double_every == 0 && obj.bound_violation(x) > kBandSlack && rho < kMaxPenalty) {
      raise_penalty(it);
      restart();
    }

    const bool extrapolated = t_mom > 1.0;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_mom * t_mom));
    Vector y = x + ((t_mom - 1.0) / t_next) * (x - x_prev);
    obj.project(y);
    Vector grad_y;
    double f_y = f;
    if (extrapolated) {
      f_y = obj.value_and_gradient(y, rho, grad_y);
    } else {
      grad_y = grad;
    }

    bool accepted = false;
    double f_try = f;
    const Vector dir = obj.precondition(y, grad_y, curv);
    Vector x_try;
    for (int tries = 0; tries < 40; ++tries) {
      x_try = y - step * dir;
      obj.project(x_try);
      f_try = obj.value(x_try, rho);
      if (!std::isfinite(f_try)) {
        throw NumericError("fine-tuning objective non-finite at iteration " + std::to_string(it));
      }
      // Armijo sufficient decrease; a plain "no increase" test accepts
      // overshoots to the mirror point of a quadratic valley.
      if (f_try <= f_y + kArmijo * grad_y.dot(x_try - y)) break;
      step *= 0.5;
    }
    accepted = f_try <= f;

    double rel_change = 0.0;
    if (accepted) {
      rel_change = (f - f_try) / std::max(std::abs(f), 1e-12);
      x_prev = std::move(x);
      x = std::move(x_try);
      t_mom = t_next;
      f = obj.value_and_gradient(x, rho, grad);
      curv = obj.curvature(x, rho);
      res.objective_trace.push_back({it, f, rho});
      step = std::min(2.0 * step, max_step);
    }
    if (extrapolated && (!accepted || rel_change < cfg.solver.tol)) {
      // A stalled extrapolated step says nothing about convergence; retry plainly.
      restart();
      continue;
    }
    if (!accepted || rel_change < cfg.solver.tol) {
      if (obj.bound_violation(x) <= kBandSlack || rho >= kMaxPenalty) break;
      raise_penalty(it);
      restart();
    }
  }
  res.iterations = std::min(it, cfg.solver.max_iters);

  // Assemble outputs, enforce the box exactly and land the hourly sums inside the band.
  FineTuneVars v = obj.unpack(x);
  // Hours whose band lies above the available energy cannot be met under the
  // box; shrink gamma (the clipped bound scales linearly) until all can.
  const Vector cap = hourly_energy(std::span<const double>(problem.total.data(), n));
  const Vector bound = hourly_bound_model(temps, v.gamma1, v.gamma2);
  double shrink = 1.0;
  for (int h = 0; h < kHoursPerDay; ++h) {
    if (bound[h] > cap[h] + cfg.epsilon_kwh) shrink = std::min(shrink, (cap[h] + cfg.epsilon_kwh) / bound[h]);
  }
  if (shrink < 1.0) {
    v.gamma1 *= shrink;
    v.gamma2 *= shrink;
  }
  res.hourly_hvac_bound = hourly_bound_model(temps, v.gamma1, v.gamma2);
  const Vector raw_hvac = (v.alpha * problem.ica_hvac + v.theta_h).cwiseMax(0.0).cwiseMin(problem.total);
  res.hvac_hat = project_hourly_band(raw_hvac, problem.total, res.hourly_hvac_bound, cfg.epsilon_kwh);
  const Vector mild_part = problem.mild * v.beta;
  res.base_hat = (mild_part + v.theta_b).cwiseMax(0.0).cwiseMin(problem.total);
  v.theta_h = res.hvac_hat - v.alpha * problem.ica_hvac;
  v.theta_b = res.base_hat - mild_part;
  res.vars = std::move(v);

  const Vector hourly = hourly_energy(std::span<const double>(res.hvac_hat.data(), n));
  res.max_bound_violation =
      std::max(0.0, ((hourly - res.hourly_hvac_bound).cwiseAbs().array() - cfg.epsilon_kwh).maxCoeff());
  res.feasible = res.max_bound_violation <= 1e-6;
  return res;
}

}  // namespace hvacd
