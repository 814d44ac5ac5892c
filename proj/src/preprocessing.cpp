#include "hvacd/preprocessing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "hvacd/errors.hpp"

namespace hvacd {

// ---------------------------------------------------------------------------
// LIUL
// ---------------------------------------------------------------------------

LiulFilterResult filter_liul(std::span<const double> profile, const LiulParams& params,
                             std::span<const double> slot_frequency) {
  const int n = static_cast<int>(profile.size());
  LiulFilterResult out;
  out.filtered = Eigen::Map<const Vector>(profile.data(), n);
  if (!slot_frequency.empty() && static_cast<int>(slot_frequency.size()) != n) {
    throw DataError("slot frequency length does not match profile length");
  }

  int i = 1;
  while (i < n) {
    const double rise = profile[i] - profile[i - 1];
    if (rise < params.min_jump_kw) {
      ++i;
      continue;
    }
    // Pulse occupies [i, j); the fall happens between j-1 and j.
    int close = -1;
    const int last = std::min(n - 1, i + params.max_duration_slots);
    for (int j = i + 1; j <= last; ++j) {
      if (profile[j - 1] - profile[j] >= params.fall_ratio * rise) {
        close = j;
        break;
      }
    }
    if (close < 0 || (!slot_frequency.empty() && slot_frequency[i] >= params.max_slot_frequency)) {
      ++i;
      continue;
    }
    const double left = profile[i - 1];
    const double right = profile[close];
    const int span = close - (i - 1);
    for (int k = i; k < close; ++k) {
      const double w = double(k - (i - 1)) / double(span);
      const double interp = (1.0 - w) * left + w * right;
      out.filtered[k] = std::max(0.0, std::min(profile[k], interp));
    }
    LiulEvent ev;
    ev.start_index = i;
    ev.end_index = close - 1;
    ev.magnitude = rise;
    ev.appliance_hint = (close - i) >= 4 ? "dryer-like" : "water-heater-like";
    out.events.push_back(std::move(ev));
    i = close;
  }
  return out;
}

Vector liul_slot_frequency(const DailyLoadMatrix& loads, const LiulParams& params) {
  const int n = loads.samples_per_day();
  const int days = loads.days();
  Vector freq = Vector::Zero(n);
  if (days == 0) return freq;
  std::vector<char> rise(static_cast<std::size_t>(n));
  for (int d = 0; d < days; ++d) {
    const auto col = loads.samples.col(d);
    for (int i = 0; i < n; ++i) rise[i] = i > 0 && col[i] - col[i - 1] >= params.min_jump_kw;
    for (int i = 0; i < n; ++i) {
      const int lo = std::max(0, i - params.rarity_window_slots);
      const int hi = std::min(n - 1, i + params.rarity_window_slots);
      bool hit = false;
      for (int k = lo; k <= hi && !hit; ++k) hit = rise[k];
      if (hit) freq[i] += 1.0;
    }
  }
  return freq / double(days);
}

LiulMatrixResult filter_liul_days(const DailyLoadMatrix& loads, const LiulParams& params) {
  LiulMatrixResult out;
  out.filtered = loads;
  const Vector freq = liul_slot_frequency(loads, params);
  for (int d = 0; d < loads.days(); ++d) {
    const Vector col = loads.samples.col(d);
    LiulFilterResult r = filter_liul(std::span<const double>(col.data(), col.size()), params,
                                     std::span<const double>(freq.data(), freq.size()));
    out.filtered.samples.col(d) = r.filtered;
    for (LiulEvent& ev : r.events) {
      ev.date = loads.day_dates[d];
      out.events.push_back(std::move(ev));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DataError("KS statistic needs two nonempty samples");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = double(sa.size());
  const double nb = double(sb.size());
  std::size_t ia = 0, ib = 0;
  double d = 0.0;
  while (ia < sa.size() && ib < sb.size()) {
    const double x = std::min(sa[ia], sb[ib]);
    while (ia < sa.size() && sa[ia] == x) ++ia;
    while (ib < sb.size() && sb[ib] == x) ++ib;
    d = std::max(d, std::abs(double(ia) / na - double(ib) / nb));
  }
  return d;
}

KsResult verify_mild_distribution(std::span<const double> candidate, std::span<const double> mild_pool,
                                  double max_ks) {
  if (mild_pool.empty()) throw DataError("mild pool is empty");
  KsResult r;
  r.ks_stat = ks_statistic(candidate, mild_pool);
  r.pass = r.ks_stat <= max_ks;
  return r;
}

std::vector<DayLabel> classify_days(const DailyLoadMatrix& loads, const TemperatureMatrix& temps,
                                    const ClassifyParams& params) {
  if (loads.day_dates != temps.day_dates) {
    throw DataError("load and temperature matrices are not aligned");
  }
  const int days = loads.days();
  std::vector<DayLabel> labels(static_cast<std::size_t>(days));
  std::vector<int> candidates;
  for (int d = 0; d < days; ++d) {
    DayLabel& lab = labels[d];
    lab.date = loads.day_dates[d];
    const double tmax = temps.temps.col(d).maxCoeff();
    if (tmax >= params.hot_max_c) {
      lab.label = DayKind::Hot;
      lab.reasons = {"temperature-hot"};
    } else if (tmax >= params.mild_lo_c && tmax <= params.mild_hi_c) {
      lab.reasons = {"temperature-mild"};
      candidates.push_back(d);
    } else {
      lab.label = DayKind::Excluded;
      lab.reasons = {"temperature-band"};
    }
  }

  const int n = loads.samples_per_day();
  int survivors = 0;
  for (int c : candidates) {
    std::vector<double> pool;
    pool.reserve(static_cast<std::size_t>(n) * candidates.size());
    for (int other : candidates) {
      if (other == c) continue;
      const auto col = loads.samples.col(other);
      pool.insert(pool.end(), col.data(), col.data() + n);
    }
    DayLabel& lab = labels[c];
    const auto col = loads.samples.col(c);
    const bool pass =
        !pool.empty() &&
        verify_mild_distribution(std::span<const double>(col.data(), n), pool, params.max_ks).pass;
    if (pass) {
      lab.label = DayKind::Mild;
      lab.reasons.emplace_back("distribution-match");
      ++survivors;
    } else {
      lab.label = DayKind::Excluded;
      lab.reasons.emplace_back("distribution-mismatch");
    }
  }
  if (survivors < params.min_mild_days) {
    throw DataError("only " + std::to_string(survivors) + " mild days survived classification (need " +
                    std::to_string(params.min_mild_days) + "); widen the mild temperature band or max_ks");
  }
  return labels;
}

std::vector<Date> dates_with(const std::vector<DayLabel>& labels, DayKind kind) {
  std::vector<Date> out;
  for (const DayLabel& l : labels) {
    if (l.label == kind) out.push_back(l.date);
  }
  return out;
}

const char* to_string(DayKind kind) {
  switch (kind) {
    case DayKind::Hot:
      return "hot";
    case DayKind::Mild:
      return "mild";
    case DayKind::Excluded:
      return "excluded";
  }
  return "excluded";
}

void write_labels_csv(std::ostream& out, const std::vector<DayLabel>& labels) {
  out << "date,label,reasons\n";
  for (const DayLabel& l : labels) {
    out << format_date(l.date) << ',' << to_string(l.label) << ',';
    for (std::size_t i = 0; i < l.reasons.size(); ++i) out << (i ? ";" : "") << l.reasons[i];
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Residual ensemble
// ---------------------------------------------------------------------------

ResidualEnsemble build_residual_ensemble(std::span<const double> hot_profile, Date hot_date,
                                         const DailyLoadMatrix& mild, int k_use) {
  const int k_avail = mild.days();
  if (k_avail < 3) throw DataError("residual ensemble needs at least 3 mild days, have " + std::to_string(k_avail));
  if (k_use < 3) throw DataError("k_use must be at least 3");
  if (static_cast<int>(hot_profile.size()) != mild.samples_per_day()) {
    throw DataError("hot profile length does not match mild matrix");
  }
  const int k = std::min(k_use, k_avail);

  std::vector<int> order(static_cast<std::size_t>(k_avail));
  std::iota(order.begin(), order.end(), 0);
  auto distance = [&](int idx) { return std::abs((mild.day_dates[idx] - hot_date).count()); };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return distance(a) < distance(b); });
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());

  ResidualEnsemble ens;
  ens.hot_date = hot_date;
  const Eigen::Map<const Vector> hot(hot_profile.data(), static_cast<Eigen::Index>(hot_profile.size()));
  ens.residuals.resize(hot.size(), k);
  for (int c = 0; c < k; ++c) {
    ens.residuals.col(c) = hot - mild.samples.col(order[c]);
    ens.mild_dates.push_back(mild.day_dates[order[c]]);
  }
  return ens;
}

}  // namespace hvacd
