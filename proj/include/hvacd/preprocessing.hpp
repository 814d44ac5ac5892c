#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hvacd/ingestion.hpp"

namespace hvacd {

// ---------------------------------------------------------------------------
// Large infrequently-used loads (dryers, resistive water heaters)
// ---------------------------------------------------------------------------

struct LiulParams {
  double min_jump_kw = 2.0;      // slot-to-slot rise that opens a pulse
  int max_duration_slots = 12;   // longest pulse still treated as a LIUL
  double fall_ratio = 0.5;       // closing fall must be >= fall_ratio * rise
  double max_slot_frequency = 0.2;  // rarity: pulses at slots busier than this are kept
  int rarity_window_slots = 2;   // +/- slots pooled when measuring slot frequency
};

struct LiulEvent {
  Date date{};
  int start_index = 0;  // first slot of the pulse
  int end_index = 0;    // last slot of the pulse (inclusive)
  double magnitude = 0.0;
  std::string appliance_hint;
};

struct LiulFilterResult {
  Vector filtered;
  std::vector<LiulEvent> events;
};

/// Removes rectangular pulses from one daily profile. When
/// `slot_frequency` is non-empty, pulses whose start slot shows jumps on at
/// least `max_slot_frequency` of days are left in place.
LiulFilterResult filter_liul(std::span<const double> profile, const LiulParams& params,
                             std::span<const double> slot_frequency = {});

/// Fraction of days that have a rise >= min_jump_kw within
/// +/- rarity_window_slots of each slot.
Vector liul_slot_frequency(const DailyLoadMatrix& loads, const LiulParams& params);

struct LiulMatrixResult {
  DailyLoadMatrix filtered;
  std::vector<LiulEvent> events;
};

/// filter_liul over every column with the rarity test computed from `loads`.
LiulMatrixResult filter_liul_days(const DailyLoadMatrix& loads, const LiulParams& params);

// ---------------------------------------------------------------------------
// Hot / mild classification
// ---------------------------------------------------------------------------

enum class DayKind { Hot, Mild, Excluded };

struct DayLabel {
  Date date{};
  DayKind label = DayKind::Excluded;
  std::vector<std::string> reasons;
};

struct ClassifyParams {
  double hot_max_c = 29.4;
  double mild_lo_c = 12.8;
  double mild_hi_c = 21.1;
  double max_ks = 0.30;
  int min_mild_days = 3;
};

struct KsResult {
  bool pass = false;
  double ks_stat = 0.0;
};

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::span<const double> a, std::span<const double> b);

/// KS comparison of a candidate day against the pooled mild samples.
KsResult verify_mild_distribution(std::span<const double> candidate, std::span<const double> mild_pool,
                                  double max_ks);

/// Temperature pre-labelling followed by leave-one-out distribution checks
/// of the mild candidates. Throws DataError when fewer than
/// `min_mild_days` mild days survive.
std::vector<DayLabel> classify_days(const DailyLoadMatrix& loads, const TemperatureMatrix& temps,
                                    const ClassifyParams& params);

std::vector<Date> dates_with(const std::vector<DayLabel>& labels, DayKind kind);

const char* to_string(DayKind kind);
void write_labels_csv(std::ostream& out, const std::vector<DayLabel>& labels);

// ---------------------------------------------------------------------------
// Residual ensemble
// ---------------------------------------------------------------------------

struct ResidualEnsemble {
  Matrix residuals;  // N x K, signed
  Date hot_date{};
  std::vector<Date> mild_dates;
};

/// Column k = hot_profile - mild day k, for the `k_use` mild days nearest in
/// calendar distance to `hot_date` (ties go to the earlier day).
ResidualEnsemble build_residual_ensemble(std::span<const double> hot_profile, Date hot_date,
                                         const DailyLoadMatrix& mild, int k_use);

}  // namespace hvacd
