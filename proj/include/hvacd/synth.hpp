#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hvacd/ingestion.hpp"

namespace hvacd {

enum class WeatherProfile { Hot, Mild, Shoulder };

/// A daily routine peak (breakfast, dinner) whose timing and size vary
/// from day to day.
struct RoutinePeak {
  double center_h = 19.0;
  double width_h = 1.0;
  double amplitude_kw = 1.0;
};

/// Parameters of one synthetic household. The HVAC unit is a single-stage
/// compressor behind a deadband thermostat driving a first-order RC model.
struct HouseholdSpec {
  double hvac_rating_kw = 3.0;
  double cop = 3.0;
  double thermal_resistance = 3.0;   // degC / kW
  double thermal_capacitance = 1.5;  // kWh / degC
  double setpoint_c = 25.0;
  double deadband_c = 1.5;
  double internal_gain_kw = 0.5;     // thermal
  /// Thermostat evaluations per 15-minute slot; the meter reports the
  /// slot average, so 1 gives a two-level 0/rating signal.
  int substeps_per_slot = 15;
  Vector base_day_shape;             // N kW, the part repeated every day
  std::vector<RoutinePeak> routine_peaks;
  double routine_jitter_h = 0.75;        // std of the daily peak-time shift
  double routine_amplitude_sigma = 0.3;  // lognormal spread of peak size
  double base_noise_sigma = 0.08;
  double day_scale_sigma = 0.08;     // multiplicative day-to-day variation
  double seasonal_drift = 0.10;      // relative base change over the season
  int fridge_period_slots = 4;
  double fridge_amplitude_kw = 0.15;
  double activity_events_per_day = 2.0;  // sub-threshold bursts (cooking, etc.)
  double liul_events_per_week = 3.0;
  std::uint64_t seed = 1;

  /// Throws ConfigError on a non-physical spec.
  void validate() const;
};

/// Seeded variation around the defaults above.
HouseholdSpec random_household_spec(std::uint64_t seed);

/// Sinusoidal diurnal cycle (minimum 05:00, peak 17:00) plus bounded noise.
/// Hot peaks land in [32, 38] degC, Mild in [16, 21], Shoulder in [22.5, 28.5].
TemperatureMatrix generate_temperature(int days, WeatherProfile profile, std::uint64_t seed,
                                       Date start = Date{std::chrono::year{2023} / 6 / 1});

struct SyntheticHousehold {
  DailyLoadMatrix total;
  DailyLoadMatrix hvac;
  DailyLoadMatrix base;
};

/// Simulates the household over the days of `temps`; total = hvac + base.
SyntheticHousehold generate_household(const HouseholdSpec& spec, const TemperatureMatrix& temps);

struct CorpusSpec {
  int households = 20;
  int hot_days = 30;
  int mild_days = 30;
  int shoulder_days = 0;
  Date start_date{std::chrono::year{2023} / 6 / 1};
  std::uint64_t seed = 42;
};

struct SyntheticCustomer {
  std::string id;
  std::uint64_t seed = 0;
  HouseholdSpec spec;
  TemperatureMatrix temps;
  SyntheticHousehold data;
  std::vector<WeatherProfile> day_profiles;
};

/// Shared weather (one city) over shuffled hot/mild/shoulder days and one
/// household per customer. Deterministic in `spec.seed`.
std::vector<SyntheticCustomer> generate_corpus(const CorpusSpec& spec);

/// Writes `<id>_power.csv`, `<id>_temperature.csv` and `<id>_truth.csv`.
void write_customer_csvs(const std::filesystem::path& dir, const SyntheticCustomer& customer);

/// Hourly temperature series for a TemperatureMatrix.
TimeSeries temperature_series(const TemperatureMatrix& temps);

}  // namespace hvacd
