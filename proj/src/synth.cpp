#include "hvacd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "hvacd/errors.hpp"
#include "hvacd/random.hpp"

namespace hvacd {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Vector bump(double center_h, double width_h) {
  Vector v(kSlotsPerDay);
  for (int i = 0; i < kSlotsPerDay; ++i) {
    const double h = (i + 0.5) / kSlotsPerHour;
    const double z = (h - center_h) / width_h;
    v[i] = std::exp(-0.5 * z * z);
  }
  return v;
}

double outdoor_at_slot(const Eigen::Ref<const Vector>& hourly, int slot) {
  const int h = slot / kSlotsPerHour;
  const double frac = double(slot % kSlotsPerHour) / kSlotsPerHour;
  const double next = hourly[std::min(h + 1, kHoursPerDay - 1)];
  return hourly[h] + frac * (next - hourly[h]);
}

struct ThermostatState {
  double indoor_c;
  bool on;
};

// One day of the RC model; returns the compressor duty fraction per slot.
// The thermostat is evaluated `substeps_per_slot` times per slot, so with
// a single substep the duty is exactly 0 or 1.
std::vector<double> simulate_day(const HouseholdSpec& s, const Eigen::Ref<const Vector>& hourly, ThermostatState& st) {
  const double dt_h = double(kMinutesPerSlot) / 60.0 / s.substeps_per_slot;
  const double decay = std::exp(-dt_h / (s.thermal_resistance * s.thermal_capacitance));
  const double capacity = s.cop * s.hvac_rating_kw;
  std::vector<double> duty(kSlotsPerDay, 0.0);
  for (int i = 0; i < kSlotsPerDay; ++i) {
    const double outdoor = outdoor_at_slot(hourly, i);
    int on_steps = 0;
    for (int k = 0; k < s.substeps_per_slot; ++k) {
      if (st.indoor_c > s.setpoint_c + 0.5 * s.deadband_c) st.on = true;
      if (st.indoor_c < s.setpoint_c - 0.5 * s.deadband_c) st.on = false;
      on_steps += st.on ? 1 : 0;
      const double steady = outdoor + s.thermal_resistance * (s.internal_gain_kw - (st.on ? capacity : 0.0));
      st.indoor_c = steady + (st.indoor_c - steady) * decay;
    }
    duty[i] = double(on_steps) / s.substeps_per_slot;
  }
  return duty;
}

}  // namespace

void HouseholdSpec::validate() const {
  if (!(hvac_rating_kw > 0.0 && thermal_resistance > 0.0 && thermal_capacitance > 0.0 && deadband_c > 0.0 &&
        cop > 0.0)) {
    throw ConfigError("household rating, R, C, COP and deadband must be positive");
  }
  if (base_day_shape.size() != kSlotsPerDay || base_day_shape.minCoeff() < 0.0) {
    throw ConfigError("household base_day_shape must have 96 nonnegative samples");
  }
  for (const RoutinePeak& p : routine_peaks) {
    if (!(p.width_h > 0.0) || p.amplitude_kw < 0.0) throw ConfigError("routine peaks need width > 0, amplitude >= 0");
  }
  if (routine_jitter_h < 0.0 || routine_amplitude_sigma < 0.0) throw ConfigError("routine variation must be >= 0");
  if (substeps_per_slot < 1) throw ConfigError("household substeps_per_slot must be >= 1");
  if (base_noise_sigma < 0.0 || day_scale_sigma < 0.0 || fridge_period_slots < 2 || fridge_amplitude_kw < 0.0 ||
      activity_events_per_day < 0.0 || liul_events_per_week < 0.0) {
    throw ConfigError("household noise/appliance parameters out of range");
  }
}

HouseholdSpec random_household_spec(std::uint64_t seed) {
  Rng rng(seed);
  HouseholdSpec s;
  s.seed = seed;
  s.hvac_rating_kw = uniform(rng, 2.5, 4.0);
  s.thermal_resistance = uniform(rng, 2.5, 3.5);
  s.thermal_capacitance = uniform(rng, 0.6, 1.2);
  s.setpoint_c = uniform(rng, 24.0, 26.0);
  s.deadband_c = uniform(rng, 0.4, 0.8);
  s.internal_gain_kw = uniform(rng, 0.3, 0.8);

  const double night = uniform(rng, 0.25, 0.5);
  const double day = uniform(rng, 0.3, 0.7);
  Vector daytime = Vector::Zero(kSlotsPerDay);
  for (int i = 9 * kSlotsPerHour; i < 17 * kSlotsPerHour; ++i) daytime[i] = 1.0;
  s.base_day_shape = Vector::Constant(kSlotsPerDay, night) + day * daytime;
  const double breakfast_h = uniform(rng, 6.5, 8.5);
  const double breakfast_kw = uniform(rng, 0.4, 1.0);
  const double dinner_h = uniform(rng, 18.0, 21.0);
  const double dinner_kw = uniform(rng, 0.6, 1.5);
  s.routine_peaks = {{breakfast_h, 1.0, breakfast_kw}, {dinner_h, 1.5, dinner_kw}};
  s.routine_jitter_h = uniform(rng, 0.5, 1.0);
  s.routine_amplitude_sigma = uniform(rng, 0.2, 0.4);

  s.base_noise_sigma = uniform(rng, 0.05, 0.12);
  s.day_scale_sigma = uniform(rng, 0.06, 0.10);
  const double drift_sign = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
  s.seasonal_drift = drift_sign * uniform(rng, 0.2, 0.4);
  s.fridge_period_slots = std::uniform_int_distribution<int>(3, 6)(rng);
  s.fridge_amplitude_kw = uniform(rng, 0.1, 0.2);
  s.activity_events_per_day = uniform(rng, 0.5, 1.5);
  s.liul_events_per_week = uniform(rng, 1.0, 4.0);
  return s;
}

TemperatureMatrix generate_temperature(int days, WeatherProfile profile, std::uint64_t seed, Date start) {
  if (days < 1) throw ConfigError("generate_temperature needs at least one day");
  Rng rng(seed);
  TemperatureMatrix out;
  out.temps.resize(kHoursPerDay, days);
  for (int d = 0; d < days; ++d) {
    out.day_dates.push_back(start + std::chrono::days{d});
    double peak = 0.0, swing = 0.0;
    switch (profile) {
      case WeatherProfile::Hot:
        peak = uniform(rng, 32.5, 37.5);
        swing = uniform(rng, 8.0, 11.0);
        break;
      case WeatherProfile::Mild:
        peak = uniform(rng, 16.5, 20.5);
        swing = uniform(rng, 6.0, 9.0);
        break;
      case WeatherProfile::Shoulder:
        peak = uniform(rng, 23.0, 28.0);
        swing = uniform(rng, 7.0, 10.0);
        break;
    }
    for (int h = 0; h < kHoursPerDay; ++h) {
      const double phase = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * (h - 5) / 24.0));
      out.temps(h, d) = peak - swing + swing * phase + uniform(rng, -0.4, 0.4);
    }
  }
  return out;
}

SyntheticHousehold generate_household(const HouseholdSpec& spec, const TemperatureMatrix& temps) {
  spec.validate();
  const int days = temps.days();
  Rng rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  SyntheticHousehold out;
  for (DailyLoadMatrix* m : {&out.total, &out.hvac, &out.base}) {
    m->samples = Matrix::Zero(kSlotsPerDay, days);
    m->day_dates = temps.day_dates;
  }

  for (int d = 0; d < days; ++d) {
    const auto hourly = temps.temps.col(d);

    // Warm-up pass over the same day approximates a periodic steady state.
    ThermostatState st{std::min(hourly[0] + spec.thermal_resistance * spec.internal_gain_kw, spec.setpoint_c), false};
    simulate_day(spec, hourly, st);
    const std::vector<double> duty = simulate_day(spec, hourly, st);

    const double season_pos = days > 1 ? double(d) / double(days - 1) - 0.5 : 0.0;
    const double scale = std::max(0.2, (1.0 + spec.seasonal_drift * season_pos) *
                                           std::exp(spec.day_scale_sigma * normal(rng) -
                                                    0.5 * spec.day_scale_sigma * spec.day_scale_sigma));
    Vector base = scale * spec.base_day_shape;
    for (const RoutinePeak& peak : spec.routine_peaks) {
      const double shift = spec.routine_jitter_h * normal(rng);
      const double sigma = spec.routine_amplitude_sigma;
      const double size = peak.amplitude_kw * std::exp(sigma * normal(rng) - 0.5 * sigma * sigma);
      base += scale * size * bump(peak.center_h + shift, peak.width_h);
    }

    const int phase = std::uniform_int_distribution<int>(0, spec.fridge_period_slots - 1)(rng);
    for (int i = 0; i < kSlotsPerDay; ++i) {
      if (((i + phase) % spec.fridge_period_slots) * 2 < spec.fridge_period_slots) {
        base[i] += spec.fridge_amplitude_kw;
      }
    }

    const int activities = std::poisson_distribution<int>(spec.activity_events_per_day)(rng);
    for (int a = 0; a < activities; ++a) {
      const int start = std::uniform_int_distribution<int>(6 * kSlotsPerHour, 22 * kSlotsPerHour)(rng);
      const int len = std::uniform_int_distribution<int>(1, 3)(rng);
      const double kw = uniform(rng, 0.3, 1.5);
      for (int i = start; i < std::min(start + len, kSlotsPerDay); ++i) base[i] += kw;
    }

    for (int i = 0; i < kSlotsPerDay; ++i) base[i] += spec.base_noise_sigma * normal(rng);
    base = base.cwiseMax(0.05);

    const int pulses = std::poisson_distribution<int>(spec.liul_events_per_week / 7.0)(rng);
    for (int p = 0; p < pulses; ++p) {
      const int start = std::uniform_int_distribution<int>(6 * kSlotsPerHour, 22 * kSlotsPerHour)(rng);
      const int len = std::uniform_int_distribution<int>(2, 8)(rng);
      const double kw = uniform(rng, 2.0, 5.0);
      for (int i = start; i < std::min(start + len, kSlotsPerDay); ++i) base[i] += kw;
    }

    Vector hvac(kSlotsPerDay);
    for (int i = 0; i < kSlotsPerDay; ++i) hvac[i] = duty[i] * spec.hvac_rating_kw;

    out.base.samples.col(d) = base;
    out.hvac.samples.col(d) = hvac;
    out.total.samples.col(d) = hvac + base;
  }
  return out;
}

std::vector<SyntheticCustomer> generate_corpus(const CorpusSpec& spec) {
  if (spec.households < 1) throw ConfigError("synth households must be >= 1");
  if (spec.hot_days < 0 || spec.mild_days < 0 || spec.shoulder_days < 0 ||
      spec.hot_days + spec.mild_days + spec.shoulder_days < 1) {
    throw ConfigError("synth needs at least one day");
  }
  std::vector<WeatherProfile> kinds;
  kinds.insert(kinds.end(), static_cast<std::size_t>(spec.hot_days), WeatherProfile::Hot);
  kinds.insert(kinds.end(), static_cast<std::size_t>(spec.mild_days), WeatherProfile::Mild);
  kinds.insert(kinds.end(), static_cast<std::size_t>(spec.shoulder_days), WeatherProfile::Shoulder);
  Rng shuffle_rng(derive_seed(spec.seed, 0));
  std::shuffle(kinds.begin(), kinds.end(), shuffle_rng);

  TemperatureMatrix weather;
  weather.temps.resize(kHoursPerDay, static_cast<Eigen::Index>(kinds.size()));
  for (std::size_t d = 0; d < kinds.size(); ++d) {
    const Date date = spec.start_date + std::chrono::days{static_cast<int>(d)};
    const TemperatureMatrix one = generate_temperature(1, kinds[d], derive_seed(spec.seed, 1000 + d), date);
    weather.temps.col(static_cast<Eigen::Index>(d)) = one.temps.col(0);
    weather.day_dates.push_back(date);
  }

  std::vector<SyntheticCustomer> out;
  out.reserve(static_cast<std::size_t>(spec.households));
  for (int h = 0; h < spec.households; ++h) {
    SyntheticCustomer c;
    char id[32];
    std::snprintf(id, sizeof id, "customer_%03d", h);
    c.id = id;
    c.seed = derive_seed(spec.seed, 1'000'000 + static_cast<std::uint64_t>(h));
    c.spec = random_household_spec(c.seed);
    c.temps = weather;
    c.day_profiles = kinds;
    c.data = generate_household(c.spec, weather);
    out.push_back(std::move(c));
  }
  return out;
}

TimeSeries temperature_series(const TemperatureMatrix& temps) {
  std::vector<TimePoint> ts;
  std::vector<double> vs;
  for (int d = 0; d < temps.days(); ++d) {
    for (int h = 0; h < kHoursPerDay; ++h) {
      ts.push_back(TimePoint{temps.day_dates[d]} + std::chrono::hours{h});
      vs.push_back(temps.temps(h, d));
    }
  }
  return TimeSeries(std::move(ts), std::move(vs));
}

void write_customer_csvs(const std::filesystem::path& dir, const SyntheticCustomer& customer) {
  auto write = [&](const std::string& suffix, const std::string& column, const TimeSeries& ts) {
    const auto path = dir / (customer.id + suffix);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    write_series_csv(out, column, ts);
    if (!out) throw DataError("failed writing " + path.string());
  };
  write("_power.csv", "kw", to_series(customer.data.total));
  write("_temperature.csv", "temp_c", temperature_series(customer.temps));
  write("_truth.csv", "kw_hvac", to_series(customer.data.hvac));
}

}  // namespace hvacd
