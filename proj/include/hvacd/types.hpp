#pragma once

#include <Eigen/Dense>

namespace hvacd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr int kSlotsPerDay = 96;
inline constexpr int kHoursPerDay = 24;
inline constexpr int kSlotsPerHour = kSlotsPerDay / kHoursPerDay;
inline constexpr int kMinutesPerSlot = 15;

}  // namespace hvacd
