#pragma once

#include <cmath>

namespace d2d {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double dbm_to_watts(double dbm) { return db_to_linear(dbm - 30.0); }

inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

/// Minimum SINR that supports a spectral efficiency of `bps_per_hz`.
inline double sinr_target(double bps_per_hz) { return std::exp2(bps_per_hz) - 1.0; }

}  // namespace d2d
