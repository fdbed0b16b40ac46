#pragma once

#include <filesystem>

#include <json.hpp>

#include "d2d/harness.hpp"

namespace d2d::harness {

// JSON layout (every key optional; unknown keys are rejected):
//
//   {
//     "geometry": {"side_m": 100},
//     "catalog":  {"num_files": 200, "cache_size": 10, "num_popular": 100},
//     "noise_dbm": -90,
//     "cdl": {"bandwidth_hz": 1e7, "epsilon": 0.4, "rmin_bps_per_hz": 0.5,
//             "pmax_dbm": 23, "max_dual_iters": 2000, "dual_step": 0.1,
//             "allow_full_rank": false},
//     "ndl": {"bandwidth_hz": 1e7, "radius_m": 30, "rmin_bps_per_hz": 0.5,
//             "pmax_dbm": 23, "weight_mode": "reciprocal", "dca_max_iters": 100},
//     "sweep": {"beta": [0.4, ...], "num_users": [20, 30, 40],
//               "modes": ["coop", "nocoop"], "drops": 500, "seed": 1, "threads": 0}
//   }

/// Applies `j` over `base`. Throws std::invalid_argument on unknown keys or
/// wrong types.
SweepConfig parse_config(const nlohmann::json& j, SweepConfig base = {});

/// Throws std::runtime_error naming the path when the file cannot be read.
SweepConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const SweepConfig& config);

}  // namespace d2d::harness
