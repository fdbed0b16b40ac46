#pragma once

namespace d2d {

// Shared numerical thresholds. Solvers and tests read the same values.
struct Tolerances {
    // Condition-number estimate above which a linear system is treated as singular.
    static constexpr double singular_condition = 1e12;
    // Relative residual accepted from a linear solve.
    static constexpr double solve_residual = 1e-8;
    // Relative leakage allowed between zero-forced receivers.
    static constexpr double zf_leakage = 1e-9;
    // Relative slack when checking power and QoS constraints.
    static constexpr double constraint = 1e-6;
    // Minimum distance used for path loss between distinct users (meters).
    static constexpr double min_distance_m = 1.0;
};

}  // namespace d2d
