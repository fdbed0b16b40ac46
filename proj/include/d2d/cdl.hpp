#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "d2d/numerics.hpp"
#include "d2d/topology.hpp"

namespace d2d::cdl {

struct CdlConfig {
    double bandwidth_hz = 10e6;
    /// Semi-orthogonality threshold on normalized channel correlation.
    double epsilon = 0.4;
    /// QoS floor per CR in bits/s/Hz.
    double rmin_bps_per_hz = 0.5;
    /// Peak power of every CT.
    double pmax_w = 0.19952623149688797;  // 23 dBm
    double noise_w = 1e-12;               // -90 dBm
    std::size_t max_dual_iters = 2000;
    double dual_step = 0.1;
    double dual_tolerance = 1e-5;
    /// Admit as many CRs as CTs instead of one fewer.
    bool allow_full_rank = false;

    void validate() const;
};

/// Solution of the sum-rate power problem for a fixed precoder.
struct PowerAllocation {
    /// Total power steered to each CR (watts).
    Eigen::VectorXd powers;
    /// Per-CT multipliers lambda_m.
    Eigen::VectorXd lambda;
    /// Per-CR QoS multipliers mu_n.
    Eigen::VectorXd mu;
    /// Sum spectral efficiency (bits/s/Hz).
    double objective = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

struct CdlSchedule {
    std::vector<std::size_t> transmitters;
    /// In selection order.
    std::vector<std::size_t> receivers;
    /// |T| x |R|; column n is the channel from every CT to receiver n.
    numerics::ComplexMatrix channels;
    numerics::ZfPrecoder precoder;
    PowerAllocation allocation;
    Eigen::VectorXd rates_bps;
    /// Number of while-loop passes taken by the selection.
    std::size_t selection_rounds = 0;

    bool empty() const { return receivers.empty(); }
    double sum_rate_bps() const { return rates_bps.sum(); }
};

/// Column n holds channels(m, receivers[n]) for every transmitter m.
numerics::ComplexMatrix channel_matrix(const topology::Topology& topo,
                                       std::span<const std::size_t> transmitters,
                                       std::span<const std::size_t> receivers);

/// Rate of receiver n after zero-forcing: W log2(1 + P_n g_n / N).
double cdl_rate(std::size_t n, const numerics::ZfPrecoder& precoder,
                const Eigen::VectorXd& powers, const CdlConfig& config);

double cdl_rate(std::size_t n, const CdlSchedule& schedule, const Eigen::VectorXd& powers,
                const CdlConfig& config);

/// Per-CT power drawn by `powers`: sum_n P_n |wbar_{m,n}|^2.
Eigen::VectorXd ct_power(const numerics::ZfPrecoder& precoder, const Eigen::VectorXd& powers);

/// Powers that meet every CR's QoS floor with equality.
Eigen::VectorXd min_qos_powers(const numerics::ZfPrecoder& precoder, const CdlConfig& config);

/// Maximizes the CR sum rate under per-CT peak power and per-CR QoS by
/// projected dual ascent on the closed-form KKT primal. Empty when the QoS
/// floors cannot be met within the peak powers.
std::optional<PowerAllocation> allocate_cdl_power(const numerics::ZfPrecoder& precoder,
                                                  const CdlConfig& config);

/// Greedy semi-orthogonal CR selection with power allocation after each
/// admission. Every user in `transmitters` acts as a CT.
CdlSchedule schedule_cdl(std::span<const std::size_t> transmitters,
                         std::span<const std::size_t> candidates, const topology::Topology& topo,
                         const CdlConfig& config);

}  // namespace d2d::cdl
