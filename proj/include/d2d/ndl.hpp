#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "d2d/content.hpp"
#include "d2d/topology.hpp"

namespace d2d::ndl {

/// Edge weight used when resolving contended links by matching.
enum class WeightMode { reciprocal, gain };

const char* to_string(WeightMode mode);
WeightMode parse_weight_mode(const std::string& text);

struct NdlConfig {
    double bandwidth_hz = 10e6;
    double radius_m = 30.0;
    double rmin_bps_per_hz = 0.5;
    double pmax_w = 0.19952623149688797;  // 23 dBm
    double noise_w = 1e-12;               // -90 dBm
    WeightMode weight_mode = WeightMode::reciprocal;
    std::size_t dca_max_iters = 100;
    double dca_tolerance = 1e-4;

    double target_sinr() const;
    void validate() const;
};

/// Potential NDL endpoints before the NT/NR decision.
struct NdlCandidates {
    /// transmitters[j] lists the potential NTs of user j (empty unless j is a
    /// potential NR). Sorted.
    std::vector<std::vector<std::size_t>> transmitters;
    /// Potential NRs, sorted.
    std::vector<std::size_t> receivers;

    bool is_receiver(std::size_t user) const;
    bool is_transmitter(std::size_t user) const;
    /// Users that are both a potential NR and a potential NT of someone.
    std::vector<std::size_t> ambiguous() const;
    /// Union of all potential-NT sets of current receivers, sorted.
    std::vector<std::size_t> transmitter_pool() const;
    std::size_t num_edges() const;
};

/// Requesters of non-cooperative groups and the cachers of their group within
/// `radius_m`. Users in `excluded` take no part.
NdlCandidates build_candidates(const topology::Topology& topo,
                               const content::ContentState& state,
                               std::optional<std::size_t> coop_group,
                               std::span<const std::size_t> excluded, double radius_m);

/// Minimum interference user u causes as an NT serving its strongest
/// requester. Empty when u has no requester in range.
std::optional<double> transmitter_cost(std::size_t u, const NdlCandidates& candidates,
                                       const topology::Topology& topo, const NdlConfig& config);

/// Minimum interference u's strongest supplier causes when u is an NR.
/// Empty when u is not a potential NR.
std::optional<double> receiver_cost(std::size_t u, const NdlCandidates& candidates,
                                    const topology::Topology& topo, const NdlConfig& config);

struct RoleDecision {
    std::size_t user = 0;
    std::optional<double> alpha;
    std::optional<double> beta;
    bool transmitter = false;
    bool excluded = false;
};

struct RoleResolution {
    NdlCandidates candidates;
    std::vector<RoleDecision> decisions;
};

/// Resolves every ambiguous user to a single role. Costs are evaluated on the
/// input sets in user-index order and applied together; ties go to NR.
RoleResolution nt_nr_decision(const NdlCandidates& candidates, const topology::Topology& topo,
                              const NdlConfig& config);

struct Link {
    std::size_t transmitter = 0;
    std::size_t receiver = 0;

    friend bool operator==(const Link&, const Link&) = default;
};

/// One-to-one pairing. Isolated edges are kept as-is; every other edge goes
/// through maximum-weight matching. Sorted by receiver.
std::vector<Link> select_links(const NdlCandidates& candidates, const topology::Topology& topo,
                               WeightMode mode);

/// Dense view of a fixed set of links for power control.
struct LinkSet {
    std::vector<Link> links;
    /// gain(i, j) = |h|^2 from the transmitter of link i to the receiver of link j.
    Eigen::MatrixXd gain;
    Eigen::VectorXd noise;
    Eigen::VectorXd target;
    Eigen::VectorXd pmax;

    std::size_t size() const { return links.size(); }
    bool empty() const { return links.empty(); }
    LinkSet without(std::size_t index) const;
};

LinkSet make_link_set(std::vector<Link> links, const topology::Topology& topo,
                      const NdlConfig& config);

/// H(Gamma): diagonal gain(i,i)/target_i, off-diagonal -gain(j,i).
Eigen::MatrixXd interference_matrix(const LinkSet& links);

/// Powers meeting every SINR target with equality. Empty when the system is
/// numerically singular.
std::optional<Eigen::VectorXd> min_power_vector(const LinkSet& links);

/// 0 <= p <= pmax componentwise.
bool within_box(const Eigen::VectorXd& p, const Eigen::VectorXd& pmax);

double sinr(std::size_t j, const LinkSet& links, const Eigen::VectorXd& p);
Eigen::VectorXd sinrs(const LinkSet& links, const Eigen::VectorXd& p);

/// W log2(1 + sinr_j).
double ndl_rate(std::size_t j, const LinkSet& links, const Eigen::VectorXd& p,
                double bandwidth_hz);

/// Smallest per-link spectral efficiency (bits/s/Hz).
double min_rate(const LinkSet& links, const Eigen::VectorXd& p);

struct RemovalScores {
    /// Relative interference each link's transmitter causes to the others.
    Eigen::VectorXd caused;
    /// Relative interference each link's receiver suffers from the others.
    Eigen::VectorXd received;
};

RemovalScores removal_scores(const LinkSet& links);

struct CheckResult {
    LinkSet links;
    /// Minimum-power vector of the surviving links (empty vector when none).
    Eigen::VectorXd min_power;
    std::vector<Link> removed;
    std::size_t iterations = 0;
};

/// Drops the worst-interfering link until the minimum-power vector fits the
/// power box.
CheckResult check_and_remove(LinkSet links);

struct DcaResult {
    Eigen::VectorXd powers;
    /// Min-rate at the start point and after every accepted iterate.
    std::vector<double> trace;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Max-min rate power control by convex-concave iteration from `start`
/// (typically the minimum-power vector). The min-rate never decreases.
DcaResult dc_power_allocation(const LinkSet& links, const Eigen::VectorXd& start,
                              const NdlConfig& config);

struct NdlSchedule {
    NdlCandidates candidates;
    std::vector<RoleDecision> decisions;
    std::vector<Link> selected;
    LinkSet links;
    Eigen::VectorXd min_power;
    Eigen::VectorXd powers;
    Eigen::VectorXd rates_bps;
    std::size_t removal_iterations = 0;
    std::size_t dca_iterations = 0;
    std::vector<double> dca_trace;

    double sum_rate_bps() const { return rates_bps.sum(); }
};

/// Full NDL pipeline: candidates, NT/NR decision, link selection, link
/// checking and removal, then max-min power allocation.
NdlSchedule schedule_ndl(const topology::Topology& topo, const content::ContentState& state,
                         std::optional<std::size_t> coop_group,
                         std::span<const std::size_t> excluded, const NdlConfig& config);

}  // namespace d2d::ndl
