#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace d2d::numerics {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Zero-forcing precoder for the channel matrix H whose column n is the
/// channel from every transmitter to receiver n.
struct ZfPrecoder {
    /// W = H (H^H H)^-1, so H^H W = I.
    ComplexMatrix weights;
    /// Unit-norm columns w_n / ||w_n||.
    ComplexMatrix directions;
    /// ||w_n||^2. The post-precoding gain of receiver n is 1 / ||w_n||^2.
    Eigen::VectorXd norms_sq;

    std::size_t num_receivers() const { return static_cast<std::size_t>(weights.cols()); }
    double effective_gain(std::size_t n) const { return 1.0 / norms_sq(n); }
};

/// Empty when H has more columns than rows or its columns are numerically
/// dependent.
std::optional<ZfPrecoder> zf_precoder(const ComplexMatrix& channels);

/// Largest normalized cross term |h_n^H d_k| / (||h_n|| ||d_k||) over k != n.
double zf_leakage(const ComplexMatrix& channels, const ComplexMatrix& directions);

/// h minus its projections onto each (mutually orthogonal) basis vector.
ComplexVector gs_residual(const ComplexVector& h, std::span<const ComplexVector> basis);

/// Solves a x = b. Empty when the condition estimate exceeds the singular
/// threshold or the residual check fails.
std::optional<Eigen::VectorXd> solve_linear(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

struct Edge {
    std::size_t left = 0;
    std::size_t right = 0;
    double weight = 0.0;
};

struct BipartiteGraph {
    std::size_t num_left = 0;
    std::size_t num_right = 0;
    std::vector<Edge> edges;

    /// Throws std::invalid_argument for NaN or negative weights, out-of-range
    /// endpoints, or parallel edges.
    void validate() const;
};

/// Maximum-weight (not necessarily maximum-cardinality) matching. Returned
/// edges are sorted by left vertex.
std::vector<Edge> max_weight_matching(const BipartiteGraph& graph);

double total_weight(std::span<const Edge> matching);

struct DualAscentOptions {
    /// Step at iteration t (1-based) is step0 / sqrt(t).
    double step0 = 0.1;
    std::size_t max_iterations = 2000;
    /// Stop when the largest multiplier move falls below tolerance * max(1, |m|_inf).
    double tolerance = 1e-5;
};

struct DualAscentResult {
    Eigen::VectorXd multipliers;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Constraint slack at the given multipliers: positive when satisfied, negative
/// when violated.
using SlackOracle = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// One projected step: [m - step * slack]^+.
Eigen::VectorXd dual_step(const Eigen::VectorXd& multipliers, const Eigen::VectorXd& slack,
                          double step);

/// Iterates `dual_step` with diminishing steps. Multipliers stay non-negative.
DualAscentResult projected_dual_ascent(const SlackOracle& slack, Eigen::VectorXd multipliers,
                                       const DualAscentOptions& options = {});

}  // namespace d2d::numerics
