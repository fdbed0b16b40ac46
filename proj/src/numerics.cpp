#include "d2d/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <utility>

#include "d2d/tolerances.hpp"

namespace d2d::numerics {

std::optional<ZfPrecoder> zf_precoder(const ComplexMatrix& channels) {
    const auto rows = channels.rows();
    const auto cols = channels.cols();
    if (cols == 0 || cols > rows) return std::nullopt;

    // Work with unit-norm columns: W = Hn (Hn^H Hn)^-1 D^-1 for H = Hn D.
    Eigen::VectorXd scale(cols);
    ComplexMatrix unit(rows, cols);
    for (Eigen::Index n = 0; n < cols; ++n) {
        scale(n) = channels.col(n).norm();
        if (!(scale(n) > 0.0) || !std::isfinite(scale(n))) return std::nullopt;
        unit.col(n) = channels.col(n) / scale(n);
    }
    const ComplexMatrix gram = unit.adjoint() * unit;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > Tolerances::singular_condition) return std::nullopt;

    ZfPrecoder zf;
    zf.weights = unit * gram.ldlt().solve(ComplexMatrix::Identity(cols, cols));
    for (Eigen::Index n = 0; n < cols; ++n) zf.weights.col(n) /= scale(n);
    zf.norms_sq = zf.weights.colwise().squaredNorm().transpose();
    zf.directions = zf.weights;
    for (Eigen::Index n = 0; n < cols; ++n) zf.directions.col(n) /= std::sqrt(zf.norms_sq(n));
    return zf;
}

ComplexVector gs_residual(const ComplexVector& h, std::span<const ComplexVector> basis) {
    ComplexVector g = h;
    for (const auto& b : basis) {
        const double nsq = b.squaredNorm();
        if (!(nsq > 0.0)) throw std::invalid_argument("gs_residual: zero basis vector");
        g -= (b.dot(h) / nsq) * b;  // dot() conjugates its left operand
    }
    return g;
}

std::optional<Eigen::VectorXd> solve_linear(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    if (a.rows() != a.cols() || a.rows() != b.size()) {
        throw std::invalid_argument("solve_linear: dimension mismatch");
    }
    if (a.rows() == 0) return Eigen::VectorXd{};
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    const double rcond = lu.rcond();
    if (!(rcond > 0.0) || 1.0 / rcond > Tolerances::singular_condition) return std::nullopt;
    Eigen::VectorXd x = lu.solve(b);
    if (!x.allFinite()) return std::nullopt;
    if ((a * x - b).norm() > Tolerances::solve_residual * b.norm()) return std::nullopt;
    return x;
}

void BipartiteGraph::validate() const {
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& e : edges) {
        if (e.left >= num_left || e.right >= num_right) {
            throw std::invalid_argument("bipartite graph: edge endpoint out of range");
        }
        if (std::isnan(e.weight) || e.weight < 0.0 || std::isinf(e.weight)) {
            throw std::invalid_argument("bipartite graph: edge weight must be finite and >= 0");
        }
        if (!seen.emplace(e.left, e.right).second) {
            throw std::invalid_argument("bipartite graph: parallel edge");
        }
    }
}

namespace {

// Minimum-cost perfect assignment on a square cost matrix (Kuhn-Munkres with
// potentials). Returns the column assigned to each row.
std::vector<std::size_t> min_cost_assignment(const Eigen::MatrixXd& cost) {
    const std::size_t n = static_cast<std::size_t>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();
    // 1-based with a virtual row/column 0.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> row_of(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        row_of[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = row_of[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (row_of[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> col_of(n);
    for (std::size_t j = 1; j <= n; ++j) col_of[row_of[j] - 1] = j - 1;
    return col_of;
}

}  // namespace

std::vector<Edge> max_weight_matching(const BipartiteGraph& graph) {
    graph.validate();
    if (graph.edges.empty()) return {};
    const std::size_t n = std::max(graph.num_left, graph.num_right);
    double wmax = 0.0;
    for (const auto& e : graph.edges) wmax = std::max(wmax, e.weight);
    const double scale = wmax > 0.0 ? 1.0 / wmax : 1.0;

    // Non-edges and padding cost 0, so with non-negative weights the best
    // assignment restricted to real edges is a maximum-weight matching.
    Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXi edge_index = Eigen::MatrixXi::Constant(n, n, -1);
    for (std::size_t k = 0; k < graph.edges.size(); ++k) {
        const auto& e = graph.edges[k];
        cost(e.left, e.right) = -e.weight * scale;
        edge_index(e.left, e.right) = static_cast<int>(k);
    }
    const auto col_of = min_cost_assignment(cost);
    std::vector<Edge> matching;
    for (std::size_t i = 0; i < graph.num_left; ++i) {
        const int k = edge_index(i, col_of[i]);
        if (k >= 0) matching.push_back(graph.edges[static_cast<std::size_t>(k)]);
    }
    return matching;
}

double zf_leakage(const ComplexMatrix& channels, const ComplexMatrix& directions) {
    double worst = 0.0;
    for (Eigen::Index n = 0; n < channels.cols(); ++n) {
        for (Eigen::Index k = 0; k < directions.cols(); ++k) {
            if (k == n) continue;
            const double denom = channels.col(n).norm() * directions.col(k).norm();
            worst = std::max(worst, std::abs(channels.col(n).dot(directions.col(k))) / denom);
        }
    }
    return worst;
}

double total_weight(std::span<const Edge> matching) {
    double s = 0.0;
    for (const auto& e : matching) s += e.weight;
    return s;
}

Eigen::VectorXd dual_step(const Eigen::VectorXd& multipliers, const Eigen::VectorXd& slack,
                          double step) {
    if (!(step > 0.0)) throw std::invalid_argument("dual_step: step must be positive");
    return (multipliers - step * slack).cwiseMax(0.0);
}

DualAscentResult projected_dual_ascent(const SlackOracle& slack, Eigen::VectorXd multipliers,
                                       const DualAscentOptions& options) {
    if (!(options.step0 > 0.0)) {
        throw std::invalid_argument("projected_dual_ascent: step must be positive");
    }
    DualAscentResult result;
    multipliers = multipliers.cwiseMax(0.0);
    if (multipliers.size() == 0) {
        result.converged = true;
        return result;
    }
    for (std::size_t t = 1; t <= options.max_iterations; ++t) {
        const double step = options.step0 / std::sqrt(static_cast<double>(t));
        Eigen::VectorXd next = dual_step(multipliers, slack(multipliers), step);
        const double move = (next - multipliers).cwiseAbs().maxCoeff();
        const double ref = std::max(1.0, next.cwiseAbs().maxCoeff());
        multipliers = std::move(next);
        result.iterations = t;
        if (move < options.tolerance * ref) {
            result.converged = true;
            break;
        }
    }
    result.multipliers = std::move(multipliers);
    return result;
}

}  // namespace d2d::numerics
