#include "d2d/ndl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "d2d/numerics.hpp"
#include "d2d/units.hpp"

namespace d2d::ndl {

const char* to_string(WeightMode mode) {
    return mode == WeightMode::reciprocal ? "reciprocal" : "gain";
}

WeightMode parse_weight_mode(const std::string& text) {
    if (text == "reciprocal") return WeightMode::reciprocal;
    if (text == "gain") return WeightMode::gain;
    throw std::invalid_argument("unknown weight mode '" + text + "'");
}

double NdlConfig::target_sinr() const { return sinr_target(rmin_bps_per_hz); }

void NdlConfig::validate() const {
    if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("ndl: bandwidth must be positive");
    if (!(radius_m > 0.0)) throw std::invalid_argument("ndl: radius must be positive");
    if (!(rmin_bps_per_hz > 0.0)) throw std::invalid_argument("ndl: QoS floor must be positive");
    if (!(pmax_w > 0.0)) throw std::invalid_argument("ndl: peak power must be positive");
    if (!(noise_w > 0.0)) throw std::invalid_argument("ndl: noise power must be positive");
    if (dca_max_iters == 0) throw std::invalid_argument("ndl: need at least one DCA iteration");
}

// ---------------------------------------------------------------------------
// Candidates

bool NdlCandidates::is_receiver(std::size_t user) const {
    return std::binary_search(receivers.begin(), receivers.end(), user);
}

bool NdlCandidates::is_transmitter(std::size_t user) const {
    for (std::size_t j : receivers) {
        const auto& t = transmitters[j];
        if (std::binary_search(t.begin(), t.end(), user)) return true;
    }
    return false;
}

std::vector<std::size_t> NdlCandidates::ambiguous() const {
    std::vector<std::size_t> out;
    for (std::size_t u : receivers) {
        if (is_transmitter(u)) out.push_back(u);
    }
    return out;
}

std::vector<std::size_t> NdlCandidates::transmitter_pool() const {
    std::vector<std::size_t> pool;
    for (std::size_t j : receivers) {
        pool.insert(pool.end(), transmitters[j].begin(), transmitters[j].end());
    }
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    return pool;
}

std::size_t NdlCandidates::num_edges() const {
    std::size_t n = 0;
    for (std::size_t j : receivers) n += transmitters[j].size();
    return n;
}

NdlCandidates build_candidates(const topology::Topology& topo,
                               const content::ContentState& state,
                               std::optional<std::size_t> coop_group,
                               std::span<const std::size_t> excluded, double radius_m) {
    const std::size_t k_users = state.num_users();
    if (topo.size() != k_users) {
        throw std::invalid_argument("build_candidates: topology and content sizes differ");
    }
    std::vector<char> out(k_users, 0);
    for (std::size_t u : excluded) {
        if (u < k_users) out[u] = 1;
    }

    NdlCandidates c;
    c.transmitters.assign(k_users, {});
    for (std::size_t j = 0; j < k_users; ++j) {
        const auto g = state.requested_group[j];
        if (out[j] || !g || g == coop_group || state.caches(j, *g)) continue;
        for (std::size_t k = 0; k < k_users; ++k) {
            if (k != j && !out[k] && state.caches(k, *g) && topo.distances(k, j) < radius_m) {
                c.transmitters[j].push_back(k);
            }
        }
        if (!c.transmitters[j].empty()) c.receivers.push_back(j);
    }
    return c;
}

// ---------------------------------------------------------------------------
// Phase I: NT/NR decision

namespace {

// Summed gain from `from` to every potential NR other than the two skipped users.
double spill(std::size_t from, std::size_t skip_a, std::size_t skip_b,
             const NdlCandidates& candidates, const topology::Topology& topo) {
    double s = 0.0;
    for (std::size_t w : candidates.receivers) {
        if (w == skip_a || w == skip_b) continue;
        s += topo.gain(from, w);
    }
    return s;
}

}  // namespace

std::optional<double> transmitter_cost(std::size_t u, const NdlCandidates& candidates,
                                       const topology::Topology& topo, const NdlConfig& config) {
    std::optional<std::size_t> v;
    for (std::size_t j : candidates.receivers) {
        if (j == u) continue;
        const auto& t = candidates.transmitters[j];
        if (!std::binary_search(t.begin(), t.end(), u)) continue;
        if (!v || topo.gain(u, j) > topo.gain(u, *v)) v = j;
    }
    if (!v) return std::nullopt;
    const double power = config.noise_w * config.target_sinr() / topo.gain(u, *v);
    return power * spill(u, u, *v, candidates, topo);
}

std::optional<double> receiver_cost(std::size_t u, const NdlCandidates& candidates,
                                    const topology::Topology& topo, const NdlConfig& config) {
    if (!candidates.is_receiver(u)) return std::nullopt;
    const auto& t = candidates.transmitters[u];
    if (t.empty()) return std::nullopt;
    std::size_t supplier = t.front();
    for (std::size_t k : t) {
        if (topo.gain(k, u) > topo.gain(supplier, u)) supplier = k;
    }
    const double power = config.noise_w * config.target_sinr() / topo.gain(supplier, u);
    return power * spill(supplier, u, supplier, candidates, topo);
}

RoleResolution nt_nr_decision(const NdlCandidates& candidates, const topology::Topology& topo,
                              const NdlConfig& config) {
    RoleResolution res;
    res.candidates = candidates;
    for (std::size_t u : candidates.ambiguous()) {
        RoleDecision d;
        d.user = u;
        d.alpha = transmitter_cost(u, candidates, topo, config);
        d.beta = receiver_cost(u, candidates, topo, config);
        if (!d.alpha && !d.beta) {
            d.excluded = true;
        } else if (!d.alpha) {
            d.transmitter = false;
        } else if (!d.beta) {
            d.transmitter = true;
        } else {
            d.transmitter = *d.alpha < *d.beta;
        }
        res.decisions.push_back(d);
    }

    auto& c = res.candidates;
    for (const auto& d : res.decisions) {
        const bool drop_rx = d.transmitter || d.excluded;
        const bool drop_tx = !d.transmitter || d.excluded;
        if (drop_rx) {
            std::erase(c.receivers, d.user);
            c.transmitters[d.user].clear();
        }
        if (drop_tx) {
            for (auto& t : c.transmitters) std::erase(t, d.user);
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Phase II: link selection

std::vector<Link> select_links(const NdlCandidates& candidates, const topology::Topology& topo,
                               WeightMode mode) {
    const auto pool = candidates.transmitter_pool();
    const auto& rx = candidates.receivers;
    auto left_of = [&](std::size_t k) {
        return static_cast<std::size_t>(std::lower_bound(pool.begin(), pool.end(), k) -
                                        pool.begin());
    };

    std::vector<std::size_t> deg_left(pool.size(), 0), deg_right(rx.size(), 0);
    for (std::size_t r = 0; r < rx.size(); ++r) {
        for (std::size_t k : candidates.transmitters[rx[r]]) {
            ++deg_left[left_of(k)];
            ++deg_right[r];
        }
    }

    std::vector<Link> links;
    numerics::BipartiteGraph contended{pool.size(), rx.size(), {}};
    for (std::size_t r = 0; r < rx.size(); ++r) {
        for (std::size_t k : candidates.transmitters[rx[r]]) {
            const std::size_t l = left_of(k);
            if (deg_left[l] == 1 && deg_right[r] == 1) {
                links.push_back({k, rx[r]});
                continue;
            }
            const double g = topo.gain(k, rx[r]);
            const double w = mode == WeightMode::reciprocal ? 1.0 / g : g;
            contended.edges.push_back({l, r, w});
        }
    }
    for (const auto& e : numerics::max_weight_matching(contended)) {
        links.push_back({pool[e.left], rx[e.right]});
    }
    std::sort(links.begin(), links.end(),
              [](const Link& a, const Link& b) { return a.receiver < b.receiver; });
    return links;
}

// ---------------------------------------------------------------------------
// Phase III: link checking and removal

LinkSet LinkSet::without(std::size_t index) const {
    LinkSet out;
    const auto n = static_cast<Eigen::Index>(size());
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<std::size_t>(i) != index) keep.push_back(i);
    }
    const auto m = static_cast<Eigen::Index>(keep.size());
    out.gain.resize(m, m);
    out.noise.resize(m);
    out.target.resize(m);
    out.pmax.resize(m);
    for (Eigen::Index a = 0; a < m; ++a) {
        out.links.push_back(links[static_cast<std::size_t>(keep[a])]);
        out.noise(a) = noise(keep[a]);
        out.target(a) = target(keep[a]);
        out.pmax(a) = pmax(keep[a]);
        for (Eigen::Index b = 0; b < m; ++b) out.gain(a, b) = gain(keep[a], keep[b]);
    }
    return out;
}

LinkSet make_link_set(std::vector<Link> links, const topology::Topology& topo,
                      const NdlConfig& config) {
    const auto n = static_cast<Eigen::Index>(links.size());
    LinkSet s;
    s.gain.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            s.gain(i, j) = topo.gain(links[static_cast<std::size_t>(i)].transmitter,
                                     links[static_cast<std::size_t>(j)].receiver);
        }
    }
    s.noise = Eigen::VectorXd::Constant(n, config.noise_w);
    s.target = Eigen::VectorXd::Constant(n, config.target_sinr());
    s.pmax = Eigen::VectorXd::Constant(n, config.pmax_w);
    s.links = std::move(links);
    return s;
}

Eigen::MatrixXd interference_matrix(const LinkSet& links) {
    const auto n = static_cast<Eigen::Index>(links.size());
    Eigen::MatrixXd h(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            h(i, j) = i == j ? links.gain(i, i) / links.target(i) : -links.gain(j, i);
        }
    }
    return h;
}

std::optional<Eigen::VectorXd> min_power_vector(const LinkSet& links) {
    // Row i of H(Gamma) scaled by target_i / gain(i,i) gives (I - F) p = u,
    // which has a unit diagonal and the same solution.
    Eigen::MatrixXd a = interference_matrix(links);
    Eigen::VectorXd b = links.noise;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double row_scale = links.target(i) / links.gain(i, i);
        a.row(i) *= row_scale;
        b(i) *= row_scale;
    }
    return numerics::solve_linear(a, b);
}

bool within_box(const Eigen::VectorXd& p, const Eigen::VectorXd& pmax) {
    return (p.array() >= 0.0).all() && (p.array() <= pmax.array()).all();
}

double sinr(std::size_t j, const LinkSet& links, const Eigen::VectorXd& p) {
    const auto jj = static_cast<Eigen::Index>(j);
    double interference = links.noise(jj);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (i != jj) interference += p(i) * links.gain(i, jj);
    }
    return p(jj) * links.gain(jj, jj) / interference;
}

Eigen::VectorXd sinrs(const LinkSet& links, const Eigen::VectorXd& p) {
    Eigen::VectorXd s(p.size());
    for (Eigen::Index j = 0; j < p.size(); ++j) s(j) = sinr(static_cast<std::size_t>(j), links, p);
    return s;
}

double ndl_rate(std::size_t j, const LinkSet& links, const Eigen::VectorXd& p,
                double bandwidth_hz) {
    return bandwidth_hz * std::log2(1.0 + sinr(j, links, p));
}

double min_rate(const LinkSet& links, const Eigen::VectorXd& p) {
    double r = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < links.size(); ++j) r = std::min(r, ndl_rate(j, links, p, 1.0));
    return r;
}

RemovalScores removal_scores(const LinkSet& links) {
    const auto n = static_cast<Eigen::Index>(links.size());
    Eigen::VectorXd floor_power(n), tolerance(n);
    for (Eigen::Index u = 0; u < n; ++u) {
        floor_power(u) = links.noise(u) * links.target(u) / links.gain(u, u);
        tolerance(u) = links.target(u) / links.pmax(u);
    }
    RemovalScores s{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
    for (Eigen::Index u = 0; u < n; ++u) {
        for (Eigen::Index v = 0; v < n; ++v) {
            if (v == u) continue;
            s.caused(u) += tolerance(v) * links.gain(u, v);
            s.received(u) += floor_power(v) * links.gain(v, u);
        }
        s.caused(u) *= floor_power(u);
        s.received(u) *= tolerance(u);
    }
    return s;
}

CheckResult check_and_remove(LinkSet links) {
    CheckResult res;
    while (!links.empty()) {
        auto p = min_power_vector(links);
        if (p && within_box(*p, links.pmax)) {
            res.min_power = std::move(*p);
            break;
        }
        const auto scores = removal_scores(links);
        std::size_t worst = 0;
        double worst_score = -1.0;
        for (std::size_t u = 0; u < links.size(); ++u) {
            const auto i = static_cast<Eigen::Index>(u);
            const double score = std::max(scores.caused(i), scores.received(i));
            if (score > worst_score) {
                worst_score = score;
                worst = u;
            }
        }
        res.removed.push_back(links.links[worst]);
        links = links.without(worst);
        ++res.iterations;
    }
    res.links = std::move(links);
    return res;
}

// ---------------------------------------------------------------------------
// Power allocation

namespace {

// Convex subproblem of one convex-concave step: maximize the smallest
// surrogate rate over the unit box, by a log-barrier Newton method on the
// epigraph form. Powers are normalized by pmax.
class SurrogateProblem {
public:
    SurrogateProblem(const LinkSet& links, const Eigen::VectorXd& anchor)
        : n_(static_cast<Eigen::Index>(links.size())), noise_(links.noise) {
        // a_(i, j): power received at NR j from transmitter i at full power.
        a_ = links.pmax.asDiagonal() * links.gain;
        a_off_ = a_;
        a_off_.diagonal().setZero();
        const Eigen::VectorXd interference = a_off_.transpose() * anchor + noise_;
        // Linearization of sum_i log2 I_i(x) at the anchor is const + slope' x.
        slope_ = a_off_ * interference.cwiseInverse() / std::numbers::ln2;
    }

    // s_j(x) up to the common constant, which does not move the argmax.
    Eigen::VectorXd values(const Eigen::VectorXd& x) const {
        const Eigen::VectorXd total = a_.transpose() * x + noise_;
        const Eigen::VectorXd interference = a_off_.transpose() * x + noise_;
        const double log_i_sum = interference.array().log2().sum();
        const double lin = slope_.dot(x);
        Eigen::VectorXd s(n_);
        for (Eigen::Index j = 0; j < n_; ++j) {
            s(j) = std::log2(total(j)) + log_i_sum - std::log2(interference(j)) - lin;
        }
        return s;
    }

    Eigen::VectorXd solve(Eigen::VectorXd x) const {
        const double inner = 1e-7;
        x = x.cwiseMax(inner).cwiseMin(1.0 - inner);
        double t = values(x).minCoeff() - 1.0;
        const double constraints = 3.0 * static_cast<double>(n_);
        for (double weight = 1.0; constraints / weight > 1e-10; weight *= 10.0) {
            for (int it = 0; it < 100; ++it) {
                if (!newton_step(x, t, weight)) break;
            }
        }
        return x;
    }

private:
    // Barrier objective -weight*t - sum log(s_j - t) - sum log x - sum log(1-x).
    double barrier(const Eigen::VectorXd& x, double t, double weight) const {
        if ((x.array() <= 0.0).any() || (x.array() >= 1.0).any()) {
            return std::numeric_limits<double>::infinity();
        }
        const Eigen::VectorXd y = values(x).array() - t;
        if ((y.array() <= 0.0).any()) return std::numeric_limits<double>::infinity();
        return -weight * t - y.array().log().sum() - x.array().log().sum() -
               (1.0 - x.array()).log().sum();
    }

    // Returns false once the Newton decrement is negligible.
    bool newton_step(Eigen::VectorXd& x, double& t, double weight) const {
        const Eigen::Index m = n_ + 1;
        const Eigen::VectorXd total = a_.transpose() * x + noise_;
        const Eigen::VectorXd interference = a_off_.transpose() * x + noise_;
        const Eigen::VectorXd y = values(x).array() - t;
        const double inv_ln2 = 1.0 / std::numbers::ln2;

        // Shared pieces over i of the interference terms.
        Eigen::VectorXd v_sum = Eigen::VectorXd::Zero(n_);
        Eigen::MatrixXd s_sum = Eigen::MatrixXd::Zero(n_, n_);
        for (Eigen::Index i = 0; i < n_; ++i) {
            const Eigen::VectorXd col = a_off_.col(i);
            v_sum += col / interference(i);
            s_sum += col * col.transpose() / (interference(i) * interference(i));
        }

        Eigen::VectorXd grad = Eigen::VectorXd::Zero(m);
        Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(m, m);
        for (Eigen::Index j = 0; j < n_; ++j) {
            const Eigen::VectorXd aj = a_.col(j);
            const Eigen::VectorXd bj = a_off_.col(j);
            Eigen::VectorXd dy(m);
            dy.head(n_) = inv_ln2 * (aj / total(j) + v_sum - bj / interference(j)) - slope_;
            dy(n_) = -1.0;
            const Eigen::MatrixXd curv =
                -inv_ln2 * (aj * aj.transpose() / (total(j) * total(j)) + s_sum -
                            bj * bj.transpose() / (interference(j) * interference(j)));
            grad -= dy / y(j);
            hess += dy * dy.transpose() / (y(j) * y(j));
            hess.topLeftCorner(n_, n_) -= curv / y(j);
        }
        grad(n_) -= weight;
        for (Eigen::Index i = 0; i < n_; ++i) {
            grad(i) += -1.0 / x(i) + 1.0 / (1.0 - x(i));
            hess(i, i) += 1.0 / (x(i) * x(i)) + 1.0 / ((1.0 - x(i)) * (1.0 - x(i)));
        }

        const Eigen::VectorXd step = -hess.ldlt().solve(grad);
        const double decrement = -grad.dot(step);
        if (!std::isfinite(decrement) || decrement < 1e-14) return false;

        const double f0 = barrier(x, t, weight);
        double alpha = 1.0;
        for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
            const Eigen::VectorXd xn = x + alpha * step.head(n_);
            const double tn = t + alpha * step(n_);
            if (barrier(xn, tn, weight) <= f0 - 0.25 * alpha * decrement) {
                x = xn;
                t = tn;
                return decrement > 1e-12;
            }
        }
        return false;
    }

    Eigen::Index n_;
    Eigen::VectorXd noise_;
    Eigen::MatrixXd a_;
    Eigen::MatrixXd a_off_;
    Eigen::VectorXd slope_;
};

}  // namespace

DcaResult dc_power_allocation(const LinkSet& links, const Eigen::VectorXd& start,
                              const NdlConfig& config) {
    DcaResult res;
    res.powers = start;
    if (links.empty()) {
        res.converged = true;
        return res;
    }
    Eigen::VectorXd x = start.cwiseQuotient(links.pmax);
    double objective = min_rate(links, start);
    res.trace.push_back(objective);
    for (std::size_t it = 0; it < config.dca_max_iters; ++it) {
        const SurrogateProblem sub(links, x);
        Eigen::VectorXd xn = sub.solve(x);
        double next = min_rate(links, xn.cwiseProduct(links.pmax));
        ++res.iterations;
        if (next > objective) {
            // Push further along the step direction while the true min-rate
            // keeps improving (boosted DCA).
            const Eigen::VectorXd d = xn - x;
            double reach = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < d.size(); ++i) {
                if (d(i) > 0.0) reach = std::min(reach, (1.0 - xn(i)) / d(i));
                if (d(i) < 0.0) reach = std::min(reach, -xn(i) / d(i));
            }
            if (std::isfinite(reach) && reach > 0.0) {
                Eigen::VectorXd best = xn;
                for (int k = 0; k < 40; ++k, reach *= 0.5) {
                    const Eigen::VectorXd y = (xn + reach * d).cwiseMax(0.0).cwiseMin(1.0);
                    const double v = min_rate(links, y.cwiseProduct(links.pmax));
                    if (v > next) {
                        next = v;
                        best = y;
                    }
                }
                xn = best;
            }
        }
        const Eigen::VectorXd pn = xn.cwiseProduct(links.pmax);
        if (!(next >= objective)) {
            // Inexact subproblem solve; keep the better iterate.
            res.converged = true;
            break;
        }
        const double gain = next - objective;
        x = xn;
        objective = next;
        res.powers = pn;
        res.trace.push_back(objective);
        if (gain < config.dca_tolerance) {
            res.converged = true;
            break;
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Pipeline

NdlSchedule schedule_ndl(const topology::Topology& topo, const content::ContentState& state,
                         std::optional<std::size_t> coop_group,
                         std::span<const std::size_t> excluded, const NdlConfig& config) {
    config.validate();
    NdlSchedule s;
    s.candidates = build_candidates(topo, state, coop_group, excluded, config.radius_m);
    auto resolved = nt_nr_decision(s.candidates, topo, config);
    s.decisions = std::move(resolved.decisions);
    s.selected = select_links(resolved.candidates, topo, config.weight_mode);

    auto checked = check_and_remove(make_link_set(s.selected, topo, config));
    s.removal_iterations = checked.iterations;
    s.links = std::move(checked.links);
    s.min_power = std::move(checked.min_power);

    auto dca = dc_power_allocation(s.links, s.min_power, config);
    s.powers = std::move(dca.powers);
    s.dca_iterations = dca.iterations;
    s.dca_trace = std::move(dca.trace);

    s.rates_bps = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.links.size()));
    for (std::size_t j = 0; j < s.links.size(); ++j) {
        s.rates_bps(static_cast<Eigen::Index>(j)) =
            ndl_rate(j, s.links, s.powers, config.bandwidth_hz);
    }
    return s;
}

}  // namespace d2d::ndl
