#include "d2d/cdl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "d2d/units.hpp"

namespace d2d::cdl {

using numerics::ComplexMatrix;
using numerics::ComplexVector;
using numerics::ZfPrecoder;

void CdlConfig::validate() const {
    if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("cdl: bandwidth must be positive");
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw std::invalid_argument("cdl: epsilon must lie in (0, 1)");
    }
    if (!(rmin_bps_per_hz >= 0.0)) throw std::invalid_argument("cdl: QoS floor must be >= 0");
    if (!(pmax_w > 0.0)) throw std::invalid_argument("cdl: peak power must be positive");
    if (!(noise_w > 0.0)) throw std::invalid_argument("cdl: noise power must be positive");
    if (max_dual_iters == 0) throw std::invalid_argument("cdl: need at least one dual iteration");
    if (!(dual_step > 0.0)) throw std::invalid_argument("cdl: dual step must be positive");
}

ComplexMatrix channel_matrix(const topology::Topology& topo,
                             std::span<const std::size_t> transmitters,
                             std::span<const std::size_t> receivers) {
    ComplexMatrix h(transmitters.size(), receivers.size());
    for (std::size_t n = 0; n < receivers.size(); ++n) {
        for (std::size_t m = 0; m < transmitters.size(); ++m) {
            h(m, n) = topo.channels(transmitters[m], receivers[n]);
        }
    }
    return h;
}

namespace {

// Budget multipliers live in the dual vector divided by this.
constexpr double kLambdaScale = 10.0;

double spectral_efficiency(double power, double gain, double noise) {
    return std::log2(1.0 + power * gain / noise);
}

double sum_spectral_efficiency(const ZfPrecoder& zf, const Eigen::VectorXd& powers,
                               double noise) {
    double s = 0.0;
    for (Eigen::Index n = 0; n < powers.size(); ++n) {
        s += spectral_efficiency(powers(n), zf.effective_gain(n), noise);
    }
    return s;
}

// |wbar_{m,n}|^2, the share of P_n radiated by CT m.
Eigen::MatrixXd power_shares(const ZfPrecoder& zf) { return zf.directions.cwiseAbs2(); }

}  // namespace

double cdl_rate(std::size_t n, const ZfPrecoder& precoder, const Eigen::VectorXd& powers,
                const CdlConfig& config) {
    return config.bandwidth_hz *
           spectral_efficiency(powers(n), precoder.effective_gain(n), config.noise_w);
}

double cdl_rate(std::size_t n, const CdlSchedule& schedule, const Eigen::VectorXd& powers,
                const CdlConfig& config) {
    return cdl_rate(n, schedule.precoder, powers, config);
}

Eigen::VectorXd ct_power(const ZfPrecoder& precoder, const Eigen::VectorXd& powers) {
    return power_shares(precoder) * powers;
}

Eigen::VectorXd min_qos_powers(const ZfPrecoder& precoder, const CdlConfig& config) {
    const double target = sinr_target(config.rmin_bps_per_hz);
    Eigen::VectorXd p(precoder.num_receivers());
    for (Eigen::Index n = 0; n < p.size(); ++n) {
        p(n) = target * config.noise_w / precoder.effective_gain(n);
    }
    return p;
}

std::optional<PowerAllocation> allocate_cdl_power(const ZfPrecoder& precoder,
                                                  const CdlConfig& config) {
    const auto num_ct = precoder.directions.rows();
    const auto num_cr = precoder.directions.cols();
    const Eigen::MatrixXd shares = power_shares(precoder);
    const double pmax = config.pmax_w;
    const double noise = config.noise_w;

    // With zero forcing each QoS floor is a lower bound on its own P_n, so the
    // problem is feasible iff the floors fit the per-CT budgets.
    const Eigen::VectorXd floor = min_qos_powers(precoder, config);
    const Eigen::VectorXd floor_load = shares * floor;
    if ((floor_load.array() > pmax).any()) return std::nullopt;

    // Largest P_n any single CT budget allows when CR n is served alone.
    Eigen::VectorXd cap(num_cr);
    for (Eigen::Index n = 0; n < num_cr; ++n) {
        double c = std::numeric_limits<double>::infinity();
        for (Eigen::Index m = 0; m < num_ct; ++m) {
            if (shares(m, n) > 0.0) c = std::min(c, pmax / shares(m, n));
        }
        cap(n) = c;
    }

    // Dual vector: [lambda_m * pmax / kLambdaScale (dimensionless); mu_n].
    auto primal = [&](const Eigen::VectorXd& dual) {
        Eigen::VectorXd p(num_cr);
        for (Eigen::Index n = 0; n < num_cr; ++n) {
            double price = 0.0;
            for (Eigen::Index m = 0; m < num_ct; ++m) price += dual(m) * kLambdaScale / pmax * shares(m, n);
            const double mu = dual(num_ct + n);
            const double level = price > 0.0 ? (1.0 + mu) / (std::numbers::ln2 * price)
                                             : std::numeric_limits<double>::infinity();
            const double p0 = std::max(0.0, level - noise / precoder.effective_gain(n));
            p(n) = std::min(p0, cap(n));
        }
        return p;
    };

    // Pull a dual-iterate primal back into the feasible set: lift to the QoS
    // floors, then shrink toward them until every CT budget holds.
    auto restore = [&](Eigen::VectorXd p) {
        p = p.cwiseMax(floor).cwiseMin(cap.cwiseMax(floor));
        const Eigen::VectorXd excess_load = shares * (p - floor);
        double s = 1.0;
        for (Eigen::Index m = 0; m < num_ct; ++m) {
            if (excess_load(m) > 0.0) {
                s = std::min(s, (pmax - floor_load(m)) / excess_load(m));
            }
        }
        return Eigen::VectorXd(floor + std::max(0.0, s) * (p - floor));
    };

    PowerAllocation best;
    best.objective = -std::numeric_limits<double>::infinity();
    auto consider = [&](const Eigen::VectorXd& candidate) {
        Eigen::VectorXd p = restore(candidate);
        const double obj = sum_spectral_efficiency(precoder, p, noise);
        if (obj > best.objective) {
            best.objective = obj;
            best.powers = std::move(p);
        }
    };

    auto slack = [&](const Eigen::VectorXd& dual) {
        const Eigen::VectorXd p = primal(dual);
        consider(p);
        Eigen::VectorXd s(num_ct + num_cr);
        s.head(num_ct) = (Eigen::VectorXd::Constant(num_ct, pmax) - shares * p) / pmax;
        for (Eigen::Index n = 0; n < num_cr; ++n) {
            s(num_ct + n) =
                spectral_efficiency(p(n), precoder.effective_gain(n), noise) -
                config.rmin_bps_per_hz;
        }
        return s;
    };

    numerics::DualAscentOptions opts;
    opts.step0 = config.dual_step;
    opts.max_iterations = config.max_dual_iters;
    opts.tolerance = config.dual_tolerance;
    const auto result =
        numerics::projected_dual_ascent(slack, Eigen::VectorXd::Zero(num_ct + num_cr), opts);
    consider(primal(result.multipliers));

    best.lambda = result.multipliers.head(num_ct) * (kLambdaScale / pmax);
    best.mu = result.multipliers.tail(num_cr);
    best.iterations = result.iterations;
    best.converged = result.converged;
    return best;
}

CdlSchedule schedule_cdl(std::span<const std::size_t> transmitters,
                         std::span<const std::size_t> candidates, const topology::Topology& topo,
                         const CdlConfig& config) {
    config.validate();
    CdlSchedule schedule;
    schedule.transmitters.assign(transmitters.begin(), transmitters.end());
    if (transmitters.empty() || candidates.empty()) return schedule;

    const std::size_t max_receivers =
        config.allow_full_rank ? transmitters.size() : transmitters.size() - 1;

    std::vector<ComplexVector> raw(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        raw[c] = channel_matrix(topo, transmitters, candidates.subspan(c, 1)).col(0);
    }

    std::vector<std::size_t> omega(candidates.size());  // positions into `candidates`
    for (std::size_t c = 0; c < omega.size(); ++c) omega[c] = c;
    std::vector<ComplexVector> basis;
    std::vector<std::size_t> chosen;

    while (chosen.size() < max_receivers && !omega.empty()) {
        ++schedule.selection_rounds;
        std::size_t pick = omega.front();
        double best_norm = -1.0;
        ComplexVector best_residual;
        for (std::size_t c : omega) {
            ComplexVector g = numerics::gs_residual(raw[c], basis);
            const double nsq = g.squaredNorm();
            if (nsq > best_norm) {
                best_norm = nsq;
                pick = c;
                best_residual = std::move(g);
            }
        }

        std::vector<std::size_t> trial = chosen;
        trial.push_back(pick);
        std::vector<std::size_t> users(trial.size());
        for (std::size_t i = 0; i < trial.size(); ++i) users[i] = candidates[trial[i]];
        const ComplexMatrix h = channel_matrix(topo, transmitters, users);
        auto zf = numerics::zf_precoder(h);
        if (!zf) {
            // Numerically dependent on the admitted set: cannot be zero-forced.
            std::erase(omega, pick);
            continue;
        }
        auto alloc = allocate_cdl_power(*zf, config);
        if (!alloc) break;

        chosen = std::move(trial);
        schedule.receivers = std::move(users);
        schedule.channels = h;
        schedule.precoder = std::move(*zf);
        schedule.allocation = std::move(*alloc);

        basis.push_back(best_residual);
        const ComplexVector& gi = basis.back();
        const double gi_norm = gi.norm();
        std::vector<std::size_t> next;
        for (std::size_t c : omega) {
            if (c == pick) continue;
            const double corr = std::abs(raw[c].dot(gi)) / (raw[c].norm() * gi_norm);
            if (corr < config.epsilon) next.push_back(c);
        }
        omega = std::move(next);
    }

    const auto n = schedule.receivers.size();
    schedule.rates_bps = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        schedule.rates_bps(i) = cdl_rate(i, schedule.precoder, schedule.allocation.powers, config);
    }
    return schedule;
}

}  // namespace d2d::cdl
