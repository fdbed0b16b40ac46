// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "d2d/cdl.hpp"
#include "d2d/harness.hpp"
#include "d2d/ndl.hpp"
#include "d2d/numerics.hpp"
#include "test_support.hpp"

using namespace d2d;
using namespace d2d::testing;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void run(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o = body();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > limit_s) {
        o.pass = false;
        o.detail += " [over time limit]";
    }
    if (!o.pass) ++failures;
    std::printf("%s [%d] %s: %s (%.1f s, limit %.0f s)\n", o.pass ? "PASS" : "FAIL", id, name,
                o.detail.c_str(), secs, limit_s);
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

topology::Topology scatter(std::size_t users, double side, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, side);
    std::vector<topology::Point> pos(users);
    for (auto& p : pos) p = {u(rng), u(rng)};
    return topology::build_topology(pos, rng);
}

std::vector<std::size_t> range(std::size_t from, std::size_t to) {
    std::vector<std::size_t> v;
    for (std::size_t i = from; i < to; ++i) v.push_back(i);
    return v;
}

// Exact maximum-weight matching by dynamic programming over subsets of the
// right side.
double subset_dp_matching(const numerics::BipartiteGraph& g) {
    const std::size_t states = std::size_t{1} << g.num_right;
    std::vector<std::vector<double>> w(g.num_left, std::vector<double>(g.num_right, -1.0));
    for (const auto& e : g.edges) w[e.left][e.right] = e.weight;
    std::vector<double> best(states, -1.0), next(states);
    best[0] = 0.0;
    for (std::size_t l = 0; l < g.num_left; ++l) {
        next = best;
        for (std::size_t mask = 0; mask < states; ++mask) {
            if (best[mask] < 0.0) continue;
            for (std::size_t r = 0; r < g.num_right; ++r) {
                if ((mask >> r) & 1u || w[l][r] < 0.0) continue;
                auto& slot = next[mask | (std::size_t{1} << r)];
                slot = std::max(slot, best[mask] + w[l][r]);
            }
        }
        best.swap(next);
    }
    return *std::max_element(best.begin(), best.end());
}

Outcome zf_orthogonality() {
    cdl::CdlConfig cfg;
    auto rng = make_rng(1001);
    double worst = 0.0;
    int instances = 0, multi = 0;
    while (instances < 1000) {
        const std::size_t ct = 2 + static_cast<std::size_t>(instances % 5);
        const std::size_t cand = ct + 4;
        const auto topo = scatter(ct + cand, 100.0, rng);
        const auto s = cdl::schedule_cdl(range(0, ct), range(ct, ct + cand), topo, cfg);
        if (s.empty()) continue;
        ++instances;
        multi += s.receivers.size() > 1 ? 1 : 0;
        const auto& h = s.channels;
        const auto& w = s.precoder.directions;
        for (Eigen::Index n = 0; n < h.cols(); ++n) {
            for (Eigen::Index k = 0; k < w.cols(); ++k) {
                if (k == n) continue;
                worst = std::max(worst, std::abs(h.col(n).dot(w.col(k))) /
                                            (h.col(n).norm() * w.col(k).norm()));
            }
        }
    }
    return {worst < 1e-9, fmt("max normalized cross term %.3g over %d schedules (%d with >1 CR)",
                              worst, instances, multi)};
}

Outcome cdl_power_oracle() {
    cdl::CdlConfig cfg;
    const double target = sinr_target(cfg.rmin_bps_per_hz);
    auto rng = make_rng(1002);
    int compared = 0, mismatched_feasibility = 0, violations = 0;
    double worst_ratio = 1e300;
    while (compared < 200) {
        const auto topo = scatter(4, 60.0, rng);
        const auto h = cdl::channel_matrix(topo, range(0, 2), range(2, 4));
        const auto zf = numerics::zf_precoder(h);
        if (!zf) continue;
        const auto ez = explicit_zf(h);
        auto objective = [&](double p0, double p1) {
            if (p0 * ez.gain(0) < target * cfg.noise_w || p1 * ez.gain(1) < target * cfg.noise_w)
                return std::nan("");
            for (int m = 0; m < 2; ++m)
                if (ez.shares(m, 0) * p0 + ez.shares(m, 1) * p1 > cfg.pmax_w) return std::nan("");
            return std::log2(1.0 + p0 * ez.gain(0) / cfg.noise_w) +
                   std::log2(1.0 + p1 * ez.gain(1) / cfg.noise_w);
        };
        const double cap0 = cfg.pmax_w / std::max(ez.shares(0, 0), ez.shares(1, 0));
        const double cap1 = cfg.pmax_w / std::max(ez.shares(0, 1), ez.shares(1, 1));
        const auto grid = grid_search_2d(cap0, cap1, 200, objective);
        const auto a = cdl::allocate_cdl_power(*zf, cfg);
        if (!grid.found) continue;
        ++compared;
        if (!a) {
            ++mismatched_feasibility;
            continue;
        }
        const Eigen::VectorXd load = ez.shares * a->powers;
        for (int m = 0; m < 2; ++m) violations += load(m) > cfg.pmax_w * (1.0 + 1e-6) ? 1 : 0;
        for (int n = 0; n < 2; ++n) {
            const double rate = std::log2(1.0 + a->powers(n) * ez.gain(n) / cfg.noise_w);
            violations += rate < cfg.rmin_bps_per_hz * (1.0 - 1e-6) ? 1 : 0;
        }
        const double achieved = std::log2(1.0 + a->powers(0) * ez.gain(0) / cfg.noise_w) +
                                std::log2(1.0 + a->powers(1) * ez.gain(1) / cfg.noise_w);
        worst_ratio = std::min(worst_ratio, achieved / grid.value);
    }
    const bool ok = worst_ratio >= 0.99 && violations == 0 && mismatched_feasibility == 0;
    return {ok, fmt("worst objective/grid %.5f over %d instances, %d constraint violations, "
                    "%d missed feasible",
                    worst_ratio, compared, violations, mismatched_feasibility)};
}

Outcome link_check_exactness() {
    auto rng = make_rng(1003);
    int instances = 0;
    double worst = 0.0;
    while (instances < 500) {
        const std::size_t n = 2 + static_cast<std::size_t>(instances % 5);
        const auto s = random_link_set(n, 100.0, 25.0, rng);
        const auto p = ndl::min_power_vector(s);
        if (!p || ((*p).array() < 0.0).any()) continue;
        ++instances;
        for (Eigen::Index j = 0; j < p->size(); ++j) {
            worst = std::max(worst, std::abs(direct_sinr(s, *p, j) / s.target(j) - 1.0));
        }
    }
    return {worst < 1e-6,
            fmt("max |sinr/target - 1| = %.3g over %d instances", worst, instances)};
}

Outcome matching_oracle() {
    auto rng = make_rng(1004);
    std::uniform_int_distribution<std::size_t> side(1, 8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int mismatches = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 300; ++trial) {
        numerics::BipartiteGraph g{side(rng), side(rng), {}};
        const double density = 0.2 + 0.8 * u(rng);
        for (std::size_t l = 0; l < g.num_left; ++l)
            for (std::size_t r = 0; r < g.num_right; ++r)
                if (u(rng) < density) g.edges.push_back({l, r, std::exp(8.0 * u(rng) - 4.0)});
        const auto m = numerics::max_weight_matching(g);
        const double got = numerics::total_weight(m);
        const double want = subset_dp_matching(g);
        const double rel = std::abs(got - want) / std::max(1.0, want);
        worst = std::max(worst, rel);
        if (rel > 1e-12) ++mismatches;
    }
    return {mismatches == 0, fmt("%d of 300 graphs differ (max relative gap %.3g)", mismatches, worst)};
}

Outcome dca_oracle() {
    ndl::NdlConfig cfg;
    auto rng = make_rng(1005);
    int schedules = 0, non_monotone = 0, qos_broken = 0;
    while (schedules < 200) {
        const std::size_t n = 2 + static_cast<std::size_t>(schedules % 7);
        const auto checked = ndl::check_and_remove(random_link_set(n, 60.0, 25.0, rng));
        if (checked.links.empty()) continue;
        ++schedules;
        const auto r = ndl::dc_power_allocation(checked.links, checked.min_power, cfg);
        for (std::size_t i = 1; i < r.trace.size(); ++i)
            non_monotone += r.trace[i] < r.trace[i - 1] ? 1 : 0;
        for (Eigen::Index j = 0; j < r.powers.size(); ++j)
            qos_broken += direct_sinr(checked.links, r.powers, j) <
                                  checked.links.target(j) * (1.0 - 1e-6)
                              ? 1
                              : 0;
    }
    int pairs = 0;
    double worst = 1e300;
    while (pairs < 100) {
        const auto s = random_link_set(2, 60.0, 25.0, rng);
        const auto p0 = ndl::min_power_vector(s);
        if (!p0 || !ndl::within_box(*p0, s.pmax)) continue;
        ++pairs;
        const auto r = ndl::dc_power_allocation(s, *p0, cfg);
        const auto grid = grid_search_2d(s.pmax(0), s.pmax(1), 300, [&](double a, double b) {
            Eigen::VectorXd p(2);
            p << a, b;
            return direct_min_rate(s, p);
        });
        worst = std::min(worst, direct_min_rate(s, r.powers) / grid.value);
    }
    const bool ok = non_monotone == 0 && qos_broken == 0 && worst >= 0.98;
    return {ok, fmt("%d decreasing steps over %d schedules, %d QoS misses; worst 2-link "
                    "min-rate/grid %.5f over %d instances",
                    non_monotone, schedules, qos_broken, worst, pairs)};
}

Outcome removal_soundness() {
    auto rng = make_rng(1006);
    int instances = 0, too_many = 0, box_fail = 0, sinr_fail = 0;
    std::size_t removed = 0;
    while (instances < 500) {
        const std::size_t n = 3 + static_cast<std::size_t>(instances % 8);
        const auto s = random_link_set(n, 40.0, 25.0, rng, 1.0);
        const auto p = ndl::min_power_vector(s);
        if (p && ndl::within_box(*p, s.pmax)) continue;  // not over-subscribed
        ++instances;
        const auto r = ndl::check_and_remove(s);
        removed += r.iterations;
        too_many += r.iterations > n ? 1 : 0;
        if (r.links.empty()) continue;
        box_fail += ndl::within_box(r.min_power, r.links.pmax) ? 0 : 1;
        for (Eigen::Index j = 0; j < r.min_power.size(); ++j) {
            sinr_fail += std::abs(direct_sinr(r.links, r.min_power, j) / r.links.target(j) - 1.0) <
                                 1e-6
                             ? 0
                             : 1;
        }
    }
    const bool ok = too_many == 0 && box_fail == 0 && sinr_fail == 0;
    return {ok, fmt("%d instances, %zu removals, %d over N, %d box failures, %d SINR misses",
                    instances, removed, too_many, box_fail, sinr_fail)};
}

struct TrendData {
    harness::ResultsTable table;
    const harness::CellResult& cell(double beta, harness::Mode mode) const {
        for (const auto& r : table)
            if (r.beta == beta && r.mode == mode) return r;
        throw std::logic_error("missing cell");
    }
};

std::string pm(const harness::CellResult& r, const char* metric, double scale = 1.0) {
    return fmt("%.3f+-%.3f", r.mean_of(metric) / scale, r.stderr_of(metric) / scale);
}

}  // namespace

int main() {
    run(1, "zero-forcing orthogonality", 10, zf_orthogonality);
    run(2, "CDL power allocation vs grid", 60, cdl_power_oracle);
    run(3, "link-check exactness", 10, link_check_exactness);
    run(4, "matching vs exhaustive", 30, matching_oracle);
    run(5, "DCA monotonicity and grid", 60, dca_oracle);
    run(6, "removal loop soundness", 30, removal_soundness);

    const std::vector<double> betas{0.8, 1.2, 1.6};
    TrendData trend;
    const auto t0 = std::chrono::steady_clock::now();
    {
        harness::SweepConfig c;
        c.betas = betas;
        c.user_counts = {30};
        trend.table = harness::run_sweep(c);
    }
    const double sweep_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("     trend sweep: K=30, 500 drops per point, %.1f s\n", sweep_s);
    using harness::Mode;

    run(7, "served CRs exceed NRs and grow with beta", 600 - sweep_s, [&] {
        bool ok = true;
        std::string d;
        double prev = -1.0;
        for (double b : betas) {
            const auto& c = trend.cell(b, Mode::coop);
            ok = ok && c.mean_of("served_crs") > c.mean_of("served_nrs");
            ok = ok && c.mean_of("served_crs") >= prev;
            prev = c.mean_of("served_crs");
            d += fmt("beta %.1f CR %s NR %s; ", b, pm(c, "served_crs").c_str(),
                     pm(c, "served_nrs").c_str());
        }
        return Outcome{ok, d};
    });
    run(8, "CDL sum rate exceeds NDL sum rate", 600 - sweep_s, [&] {
        bool ok = true;
        std::string d;
        for (double b : betas) {
            const auto& c = trend.cell(b, Mode::coop);
            ok = ok && c.mean_of("cdl_sum_rate_bps") > c.mean_of("ndl_sum_rate_bps");
            d += fmt("beta %.1f CDL %s NDL %s Mbit/s; ", b, pm(c, "cdl_sum_rate_bps", 1e6).c_str(),
                     pm(c, "ndl_sum_rate_bps", 1e6).c_str());
        }
        return Outcome{ok, d};
    });
    run(9, "cooperation raises throughput", 900 - sweep_s, [&] {
        bool ok = true;
        std::string d;
        double prev = -1.0;
        for (double b : betas) {
            const auto& c = trend.cell(b, Mode::coop);
            const auto& n = trend.cell(b, Mode::nocoop);
            if (b >= 1.2) ok = ok && c.mean_of("throughput_bps") > n.mean_of("throughput_bps");
            ok = ok && c.mean_of("throughput_bps") >= prev;
            prev = c.mean_of("throughput_bps");
            d += fmt("beta %.1f coop %s nocoop %s Mbit/s; ", b,
                     pm(c, "throughput_bps", 1e6).c_str(), pm(n, "throughput_bps", 1e6).c_str());
        }
        return Outcome{ok, d};
    });

    run(10, "byte-identical sweeps across thread counts", 1200, [] {
        const auto dir = std::filesystem::temp_directory_path() / "d2d_acceptance";
        std::filesystem::create_directories(dir);
        auto sweep_bytes = [&](std::size_t threads, const char* name) {
            harness::SweepConfig c;  // full default sweep
            c.threads = threads;
            const auto path = dir / name;
            harness::write_results(harness::run_sweep(c), path);
            std::ifstream in(path, std::ios::binary);
            std::ostringstream buf;
            buf << in.rdbuf();
            return buf.str();
        };
        const auto a = sweep_bytes(1, "sweep_1_thread.csv");
        const auto b = sweep_bytes(4, "sweep_4_threads.csv");
        std::filesystem::remove_all(dir);
        const auto rows = std::count(a.begin(), a.end(), '\n') - 1;
        return Outcome{!a.empty() && a == b,
                       fmt("%zu bytes, %ld rows, 1 vs 4 threads %s", a.size(),
                           static_cast<long>(rows), a == b ? "identical" : "differ")};
    });

    std::printf("%s: %d criteria failed\n", failures ? "FAILED" : "ALL PASSED", failures);
    return failures ? 1 : 0;
}
