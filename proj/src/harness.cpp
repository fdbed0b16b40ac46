#include "d2d/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <thread>

#include "d2d/random.hpp"

namespace d2d::harness {

const char* to_string(Mode mode) { return mode == Mode::coop ? "coop" : "nocoop"; }

Mode parse_mode(const std::string& text) {
    if (text == "coop") return Mode::coop;
    if (text == "nocoop") return Mode::nocoop;
    throw std::invalid_argument("unknown mode '" + text + "' (expected coop or nocoop)");
}

void Scenario::validate() const {
    geometry.validate();
    catalog.validate();
    cdl.validate();
    ndl.validate();
}

const std::array<const char*, kNumMetrics>& metric_names() {
    static const std::array<const char*, kNumMetrics> names{
        "served_crs",    "served_nrs",    "cdl_sum_rate_bps", "ndl_sum_rate_bps",
        "throughput_bps", "potential_crs", "potential_nrs",    "self_satisfied",
        "cellular",      "removal_iterations", "dca_iterations"};
    return names;
}

std::array<double, kNumMetrics> to_array(const DropMetrics& m) {
    return {m.served_crs,     m.served_nrs,    m.cdl_sum_rate_bps, m.ndl_sum_rate_bps,
            m.throughput_bps, m.potential_crs, m.potential_nrs,    m.self_satisfied,
            m.cellular,       m.removal_iterations, m.dca_iterations};
}

Drop generate_drop(const Scenario& scenario, std::uint64_t seed) {
    auto rng = make_rng(seed);
    Drop d;
    d.topo = topology::generate_topology(scenario.geometry, rng);
    d.content = content::generate_content(scenario.geometry.num_users, scenario.catalog, rng);
    return d;
}

DropOutcome simulate(const Scenario& scenario, const Drop& drop, Mode mode) {
    DropOutcome out;
    std::vector<std::size_t> excluded;
    ndl::NdlConfig ndl_config = scenario.ndl;

    if (mode == Mode::coop) {
        out.coop_group = content::select_coop_group(drop.content);
        if (out.coop_group) {
            const auto cts = drop.content.cachers(*out.coop_group);
            const auto crs = drop.content.requesters(*out.coop_group);
            out.metrics.potential_crs = static_cast<double>(crs.size());
            out.cdl = cdl::schedule_cdl(cts, crs, drop.topo, scenario.cdl);
            if (!out.cdl.empty()) {
                excluded = out.cdl.transmitters;
                excluded.insert(excluded.end(), out.cdl.receivers.begin(),
                                out.cdl.receivers.end());
            }
        }
    } else {
        ndl_config.bandwidth_hz = scenario.cdl.bandwidth_hz + scenario.ndl.bandwidth_hz;
    }
    out.classes = content::classify_users(drop.content, drop.topo, scenario.ndl.radius_m,
                                          out.coop_group);
    out.ndl = ndl::schedule_ndl(drop.topo, drop.content, out.coop_group, excluded, ndl_config);

    auto& m = out.metrics;
    m.served_crs = static_cast<double>(out.cdl.receivers.size());
    m.served_nrs = static_cast<double>(out.ndl.links.size());
    m.cdl_sum_rate_bps = out.cdl.empty() ? 0.0 : out.cdl.sum_rate_bps();
    m.ndl_sum_rate_bps = out.ndl.links.empty() ? 0.0 : out.ndl.sum_rate_bps();
    m.throughput_bps = m.cdl_sum_rate_bps + m.ndl_sum_rate_bps;
    m.potential_nrs = static_cast<double>(out.ndl.candidates.receivers.size());
    for (auto c : out.classes) {
        if (c == content::UserClass::self_satisfied) m.self_satisfied += 1;
        if (c == content::UserClass::cellular) m.cellular += 1;
    }
    m.removal_iterations = static_cast<double>(out.ndl.removal_iterations);
    m.dca_iterations = static_cast<double>(out.ndl.dca_iterations);
    return out;
}

DropMetrics run_drop(const Scenario& scenario, std::uint64_t seed) {
    return simulate(scenario, generate_drop(scenario, seed), Mode::coop).metrics;
}

DropMetrics run_nocoop_drop(const Scenario& scenario, std::uint64_t seed) {
    return simulate(scenario, generate_drop(scenario, seed), Mode::nocoop).metrics;
}

void SweepConfig::validate() const {
    if (betas.empty() || user_counts.empty() || modes.empty()) {
        throw std::invalid_argument("sweep: beta, user and mode lists must be non-empty");
    }
    if (drops == 0) throw std::invalid_argument("sweep: drops must be >= 1");
    for (double b : betas) scenario(b, user_counts.front()).catalog.validate();
    for (std::size_t k : user_counts) scenario(betas.front(), k).validate();
}

Scenario SweepConfig::scenario(double beta, std::size_t users) const {
    Scenario s = base;
    s.catalog.zipf_beta = beta;
    s.geometry.num_users = users;
    s.geometry.d2d_radius_m = s.ndl.radius_m;
    return s;
}

namespace {

std::size_t metric_index(const std::string& metric) {
    const auto& names = metric_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (metric == names[i]) return i;
    }
    throw std::out_of_range("unknown metric '" + metric + "'");
}

}  // namespace

double CellResult::mean_of(const std::string& metric) const { return mean[metric_index(metric)]; }

double CellResult::stderr_of(const std::string& metric) const {
    return std_error[metric_index(metric)];
}

CellResult aggregate(double beta, std::size_t users, Mode mode,
                     std::span<const DropMetrics> drops) {
    CellResult r;
    r.beta = beta;
    r.users = users;
    r.mode = mode;
    r.drops = drops.size();
    if (drops.empty()) return r;
    const double n = static_cast<double>(drops.size());
    for (const auto& d : drops) {
        const auto v = to_array(d);
        for (std::size_t i = 0; i < kNumMetrics; ++i) r.mean[i] += v[i];
    }
    for (auto& m : r.mean) m /= n;
    if (drops.size() > 1) {
        std::array<double, kNumMetrics> ss{};
        for (const auto& d : drops) {
            const auto v = to_array(d);
            for (std::size_t i = 0; i < kNumMetrics; ++i) {
                ss[i] += (v[i] - r.mean[i]) * (v[i] - r.mean[i]);
            }
        }
        for (std::size_t i = 0; i < kNumMetrics; ++i) {
            r.std_error[i] = std::sqrt(ss[i] / (n - 1.0) / n);
        }
    }
    return r;
}

std::vector<DropMetrics> run_cell(const Scenario& scenario, Mode mode, std::size_t drops,
                                  std::uint64_t seed, std::size_t threads) {
    scenario.validate();
    std::vector<DropMetrics> out(drops);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, std::max<std::size_t>(drops, 1));

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < drops; i = next++) {
            out[i] = simulate(scenario, generate_drop(scenario, seed + i), mode).metrics;
        }
    };
    if (threads <= 1) {
        worker();
        return out;
    }
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    pool.clear();
    return out;
}

ResultsTable run_sweep(const SweepConfig& config) {
    config.validate();
    ResultsTable table;
    for (std::size_t users : config.user_counts) {
        for (double beta : config.betas) {
            const Scenario s = config.scenario(beta, users);
            for (Mode mode : config.modes) {
                const auto drops = run_cell(s, mode, config.drops, config.seed, config.threads);
                table.push_back(aggregate(beta, users, mode, drops));
            }
        }
    }
    return table;
}

namespace {

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_number(const std::string& text) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw std::invalid_argument("results: bad number '" + text + "'");
    }
    return v;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, ',')) fields.push_back(cur);
    return fields;
}

std::string header() {
    std::string h = "beta,K,mode,drops";
    for (const char* name : metric_names()) {
        h += ',';
        h += name;
        h += "_mean,";
        h += name;
        h += "_stderr";
    }
    return h;
}

}  // namespace

std::string format_results(const ResultsTable& table) {
    std::string out = header() + "\n";
    for (const auto& r : table) {
        out += format_number(r.beta) + ',' + std::to_string(r.users) + ',' + to_string(r.mode) +
               ',' + std::to_string(r.drops);
        for (std::size_t i = 0; i < kNumMetrics; ++i) {
            out += ',' + format_number(r.mean[i]) + ',' + format_number(r.std_error[i]);
        }
        out += '\n';
    }
    return out;
}

ResultsTable parse_results(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line != header()) {
        throw std::invalid_argument("results: unexpected header");
    }
    ResultsTable table;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != 4 + 2 * kNumMetrics) {
            throw std::invalid_argument("results: wrong column count");
        }
        CellResult r;
        r.beta = parse_number(f[0]);
        r.users = static_cast<std::size_t>(parse_number(f[1]));
        r.mode = parse_mode(f[2]);
        r.drops = static_cast<std::size_t>(parse_number(f[3]));
        for (std::size_t i = 0; i < kNumMetrics; ++i) {
            r.mean[i] = parse_number(f[4 + 2 * i]);
            r.std_error[i] = parse_number(f[5 + 2 * i]);
        }
        table.push_back(r);
    }
    return table;
}

void write_results(const ResultsTable& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << format_results(table);
    out.close();
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

ResultsTable read_results(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_results(buf.str());
}

}  // namespace d2d::harness
