#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "d2d/cdl.hpp"
#include "d2d/content.hpp"
#include "d2d/ndl.hpp"
#include "d2d/topology.hpp"

namespace d2d::harness {

enum class Mode { coop, nocoop };

const char* to_string(Mode mode);
Mode parse_mode(const std::string& text);

/// Parameters of one (beta, K) point.
struct Scenario {
    topology::SimGeometry geometry;
    content::Catalog catalog;
    cdl::CdlConfig cdl;
    ndl::NdlConfig ndl;

    void validate() const;
};

struct DropMetrics {
    double served_crs = 0;
    double served_nrs = 0;
    double cdl_sum_rate_bps = 0;
    double ndl_sum_rate_bps = 0;
    double throughput_bps = 0;
    double potential_crs = 0;
    double potential_nrs = 0;
    double self_satisfied = 0;
    double cellular = 0;
    double removal_iterations = 0;
    double dca_iterations = 0;
};

inline constexpr std::size_t kNumMetrics = 11;

/// Column stems in CSV order.
const std::array<const char*, kNumMetrics>& metric_names();
std::array<double, kNumMetrics> to_array(const DropMetrics& m);

/// Random state of one drop. Both modes see the same instance for a seed.
struct Drop {
    topology::Topology topo;
    content::ContentState content;
};

Drop generate_drop(const Scenario& scenario, std::uint64_t seed);

struct DropOutcome {
    std::optional<std::size_t> coop_group;
    std::vector<content::UserClass> classes;
    cdl::CdlSchedule cdl;
    ndl::NdlSchedule ndl;
    DropMetrics metrics;
};

/// Runs the scheduling pipeline of `mode` on a fixed drop.
DropOutcome simulate(const Scenario& scenario, const Drop& drop, Mode mode);

DropMetrics run_drop(const Scenario& scenario, std::uint64_t seed);
DropMetrics run_nocoop_drop(const Scenario& scenario, std::uint64_t seed);

struct SweepConfig {
    Scenario base;
    std::vector<double> betas{0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6};
    std::vector<std::size_t> user_counts{20, 30, 40};
    std::vector<Mode> modes{Mode::coop, Mode::nocoop};
    std::size_t drops = 500;
    std::uint64_t seed = 1;
    /// Worker threads; 0 uses the hardware concurrency.
    std::size_t threads = 0;

    void validate() const;
    Scenario scenario(double beta, std::size_t users) const;
};

struct CellResult {
    double beta = 0;
    std::size_t users = 0;
    Mode mode = Mode::coop;
    std::size_t drops = 0;
    std::array<double, kNumMetrics> mean{};
    std::array<double, kNumMetrics> std_error{};

    double mean_of(const std::string& metric) const;
    double stderr_of(const std::string& metric) const;
    friend bool operator==(const CellResult&, const CellResult&) = default;
};

using ResultsTable = std::vector<CellResult>;

/// Mean and standard error over drops, summed in drop order.
CellResult aggregate(double beta, std::size_t users, Mode mode,
                     std::span<const DropMetrics> drops);

/// Metrics of drops seed, seed+1, ..., in drop order regardless of threads.
std::vector<DropMetrics> run_cell(const Scenario& scenario, Mode mode, std::size_t drops,
                                  std::uint64_t seed, std::size_t threads);

ResultsTable run_sweep(const SweepConfig& config);

std::string format_results(const ResultsTable& table);
ResultsTable parse_results(const std::string& csv);

/// Throws std::runtime_error naming the path on I/O failure.
void write_results(const ResultsTable& table, const std::filesystem::path& path);
ResultsTable read_results(const std::filesystem::path& path);

}  // namespace d2d::harness
