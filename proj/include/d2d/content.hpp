#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "d2d/random.hpp"
#include "d2d/topology.hpp"

namespace d2d::content {

// Indices are 0-based throughout: file f has popularity rank f + 1 and belongs
// to group f / cache_size.

struct Catalog {
    std::size_t num_files = 200;
    std::size_t cache_size = 10;
    std::size_t num_popular = 100;
    double zipf_beta = 0.8;

    std::size_t num_groups() const { return num_popular / cache_size; }
    void validate() const;
};

enum class UserClass { self_satisfied, d2d, cellular, idle_beyond_popular };

const char* to_string(UserClass c);

/// Cache and request state for one drop. Every user caches exactly one group
/// and requests exactly one file.
struct ContentState {
    std::size_t num_groups = 0;
    std::vector<std::size_t> cached_group;
    std::vector<std::size_t> requested_file;
    /// Empty when the requested file lies beyond the popular set.
    std::vector<std::optional<std::size_t>> requested_group;

    std::size_t num_users() const { return cached_group.size(); }

    bool caches(std::size_t user, std::size_t group) const { return cached_group[user] == group; }
    bool requests(std::size_t user, std::size_t group) const {
        return requested_group[user] == group;
    }

    /// K x G one-hot caching matrix.
    Eigen::MatrixXi cache_matrix() const;
    /// K x G request matrix; rows sum to 0 or 1.
    Eigen::MatrixXi request_matrix() const;

    /// Users caching `group`.
    std::vector<std::size_t> cachers(std::size_t group) const;
    /// Users requesting `group` without caching it.
    std::vector<std::size_t> requesters(std::size_t group) const;
};

/// Probability that a request falls in `group`. Throws std::out_of_range.
double zipf_group_prob(std::size_t group, const Catalog& catalog);

/// One uniformly drawn group per user.
std::vector<std::size_t> place_caches(std::size_t num_users, const Catalog& catalog, Rng& rng);

struct Requests {
    std::vector<std::size_t> file;
    std::vector<std::optional<std::size_t>> group;
};

/// One Zipf-distributed file request per user.
Requests draw_requests(std::size_t num_users, const Catalog& catalog, Rng& rng);

ContentState make_state(std::size_t num_groups, std::vector<std::size_t> cached_group,
                        Requests requests);

ContentState generate_content(std::size_t num_users, const Catalog& catalog, Rng& rng);

/// Coarse label before scheduling. Requesters of `coop_group` count as D2D
/// users since any CT can reach them; other requesters need a cacher of their
/// group closer than `radius_m`.
std::vector<UserClass> classify_users(const ContentState& state, const topology::Topology& topo,
                                      double radius_m,
                                      std::optional<std::size_t> coop_group = std::nullopt);

/// Group with the most requesters (lowest index on ties). Empty when no group
/// has a requester, which means cooperation is not possible in this drop.
std::optional<std::size_t> select_coop_group(std::span<const std::size_t> requester_counts);

std::optional<std::size_t> select_coop_group(const ContentState& state);

}  // namespace d2d::content
