#include "d2d/content.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace d2d::content {

void Catalog::validate() const {
    if (cache_size == 0 || num_popular == 0) {
        throw std::invalid_argument("catalog: cache size and popular count must be positive");
    }
    if (num_popular > num_files) {
        throw std::invalid_argument("catalog: more popular files than files");
    }
    if (num_popular % cache_size != 0) {
        throw std::invalid_argument("catalog: popular count must be a multiple of cache size");
    }
    if (!(zipf_beta >= 0.0)) {
        throw std::invalid_argument("catalog: Zipf exponent must be non-negative");
    }
}

const char* to_string(UserClass c) {
    switch (c) {
        case UserClass::self_satisfied: return "self-satisfied";
        case UserClass::d2d: return "d2d";
        case UserClass::cellular: return "cellular";
        case UserClass::idle_beyond_popular: return "idle-beyond-popular";
    }
    return "?";
}

Eigen::MatrixXi ContentState::cache_matrix() const {
    Eigen::MatrixXi x = Eigen::MatrixXi::Zero(num_users(), num_groups);
    for (std::size_t k = 0; k < num_users(); ++k) x(k, cached_group[k]) = 1;
    return x;
}

Eigen::MatrixXi ContentState::request_matrix() const {
    Eigen::MatrixXi y = Eigen::MatrixXi::Zero(num_users(), num_groups);
    for (std::size_t k = 0; k < num_users(); ++k) {
        if (requested_group[k]) y(k, *requested_group[k]) = 1;
    }
    return y;
}

std::vector<std::size_t> ContentState::cachers(std::size_t group) const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < num_users(); ++k) {
        if (caches(k, group)) out.push_back(k);
    }
    return out;
}

std::vector<std::size_t> ContentState::requesters(std::size_t group) const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < num_users(); ++k) {
        if (requests(k, group) && !caches(k, group)) out.push_back(k);
    }
    return out;
}

namespace {

std::vector<double> file_weights(const Catalog& catalog) {
    std::vector<double> w(catalog.num_files);
    for (std::size_t f = 0; f < catalog.num_files; ++f) {
        w[f] = std::pow(static_cast<double>(f + 1), -catalog.zipf_beta);
    }
    return w;
}

}  // namespace

double zipf_group_prob(std::size_t group, const Catalog& catalog) {
    catalog.validate();
    if (group >= catalog.num_groups()) {
        throw std::out_of_range("zipf_group_prob: group " + std::to_string(group) +
                                " out of range");
    }
    const auto w = file_weights(catalog);
    double total = 0.0;
    for (double v : w) total += v;
    double part = 0.0;
    for (std::size_t f = group * catalog.cache_size; f < (group + 1) * catalog.cache_size; ++f) {
        part += w[f];
    }
    return part / total;
}

std::vector<std::size_t> place_caches(std::size_t num_users, const Catalog& catalog, Rng& rng) {
    catalog.validate();
    std::uniform_int_distribution<std::size_t> pick(0, catalog.num_groups() - 1);
    std::vector<std::size_t> cached(num_users);
    for (auto& g : cached) g = pick(rng);
    return cached;
}

Requests draw_requests(std::size_t num_users, const Catalog& catalog, Rng& rng) {
    catalog.validate();
    const auto w = file_weights(catalog);
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    Requests req;
    req.file.resize(num_users);
    req.group.resize(num_users);
    for (std::size_t k = 0; k < num_users; ++k) {
        const std::size_t f = pick(rng);
        req.file[k] = f;
        if (f < catalog.num_popular) req.group[k] = f / catalog.cache_size;
    }
    return req;
}

ContentState make_state(std::size_t num_groups, std::vector<std::size_t> cached_group,
                        Requests requests) {
    if (cached_group.size() != requests.file.size() ||
        requests.file.size() != requests.group.size()) {
        throw std::invalid_argument("content: cache and request vectors differ in length");
    }
    for (std::size_t k = 0; k < cached_group.size(); ++k) {
        if (cached_group[k] >= num_groups ||
            (requests.group[k] && *requests.group[k] >= num_groups)) {
            throw std::invalid_argument("content: group index out of range");
        }
    }
    ContentState s;
    s.num_groups = num_groups;
    s.cached_group = std::move(cached_group);
    s.requested_file = std::move(requests.file);
    s.requested_group = std::move(requests.group);
    return s;
}

ContentState generate_content(std::size_t num_users, const Catalog& catalog, Rng& rng) {
    auto cached = place_caches(num_users, catalog, rng);
    auto requests = draw_requests(num_users, catalog, rng);
    return make_state(catalog.num_groups(), std::move(cached), std::move(requests));
}

std::vector<UserClass> classify_users(const ContentState& state, const topology::Topology& topo,
                                      double radius_m, std::optional<std::size_t> coop_group) {
    const std::size_t k_users = state.num_users();
    if (topo.size() != k_users) {
        throw std::invalid_argument("classify_users: topology and content sizes differ");
    }
    std::vector<UserClass> classes(k_users, UserClass::idle_beyond_popular);
    for (std::size_t k = 0; k < k_users; ++k) {
        const auto g = state.requested_group[k];
        if (!g) continue;
        if (state.caches(k, *g)) {
            classes[k] = UserClass::self_satisfied;
            continue;
        }
        bool reachable = coop_group == g;
        for (std::size_t m = 0; m < k_users && !reachable; ++m) {
            reachable = m != k && state.caches(m, *g) && topo.distances(m, k) < radius_m;
        }
        classes[k] = reachable ? UserClass::d2d : UserClass::cellular;
    }
    return classes;
}

std::optional<std::size_t> select_coop_group(std::span<const std::size_t> requester_counts) {
    std::optional<std::size_t> best;
    for (std::size_t g = 0; g < requester_counts.size(); ++g) {
        if (requester_counts[g] == 0) continue;
        if (!best || requester_counts[g] > requester_counts[*best]) best = g;
    }
    return best;
}

std::optional<std::size_t> select_coop_group(const ContentState& state) {
    std::vector<std::size_t> counts(state.num_groups);
    for (std::size_t g = 0; g < state.num_groups; ++g) counts[g] = state.requesters(g).size();
    return select_coop_group(counts);
}

}  // namespace d2d::content
