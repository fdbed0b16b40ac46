#include "d2d/config.hpp"

#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>

#include "d2d/units.hpp"

namespace d2d::harness {

using nlohmann::json;

namespace {

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw std::invalid_argument("config: '" + where + "' must be an object");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* k : keys) known = known || key == k;
        if (!known) throw std::invalid_argument("config: unknown key '" + where + "." + key + "'");
    }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw std::invalid_argument("config: bad value for '" + where + "." + key + "': " +
                                    e.what());
    }
}

}  // namespace

SweepConfig parse_config(const json& j, SweepConfig c) {
    only_keys(j, "", {"geometry", "catalog", "noise_dbm", "cdl", "ndl", "sweep"});
    auto& s = c.base;

    if (j.contains("geometry")) {
        const auto& g = j["geometry"];
        only_keys(g, "geometry", {"side_m"});
        read(g, "side_m", s.geometry.side_length_m, "geometry");
    }
    if (j.contains("catalog")) {
        const auto& g = j["catalog"];
        only_keys(g, "catalog", {"num_files", "cache_size", "num_popular"});
        read(g, "num_files", s.catalog.num_files, "catalog");
        read(g, "cache_size", s.catalog.cache_size, "catalog");
        read(g, "num_popular", s.catalog.num_popular, "catalog");
    }
    if (j.contains("noise_dbm")) {
        double dbm = 0.0;
        read(j, "noise_dbm", dbm, "");
        s.cdl.noise_w = dbm_to_watts(dbm);
        s.ndl.noise_w = s.cdl.noise_w;
    }
    if (j.contains("cdl")) {
        const auto& g = j["cdl"];
        only_keys(g, "cdl",
                  {"bandwidth_hz", "epsilon", "rmin_bps_per_hz", "pmax_dbm", "max_dual_iters",
                   "dual_step", "allow_full_rank"});
        read(g, "bandwidth_hz", s.cdl.bandwidth_hz, "cdl");
        read(g, "epsilon", s.cdl.epsilon, "cdl");
        read(g, "rmin_bps_per_hz", s.cdl.rmin_bps_per_hz, "cdl");
        if (g.contains("pmax_dbm")) {
            double dbm = 0.0;
            read(g, "pmax_dbm", dbm, "cdl");
            s.cdl.pmax_w = dbm_to_watts(dbm);
        }
        read(g, "max_dual_iters", s.cdl.max_dual_iters, "cdl");
        read(g, "dual_step", s.cdl.dual_step, "cdl");
        read(g, "allow_full_rank", s.cdl.allow_full_rank, "cdl");
    }
    if (j.contains("ndl")) {
        const auto& g = j["ndl"];
        only_keys(g, "ndl",
                  {"bandwidth_hz", "radius_m", "rmin_bps_per_hz", "pmax_dbm", "weight_mode",
                   "dca_max_iters"});
        read(g, "bandwidth_hz", s.ndl.bandwidth_hz, "ndl");
        read(g, "radius_m", s.ndl.radius_m, "ndl");
        read(g, "rmin_bps_per_hz", s.ndl.rmin_bps_per_hz, "ndl");
        if (g.contains("pmax_dbm")) {
            double dbm = 0.0;
            read(g, "pmax_dbm", dbm, "ndl");
            s.ndl.pmax_w = dbm_to_watts(dbm);
        }
        if (g.contains("weight_mode")) {
            std::string mode;
            read(g, "weight_mode", mode, "ndl");
            s.ndl.weight_mode = ndl::parse_weight_mode(mode);
        }
        read(g, "dca_max_iters", s.ndl.dca_max_iters, "ndl");
    }
    if (j.contains("sweep")) {
        const auto& g = j["sweep"];
        only_keys(g, "sweep", {"beta", "num_users", "modes", "drops", "seed", "threads"});
        read(g, "beta", c.betas, "sweep");
        read(g, "num_users", c.user_counts, "sweep");
        if (g.contains("modes")) {
            std::vector<std::string> modes;
            read(g, "modes", modes, "sweep");
            c.modes.clear();
            for (const auto& m : modes) c.modes.push_back(parse_mode(m));
        }
        read(g, "drops", c.drops, "sweep");
        read(g, "seed", c.seed, "sweep");
        read(g, "threads", c.threads, "sweep");
    }
    s.geometry.d2d_radius_m = s.ndl.radius_m;
    c.validate();
    return c;
}

SweepConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::invalid_argument("config '" + path.string() + "': " + e.what());
    }
    return parse_config(j);
}

json to_json(const SweepConfig& c) {
    const auto& s = c.base;
    json modes = json::array();
    for (Mode m : c.modes) modes.push_back(to_string(m));
    return {
        {"geometry", {{"side_m", s.geometry.side_length_m}}},
        {"catalog",
         {{"num_files", s.catalog.num_files},
          {"cache_size", s.catalog.cache_size},
          {"num_popular", s.catalog.num_popular}}},
        {"noise_dbm", watts_to_dbm(s.cdl.noise_w)},
        {"cdl",
         {{"bandwidth_hz", s.cdl.bandwidth_hz},
          {"epsilon", s.cdl.epsilon},
          {"rmin_bps_per_hz", s.cdl.rmin_bps_per_hz},
          {"pmax_dbm", watts_to_dbm(s.cdl.pmax_w)},
          {"max_dual_iters", s.cdl.max_dual_iters},
          {"dual_step", s.cdl.dual_step},
          {"allow_full_rank", s.cdl.allow_full_rank}}},
        {"ndl",
         {{"bandwidth_hz", s.ndl.bandwidth_hz},
          {"radius_m", s.ndl.radius_m},
          {"rmin_bps_per_hz", s.ndl.rmin_bps_per_hz},
          {"pmax_dbm", watts_to_dbm(s.ndl.pmax_w)},
          {"weight_mode", ndl::to_string(s.ndl.weight_mode)},
          {"dca_max_iters", s.ndl.dca_max_iters}}},
        {"sweep",
         {{"beta", c.betas},
          {"num_users", c.user_counts},
          {"modes", modes},
          {"drops", c.drops},
          {"seed", c.seed},
          {"threads", c.threads}}},
    };
}

}  // namespace d2d::harness
