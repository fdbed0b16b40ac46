#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "d2d/random.hpp"

namespace d2d::topology {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

double distance(const Point& a, const Point& b);

/// Square hotspot with `num_users` devices; NDLs are limited to `d2d_radius_m`.
struct SimGeometry {
    double side_length_m = 100.0;
    std::size_t num_users = 30;
    double d2d_radius_m = 30.0;

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

/// One drop's placement and block-fading channels.
///
/// `channels(i, j)` is the complex coefficient from user i to user j. The
/// reverse direction is an independent draw. The diagonal is unused and zero.
struct Topology {
    std::vector<Point> positions;
    Eigen::MatrixXcd channels;
    Eigen::MatrixXd distances;

    std::size_t size() const { return positions.size(); }
    double gain(std::size_t from, std::size_t to) const { return std::norm(channels(from, to)); }
};

/// Uniform i.i.d. placement over [0, side]^2.
std::vector<Point> place_users(const SimGeometry& geometry, Rng& rng);

/// 37.6 + 36.8 log10(d), d in meters. Throws std::invalid_argument for d <= 0.
double path_loss_db(double distance_m);

/// Path-loss amplitude times unit-variance circularly-symmetric Rayleigh fading.
std::complex<double> draw_channel(double distance_m, Rng& rng);

/// Channels for every ordered pair of `positions`. Distances below the
/// minimum-distance clamp use the clamp for path loss only.
Topology build_topology(std::vector<Point> positions, Rng& rng);

Topology generate_topology(const SimGeometry& geometry, Rng& rng);

}  // namespace d2d::topology
