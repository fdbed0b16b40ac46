#include "d2d/topology.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "d2d/tolerances.hpp"
#include "d2d/units.hpp"

namespace d2d::topology {

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

void SimGeometry::validate() const {
    if (!(side_length_m > 0.0)) {
        throw std::invalid_argument("geometry: side length must be positive");
    }
    if (num_users < 2) {
        throw std::invalid_argument("geometry: at least two users are required");
    }
    if (!(d2d_radius_m > 0.0) || d2d_radius_m > side_length_m * std::sqrt(2.0)) {
        throw std::invalid_argument("geometry: D2D radius must lie in (0, side*sqrt(2)]");
    }
}

std::vector<Point> place_users(const SimGeometry& geometry, Rng& rng) {
    if (!(geometry.side_length_m > 0.0)) {
        throw std::invalid_argument("geometry: side length must be positive");
    }
    std::uniform_real_distribution<double> coord(0.0, geometry.side_length_m);
    std::vector<Point> points(geometry.num_users);
    for (auto& p : points) {
        p.x = coord(rng);
        p.y = coord(rng);
    }
    return points;
}

double path_loss_db(double distance_m) {
    if (!(distance_m > 0.0)) {
        throw std::invalid_argument("path loss: invalid distance " + std::to_string(distance_m));
    }
    return 37.6 + 36.8 * std::log10(distance_m);
}

std::complex<double> draw_channel(double distance_m, Rng& rng) {
    const double amplitude = std::sqrt(db_to_linear(-path_loss_db(distance_m)));
    // CN(0, 1): each quadrature component has variance 1/2.
    std::normal_distribution<double> component(0.0, std::sqrt(0.5));
    const double re = component(rng);
    const double im = component(rng);
    return amplitude * std::complex<double>(re, im);
}

Topology build_topology(std::vector<Point> positions, Rng& rng) {
    const std::size_t k = positions.size();
    Topology topo;
    topo.distances = Eigen::MatrixXd::Zero(k, k);
    topo.channels = Eigen::MatrixXcd::Zero(k, k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            const double d = distance(positions[i], positions[j]);
            topo.distances(i, j) = d;
            topo.distances(j, i) = d;
        }
    }
    // Row-major draw order keeps a drop reproducible from its seed.
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            const double d = std::max(topo.distances(i, j), Tolerances::min_distance_m);
            topo.channels(i, j) = draw_channel(d, rng);
        }
    }
    topo.positions = std::move(positions);
    return topo;
}

Topology generate_topology(const SimGeometry& geometry, Rng& rng) {
    geometry.validate();
    return build_topology(place_users(geometry, rng), rng);
}

}  // namespace d2d::topology
