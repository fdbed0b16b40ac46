#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "d2d/numerics.hpp"
#include "test_support.hpp"

using namespace d2d;
using namespace d2d::numerics;
using d2d::testing::random_complex;

TEST_CASE("zero forcing on orthonormal channels is the identity") {
    const ComplexMatrix h = ComplexMatrix::Identity(3, 3);
    const auto zf = zf_precoder(h);
    REQUIRE(zf);
    CHECK((zf->weights - h).cwiseAbs().maxCoeff() < 1e-14);
    for (int n = 0; n < 3; ++n) CHECK(zf->effective_gain(n) == doctest::Approx(1.0));
}

TEST_CASE("zero forcing for one receiver") {
    ComplexMatrix h(3, 1);
    h << std::complex<double>(1.0, 2.0), std::complex<double>(-0.5, 0.1), std::complex<double>(0.0, -3.0);
    const auto zf = zf_precoder(h);
    REQUIRE(zf);
    const ComplexVector expected = h.col(0) / h.col(0).squaredNorm();
    CHECK((zf->weights.col(0) - expected).norm() < 1e-14);
    const auto s = h.col(0).dot(zf->directions.col(0));
    CHECK(s.real() > 0.0);
    CHECK(std::abs(s.imag()) < 1e-14);
    CHECK(zf->effective_gain(0) == doctest::Approx(h.col(0).squaredNorm()).epsilon(1e-12));
    CHECK(zf->directions.col(0).norm() == doctest::Approx(1.0));
}

TEST_CASE("zero forcing residual on random channels") {
    auto rng = make_rng(10);
    for (int trial = 0; trial < 200; ++trial) {
        const auto rows = 2 + trial % 5;
        const auto cols = 1 + trial % rows;
        const ComplexMatrix h = random_complex(rows, cols, rng) * 1e-5;
        const auto zf = zf_precoder(h);
        REQUIRE(zf);
        const ComplexMatrix eye = ComplexMatrix::Identity(cols, cols);
        CHECK((h.adjoint() * zf->weights - eye).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(zf_leakage(h, zf->directions) < 1e-9);
        // |h_n^H wbar_n|^2 is the reported effective gain.
        for (Eigen::Index n = 0; n < cols; ++n) {
            const double direct = std::norm(h.col(n).dot(zf->directions.col(n)));
            CHECK(direct == doctest::Approx(zf->effective_gain(n)).epsilon(1e-9));
        }
    }
}

TEST_CASE("zero forcing rejects rank-deficient channels") {
    ComplexMatrix h(3, 2);
    h.col(0) << 1.0, 2.0, 3.0;
    h.col(1) = h.col(0) * std::complex<double>(0.0, 2.0);
    CHECK_FALSE(zf_precoder(h).has_value());
    CHECK_FALSE(zf_precoder(ComplexMatrix::Ones(2, 3)).has_value());
    CHECK_FALSE(zf_precoder(ComplexMatrix::Zero(3, 1)).has_value());
}

TEST_CASE("Gram-Schmidt residual") {
    auto rng = make_rng(20);
    const ComplexVector h = random_complex(4, 1, rng).col(0);
    CHECK((gs_residual(h, {}) - h).norm() == 0.0);

    const std::vector<ComplexVector> par{h * std::complex<double>(-2.0, 0.5)};
    CHECK(gs_residual(h, par).norm() < 1e-9 * h.norm());

    // A full pass over random vectors: residuals are mutually orthogonal and
    // h_t is its residual plus its projections.
    const ComplexMatrix m = random_complex(5, 4, rng);
    std::vector<ComplexVector> basis;
    for (Eigen::Index t = 0; t < m.cols(); ++t) {
        const ComplexVector ht = m.col(t);
        const ComplexVector g = gs_residual(ht, basis);
        ComplexVector rebuilt = g;
        for (const auto& b : basis) {
            CHECK(std::abs(b.dot(g)) < 1e-12 * b.norm() * ht.norm());
            rebuilt += (b.dot(ht) / b.squaredNorm()) * b;
        }
        CHECK((rebuilt - ht).norm() < 1e-12 * ht.norm());
        basis.push_back(g);
    }

    const std::vector<ComplexVector> zero{ComplexVector::Zero(4)};
    CHECK_THROWS_AS(gs_residual(h, zero), std::invalid_argument);
}

TEST_CASE("linear solves") {
    Eigen::VectorXd b(3);
    b << 1.0, -2.0, 3.5;
    auto x = solve_linear(Eigen::MatrixXd::Identity(3, 3), b);
    REQUIRE(x);
    CHECK((*x - b).norm() == 0.0);

    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d(0, 0) = 4.0;
    d(1, 1) = -0.5;
    Eigen::VectorXd c(2);
    c << 2.0, 3.0;
    x = solve_linear(d, c);
    REQUIRE(x);
    CHECK((*x)(0) == doctest::Approx(0.5));
    CHECK((*x)(1) == doctest::Approx(-6.0));

    auto rng = make_rng(30);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::MatrixXd a(6, 6);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) a(i, j) = n(rng) + (i == j ? 6.0 : 0.0);
        Eigen::VectorXd r(6);
        for (int i = 0; i < 6; ++i) r(i) = n(rng);
        const auto y = solve_linear(a, r);
        REQUIRE(y);
        CHECK((a * *y - r).norm() <= 1e-10 * r.norm());
    }

    Eigen::MatrixXd s(2, 2);
    s << 1.0, 2.0, 2.0, 4.0;
    CHECK_FALSE(solve_linear(s, c).has_value());
    CHECK_THROWS_AS(solve_linear(s, b), std::invalid_argument);
}

TEST_CASE("matching basics") {
    BipartiteGraph one{1, 1, {{0, 0, 2.5}}};
    auto m = max_weight_matching(one);
    REQUIRE(m.size() == 1);
    CHECK(m[0].left == 0);
    CHECK(m[0].right == 0);

    BipartiteGraph square{2, 2, {{0, 0, 3.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 3.0}}};
    m = max_weight_matching(square);
    REQUIRE(m.size() == 2);
    CHECK(m[0].right == 0);
    CHECK(m[1].right == 1);
    CHECK(total_weight(m) == doctest::Approx(6.0));

    // Weight beats cardinality.
    BipartiteGraph path{2, 2, {{0, 0, 10.0}, {0, 1, 1.0}, {1, 0, 1.0}}};
    m = max_weight_matching(path);
    REQUIRE(m.size() == 1);
    CHECK(total_weight(m) == doctest::Approx(10.0));

    CHECK(max_weight_matching(BipartiteGraph{3, 2, {}}).empty());
}

TEST_CASE("matching rejects malformed graphs") {
    using G = BipartiteGraph;
    CHECK_THROWS_AS((G{1, 1, {{0, 0, std::nan("")}}}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((G{1, 1, {{0, 0, -1.0}}}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((G{1, 1, {{0, 1, 1.0}}}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((G{1, 1, {{0, 0, 1.0}, {0, 0, 2.0}}}).validate(), std::invalid_argument);
}

TEST_CASE("matching agrees with enumeration") {
    auto rng = make_rng(40);
    std::uniform_int_distribution<int> size(1, 6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        BipartiteGraph g{static_cast<std::size_t>(size(rng)), static_cast<std::size_t>(size(rng)), {}};
        for (std::size_t l = 0; l < g.num_left; ++l)
            for (std::size_t r = 0; r < g.num_right; ++r)
                if (u(rng) < 0.5) g.edges.push_back({l, r, std::exp(6.0 * u(rng))});
        const auto m = max_weight_matching(g);
        std::vector<char> lu(g.num_left, 0), ru(g.num_right, 0);
        for (const auto& e : m) {
            CHECK_FALSE(lu[e.left]);
            CHECK_FALSE(ru[e.right]);
            lu[e.left] = ru[e.right] = 1;
        }
        const double best = d2d::testing::brute_force_matching(g);
        CHECK(total_weight(m) == doctest::Approx(best).epsilon(1e-9));
    }
}

TEST_CASE("dual steps") {
    Eigen::VectorXd m(2);
    m << 0.3, 1.0;
    CHECK((dual_step(m, Eigen::VectorXd::Zero(2), 0.1) - m).norm() == 0.0);
    Eigen::VectorXd s(2);
    s << 10.0, -1.0;
    const auto next = dual_step(m, s, 0.1);
    CHECK(next(0) == 0.0);
    CHECK(next(1) == doctest::Approx(1.1));
    CHECK_THROWS_AS(dual_step(m, s, 0.0), std::invalid_argument);
}

TEST_CASE("dual ascent on a scalar rate problem") {
    // max log(1 + x) s.t. x <= c. Primal at lambda is x = 1/lambda - 1 and the
    // optimal multiplier is 1/(1+c).
    for (double c : {0.5, 1.0, 3.0}) {
        auto slack = [c](const Eigen::VectorXd& lam) {
            const double x = std::max(0.0, 1.0 / std::max(lam(0), 1e-12) - 1.0);
            return Eigen::VectorXd::Constant(1, c - x);
        };
        const auto r = projected_dual_ascent(slack, Eigen::VectorXd::Constant(1, 1.0),
                                             DualAscentOptions{0.1, 100000, 1e-9});
        CHECK(r.converged);
        CHECK(r.multipliers(0) == doctest::Approx(1.0 / (1.0 + c)).epsilon(1e-4));
    }
    const auto empty = projected_dual_ascent([](const Eigen::VectorXd& v) { return v; },
                                             Eigen::VectorXd{});
    CHECK(empty.converged);
}
