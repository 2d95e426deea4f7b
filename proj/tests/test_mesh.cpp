#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "oracle_helpers.hpp"
#include "splitpde/errors.hpp"
#include "splitpde/mesh.hpp"

using splitpde::build_mesh;
using splitpde::fe_eval;
using splitpde::interpolate;
using splitpde::Mesh;
using splitpde::Rect;

TEST_CASE("interior DOF counting") {
    CHECK(build_mesh({0, 1, 0, 1}, 1, 1, 1).n_interior() == 0);
    CHECK(build_mesh({0, 1, 0, 1}, 2, 2, 1).n_interior() == 1);
    CHECK(build_mesh({0, 5, 0, 5}, 25, 25, 2).n_interior() == 49 * 49);
}

TEST_CASE("node coordinates land on the affine images of reference nodes") {
    SUBCASE("corners of a single linear element") {
        const Mesh m = build_mesh({0, 5, 0, 5}, 1, 1, 1);
        CHECK(m.node_coords(0) == std::pair{0.0, 0.0});
        CHECK(m.node_coords(1) == std::pair{5.0, 0.0});
        CHECK(m.node_coords(2) == std::pair{0.0, 5.0});
        CHECK(m.node_coords(3) == std::pair{5.0, 5.0});
    }
    SUBCASE("center node of a single quadratic element") {
        const Mesh m = build_mesh({0, 5, 0, 5}, 1, 1, 2);
        const auto [x, y] = m.node_coords(m.interior()[0]);
        CHECK(x == doctest::Approx(2.5).epsilon(1e-15));
        CHECK(y == doctest::Approx(2.5).epsilon(1e-15));
    }
    SUBCASE("element-local node on a 2x1 mesh") {
        const Mesh m = build_mesh({0, 4, 0, 2}, 2, 1, 2);
        const auto [x, y] = m.node_coords(m.global_node(1, 0, 0));
        CHECK(x == doctest::Approx(2.0).epsilon(1e-15));
        CHECK(y == doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("boundary nodes sit exactly on the boundary") {
        const Mesh m = build_mesh({-1, 2, 0.5, 3}, 3, 2, 3);
        for (int g = 0; g < m.n_nodes(); ++g) {
            if (m.interior_index(g) >= 0) continue;
            const auto [x, y] = m.node_coords(g);
            const bool on_edge = x == -1.0 || x == 2.0 || y == 0.5 || y == 3.0;
            CHECK(on_edge);
        }
    }
}

TEST_CASE("shared edge nodes map to the same global index") {
    for (auto [nx, ny, p] : {std::array{3, 2, 2}, std::array{4, 4, 1}, std::array{2, 5, 3}}) {
        const Mesh m = build_mesh({0, 1, 0, 1}, nx, ny, p);
        for (int ky = 0; ky < ny; ++ky) {
            for (int kx = 0; kx + 1 < nx; ++kx) {
                const int left = ky * nx + kx;
                for (int j = 0; j <= p; ++j)
                    CHECK(m.global_node(left, p, j) == m.global_node(left + 1, 0, j));
            }
        }
        for (int ky = 0; ky + 1 < ny; ++ky) {
            for (int kx = 0; kx < nx; ++kx) {
                const int bottom = ky * nx + kx;
                for (int i = 0; i <= p; ++i)
                    CHECK(m.global_node(bottom, i, p) == m.global_node(bottom + nx, i, 0));
            }
        }
    }
}

TEST_CASE("interpolation") {
    const Mesh m = build_mesh({0, 5, 0, 5}, 3, 3, 2);
    SUBCASE("zero field gives the zero vector") {
        const auto c = interpolate(m, [](double, double) { return std::complex<double>{}; });
        for (const auto& v : c) CHECK(v == std::complex<double>{});
    }
    SUBCASE("a cardinal basis function gives a unit vector") {
        const int target = 7;
        std::vector<std::complex<double>> unit(m.n_interior(), 0.0);
        unit[target] = 1.0;
        const auto c = interpolate(
            m, [&](double x, double y) { return fe_eval(m, unit, x, y); });
        for (int i = 0; i < m.n_interior(); ++i)
            CHECK(std::abs(c[i] - unit[i]) <= 1e-13);
    }
    SUBCASE("the Gaussian profile has coefficient 10 at the center node") {
        const Mesh fine = build_mesh({0, 5, 0, 5}, 25, 25, 2);
        const auto c = interpolate(fine, [](double x, double y) {
            return std::complex<double>(
                10.0 * std::exp(-10.0 * ((x - 2.5) * (x - 2.5) + (y - 2.5) * (y - 2.5))));
        });
        double best = 0.0;
        for (int i = 0; i < fine.n_interior(); ++i) best = std::max(best, std::abs(c[i]));
        CHECK(best == doctest::Approx(10.0).epsilon(1e-14));
    }
    SUBCASE("non-finite samples are rejected") {
        CHECK_THROWS_AS(interpolate(m,
                                    [](double x, double y) {
                                        return std::complex<double>(x == 2.5 && y == 2.5
                                                                        ? std::nan("")
                                                                        : 1.0);
                                    }),
                        splitpde::InputError);
    }
}

TEST_CASE("round trip: fe_eval at interior nodes reproduces coefficients") {
    const Mesh m = build_mesh({0, 2, -1, 1}, 3, 2, 3);
    const auto c = oracle::random_state(m.n_interior(), 42);
    for (int i = 0; i < m.n_interior(); ++i) {
        const auto [x, y] = m.node_coords(m.interior()[i]);
        CHECK(std::abs(fe_eval(m, c, x, y) - c[i]) <= 1e-13);
    }
}

TEST_CASE("configuration and input errors") {
    CHECK_THROWS_AS(build_mesh({1, 1, 0, 1}, 2, 2, 1), splitpde::ConfigError);
    CHECK_THROWS_AS(build_mesh({0, 1, 0, 1}, 0, 2, 1), splitpde::ConfigError);
    const Mesh m = build_mesh({0, 1, 0, 1}, 2, 2, 1);
    CHECK_THROWS_AS(m.node_coords(-1), splitpde::InputError);
    CHECK_THROWS_AS(m.node_coords(m.n_nodes()), splitpde::InputError);
}
