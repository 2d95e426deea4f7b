#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "oracle_helpers.hpp"
#include "splitpde/errors.hpp"
#include "splitpde/harness.hpp"
#include "splitpde/sparse_linalg.hpp"

using namespace splitpde;

namespace {

Operators small_operators(int nx, int ny, int p) {
    return build_operators(build_mesh({0, 2, 0, 2}, nx, ny, p));
}

std::vector<std::complex<double>> dense_expv_oracle(const Operators& ops, double tau,
                                                    std::span<const std::complex<double>> c) {
    return oracle::dense_expv(ops.stiffness, ops.mass, tau, c);
}

double l2_distance(std::span<const std::complex<double>> a,
                   std::span<const std::complex<double>> b, std::span<const double> mass) {
    return l2_error(a, b, mass);
}

}  // namespace

TEST_CASE("poisson_solve") {
    SUBCASE("zero rhs gives zero") {
        const Operators ops = small_operators(3, 3, 2);
        const std::vector<double> rhs(ops.n_dofs(), 0.0);
        for (double v : poisson_solve(ops, rhs)) CHECK(v == 0.0);
    }
    SUBCASE("single-DOF system: d = rhs / K00 = rhs * 3/8") {
        const Operators ops = small_operators(2, 2, 1);
        REQUIRE(ops.n_dofs() == 1);
        const std::vector<double> rhs{2.0};
        const auto d = poisson_solve(ops, rhs);
        CHECK(d[0] == doctest::Approx(2.0 * 3.0 / 8.0).epsilon(1e-13));
    }
    SUBCASE("relative residual meets the tolerance") {
        const Operators ops = small_operators(5, 4, 2);
        const auto rhs = oracle::random_real(ops.n_dofs(), 3);
        PoissonSolver solver(ops.stiffness);
        const auto d = solver.solve(rhs);
        std::vector<double> kd(ops.n_dofs());
        ops.stiffness.multiply(d, kd);
        double rnorm = 0.0, bnorm = 0.0;
        for (int i = 0; i < ops.n_dofs(); ++i) {
            rnorm += (kd[i] - rhs[i]) * (kd[i] - rhs[i]);
            bnorm += rhs[i] * rhs[i];
        }
        CHECK(std::sqrt(rnorm / bnorm) <= 1e-12);
        CHECK(solver.last_residual() <= 1e-12);
    }
    SUBCASE("CG and Cholesky backends agree") {
        const Operators ops = small_operators(6, 5, 2);
        const auto rhs = oracle::random_real(ops.n_dofs(), 11);
        PoissonOptions chol;
        chol.method = PoissonOptions::Method::cholesky;
        const auto d_cg = poisson_solve(ops, rhs);
        const auto d_ch = poisson_solve(ops, rhs, chol);
        double scale = 0.0;
        for (double v : d_cg) scale = std::max(scale, std::abs(v));
        for (int i = 0; i < ops.n_dofs(); ++i)
            CHECK(std::abs(d_cg[i] - d_ch[i]) <= 1e-10 * scale);
    }
    SUBCASE("exhausted iteration budget raises a solver failure with the residual") {
        const Operators ops = small_operators(6, 6, 2);
        const auto rhs = oracle::random_real(ops.n_dofs(), 5);
        PoissonOptions opts;
        opts.max_iter = 2;
        PoissonSolver solver(ops.stiffness, opts);
        try {
            solver.solve(rhs);
            FAIL("expected SolverError");
        } catch (const SolverError& e) {
            CHECK(e.residual > 0.0);
            CHECK(e.residual < 1.0);
        }
    }
}

TEST_CASE("symmetric tridiagonal eigensolver matches Eigen") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int n : {1, 2, 5, 23}) {
        std::vector<double> diag(n), off(std::max(0, n - 1));
        for (auto& v : diag) v = dist(rng);
        for (auto& v : off) v = dist(rng);

        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i) t(i, i) = diag[i];
        for (int i = 0; i + 1 < n; ++i) t(i, i + 1) = t(i + 1, i) = off[i];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(t);

        std::vector<double> d = diag, e = off, z(static_cast<std::size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i) * n + i] = 1.0;
        symmetric_tridiagonal_eig(d, e, z);

        for (int i = 0; i < n; ++i)
            CHECK(d[i] == doctest::Approx(ref.eigenvalues()[i]).epsilon(1e-12));
        // Residual check of the eigenpairs (eigenvector signs are free).
        for (int j = 0; j < n; ++j) {
            Eigen::VectorXd v(n);
            for (int i = 0; i < n; ++i) v[i] = z[static_cast<std::size_t>(i) * n + j];
            CHECK((t * v - d[j] * v).norm() <= 1e-12 * (1.0 + std::abs(d[j])));
            CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("expv") {
    SUBCASE("tau = 0 is the identity") {
        const Operators ops = small_operators(3, 3, 1);
        ExpvWorkspace ws(ops.n_dofs());
        const auto c = oracle::random_state(ops.n_dofs(), 1);
        const auto y = expv(ops, 0.0, c, 1e-12, ws);
        for (int i = 0; i < ops.n_dofs(); ++i) CHECK(y[i] == c[i]);
    }
    SUBCASE("single-DOF system is a pure phase") {
        const Operators ops = small_operators(2, 2, 1);
        ExpvWorkspace ws(1);
        const std::complex<double> c0{0.3, -1.1};
        const double tau = 0.37;
        const auto y = expv(ops, tau, std::vector<std::complex<double>>{c0}, 1e-12, ws);
        const double theta = 0.5 * tau * ops.stiffness.vals[0] / ops.mass[0];
        const std::complex<double> expected =
            c0 * std::complex<double>(std::cos(theta), -std::sin(theta));
        CHECK(std::abs(y[0] - expected) <= 1e-13 * std::abs(c0));
    }
    SUBCASE("dense eigendecomposition oracle on small meshes") {
        for (auto [nx, ny, p] : {std::array{4, 4, 2}, std::array{5, 2, 1}, std::array{2, 2, 3}}) {
            const Operators ops = small_operators(nx, ny, p);
            REQUIRE(ops.n_dofs() <= 50);
            ExpvWorkspace ws(ops.n_dofs());
            std::mt19937_64 rng(1000 + nx);
            std::uniform_real_distribution<double> taud(0.001, 0.4);
            for (int rep = 0; rep < 4; ++rep) {
                const double tau = taud(rng);
                const auto c = oracle::random_state(ops.n_dofs(), 200 + rep);
                const auto y = expv(ops, tau, c, 1e-12, ws);
                const auto y_ref = dense_expv_oracle(ops, tau, c);
                CHECK(l2_distance(y, y_ref, ops.mass) <= 1e-10 * m_norm(c, ops.mass));
            }
        }
    }
    SUBCASE("unitarity, group property, conjugation symmetry") {
        const Operators ops = small_operators(5, 5, 2);
        const double tol = 1e-12;
        ExpvWorkspace ws(ops.n_dofs());
        std::mt19937_64 rng(77);
        std::uniform_real_distribution<double> taud(0.0, 0.1);
        for (int rep = 0; rep < 6; ++rep) {
            const double tau = taud(rng);
            const auto c = oracle::random_state(ops.n_dofs(), 300 + rep);
            const double norm0 = m_norm(c, ops.mass);

            const auto y = expv(ops, tau, c, tol, ws);
            CHECK(std::abs(m_norm(y, ops.mass) - norm0) <= 10.0 * tol * norm0);

            const double tau1 = 0.3 * tau, tau2 = 0.7 * tau;
            const auto y12 = expv(ops, tau1, expv(ops, tau2, c, tol, ws), tol, ws);
            CHECK(l2_distance(y, y12, ops.mass) <= 10.0 * tol * norm0);

            auto cbar = c;
            for (auto& v : cbar) v = std::conj(v);
            auto yback = expv(ops, -tau, cbar, tol, ws);
            for (auto& v : yback) v = std::conj(v);
            CHECK(l2_distance(y, yback, ops.mass) <= 10.0 * tol * norm0);
        }
    }
    SUBCASE("Lanczos basis stays M-orthonormal") {
        const Operators ops = small_operators(6, 6, 2);
        ExpvWorkspace ws(ops.n_dofs());
        const auto c = oracle::random_state(ops.n_dofs(), 9);
        (void)expv(ops, 0.05, c, 1e-12, ws);
        CHECK(ws.last_krylov_dim() > 1);
        CHECK(ws.basis_orthonormality_defect(ops.mass) <= 1e-10);
    }
    SUBCASE("non-finite input is rejected") {
        const Operators ops = small_operators(3, 3, 1);
        ExpvWorkspace ws(ops.n_dofs());
        std::vector<std::complex<double>> c(ops.n_dofs(), 1.0);
        c[0] = std::nan("");
        CHECK_THROWS_AS(expv(ops, 0.1, c, 1e-12, ws), InputError);
    }
}
