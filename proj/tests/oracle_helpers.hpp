// Test-only oracles, deliberately independent of the library's numerical
// paths: analytic polynomial integrals via monomial coefficients in long
// double, and dense linear algebra through Eigen.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <span>
#include <vector>

#include "splitpde/assembly.hpp"

namespace oracle {

// Monomial coefficients (ascending) of the cardinal polynomial through
// `nodes` that is 1 at node j, by expanding the product form.
inline std::vector<long double> cardinal_coeffs(const std::vector<double>& nodes, int j) {
    std::vector<long double> poly{1.0L};
    long double denom = 1.0L;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (static_cast<int>(k) == j) continue;
        denom *= static_cast<long double>(nodes[j]) - static_cast<long double>(nodes[k]);
        std::vector<long double> next(poly.size() + 1, 0.0L);
        for (std::size_t m = 0; m < poly.size(); ++m) {
            next[m + 1] += poly[m];
            next[m] -= poly[m] * static_cast<long double>(nodes[k]);
        }
        poly = std::move(next);
    }
    for (auto& c : poly) c /= denom;
    return poly;
}

inline std::vector<long double> differentiate(const std::vector<long double>& a) {
    if (a.size() <= 1) return {0.0L};
    std::vector<long double> d(a.size() - 1);
    for (std::size_t m = 1; m < a.size(); ++m) d[m - 1] = a[m] * static_cast<long double>(m);
    return d;
}

// Exact integral over [-1,1] of the product of two coefficient polynomials.
inline long double integrate_product(const std::vector<long double>& a,
                                     const std::vector<long double>& b) {
    long double acc = 0.0L;
    for (std::size_t m = 0; m < a.size(); ++m) {
        for (std::size_t n = 0; n < b.size(); ++n) {
            const std::size_t pw = m + n;
            if (pw % 2 == 0) acc += a[m] * b[n] * 2.0L / static_cast<long double>(pw + 1);
        }
    }
    return acc;
}

inline long double eval_poly(const std::vector<long double>& a, long double x) {
    long double acc = 0.0L;
    for (std::size_t m = a.size(); m-- > 0;) acc = acc * x + a[m];
    return acc;
}

inline Eigen::MatrixXd to_dense(const splitpde::CsrMatrix& a) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(a.n, a.n);
    for (int i = 0; i < a.n; ++i)
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) m(i, a.cols[k]) = a.vals[k];
    return m;
}

// Exact evolution exp(-(i/2) tau M^{-1}K) c through the dense
// eigendecomposition of the symmetrized operator M^{-1/2} K M^{-1/2}.
inline std::vector<std::complex<double>> dense_expv(const splitpde::CsrMatrix& k,
                                                    std::span<const double> mass, double tau,
                                                    std::span<const std::complex<double>> c) {
    const int n = k.n;
    Eigen::MatrixXd s = to_dense(k);
    Eigen::VectorXd sqm(n), isqm(n);
    for (int i = 0; i < n; ++i) {
        sqm[i] = std::sqrt(mass[i]);
        isqm[i] = 1.0 / sqm[i];
    }
    s = isqm.asDiagonal() * s * isqm.asDiagonal();
    s = 0.5 * (s + s.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) v[i] = c[i] * sqm[i];
    Eigen::VectorXcd y = eig.eigenvectors().transpose() * v;
    for (int i = 0; i < n; ++i) {
        const double theta = 0.5 * tau * eig.eigenvalues()[i];
        y[i] *= std::complex<double>(std::cos(theta), -std::sin(theta));
    }
    v = eig.eigenvectors() * y;
    std::vector<std::complex<double>> out(n);
    for (int i = 0; i < n; ++i) out[i] = v[i] * isqm[i];
    return out;
}

inline std::vector<std::complex<double>> random_state(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<std::complex<double>> c(n);
    for (auto& v : c) v = {dist(rng), dist(rng)};
    return c;
}

inline std::vector<double> random_real(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(rng);
    return v;
}

}  // namespace oracle
