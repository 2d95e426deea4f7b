#include "splitpde/quadrature.hpp"

#include <cmath>
#include <cstddef>
#include <string>

#include "splitpde/errors.hpp"

namespace splitpde {

namespace {

constexpr int kMaxDegree = 16;

// Legendre P_p and its first two derivatives at x, by the three-term recurrence
// and the Legendre ODE (1-x^2) P'' = 2x P' - p(p+1) P.
struct LegendreEval {
    double value;
    double deriv;
    double deriv2;
};

LegendreEval legendre(int p, double x) {
    double pm1 = 1.0;
    double pk = x;
    for (int k = 2; k <= p; ++k) {
        const double pk1 = ((2 * k - 1) * x * pk - (k - 1) * pm1) / k;
        pm1 = pk;
        pk = pk1;
    }
    const double omx2 = 1.0 - x * x;
    const double dp = p * (x * pk - pm1) / (x * x - 1.0);
    const double d2p = (2.0 * x * dp - static_cast<double>(p) * (p + 1) * pk) / omx2;
    return {pk, dp, d2p};
}

}  // namespace

GLBasis lobatto_rule(int p) {
    if (p < 1 || p > kMaxDegree) {
        throw ConfigError("lobatto_rule: degree must be in [1, " + std::to_string(kMaxDegree) +
                          "], got " + std::to_string(p));
    }

    GLBasis basis;
    basis.degree = p;
    basis.nodes.assign(p + 1, 0.0);
    basis.weights.assign(p + 1, 0.0);
    basis.nodes[0] = -1.0;
    basis.nodes[p] = 1.0;

    // Interior nodes are the roots of P_p'. Newton from Chebyshev-Lobatto
    // starting values; only the left half is computed, the right half is the
    // mirror image so symmetry is exact.
    const int half = (p + 1) / 2;
    for (int i = 1; i < half; ++i) {
        double x = -std::cos(M_PI * i / p);
        for (int iter = 0; iter < 100; ++iter) {
            const LegendreEval le = legendre(p, x);
            const double dx = le.deriv / le.deriv2;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        basis.nodes[i] = x;
        basis.nodes[p - i] = -x;
    }
    if (p % 2 == 0) basis.nodes[p / 2] = 0.0;

    // w_i = 2 / (p (p+1) P_p(x_i)^2), mirrored for the same reason.
    for (int i = 0; i <= half; ++i) {
        const double pp = legendre(p, basis.nodes[i]).value;
        const double w = 2.0 / (static_cast<double>(p) * (p + 1) * pp * pp);
        basis.weights[i] = w;
        basis.weights[p - i] = w;
    }

    basis.deriv = derivative_matrix(basis.nodes);
    return basis;
}

std::vector<double> derivative_matrix(const std::vector<double>& nodes) {
    const int n = static_cast<int>(nodes.size());
    std::vector<double> bary(n, 1.0);
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            if (k != j) bary[j] *= nodes[j] - nodes[k];
        }
        bary[j] = 1.0 / bary[j];
    }

    std::vector<double> d(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        double rowsum = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double v = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
            d[static_cast<std::size_t>(i) * n + j] = v;
            rowsum += v;
        }
        // Diagonal from the zero-row-sum identity (derivative of the constant 1).
        d[static_cast<std::size_t>(i) * n + i] = -rowsum;
    }
    return d;
}

double lagrange_eval(const GLBasis& basis, int j, double x) {
    const int n = basis.n_nodes();
    // Exact cardinal values on nodes, barycentric form elsewhere.
    for (int k = 0; k < n; ++k) {
        if (x == basis.nodes[k]) return k == j ? 1.0 : 0.0;
    }
    double num = 0.0;
    double den = 0.0;
    for (int k = 0; k < n; ++k) {
        double bk = 1.0;
        for (int m = 0; m < n; ++m) {
            if (m != k) bk *= basis.nodes[k] - basis.nodes[m];
        }
        const double t = 1.0 / (bk * (x - basis.nodes[k]));
        den += t;
        if (k == j) num = t;
    }
    return num / den;
}

}  // namespace splitpde
