#include "splitpde/sparse_linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "splitpde/errors.hpp"

namespace splitpde {

std::complex<double> m_dot(std::span<const std::complex<double>> u,
                           std::span<const std::complex<double>> v,
                           std::span<const double> mass) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i) acc += std::conj(u[i]) * mass[i] * v[i];
    return acc;
}

double m_norm(std::span<const std::complex<double>> c, std::span<const double> mass) {
    double acc = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i) acc += mass[i] * std::norm(c[i]);
    return std::sqrt(acc);
}

// ---------------------------------------------------------------------------
// Poisson solver
// ---------------------------------------------------------------------------

namespace {
double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}
double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }
}  // namespace

std::vector<double> PoissonSolver::solve(std::span<const double> rhs) {
    const int n = k_->n;
    if (static_cast<int>(rhs.size()) != n) throw InputError("poisson_solve: rhs layout mismatch");

    std::vector<double> x(n, 0.0);
    const double bnorm = norm2(rhs);
    if (bnorm == 0.0) {
        last_iterations_ = 0;
        last_residual_ = 0.0;
        return x;
    }

    if (cholesky_) {
        solve_cholesky(rhs, x);
        k_->multiply(x, std::span<double>(r_));
        for (int i = 0; i < n; ++i) r_[i] -= rhs[i];
        last_iterations_ = 0;
        last_residual_ = norm2(r_) / bnorm;
        return x;
    }

    // Jacobi-preconditioned CG.
    std::copy(rhs.begin(), rhs.end(), r_.begin());
    for (int i = 0; i < n; ++i) z_[i] = inv_diag_[i] * r_[i];
    std::copy(z_.begin(), z_.end(), p_.begin());
    double rz = dot(r_, z_);

    int it = 0;
    double relres = 1.0;
    for (; it < opts_.max_iter; ++it) {
        relres = norm2(r_) / bnorm;
        if (relres <= opts_.tol) break;
        k_->multiply(p_, std::span<double>(ap_));
        const double pap = dot(p_, ap_);
        if (!(pap > 0.0)) {
            throw std::logic_error("poisson_solve: CG breakdown, matrix not SPD");
        }
        const double alpha = rz / pap;
        for (int i = 0; i < n; ++i) x[i] += alpha * p_[i];
        for (int i = 0; i < n; ++i) r_[i] -= alpha * ap_[i];
        for (int i = 0; i < n; ++i) z_[i] = inv_diag_[i] * r_[i];
        const double rz_next = dot(r_, z_);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (int i = 0; i < n; ++i) p_[i] = z_[i] + beta * p_[i];
    }
    last_iterations_ = it;
    last_residual_ = relres;
    if (relres > opts_.tol) {
        throw SolverError("poisson_solve: CG did not reach tol " + std::to_string(opts_.tol) +
                              " within " + std::to_string(opts_.max_iter) +
                              " iterations (residual " + std::to_string(relres) + ")",
                          relres);
    }
    return x;
}

std::vector<double> poisson_solve(const Operators& ops, std::span<const double> rhs,
                                  PoissonOptions opts) {
    PoissonSolver solver(ops.stiffness, opts);
    return solver.solve(rhs);
}

// ---------------------------------------------------------------------------
// Krylov matrix exponential
// ---------------------------------------------------------------------------

void symmetric_tridiagonal_eig(std::span<double> diag, std::span<double> off,
                               std::span<double> z) {
    // Implicit QL with Wilkinson shifts (tql2). z must hold the identity on
    // entry (or an orthogonal basis to rotate), row-major n x n.
    const int n = static_cast<int>(diag.size());
    if (n == 0) return;
    std::vector<double> e(n, 0.0);
    for (int i = 0; i + 1 < n; ++i) e[i] = off[i];

    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m = l;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(diag[m]) + std::abs(diag[m + 1]);
                if (std::abs(e[m]) <= 1e-300 + 2.3e-16 * dd) break;
            }
            if (m != l) {
                if (++iter > 50) throw std::logic_error("symmetric_tridiagonal_eig: no convergence");
                double g = (diag[l + 1] - diag[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = diag[m] - diag[l] + e[l] / (g + (g >= 0 ? std::abs(r) : -std::abs(r)));
                double s = 1.0, c = 1.0, p = 0.0;
                for (int i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        diag[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = diag[i + 1] - p;
                    r = (diag[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    diag[i + 1] = g + p;
                    g = c * r - b;
                    for (int k = 0; k < n; ++k) {
                        f = z[static_cast<std::size_t>(k) * n + i + 1];
                        z[static_cast<std::size_t>(k) * n + i + 1] =
                            s * z[static_cast<std::size_t>(k) * n + i] + c * f;
                        z[static_cast<std::size_t>(k) * n + i] =
                            c * z[static_cast<std::size_t>(k) * n + i] - s * f;
                    }
                }
                if (r == 0.0 && m - 1 >= l) continue;
                diag[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
    // Ascending order, permuting eigenvector columns along.
    for (int i = 0; i + 1 < n; ++i) {
        int kmin = i;
        for (int j = i + 1; j < n; ++j)
            if (diag[j] < diag[kmin]) kmin = j;
        if (kmin != i) {
            std::swap(diag[i], diag[kmin]);
            for (int k = 0; k < n; ++k)
                std::swap(z[static_cast<std::size_t>(k) * n + i],
                          z[static_cast<std::size_t>(k) * n + kmin]);
        }
    }
}

ExpvWorkspace::ExpvWorkspace(int n, int max_krylov) : n_(n), max_krylov_(max_krylov) {
    basis_.resize(static_cast<std::size_t>(max_krylov + 1) * n);
    w_.resize(n);
    kv_.resize(n);
    alpha_.resize(max_krylov);
    beta_.resize(max_krylov);
    const std::size_t m2 = static_cast<std::size_t>(max_krylov) * max_krylov;
    eig_.resize(max_krylov);
    eigvec_.resize(m2);
    work_d_.resize(max_krylov);
    work_e_.resize(max_krylov);
}

double ExpvWorkspace::basis_orthonormality_defect(std::span<const double> mass) const {
    double defect = 0.0;
    for (int i = 0; i < last_dim_; ++i) {
        const auto vi = std::span<const std::complex<double>>(
            basis_.data() + static_cast<std::size_t>(i) * n_, n_);
        for (int j = i; j < last_dim_; ++j) {
            const auto vj = std::span<const std::complex<double>>(
                basis_.data() + static_cast<std::size_t>(j) * n_, n_);
            const std::complex<double> g = m_dot(vi, vj, mass);
            defect = std::max(defect, std::abs(g - (i == j ? 1.0 : 0.0)));
        }
    }
    return defect;
}

namespace {

// u(t) = exp(-(i/2) t T_m) beta0 e1 through the eigendecomposition of T_m.
// Fills out[k] for a single t.
void small_propagate(std::span<const double> eig, std::span<const double> q, int m,
                     double beta0, double t, std::span<std::complex<double>> out) {
    for (int k = 0; k < m; ++k) {
        std::complex<double> acc = 0.0;
        for (int l = 0; l < m; ++l) {
            const double theta = 0.5 * t * eig[l];
            acc += q[static_cast<std::size_t>(k) * m + l] *
                   std::complex<double>(std::cos(theta), -std::sin(theta)) *
                   q[static_cast<std::size_t>(0) * m + l];
        }
        out[k] = beta0 * acc;
    }
}

}  // namespace

struct ExpvImpl {
    struct Context {
        const CsrMatrix& k;
        std::span<const double> mass;
        ExpvWorkspace& ws;
        double tol_rate;  // allowed error per unit time, relative to ||c||_M
        int substeps = 0;
    };
    static void substep(Context& ctx, double tau, std::vector<std::complex<double>>& c, int depth);
    static void set_counters(ExpvWorkspace& ws, int substeps) { ws.last_substeps_ = substeps; }
};

// One recursive substep: Lanczos of growing dimension; on failure at
// max_krylov the interval is halved. Depth is bounded to catch stagnation.
void ExpvImpl::substep(Context& ctx, double tau, std::vector<std::complex<double>>& c, int depth) {
    if (depth > 48) {
        throw SolverError("expv: substep underflow, tolerance unreachable", 0.0);
    }
    const int n = ctx.k.n;
    ExpvWorkspace& ws = ctx.ws;
    const double beta0 = m_norm(c, ctx.mass);
    if (beta0 == 0.0 || tau == 0.0) return;

    auto basis_row = [&ws, n](int j) {
        return std::span<std::complex<double>>(
            ws.basis_.data() + static_cast<std::size_t>(j) * n, n);
    };

    // v1 = c / beta0
    {
        auto v1 = basis_row(0);
        for (int i = 0; i < n; ++i) v1[i] = c[i] / beta0;
    }

    const double budget = std::abs(tau) * ctx.tol_rate;  // relative error allowed here
    const int m_max = ws.max_krylov_;
    int m = 0;
    bool converged = false;
    bool breakdown = false;
    double err_rel = 0.0;

    for (int j = 0; j < m_max && !converged; ++j) {
        auto vj = basis_row(j);
        // w = M^{-1} K v_j
        ctx.k.multiply(std::span<const std::complex<double>>(vj.data(), vj.size()),
                       std::span<std::complex<double>>(ws.kv_));
        for (int i = 0; i < n; ++i) ws.w_[i] = ws.kv_[i] / ctx.mass[i];

        const double alpha =
            m_dot(std::span<const std::complex<double>>(vj.data(), vj.size()),
                  std::span<const std::complex<double>>(ws.w_), ctx.mass)
                .real();
        ws.alpha_[j] = alpha;
        for (int i = 0; i < n; ++i) ws.w_[i] -= alpha * vj[i];
        if (j > 0) {
            auto vm = basis_row(j - 1);
            const double b = ws.beta_[j - 1];
            for (int i = 0; i < n; ++i) ws.w_[i] -= b * vm[i];
        }
        // Full reorthogonalization, two classical Gram-Schmidt passes.
        for (int pass = 0; pass < 2; ++pass) {
            for (int i = 0; i <= j; ++i) {
                auto vi = basis_row(i);
                const std::complex<double> g =
                    m_dot(std::span<const std::complex<double>>(vi.data(), vi.size()),
                          std::span<const std::complex<double>>(ws.w_), ctx.mass);
                for (int l = 0; l < n; ++l) ws.w_[l] -= g * vi[l];
            }
        }
        const double beta = m_norm(std::span<const std::complex<double>>(ws.w_), ctx.mass);
        ws.beta_[j] = beta;
        m = j + 1;

        if (beta <= 1e-14 * beta0) {
            breakdown = true;  // invariant subspace reached: the projection is exact
            converged = true;
            err_rel = 0.0;
            break;
        }
        auto vnext = basis_row(j + 1);
        for (int i = 0; i < n; ++i) vnext[i] = ws.w_[i] / beta;

        // Check the residual bound periodically and at the last chance.
        const bool check = (m >= 4 && m % 4 == 0) || m == m_max;
        if (!check) continue;

        for (int i = 0; i < m; ++i) ws.work_d_[i] = ws.alpha_[i];
        for (int i = 0; i + 1 < m; ++i) ws.work_e_[i] = ws.beta_[i];
        std::fill(ws.eigvec_.begin(), ws.eigvec_.begin() + static_cast<std::size_t>(m) * m, 0.0);
        for (int i = 0; i < m; ++i) ws.eigvec_[static_cast<std::size_t>(i) * m + i] = 1.0;
        symmetric_tridiagonal_eig(std::span<double>(ws.work_d_.data(), m),
                                  std::span<double>(ws.work_e_.data(), m),
                                  std::span<double>(ws.eigvec_.data(),
                                                    static_cast<std::size_t>(m) * m));

        // ||error||_M <= int_0^tau ||r(s)||_M ds with
        // ||r(s)||_M = (beta_m/2) |u_m(s)|; the exact flow is M-unitary so no
        // growth factor enters. The scalar integral is done by composite
        // Simpson resolved against the fastest phase in T_m.
        const double lam_max = std::max(std::abs(ws.work_d_[0]), std::abs(ws.work_d_[m - 1]));
        const double theta = 0.5 * std::abs(tau) * lam_max;
        int intervals = std::max(16, static_cast<int>(4.0 * theta) + 1);
        intervals += intervals % 2;
        std::complex<double> um;
        double integral = 0.0;
        for (int s = 0; s <= intervals; ++s) {
            const double t = tau * s / intervals;
            std::complex<double> acc = 0.0;
            for (int l = 0; l < m; ++l) {
                const double th = 0.5 * t * ws.work_d_[l];
                acc += ws.eigvec_[static_cast<std::size_t>(m - 1) * m + l] *
                       std::complex<double>(std::cos(th), -std::sin(th)) *
                       ws.eigvec_[l];
            }
            um = beta0 * acc;
            const double f = std::abs(um);
            integral += (s == 0 || s == intervals) ? f : (s % 2 == 1 ? 4.0 * f : 2.0 * f);
        }
        integral *= std::abs(tau) / intervals / 3.0;
        err_rel = 1.2 * 0.5 * beta * integral / beta0;
        if (err_rel <= budget) converged = true;
    }

    if (!converged) {
        // Residual bound not met at the largest basis: halve and recurse.
        substep(ctx, 0.5 * tau, c, depth + 1);
        substep(ctx, 0.5 * tau, c, depth + 1);
        return;
    }

    // y = V_m exp(-(i/2) tau T_m) beta0 e1
    if (breakdown) {
        for (int i = 0; i < m; ++i) ws.work_d_[i] = ws.alpha_[i];
        for (int i = 0; i + 1 < m; ++i) ws.work_e_[i] = ws.beta_[i];
        std::fill(ws.eigvec_.begin(), ws.eigvec_.begin() + static_cast<std::size_t>(m) * m, 0.0);
        for (int i = 0; i < m; ++i) ws.eigvec_[static_cast<std::size_t>(i) * m + i] = 1.0;
        symmetric_tridiagonal_eig(std::span<double>(ws.work_d_.data(), m),
                                  std::span<double>(ws.work_e_.data(), m),
                                  std::span<double>(ws.eigvec_.data(),
                                                    static_cast<std::size_t>(m) * m));
    }
    std::vector<std::complex<double>> u(m);
    small_propagate(std::span<const double>(ws.work_d_.data(), m),
                    std::span<const double>(ws.eigvec_.data(), static_cast<std::size_t>(m) * m),
                    m, beta0, tau, u);
    for (int i = 0; i < n; ++i) c[i] = 0.0;
    for (int j = 0; j < m; ++j) {
        auto vj = basis_row(j);
        const std::complex<double> uj = u[j];
        for (int i = 0; i < n; ++i) c[i] += uj * vj[i];
    }
    ws.last_dim_ = m;
    ++ctx.substeps;
}

std::vector<std::complex<double>> expv(const CsrMatrix& k, std::span<const double> mass,
                                       double tau, std::span<const std::complex<double>> c,
                                       double tol, ExpvWorkspace& ws) {
    if (k.n != static_cast<int>(c.size()) || mass.size() != c.size()) {
        throw InputError("expv: layout mismatch");
    }
    std::vector<std::complex<double>> y(c.begin(), c.end());
    for (const auto& v : y) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw InputError("expv: non-finite input state");
    }
    if (tau == 0.0 || y.empty()) {
        ExpvImpl::set_counters(ws, 0);
        return y;
    }
    ExpvImpl::Context ctx{k, mass, ws, tol / std::abs(tau), 0};
    ExpvImpl::substep(ctx, tau, y, 0);
    ExpvImpl::set_counters(ws, ctx.substeps);
    return y;
}

std::vector<std::complex<double>> expv(const Operators& ops, double tau,
                                       std::span<const std::complex<double>> c, double tol,
                                       ExpvWorkspace& ws) {
    return expv(ops.stiffness, ops.mass, tau, c, tol, ws);
}

}  // namespace splitpde
