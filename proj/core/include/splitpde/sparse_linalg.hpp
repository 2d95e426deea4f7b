#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "splitpde/assembly.hpp"

namespace splitpde {

/// M-weighted inner product  <u, v>_M = sum_i conj(u_i) M_ii v_i.
std::complex<double> m_dot(std::span<const std::complex<double>> u,
                           std::span<const std::complex<double>> v,
                           std::span<const double> mass);

/// M-weighted norm sqrt(<c, c>_M), the discrete L2 norm of the FE function.
double m_norm(std::span<const std::complex<double>> c, std::span<const double> mass);

struct PoissonOptions {
    enum class Method { cg, cholesky };
    Method method = Method::cg;
    double tol = 1e-12;  // relative residual ||K d - b|| <= tol ||b||
    int max_iter = 20000;
};

/// Solver handle for K d = b with K SPD. The default backend is conjugate
/// gradients with Jacobi preconditioning; a direct sparse Cholesky
/// factorization can be selected instead (factorized once, reused per solve).
/// Handles hold mutable scratch space and must not be shared across
/// concurrent calls; distinct handles on distinct threads are safe.
class PoissonSolver {
public:
    explicit PoissonSolver(const CsrMatrix& k, PoissonOptions opts = {});
    ~PoissonSolver();
    PoissonSolver(PoissonSolver&&) noexcept;
    PoissonSolver& operator=(PoissonSolver&&) noexcept;

    std::vector<double> solve(std::span<const double> rhs);

    int last_iterations() const { return last_iterations_; }
    double last_residual() const { return last_residual_; }

private:
    void factorize();
    void solve_cholesky(std::span<const double> rhs, std::vector<double>& x);

    const CsrMatrix* k_;
    PoissonOptions opts_;
    std::vector<double> inv_diag_;
    std::vector<double> r_, z_, p_, ap_;
    struct Cholesky;
    std::unique_ptr<Cholesky> cholesky_;
    int last_iterations_ = 0;
    double last_residual_ = 0.0;
};

/// Solves K d = rhs with default options (d = -K^{-1} F in the subflow).
std::vector<double> poisson_solve(const Operators& ops, std::span<const double> rhs,
                                  PoissonOptions opts = {});

/// Scratch space for the Krylov matrix exponential. Not shareable across
/// concurrent calls.
class ExpvWorkspace {
public:
    explicit ExpvWorkspace(int n, int max_krylov = 60);

    int max_krylov() const { return max_krylov_; }
    /// Krylov dimension used by the last (sub)step of the last call.
    int last_krylov_dim() const { return last_dim_; }
    /// Number of substeps the last call was split into.
    int last_substeps() const { return last_substeps_; }
    /// max |<v_i, v_j>_M - delta_ij| over the last substep's basis.
    double basis_orthonormality_defect(std::span<const double> mass) const;

private:
    friend struct ExpvImpl;
    int n_;
    int max_krylov_;
    int last_dim_ = 0;
    int last_substeps_ = 0;
    std::vector<std::complex<double>> basis_;  // (max_krylov+1) x n, row-major
    std::vector<std::complex<double>> w_;
    std::vector<std::complex<double>> kv_;
    std::vector<double> alpha_, beta_;
    std::vector<double> eig_, eigvec_, work_d_, work_e_;
};

/// y ~= exp(-(i/2) tau M^{-1} K) c with ||y - exact||_M <= tol ||c||_M.
/// Lanczos in the M-inner product on the symmetric pencil (K, M); if the
/// residual bound is not met at the maximum basis size the step is halved and
/// recursed. Throws SolverError when the step underflows.
std::vector<std::complex<double>> expv(const CsrMatrix& k, std::span<const double> mass,
                                       double tau, std::span<const std::complex<double>> c,
                                       double tol, ExpvWorkspace& ws);

std::vector<std::complex<double>> expv(const Operators& ops, double tau,
                                       std::span<const std::complex<double>> c, double tol,
                                       ExpvWorkspace& ws);

/// Eigendecomposition of a real symmetric tridiagonal matrix (implicit QL
/// with Wilkinson shifts). diag/off are destroyed; eigenvalues end up in
/// ascending order in diag, eigenvectors in the n x n row-major matrix z.
void symmetric_tridiagonal_eig(std::span<double> diag, std::span<double> off,
                               std::span<double> z);

}  // namespace splitpde
