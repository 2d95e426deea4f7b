// Direct sparse Cholesky backend for PoissonSolver, kept out of the public
// header so Eigen stays an implementation detail of this translation unit.
#include <Eigen/SparseCholesky>
#include <stdexcept>

#include "splitpde/sparse_linalg.hpp"

namespace splitpde {

struct PoissonSolver::Cholesky {
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
};

PoissonSolver::PoissonSolver(const CsrMatrix& k, PoissonOptions opts) : k_(&k), opts_(opts) {
    const int n = k.n;
    inv_diag_.assign(n, 1.0);
    for (int i = 0; i < n; ++i) {
        for (int kk = k.row_ptr[i]; kk < k.row_ptr[i + 1]; ++kk) {
            if (k.cols[kk] == i && k.vals[kk] > 0.0) inv_diag_[i] = 1.0 / k.vals[kk];
        }
    }
    r_.resize(n);
    z_.resize(n);
    p_.resize(n);
    ap_.resize(n);
    if (opts.method == PoissonOptions::Method::cholesky) factorize();
}

PoissonSolver::~PoissonSolver() = default;
PoissonSolver::PoissonSolver(PoissonSolver&&) noexcept = default;
PoissonSolver& PoissonSolver::operator=(PoissonSolver&&) noexcept = default;

void PoissonSolver::factorize() {
    const CsrMatrix& k = *k_;
    Eigen::SparseMatrix<double> a(k.n, k.n);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(k.nnz());
    for (int i = 0; i < k.n; ++i) {
        for (int p = k.row_ptr[i]; p < k.row_ptr[i + 1]; ++p) {
            trips.emplace_back(i, k.cols[p], k.vals[p]);
        }
    }
    a.setFromTriplets(trips.begin(), trips.end());
    cholesky_ = std::make_unique<Cholesky>();
    cholesky_->llt.compute(a);
    if (cholesky_->llt.info() != Eigen::Success) {
        throw std::logic_error("poisson_solve: Cholesky factorization failed, matrix not SPD");
    }
}

void PoissonSolver::solve_cholesky(std::span<const double> rhs, std::vector<double>& x) {
    Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
    Eigen::VectorXd sol = cholesky_->llt.solve(b);
    for (int i = 0; i < k_->n; ++i) x[i] = sol[i];
}

}  // namespace splitpde
