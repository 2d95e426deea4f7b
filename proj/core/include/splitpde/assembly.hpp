#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <vector>

#include "splitpde/mesh.hpp"

namespace splitpde {

/// Compressed sparse row matrix with sorted column indices per row.
struct CsrMatrix {
    int n = 0;
    std::vector<int> row_ptr;
    std::vector<int> cols;
    std::vector<double> vals;

    std::size_t nnz() const { return cols.size(); }

    void multiply(std::span<const double> x, std::span<double> y) const;
    void multiply(std::span<const std::complex<double>> x,
                  std::span<std::complex<double>> y) const;

    /// xᴴ A y (real part is what callers of the quadratic form want).
    std::complex<double> quadratic_form(std::span<const std::complex<double>> x,
                                        std::span<const std::complex<double>> y) const;
};

/// Which nodes carry equations: interior only (Dirichlet elimination) or all
/// nodes (test/support variant, no boundary conditions).
enum class DofSet { interior, all };

/// Diagonal mass matrix from Gauss-Lobatto collocation:
/// M_ii = sum over elements containing node i of w_a w_b jac_det.
std::vector<double> assemble_mass(const Mesh& mesh, DofSet dofs = DofSet::interior);

/// Stiffness K_ij = (grad v_i, grad v_j), assembled exactly. The tensor
/// integrand has degree 2p in the transverse direction, beyond the reach of
/// the (p+1)-point Lobatto rule, so element integrals use a (p+2)-point
/// Gauss-Legendre rule per axis.
CsrMatrix assemble_stiffness(const Mesh& mesh, DofSet dofs = DofSet::interior);

/// Stiffness by the same (p+1)-point Lobatto rule used for M (collocation).
/// Not exact; kept so the exactness question stays a tested property rather
/// than an assumption.
CsrMatrix assemble_stiffness_collocated(const Mesh& mesh, DofSet dofs = DofSet::interior);

/// Nonlinear right-hand side F_i = M_ii |c_i|^2 (componentwise density).
std::vector<double> compute_F(std::span<const double> mass,
                              std::span<const std::complex<double>> c);

/// Diagonal of M^{-1} Phi(d). Under Gauss-Lobatto collocation
/// Phi_ij(d) = d_i M_ii delta_ij, so this is d itself.
std::vector<double> potential_diagonal(std::span<const double> d);

/// Assembled operators for one mesh: diagonal mass and sparse stiffness over
/// the interior DOFs.
struct Operators {
    Mesh mesh;
    std::vector<double> mass;
    CsrMatrix stiffness;

    int n_dofs() const { return static_cast<int>(mass.size()); }
};

Operators build_operators(Mesh mesh);

/// Debug dumps in MatrixMarket coordinate format.
void write_matrix_market(std::ostream& os, const CsrMatrix& a);
void write_matrix_market(std::ostream& os, std::span<const double> diagonal);

}  // namespace splitpde
