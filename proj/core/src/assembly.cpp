#include "splitpde/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>

#include "detail_rules.hpp"
#include "splitpde/errors.hpp"

namespace splitpde {

namespace detail {

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double pm1 = 1.0, pk = z;
            for (int k = 2; k <= n; ++k) {
                const double pk1 = ((2 * k - 1) * z * pk - (k - 1) * pm1) / k;
                pm1 = pk;
                pk = pk1;
            }
            dp = n * (z * pk - pm1) / (z * z - 1.0);
            const double dz = pk / dp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if (n % 2 == 1) x[n / 2] = 0.0;
}

}  // namespace detail

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) sum += vals[k] * x[cols[k]];
        y[i] = sum;
    }
}

void CsrMatrix::multiply(std::span<const std::complex<double>> x,
                         std::span<std::complex<double>> y) const {
    for (int i = 0; i < n; ++i) {
        std::complex<double> sum = 0.0;
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) sum += vals[k] * x[cols[k]];
        y[i] = sum;
    }
}

std::complex<double> CsrMatrix::quadratic_form(std::span<const std::complex<double>> x,
                                               std::span<const std::complex<double>> y) const {
    std::complex<double> acc = 0.0;
    for (int i = 0; i < n; ++i) {
        std::complex<double> row = 0.0;
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) row += vals[k] * y[cols[k]];
        acc += std::conj(x[i]) * row;
    }
    return acc;
}

namespace {

// Exact 1D reference matrices of the nodal basis:
//   mass1d(i,j)  = int L_i L_j        (degree 2p)
//   stiff1d(i,j) = int L_i' L_j'      (degree 2p-2)
// evaluated with an exact rule; upper triangle computed, mirrored so the
// blocks are symmetric to the last bit.
struct Ref1d {
    std::vector<double> mass;   // (p+1)^2 row-major
    std::vector<double> stiff;  // (p+1)^2 row-major
};

Ref1d reference_matrices(const GLBasis& basis, bool collocated) {
    const int n = basis.n_nodes();
    const int p = basis.degree;
    Ref1d ref;
    ref.mass.assign(static_cast<std::size_t>(n) * n, 0.0);
    ref.stiff.assign(static_cast<std::size_t>(n) * n, 0.0);

    std::vector<double> qx, qw;
    if (collocated) {
        qx = basis.nodes;
        qw = basis.weights;
    } else {
        detail::gauss_legendre(p + 2, qx, qw);
    }
    const int nq = static_cast<int>(qx.size());

    // Cardinal values and derivatives at the quadrature points. L_j' has
    // degree p-1, hence equals the interpolant of its node values D(:,j).
    std::vector<double> lv(static_cast<std::size_t>(nq) * n);
    std::vector<double> ld(static_cast<std::size_t>(nq) * n);
    for (int q = 0; q < nq; ++q) {
        for (int j = 0; j < n; ++j) lv[static_cast<std::size_t>(q) * n + j] = lagrange_eval(basis, j, qx[q]);
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += basis.d(i, j) * lv[static_cast<std::size_t>(q) * n + i];
            ld[static_cast<std::size_t>(q) * n + j] = s;
        }
    }

    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double m = 0.0, s = 0.0;
            for (int q = 0; q < nq; ++q) {
                m += qw[q] * lv[static_cast<std::size_t>(q) * n + i] * lv[static_cast<std::size_t>(q) * n + j];
                s += qw[q] * ld[static_cast<std::size_t>(q) * n + i] * ld[static_cast<std::size_t>(q) * n + j];
            }
            ref.mass[static_cast<std::size_t>(i) * n + j] = m;
            ref.mass[static_cast<std::size_t>(j) * n + i] = m;
            ref.stiff[static_cast<std::size_t>(i) * n + j] = s;
            ref.stiff[static_cast<std::size_t>(j) * n + i] = s;
        }
    }
    return ref;
}

std::vector<int> dof_map(const Mesh& mesh, DofSet dofs) {
    std::vector<int> map(mesh.n_nodes());
    if (dofs == DofSet::all) {
        for (int g = 0; g < mesh.n_nodes(); ++g) map[g] = g;
    } else {
        for (int g = 0; g < mesh.n_nodes(); ++g) map[g] = mesh.interior_index(g);
    }
    return map;
}

int dof_count(const Mesh& mesh, DofSet dofs) {
    return dofs == DofSet::all ? mesh.n_nodes() : mesh.n_interior();
}

CsrMatrix assemble_stiffness_impl(const Mesh& mesh, DofSet dofs, bool collocated) {
    const GLBasis& basis = mesh.basis();
    const int n1 = basis.n_nodes();
    const int n_dofs = dof_count(mesh, dofs);
    const std::vector<int> map = dof_map(mesh, dofs);
    const Ref1d ref = reference_matrices(basis, collocated);

    const double sx = 4.0 / (mesh.hx() * mesh.hx()) * mesh.jac_det();
    const double sy = 4.0 / (mesh.hy() * mesh.hy()) * mesh.jac_det();

    // Pattern pass: per-row neighbor lists, sorted and deduplicated.
    std::vector<std::vector<int>> pattern(n_dofs);
    std::vector<int> elem_dofs(static_cast<std::size_t>(n1) * n1);
    for (int e = 0; e < mesh.n_elements(); ++e) {
        for (int j = 0; j < n1; ++j)
            for (int i = 0; i < n1; ++i)
                elem_dofs[static_cast<std::size_t>(j) * n1 + i] = map[mesh.global_node(e, i, j)];
        for (int r : elem_dofs) {
            if (r < 0) continue;
            for (int c : elem_dofs) {
                if (c >= 0) pattern[r].push_back(c);
            }
        }
    }
    CsrMatrix k;
    k.n = n_dofs;
    k.row_ptr.assign(n_dofs + 1, 0);
    for (int r = 0; r < n_dofs; ++r) {
        auto& row = pattern[r];
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        k.row_ptr[r + 1] = k.row_ptr[r] + static_cast<int>(row.size());
    }
    k.cols.reserve(k.row_ptr[n_dofs]);
    for (int r = 0; r < n_dofs; ++r) k.cols.insert(k.cols.end(), pattern[r].begin(), pattern[r].end());
    k.vals.assign(k.cols.size(), 0.0);

    // Value pass. Element and local orderings are fixed, so the scatter is
    // deterministic and the global matrix inherits the exact symmetry of the
    // local blocks.
    auto entry = [&k](int r, int c) -> double& {
        const auto begin = k.cols.begin() + k.row_ptr[r];
        const auto end = k.cols.begin() + k.row_ptr[r + 1];
        const auto it = std::lower_bound(begin, end, c);
        return k.vals[static_cast<std::size_t>(it - k.cols.begin())];
    };
    for (int e = 0; e < mesh.n_elements(); ++e) {
        for (int j = 0; j < n1; ++j)
            for (int i = 0; i < n1; ++i)
                elem_dofs[static_cast<std::size_t>(j) * n1 + i] = map[mesh.global_node(e, i, j)];
        for (int j1 = 0; j1 < n1; ++j1) {
            for (int i1 = 0; i1 < n1; ++i1) {
                const int r = elem_dofs[static_cast<std::size_t>(j1) * n1 + i1];
                if (r < 0) continue;
                for (int j2 = 0; j2 < n1; ++j2) {
                    for (int i2 = 0; i2 < n1; ++i2) {
                        const int c = elem_dofs[static_cast<std::size_t>(j2) * n1 + i2];
                        if (c < 0) continue;
                        const double v =
                            sx * ref.stiff[static_cast<std::size_t>(i1) * n1 + i2] *
                                ref.mass[static_cast<std::size_t>(j1) * n1 + j2] +
                            sy * ref.mass[static_cast<std::size_t>(i1) * n1 + i2] *
                                ref.stiff[static_cast<std::size_t>(j1) * n1 + j2];
                        if (v != 0.0) entry(r, c) += v;
                    }
                }
            }
        }
    }
    return k;
}

}  // namespace

std::vector<double> assemble_mass(const Mesh& mesh, DofSet dofs) {
    const GLBasis& basis = mesh.basis();
    const int n1 = basis.n_nodes();
    const std::vector<int> map = dof_map(mesh, dofs);
    std::vector<double> mass(dof_count(mesh, dofs), 0.0);
    const double jac = mesh.jac_det();
    for (int e = 0; e < mesh.n_elements(); ++e) {
        for (int j = 0; j < n1; ++j) {
            for (int i = 0; i < n1; ++i) {
                const int dof = map[mesh.global_node(e, i, j)];
                if (dof >= 0) mass[dof] += basis.weights[i] * basis.weights[j] * jac;
            }
        }
    }
    return mass;
}

CsrMatrix assemble_stiffness(const Mesh& mesh, DofSet dofs) {
    return assemble_stiffness_impl(mesh, dofs, /*collocated=*/false);
}

CsrMatrix assemble_stiffness_collocated(const Mesh& mesh, DofSet dofs) {
    return assemble_stiffness_impl(mesh, dofs, /*collocated=*/true);
}

std::vector<double> compute_F(std::span<const double> mass,
                              std::span<const std::complex<double>> c) {
    if (mass.size() != c.size()) throw InputError("compute_F: layout mismatch");
    std::vector<double> f(mass.size());
    for (std::size_t i = 0; i < mass.size(); ++i) f[i] = mass[i] * std::norm(c[i]);
    return f;
}

std::vector<double> potential_diagonal(std::span<const double> d) {
    return std::vector<double>(d.begin(), d.end());
}

Operators build_operators(Mesh mesh) {
    Operators ops{std::move(mesh), {}, {}};
    ops.mass = assemble_mass(ops.mesh);
    ops.stiffness = assemble_stiffness(ops.mesh);
    return ops;
}

void write_matrix_market(std::ostream& os, const CsrMatrix& a) {
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << a.n << ' ' << a.n << ' ' << a.nnz() << '\n';
    os.precision(17);
    for (int i = 0; i < a.n; ++i) {
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
            os << i + 1 << ' ' << a.cols[k] + 1 << ' ' << a.vals[k] << '\n';
        }
    }
}

void write_matrix_market(std::ostream& os, std::span<const double> diagonal) {
    os << "%%MatrixMarket matrix coordinate real general\n";
    const std::size_t n = diagonal.size();
    os << n << ' ' << n << ' ' << n << '\n';
    os.precision(17);
    for (std::size_t i = 0; i < n; ++i) os << i + 1 << ' ' << i + 1 << ' ' << diagonal[i] << '\n';
}

}  // namespace splitpde
