#pragma once

#include <complex>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "splitpde/quadrature.hpp"

namespace splitpde {

struct Rect {
    double ax = 0.0;
    double bx = 1.0;
    double ay = 0.0;
    double by = 1.0;
};

/// Uniform rectangular tensor-product mesh of degree-p Gauss-Lobatto elements
/// with homogeneous Dirichlet boundary handled by elimination: only nodes off
/// the boundary carry unknowns ("interior DOFs").
///
/// Global node numbering is lexicographic with x fastest. Elements are
/// numbered the same way (x fastest).
class Mesh {
public:
    Mesh(Rect domain, int nx, int ny, int p);

    const Rect& domain() const { return domain_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int degree() const { return basis_.degree; }
    const GLBasis& basis() const { return basis_; }

    double hx() const { return hx_; }
    double hy() const { return hy_; }
    /// Mesh parameter h = max(hx, hy) (axis length, not element diagonal).
    double h() const { return hx_ > hy_ ? hx_ : hy_; }
    /// Element Jacobian determinant (hx/2)(hy/2), uniform across elements.
    double jac_det() const { return 0.25 * hx_ * hy_; }

    int nodes_x() const { return nodes_x_; }
    int nodes_y() const { return nodes_y_; }
    int n_nodes() const { return nodes_x_ * nodes_y_; }
    int n_elements() const { return nx_ * ny_; }
    int n_interior() const { return static_cast<int>(interior_.size()); }

    /// Global index of the local tensor node (i,j) of element k.
    int global_node(int element, int i, int j) const;
    /// Interior DOF index of a global node, or -1 on the boundary.
    int interior_index(int global) const { return interior_index_[global]; }
    /// Ascending list of interior global node indices.
    const std::vector<int>& interior() const { return interior_; }

    std::pair<double, double> node_coords(int global) const;

    /// Element (kx, ky) containing physical point (x, y); points on element
    /// boundaries resolve to the lower-index element.
    std::pair<int, int> locate(double x, double y) const;

private:
    Rect domain_;
    int nx_, ny_;
    GLBasis basis_;
    double hx_, hy_;
    int nodes_x_, nodes_y_;
    std::vector<int> interior_;
    std::vector<int> interior_index_;
};

Mesh build_mesh(Rect domain, int nx, int ny, int p);

/// Nodal interpolation: coefficients over interior DOFs are the point values
/// of f at the interior nodes (boundary values are implicitly zero).
/// Throws InputError on a non-finite sample.
std::vector<std::complex<double>> interpolate(
    const Mesh& mesh, const std::function<std::complex<double>(double, double)>& f);

/// Evaluates the FE function with the given interior coefficients at (x, y) in
/// the closed domain. Boundary nodes contribute zero.
std::complex<double> fe_eval(const Mesh& mesh, std::span<const std::complex<double>> coeffs,
                             double x, double y);

}  // namespace splitpde
