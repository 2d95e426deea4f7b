#pragma once

#include <vector>

namespace splitpde {

/// Gauss-Lobatto quadrature rule of degree p on [-1,1] together with the
/// nodal Lagrange basis through its points.
///
/// nodes[0] = -1, nodes[p] = +1, strictly increasing, symmetric about 0;
/// weights are positive and sum to 2; the rule integrates polynomials of
/// degree <= 2p-1 exactly. deriv is the (p+1)x(p+1) differentiation matrix
/// D(i,j) = L_j'(nodes[i]) of the cardinal polynomials L_j.
struct GLBasis {
    int degree = 0;
    std::vector<double> nodes;
    std::vector<double> weights;
    std::vector<double> deriv;  // row-major (p+1)x(p+1)

    int n_nodes() const { return degree + 1; }
    double d(int i, int j) const { return deriv[static_cast<std::size_t>(i) * n_nodes() + j]; }
};

/// Builds the Gauss-Lobatto rule of degree p (p+1 nodes). Valid for 1 <= p <= 16.
GLBasis lobatto_rule(int p);

/// Value of the cardinal polynomial L_j through the basis nodes at x in [-1,1].
double lagrange_eval(const GLBasis& basis, int j, double x);

/// Differentiation matrix D(i,j) = L_j'(nodes[i]), row-major. Row sums are zero.
std::vector<double> derivative_matrix(const std::vector<double>& nodes);

}  // namespace splitpde
