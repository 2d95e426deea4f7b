#pragma once

#include <vector>

namespace splitpde::detail {

// Gauss-Legendre rule with n points on [-1,1], exact through degree 2n-1.
// Internal helper shared by stiffness assembly and the error quadratures.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

}  // namespace splitpde::detail
