#include "splitpde/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "splitpde/errors.hpp"

namespace splitpde {

Mesh::Mesh(Rect domain, int nx, int ny, int p)
    : domain_(domain), nx_(nx), ny_(ny), basis_(lobatto_rule(p)) {
    if (!(domain.bx > domain.ax) || !(domain.by > domain.ay)) {
        throw ConfigError("build_mesh: degenerate rectangle");
    }
    if (nx < 1 || ny < 1) {
        throw ConfigError("build_mesh: element counts must be >= 1");
    }
    hx_ = (domain.bx - domain.ax) / nx;
    hy_ = (domain.by - domain.ay) / ny;
    nodes_x_ = nx * p + 1;
    nodes_y_ = ny * p + 1;

    interior_index_.assign(static_cast<std::size_t>(nodes_x_) * nodes_y_, -1);
    interior_.reserve(static_cast<std::size_t>(nodes_x_ - 2) * (nodes_y_ - 2));
    for (int iy = 1; iy < nodes_y_ - 1; ++iy) {
        for (int ix = 1; ix < nodes_x_ - 1; ++ix) {
            const int g = iy * nodes_x_ + ix;
            interior_index_[g] = static_cast<int>(interior_.size());
            interior_.push_back(g);
        }
    }
}

int Mesh::global_node(int element, int i, int j) const {
    const int kx = element % nx_;
    const int ky = element / nx_;
    const int ix = kx * basis_.degree + i;
    const int iy = ky * basis_.degree + j;
    return iy * nodes_x_ + ix;
}

std::pair<double, double> Mesh::node_coords(int global) const {
    if (global < 0 || global >= n_nodes()) {
        throw InputError("node_coords: index out of range: " + std::to_string(global));
    }
    const int p = basis_.degree;
    const int ix = global % nodes_x_;
    const int iy = global / nodes_x_;
    // Last node of element k coincides with the first node of element k+1;
    // fold the axis-end node back into the last element.
    const int kx = ix == nx_ * p ? nx_ - 1 : ix / p;
    const int ky = iy == ny_ * p ? ny_ - 1 : iy / p;
    const int lx = ix - kx * p;
    const int ly = iy - ky * p;
    const double x = domain_.ax + hx_ * (kx + 0.5 * (basis_.nodes[lx] + 1.0));
    const double y = domain_.ay + hy_ * (ky + 0.5 * (basis_.nodes[ly] + 1.0));
    return {x, y};
}

std::pair<int, int> Mesh::locate(double x, double y) const {
    int kx = static_cast<int>(std::floor((x - domain_.ax) / hx_));
    int ky = static_cast<int>(std::floor((y - domain_.ay) / hy_));
    kx = std::clamp(kx, 0, nx_ - 1);
    ky = std::clamp(ky, 0, ny_ - 1);
    return {kx, ky};
}

Mesh build_mesh(Rect domain, int nx, int ny, int p) { return Mesh(domain, nx, ny, p); }

std::vector<std::complex<double>> interpolate(
    const Mesh& mesh, const std::function<std::complex<double>(double, double)>& f) {
    std::vector<std::complex<double>> c(mesh.n_interior());
    for (int k = 0; k < mesh.n_interior(); ++k) {
        const auto [x, y] = mesh.node_coords(mesh.interior()[k]);
        const std::complex<double> v = f(x, y);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw InputError("interpolate: non-finite sample at node");
        }
        c[k] = v;
    }
    return c;
}

std::complex<double> fe_eval(const Mesh& mesh, std::span<const std::complex<double>> coeffs,
                             double x, double y) {
    if (static_cast<int>(coeffs.size()) != mesh.n_interior()) {
        throw InputError("fe_eval: coefficient layout mismatch");
    }
    const auto [kx, ky] = mesh.locate(x, y);
    const GLBasis& basis = mesh.basis();
    const int p = basis.degree;
    const double xi = 2.0 * (x - mesh.domain().ax - kx * mesh.hx()) / mesh.hx() - 1.0;
    const double eta = 2.0 * (y - mesh.domain().ay - ky * mesh.hy()) / mesh.hy() - 1.0;

    std::vector<double> lx(p + 1), ly(p + 1);
    for (int i = 0; i <= p; ++i) {
        lx[i] = lagrange_eval(basis, i, xi);
        ly[i] = lagrange_eval(basis, i, eta);
    }

    const int element = ky * mesh.nx() + kx;
    std::complex<double> value = 0.0;
    for (int j = 0; j <= p; ++j) {
        for (int i = 0; i <= p; ++i) {
            const int dof = mesh.interior_index(mesh.global_node(element, i, j));
            if (dof >= 0) value += coeffs[dof] * (lx[i] * ly[j]);
        }
    }
    return value;
}

}  // namespace splitpde
