#pragma once

#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/SparseCore>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hadmean/mesh.hpp"

namespace hadmean {

/// cof([[a,b],[c,d]]) = [[d,-c],[-b,a]]; satisfies G : cof(G) = 2 det(G)
/// and the polarization identity H : cof(G) = G : cof(H).
inline Eigen::Matrix2d cof(const Eigen::Matrix2d& G) {
    Eigen::Matrix2d C;
    C << G(1, 1), -G(1, 0), -G(0, 1), G(0, 0);
    return C;
}

/// Geometry of the scalar P1 basis on one triangle: constant gradients
/// and area. Gradients sum to zero and each one is orthogonal to the
/// opposite edge with magnitude |opposite edge| / (2 area).
struct ElementKernel {
    std::array<Eigen::Vector2d, 3> grads;
    double area = 0.0;
    double weight = 0.0;
};

inline ElementKernel element_gradients(const Eigen::Vector2d& v0,
                                       const Eigen::Vector2d& v1,
                                       const Eigen::Vector2d& v2) {
    const Eigen::Vector2d e1 = v1 - v0, e2 = v2 - v0;
    const double area2 = e1.x() * e2.y() - e1.y() * e2.x();
    if (!(area2 > 0.0))
        throw std::invalid_argument("element_gradients: degenerate or clockwise triangle");
    ElementKernel k;
    k.area = 0.5 * area2;
    const std::array<Eigen::Vector2d, 3> v{v0, v1, v2};
    for (int i = 0; i < 3; ++i) {
        const Eigen::Vector2d d = v[(i + 2) % 3] - v[(i + 1) % 3];
        k.grads[i] = Eigen::Vector2d(-d.y(), d.x()) / area2;
    }
    return k;
}

/// Reduced sparse operators of the discrete quadratic form
///   I(phi_h) = v^T (K1 + 1/2 K2) v =: v^T A v
/// over the free degrees of freedom (interleaved x/y per node, ascending
/// node order, Dirichlet rows/columns eliminated).
struct OperatorSet {
    Eigen::SparseMatrix<double> K1, K2, A;
    std::vector<int> free_index;  // 2*n_nodes entries; -1 when constrained
    std::vector<int> free_dofs;   // reduced index -> 2*node + component
    int n_free = 0;

    int n_nodes() const { return static_cast<int>(free_index.size()) / 2; }
};

namespace detail {

struct Triplet {
    int row, col;
    double val;
};

inline Eigen::SparseMatrix<double> compress(std::vector<Triplet>& trips, int n) {
    // deterministic: sort by (row, col), then sum runs in that order
    std::sort(trips.begin(), trips.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<Eigen::Triplet<double>> unique;
    unique.reserve(trips.size());
    std::size_t i = 0;
    while (i < trips.size()) {
        const int r = trips[i].row, c = trips[i].col;
        double s = 0.0;
        while (i < trips.size() && trips[i].row == r && trips[i].col == c) {
            s += trips[i].val;
            ++i;
        }
        unique.emplace_back(r, c, s);
    }
    Eigen::SparseMatrix<double> M(n, n);
    M.setFromTriplets(unique.begin(), unique.end());
    return M;
}

inline OperatorSet assemble_impl(const TriMesh& mesh, const DomainSpec& domain, bool reduce) {
    const int n_nodes = static_cast<int>(mesh.nodes.size());
    OperatorSet ops;
    ops.free_index.assign(2 * n_nodes, -1);
    for (int node = 0; node < n_nodes; ++node) {
        const bool fixed = reduce && mesh.is_dirichlet[node];
        for (int comp = 0; comp < 2; ++comp) {
            if (!fixed) {
                ops.free_index[2 * node + comp] = ops.n_free++;
                ops.free_dofs.push_back(2 * node + comp);
            }
        }
    }
    if (ops.n_free == 0) throw std::invalid_argument("assemble: empty free-DOF set");

    std::vector<Triplet> t1, t2;
    t1.reserve(18 * mesh.triangles.size());
    t2.reserve(18 * mesh.triangles.size());

    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const int tag = mesh.region_tag[t];
        if (tag < 0 || tag >= static_cast<int>(domain.regions.size()))
            throw std::invalid_argument("assemble: region tag out of range (mesh/domain mismatch)");
        const double w = domain.regions[tag].weight;

        const auto& tr = mesh.triangles[t];
        const ElementKernel k =
            element_gradients(mesh.nodes[tr[0]], mesh.nodes[tr[1]], mesh.nodes[tr[2]]);

        for (int i = 0; i < 3; ++i) {
            const int rx = ops.free_index[2 * tr[i]];
            const int ry = ops.free_index[2 * tr[i] + 1];
            for (int j = 0; j < 3; ++j) {
                const int cx = ops.free_index[2 * tr[j]];
                const int cy = ops.free_index[2 * tr[j] + 1];

                const double k1 = k.area * k.grads[i].dot(k.grads[j]);
                if (rx >= 0 && cx >= 0) t1.push_back({rx, cx, k1});
                if (ry >= 0 && cy >= 0) t1.push_back({ry, cy, k1});

                if (w != 0.0) {
                    // cofactor pairing of rank-one gradients: couples only
                    // opposite components, via the 2D cross product
                    const double cr = k.grads[i].x() * k.grads[j].y() -
                                      k.grads[i].y() * k.grads[j].x();
                    if (rx >= 0 && cy >= 0) t2.push_back({rx, cy, w * k.area * cr});
                    if (ry >= 0 && cx >= 0) t2.push_back({ry, cx, -(w * k.area * cr)});
                }
            }
        }
    }

    ops.K1 = compress(t1, ops.n_free);
    ops.K2 = compress(t2, ops.n_free);
    ops.A = ops.K1 + 0.5 * ops.K2;
    return ops;
}

}  // namespace detail

/// Assembles K1, K2 and A = K1 + 1/2 K2 reduced over free DOFs.
inline OperatorSet assemble(const TriMesh& mesh, const DomainSpec& domain) {
    return detail::assemble_impl(mesh, domain, true);
}

/// Assembles the unreduced operators (all DOFs, no boundary elimination).
inline OperatorSet assemble_unreduced(const TriMesh& mesh, const DomainSpec& domain) {
    return detail::assemble_impl(mesh, domain, false);
}

/// Direct per-triangle quadrature of |grad phi|^2 + f det(grad phi) for a
/// nodal field. Independent of the assembled matrices; for fields vanishing
/// on the Dirichlet nodes it agrees with v^T A v of the reduced system.
inline double functional_value(const TriMesh& mesh, const DomainSpec& domain,
                               const std::vector<Eigen::Vector2d>& field) {
    if (field.size() != mesh.nodes.size())
        throw std::invalid_argument("functional_value: field size mismatch");
    double total = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tr = mesh.triangles[t];
        const ElementKernel k =
            element_gradients(mesh.nodes[tr[0]], mesh.nodes[tr[1]], mesh.nodes[tr[2]]);
        Eigen::Matrix2d G = Eigen::Matrix2d::Zero();
        for (int i = 0; i < 3; ++i) G += field[tr[i]] * k.grads[i].transpose();
        const double f = domain.regions[mesh.region_tag[t]].weight;
        total += k.area * (G.squaredNorm() + f * G.determinant());
    }
    return total;
}

/// Per-triangle gradient of a nodal field.
inline Eigen::Matrix2d field_gradient(const TriMesh& mesh,
                                      const std::vector<Eigen::Vector2d>& field, int t) {
    const auto& tr = mesh.triangles[t];
    const ElementKernel k =
        element_gradients(mesh.nodes[tr[0]], mesh.nodes[tr[1]], mesh.nodes[tr[2]]);
    Eigen::Matrix2d G = Eigen::Matrix2d::Zero();
    for (int i = 0; i < 3; ++i) G += field[tr[i]] * k.grads[i].transpose();
    return G;
}

/// Zero-extends a reduced coefficient vector to a per-node field.
inline std::vector<Eigen::Vector2d> expand_field(const OperatorSet& ops,
                                                 const Eigen::VectorXd& reduced) {
    if (reduced.size() != ops.n_free)
        throw std::invalid_argument("expand_field: size mismatch");
    std::vector<Eigen::Vector2d> field(ops.n_nodes(), Eigen::Vector2d::Zero());
    for (int r = 0; r < ops.n_free; ++r) {
        const int dof = ops.free_dofs[r];
        field[dof / 2][dof % 2] = reduced[r];
    }
    return field;
}

/// Restricts a per-node field to the free DOFs.
inline Eigen::VectorXd restrict_field(const OperatorSet& ops,
                                      const std::vector<Eigen::Vector2d>& field) {
    if (static_cast<int>(field.size()) != ops.n_nodes())
        throw std::invalid_argument("restrict_field: size mismatch");
    Eigen::VectorXd v(ops.n_free);
    for (int r = 0; r < ops.n_free; ++r) {
        const int dof = ops.free_dofs[r];
        v[r] = field[dof / 2][dof % 2];
    }
    return v;
}

inline double matrix_inf_norm(const Eigen::SparseMatrix<double>& M) {
    Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(M.rows());
    for (int k = 0; k < M.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(M, k); it; ++it)
            row_sums[it.row()] += std::abs(it.value());
    return M.rows() == 0 ? 0.0 : row_sums.maxCoeff();
}

inline double max_abs_entry(const Eigen::SparseMatrix<double>& M) {
    double m = 0.0;
    for (int k = 0; k < M.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(M, k); it; ++it)
            m = std::max(m, std::abs(it.value()));
    return m;
}

}  // namespace hadmean
