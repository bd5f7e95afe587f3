#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hadmean/geometry.hpp"

namespace hadmean {

/// Structured criss-cross triangulation of a DomainSpec: square cells of
/// side 2^-(level+1), each split into four triangles through its center.
/// Region interfaces coincide with cell edges, so every triangle carries an
/// unambiguous region tag and the piecewise-constant weight is resolved
/// exactly.
struct TriMesh {
    std::vector<Eigen::Vector2d> nodes;          // grid nodes first, then cell centers
    std::vector<std::array<int, 3>> triangles;   // counterclockwise
    std::vector<int> region_tag;                 // per triangle, into domain.regions
    std::vector<int> dirichlet_nodes;            // sorted node indices
    std::vector<std::uint8_t> is_dirichlet;      // per-node mask
    int level = 0;
    double cell_size = 0.0;
    int nx = 0, ny = 0;                          // cells per axis
    DomainSpec domain;                           // snapped geometry used for tagging
    DomainSpec source_domain;                    // as passed in (pre-snap), for refine

    int n_grid_nodes() const { return (nx + 1) * (ny + 1); }
    int grid_node(int i, int j) const { return j * (nx + 1) + i; }
    int center_node(int i, int j) const { return n_grid_nodes() + j * nx + i; }

    double tri_area(int t) const {
        const auto& tr = triangles[t];
        const Eigen::Vector2d e1 = nodes[tr[1]] - nodes[tr[0]];
        const Eigen::Vector2d e2 = nodes[tr[2]] - nodes[tr[0]];
        return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
    }

    Eigen::Vector2d centroid(int t) const {
        const auto& tr = triangles[t];
        return (nodes[tr[0]] + nodes[tr[1]] + nodes[tr[2]]) / 3.0;
    }
};

inline double level_cell_size(int level) {
    if (level < 1) throw std::invalid_argument("level must be >= 1");
    return std::exp2(-(level + 1));
}

/// Snaps the domain onto the grid of the given level. Only the rightmost
/// region boundary (the delta strip of the thin/neumann presets) may move;
/// it is rounded to the nearest positive multiple of the cell size and the
/// snapped value is recorded in parameters["delta"]. Any other off-grid
/// boundary is an error.
inline DomainSpec snap_domain(const DomainSpec& dom, int level) {
    const double h = level_cell_size(level);
    const auto box = dom.bounding_box();

    auto to_index = [&](double x) { return (x - box.x_lo) / h; };
    auto on_grid = [&](double m) { return std::abs(m - std::round(m)) <= 1e-9; };

    if (!on_grid((box.y_hi - box.y_lo) / h))
        throw std::invalid_argument("snap_domain: domain height is not a multiple of the cell size");
    for (const auto& r : dom.regions) {
        if (!on_grid((r.y_lo - box.y_lo) / h) || !on_grid((r.y_hi - box.y_lo) / h))
            throw std::invalid_argument("snap_domain: region '" + r.label +
                                        "' y-extent is not on the grid");
    }

    DomainSpec out = dom;
    double snapped_right = box.x_hi;
    for (auto& r : out.regions) {
        const double m_lo = to_index(r.x_lo);
        if (!on_grid(m_lo))
            throw std::invalid_argument(
                "snap_domain: region '" + r.label + "' left edge x=" + std::to_string(r.x_lo) +
                " is off-grid (nearest " + std::to_string(box.x_lo + std::round(m_lo) * h) + ")");
        r.x_lo = box.x_lo + std::round(m_lo) * h;

        const double m_hi = to_index(r.x_hi);
        if (on_grid(m_hi)) {
            r.x_hi = box.x_lo + std::round(m_hi) * h;
        } else if (std::abs(r.x_hi - box.x_hi) <= 1e-14) {
            // rightmost boundary: snap, keeping at least one cell
            double m = std::round(m_hi);
            if (m <= std::round(m_lo)) m = std::round(m_lo) + 1.0;
            r.x_hi = box.x_lo + m * h;
            snapped_right = r.x_hi;
        } else {
            throw std::invalid_argument(
                "snap_domain: region '" + r.label + "' right edge x=" + std::to_string(r.x_hi) +
                " is off-grid (nearest " + std::to_string(box.x_lo + std::round(m_hi) * h) + ")");
        }
    }

    if (snapped_right != box.x_hi &&
        (out.preset_name == "thin" || out.preset_name == "neumann")) {
        auto it = out.parameters.find("delta");
        const double requested = (it != out.parameters.end()) ? it->second
                                                              : box.x_hi - out.regions.back().x_lo;
        out.parameters["delta_requested"] = requested;
        out.parameters["delta"] = out.regions.back().x_hi - out.regions.back().x_lo;
    }
    return out;
}

/// All boundary-node indices whose position lies on the closure of the
/// Dirichlet part of the boundary under the given rule. Sorted ascending.
inline std::vector<int> classify_boundary(const TriMesh& mesh, const BCRule& rule) {
    const auto box = mesh.domain.bounding_box();
    const double tol = 1e-13;
    std::vector<int> out;
    for (int idx = 0; idx < static_cast<int>(mesh.nodes.size()); ++idx) {
        const auto& p = mesh.nodes[idx];
        const bool on_left = std::abs(p.x() - box.x_lo) <= tol;
        const bool on_right = std::abs(p.x() - box.x_hi) <= tol;
        const bool on_bottom = std::abs(p.y() - box.y_lo) <= tol;
        const bool on_top = std::abs(p.y() - box.y_hi) <= tol;
        if (!(on_left || on_right || on_bottom || on_top)) continue;

        bool constrained = true;
        switch (rule.kind) {
            case BCKind::AllDirichlet:
                break;
            case BCKind::DirichletExceptRightEdge:
                // the open right edge is free; its corners lie on the
                // closure of the Dirichlet part and stay constrained
                if (on_right && !on_bottom && !on_top) constrained = false;
                break;
            case BCKind::DirichletWhereX1AtMost:
                if (!rule.threshold)
                    throw std::invalid_argument("classify_boundary: rule missing threshold");
                constrained = p.x() <= *rule.threshold + tol;
                break;
        }
        if (constrained) out.push_back(idx);
    }
    return out;
}

/// Criss-cross triangulation at the given refinement level.
inline TriMesh triangulate(const DomainSpec& dom_in, int level) {
    const double h = level_cell_size(level);
    TriMesh m;
    m.source_domain = dom_in;
    m.domain = snap_domain(dom_in, level);
    m.level = level;
    m.cell_size = h;

    const auto box = m.domain.bounding_box();
    m.nx = static_cast<int>(std::llround(box.width() / h));
    m.ny = static_cast<int>(std::llround(box.height() / h));

    const int n_grid = (m.nx + 1) * (m.ny + 1);
    m.nodes.resize(n_grid + m.nx * m.ny);
    for (int j = 0; j <= m.ny; ++j)
        for (int i = 0; i <= m.nx; ++i)
            m.nodes[m.grid_node(i, j)] = {box.x_lo + i * h, box.y_lo + j * h};
    for (int j = 0; j < m.ny; ++j)
        for (int i = 0; i < m.nx; ++i)
            m.nodes[m.center_node(i, j)] = {box.x_lo + (i + 0.5) * h, box.y_lo + (j + 0.5) * h};

    // per-cell-column region index (interfaces are vertical and on the grid)
    std::vector<int> col_region(m.nx, -1);
    for (int i = 0; i < m.nx; ++i) {
        const double xc = box.x_lo + (i + 0.5) * h;
        for (std::size_t r = 0; r < m.domain.regions.size(); ++r) {
            const auto& reg = m.domain.regions[r];
            if (xc > reg.x_lo && xc < reg.x_hi) {
                col_region[i] = static_cast<int>(r);
                break;
            }
        }
        if (col_region[i] < 0)
            throw std::invalid_argument("triangulate: cell column " + std::to_string(i) +
                                        " not covered by any region");
    }

    m.triangles.reserve(4 * m.nx * m.ny);
    m.region_tag.reserve(4 * m.nx * m.ny);
    for (int j = 0; j < m.ny; ++j) {
        for (int i = 0; i < m.nx; ++i) {
            const int sw = m.grid_node(i, j), se = m.grid_node(i + 1, j);
            const int ne = m.grid_node(i + 1, j + 1), nw = m.grid_node(i, j + 1);
            const int c = m.center_node(i, j);
            m.triangles.push_back({sw, se, c});
            m.triangles.push_back({se, ne, c});
            m.triangles.push_back({ne, nw, c});
            m.triangles.push_back({nw, sw, c});
            for (int t = 0; t < 4; ++t) m.region_tag.push_back(col_region[i]);
        }
    }

    m.dirichlet_nodes = classify_boundary(m, m.domain.bc_rule);
    m.is_dirichlet.assign(m.nodes.size(), 0);
    for (int idx : m.dirichlet_nodes) m.is_dirichlet[idx] = 1;
    return m;
}

/// Regenerates the mesh at the next level (halved cell size).
inline TriMesh refine(const TriMesh& mesh) {
    return triangulate(mesh.source_domain, mesh.level + 1);
}

/// Evaluates a nodal P1 field at an arbitrary point (clamped into the mesh).
inline Eigen::Vector2d eval_field(const TriMesh& m,
                                  const std::vector<Eigen::Vector2d>& field,
                                  const Eigen::Vector2d& p) {
    const auto box = m.domain.bounding_box();
    const double h = m.cell_size;
    auto clamp = [](int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); };
    const int ci = clamp(static_cast<int>(std::floor((p.x() - box.x_lo) / h)), 0, m.nx - 1);
    const int cj = clamp(static_cast<int>(std::floor((p.y() - box.y_lo) / h)), 0, m.ny - 1);

    const int first_tri = 4 * (cj * m.nx + ci);
    int best_t = first_tri;
    double best_min = -1e300;
    std::array<double, 3> best_w{};
    for (int t = first_tri; t < first_tri + 4; ++t) {
        const auto& tr = m.triangles[t];
        const Eigen::Vector2d a = m.nodes[tr[0]], b = m.nodes[tr[1]], c = m.nodes[tr[2]];
        const double a2 = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
        const double wa = ((b.x() - p.x()) * (c.y() - p.y()) - (b.y() - p.y()) * (c.x() - p.x())) / a2;
        const double wb = ((c.x() - p.x()) * (a.y() - p.y()) - (c.y() - p.y()) * (a.x() - p.x())) / a2;
        const double wc = 1.0 - wa - wb;
        const double mn = std::min({wa, wb, wc});
        if (mn > best_min) {
            best_min = mn;
            best_t = t;
            best_w = {wa, wb, wc};
        }
    }
    const auto& tr = m.triangles[best_t];
    return best_w[0] * field[tr[0]] + best_w[1] * field[tr[1]] + best_w[2] * field[tr[2]];
}

/// Interpolates a coarse nodal field onto the nodes of another mesh.
inline std::vector<Eigen::Vector2d> interpolate_field(const TriMesh& coarse,
                                                      const std::vector<Eigen::Vector2d>& field,
                                                      const TriMesh& fine) {
    if (field.size() != coarse.nodes.size())
        throw std::invalid_argument("interpolate_field: field size mismatch");
    std::vector<Eigen::Vector2d> out(fine.nodes.size());
    for (std::size_t i = 0; i < fine.nodes.size(); ++i)
        out[i] = eval_field(coarse, field, fine.nodes[i]);
    return out;
}

}  // namespace hadmean
