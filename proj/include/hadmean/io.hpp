#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hadmean/experiments.hpp"
#include "hadmean/mesh.hpp"

namespace hadmean {

/// Six significant digits, scientific; the table format for eigenvalues.
inline std::string fmt_sci(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.5e", x);
    return buf;
}

/// Full-precision decimal form for coordinates and parameters.
inline std::string fmt_full(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace detail {
inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}
}  // namespace detail

// ---------------------------------------------------------------------------
// mesh export

inline void write_nodes_csv(const TriMesh& mesh, const std::string& path) {
    auto out = detail::open_out(path);
    out << "id,x,y\n";
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
        out << i << ',' << fmt_full(mesh.nodes[i].x()) << ',' << fmt_full(mesh.nodes[i].y())
            << '\n';
}

inline void write_triangles_csv(const TriMesh& mesh, const std::string& path) {
    auto out = detail::open_out(path);
    out << "id,n0,n1,n2,region_tag\n";
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tr = mesh.triangles[t];
        out << t << ',' << tr[0] << ',' << tr[1] << ',' << tr[2] << ',' << mesh.region_tag[t]
            << '\n';
    }
}

/// Optional attachments for the VTK writer.
struct VtkFields {
    const std::vector<Eigen::Vector2d>* point_vectors = nullptr;
    std::string point_vectors_name = "phi";
    std::vector<std::pair<std::string, const std::vector<double>*>> cell_scalars;
    bool region_tag = true;
};

/// Legacy ASCII VTK unstructured grid (triangle cells, type 5).
inline void write_vtk(const TriMesh& mesh, const std::string& path,
                      const VtkFields& fields = {}) {
    auto out = detail::open_out(path);
    out << "# vtk DataFile Version 3.0\n";
    out << "hadmean mesh level " << mesh.level << "\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.nodes.size() << " double\n";
    for (const auto& p : mesh.nodes)
        out << fmt_full(p.x()) << ' ' << fmt_full(p.y()) << " 0\n";
    const std::size_t m = mesh.triangles.size();
    out << "CELLS " << m << ' ' << 4 * m << "\n";
    for (const auto& tr : mesh.triangles)
        out << "3 " << tr[0] << ' ' << tr[1] << ' ' << tr[2] << "\n";
    out << "CELL_TYPES " << m << "\n";
    for (std::size_t t = 0; t < m; ++t) out << "5\n";

    const bool any_cell = fields.region_tag || !fields.cell_scalars.empty();
    if (any_cell) {
        out << "CELL_DATA " << m << "\n";
        if (fields.region_tag) {
            out << "SCALARS region_tag int 1\nLOOKUP_TABLE default\n";
            for (int tag : mesh.region_tag) out << tag << "\n";
        }
        for (const auto& [name, data] : fields.cell_scalars) {
            if (data->size() != m)
                throw std::invalid_argument("write_vtk: cell scalar '" + name + "' size mismatch");
            out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
            for (double v : *data) out << fmt_full(v) << "\n";
        }
    }
    if (fields.point_vectors) {
        if (fields.point_vectors->size() != mesh.nodes.size())
            throw std::invalid_argument("write_vtk: point vector size mismatch");
        out << "POINT_DATA " << mesh.nodes.size() << "\n";
        out << "VECTORS " << fields.point_vectors_name << " double\n";
        for (const auto& v : *fields.point_vectors)
            out << fmt_full(v.x()) << ' ' << fmt_full(v.y()) << " 0\n";
    }
}

// ---------------------------------------------------------------------------
// matrix export

/// MatrixMarket coordinate symmetric format (lower triangle, 1-based).
inline void write_matrix_market(const Eigen::SparseMatrix<double>& A, const std::string& path) {
    auto out = detail::open_out(path);
    std::size_t nnz_lower = 0;
    for (int k = 0; k < A.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
            if (it.row() >= it.col()) ++nnz_lower;
    out << "%%MatrixMarket matrix coordinate real symmetric\n";
    out << A.rows() << ' ' << A.cols() << ' ' << nnz_lower << "\n";
    for (int k = 0; k < A.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
            if (it.row() >= it.col())
                out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << fmt_full(it.value()) << "\n";
}

// ---------------------------------------------------------------------------
// experiment tables

inline void write_sweep_csv(const std::vector<LevelSweepRow>& rows, const std::string& path) {
    auto out = detail::open_out(path);
    out << "level,n_triangles,n_nodes,n_free_dofs,lambda_min,pd\n";
    for (const auto& r : rows)
        out << r.level << ',' << r.n_triangles << ',' << r.n_nodes << ',' << r.n_free_dofs << ','
            << fmt_sci(r.lambda_min) << ',' << (r.pd ? "true" : "false") << '\n';
}

inline void write_bisect_csv(const std::vector<BisectionTrace>& traces, const std::string& path) {
    auto out = detail::open_out(path);
    out << "k,delta,M_theory5,M_theory8,M_num\n";
    for (const auto& t : traces)
        out << t.k << ',' << fmt_full(t.delta) << ',' << fmt_full(theory_M_theorem5(t.k)) << ','
            << fmt_full(theory_M_prop8(t.k)) << ',' << fmt_full(t.M_num) << '\n';
}

inline void write_bisect_probes_csv(const std::vector<BisectionTrace>& traces,
                                    const std::string& path) {
    auto out = detail::open_out(path);
    out << "k,probe,M,lambda_min\n";
    for (const auto& t : traces)
        for (std::size_t i = 0; i < t.probes.size(); ++i)
            out << t.k << ',' << i << ',' << fmt_full(t.probes[i].M) << ','
                << fmt_sci(t.probes[i].lambda_min) << '\n';
}

inline void write_layers_csv(const LayerProfile& prof, const std::string& path) {
    auto out = detail::open_out(path);
    out << "layer,x1_lo,x1_hi,energy\n";
    for (int l = 0; l < prof.n_layers; ++l)
        out << l << ',' << fmt_full(prof.edges[l]) << ',' << fmt_full(prof.edges[l + 1]) << ','
            << fmt_sci(prof.energy[l]) << '\n';
}

inline void write_mode_csv(const TriMesh& mesh, const std::vector<Eigen::Vector2d>& mode,
                           const std::string& path) {
    if (mode.size() != mesh.nodes.size())
        throw std::invalid_argument("write_mode_csv: field size mismatch");
    auto out = detail::open_out(path);
    out << "id,x,y,phi1,phi2\n";
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
        out << i << ',' << fmt_full(mesh.nodes[i].x()) << ',' << fmt_full(mesh.nodes[i].y()) << ','
            << fmt_full(mode[i].x()) << ',' << fmt_full(mode[i].y()) << '\n';
}

// ---------------------------------------------------------------------------
// JSON serialization for run manifests

inline nlohmann::json to_json(const BCRule& rule) {
    nlohmann::json j;
    switch (rule.kind) {
        case BCKind::AllDirichlet: j["kind"] = "all_dirichlet"; break;
        case BCKind::DirichletExceptRightEdge: j["kind"] = "dirichlet_except_right_edge"; break;
        case BCKind::DirichletWhereX1AtMost:
            j["kind"] = "dirichlet_on_x1_nonpositive";
            j["threshold"] = rule.threshold.value();
            break;
    }
    return j;
}

inline nlohmann::json to_json(const DomainSpec& dom) {
    nlohmann::json j;
    j["preset"] = dom.preset_name;
    j["bc_rule"] = to_json(dom.bc_rule);
    j["parameters"] = dom.parameters;
    j["regions"] = nlohmann::json::array();
    for (const auto& r : dom.regions) {
        j["regions"].push_back({{"label", r.label},
                                {"x_lo", r.x_lo},
                                {"x_hi", r.x_hi},
                                {"y_lo", r.y_lo},
                                {"y_hi", r.y_hi},
                                {"weight", r.weight}});
    }
    return j;
}

inline nlohmann::json mesh_stats_json(const TriMesh& mesh) {
    return {{"level", mesh.level},
            {"cell_size", mesh.cell_size},
            {"n_nodes", mesh.nodes.size()},
            {"n_triangles", mesh.triangles.size()},
            {"n_dirichlet_nodes", mesh.dirichlet_nodes.size()}};
}

}  // namespace hadmean
