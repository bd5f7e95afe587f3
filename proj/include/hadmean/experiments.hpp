#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hadmean/assembly.hpp"
#include "hadmean/mesh.hpp"
#include "hadmean/spectral.hpp"

namespace hadmean {

// ---------------------------------------------------------------------------
// closed-form theory values

/// Certified coefficient for insulation width delta = 1/(2k): M = 2 + 2/k.
inline double theory_M_theorem5(int k) {
    if (k < 1) throw std::invalid_argument("theory_M_theorem5: k must be >= 1");
    return 2.0 + 2.0 / k;
}

/// M_k = 1 - 1/k + sqrt(1/k^2 + 6/k + 1); the root of
/// 1 - 4/M + k(M - 2)/2 = 0 above 2. Asymptotically 2 + 2/k - 1/(2k^2).
inline double theory_M_prop8(int k) {
    if (k < 1) throw std::invalid_argument("theory_M_prop8: k must be >= 1");
    const double kk = static_cast<double>(k);
    return 1.0 - 1.0 / kk + std::sqrt(1.0 / (kk * kk) + 6.0 / kk + 1.0);
}

// ---------------------------------------------------------------------------
// insulation level sweep

struct LevelSweepRow {
    int level = 0;
    long n_triangles = 0;
    long n_nodes = 0;
    long n_free_dofs = 0;
    double lambda_min = 0.0;
    bool pd = false;
    bool converged = false;
};

/// Assembles the canonical insulation problem at levels 1..max_level and
/// records the minimal eigenvalue and the Cholesky positivity flag.
inline std::vector<LevelSweepRow> run_insulation_sweep(double c, int max_level,
                                                       const MinEigOptions& eig_opt = {}) {
    if (max_level < 1) throw std::invalid_argument("run_insulation_sweep: max_level must be >= 1");
    const DomainSpec dom = build_preset("canonical", {{"c", c}});
    std::vector<LevelSweepRow> rows;
    for (int level = 1; level <= max_level; ++level) {
        const TriMesh mesh = triangulate(dom, level);
        const OperatorSet ops = assemble(mesh, dom);
        const EigenResult eig = min_eig(ops.A, eig_opt);
        LevelSweepRow row;
        row.level = level;
        row.n_triangles = static_cast<long>(mesh.triangles.size());
        row.n_nodes = static_cast<long>(mesh.nodes.size());
        row.n_free_dofs = ops.n_free;
        row.lambda_min = eig.lambda_min;
        row.pd = is_positive_definite(ops.A);
        row.converged = eig.converged;
        rows.push_back(row);
    }
    return rows;
}

/// Interpolates the minimal eigenvector of a level with negative lambda_min
/// onto the next level and re-evaluates the functional by direct quadrature.
/// True iff the fine value stays negative and within 5% of the coarse one,
/// certifying that the discrete negativity is not a mesh artifact.
inline bool refinement_persistence_check(double c, int level,
                                         const MinEigOptions& eig_opt = {}) {
    const DomainSpec dom = build_preset("canonical", {{"c", c}});
    const TriMesh mesh = triangulate(dom, level);
    const OperatorSet ops = assemble(mesh, dom);
    const EigenResult eig = min_eig(ops.A, eig_opt);
    if (!(eig.lambda_min < -sign_guard(ops.A)))
        throw std::invalid_argument(
            "refinement_persistence_check: lambda_min is not negative at this level");

    const std::vector<Eigen::Vector2d> field = expand_field(ops, eig.eigvec);
    const double coarse = functional_value(mesh, dom, field);
    const TriMesh fine = refine(mesh);
    const std::vector<Eigen::Vector2d> fine_field = interpolate_field(mesh, field, fine);
    const double fine_value = functional_value(fine, dom, fine_field);
    return fine_value < 0.0 && std::abs(fine_value - coarse) <= 0.05 * std::abs(coarse);
}

// ---------------------------------------------------------------------------
// critical-coefficient bisection on the thin preset

struct BisectionTrace {
    struct Probe {
        double M = 0.0;
        double lambda_min = 0.0;
        bool negative = false;
    };
    int k = 0;
    double delta = 0.0;  // snapped
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    std::vector<Probe> probes;
    double M_num = 0.0;
    int level = 0;
    bool monotone = true;
};

/// Abort signal that keeps the probe trace for inspection.
struct BisectionError : std::runtime_error {
    BisectionError(const std::string& what, BisectionTrace t)
        : std::runtime_error(what), trace(std::move(t)) {}
    BisectionTrace trace;
};

/// Finds the smallest coefficient M at which the thin-preset operator loses
/// positivity; A(M) = K1 + M * (1/2 K2_unit) is re-formed from one assembly.
/// M_num is the certified-negative bracket end.
inline BisectionTrace bisect_critical_M(int k, int level, double tol_M = 1e-3,
                                        const MinEigOptions& eig_opt = {}) {
    if (k < 1) throw std::invalid_argument("bisect_critical_M: k must be >= 1");
    if (!(tol_M > 0.0)) throw std::invalid_argument("bisect_critical_M: tol_M must be positive");

    // unit-coefficient assembly: weight -1 on R_{-2}, so K2(M) = M * K2_unit
    const DomainSpec dom = build_preset("thin", {{"k", static_cast<double>(k)}, {"M", 1.0}});
    const TriMesh mesh = triangulate(dom, level);
    const OperatorSet ops = assemble(mesh, dom);

    BisectionTrace trace;
    trace.k = k;
    trace.level = level;
    trace.delta = mesh.domain.parameters.at("delta");

    auto probe = [&](double M) {
        const Eigen::SparseMatrix<double> A_M = ops.K1 + (M / 2.0) * ops.K2;
        const EigenResult eig = min_eig(A_M, eig_opt);
        if (!eig.converged)
            throw std::runtime_error("bisect_critical_M: eigensolver did not converge at M=" +
                                     std::to_string(M));
        const bool negative = eig.lambda_min < -sign_guard(A_M);
        trace.probes.push_back({M, eig.lambda_min, negative});
        return negative;
    };

    double lo = 2.0, hi = 5.0;
    if (probe(lo))
        throw BisectionError("bisect_critical_M: lambda_min already negative at M=2", trace);
    while (!probe(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > 160.0)
            throw BisectionError("bisect_critical_M: no sign change up to M=160", trace);
    }

    while (hi - lo > tol_M) {
        const double mid = 0.5 * (lo + hi);
        if (probe(mid))
            hi = mid;
        else
            lo = mid;
    }
    trace.bracket_lo = lo;
    trace.bracket_hi = hi;
    trace.M_num = hi;

    // sanity: a single sign change among the visited points
    double max_nonneg = -1e300, min_neg = 1e300;
    for (const auto& p : trace.probes) {
        if (p.negative)
            min_neg = std::min(min_neg, p.M);
        else
            max_nonneg = std::max(max_nonneg, p.M);
    }
    trace.monotone = max_nonneg < min_neg;
    if (!trace.monotone)
        throw BisectionError(
            "bisect_critical_M: non-monotone probe pattern (k=" + std::to_string(k) + ")", trace);
    return trace;
}

// ---------------------------------------------------------------------------
// mixed boundary conditions

struct LayerProfile {
    int n_layers = 0;
    std::vector<double> edges;   // n_layers + 1 breakpoints in x1
    std::vector<double> energy;  // per-layer share of the gradient energy, sums to 1
};

/// Distribution of the gradient energy |grad phi|^2 across equal-width
/// x1-layers spanning the domain extent, normalized to total 1.
inline LayerProfile layer_profile(const TriMesh& mesh,
                                  const std::vector<Eigen::Vector2d>& field, int n_layers) {
    if (n_layers < 1) throw std::invalid_argument("layer_profile: n_layers must be >= 1");
    const auto box = mesh.domain.bounding_box();
    LayerProfile prof;
    prof.n_layers = n_layers;
    prof.edges.resize(n_layers + 1);
    const double w = box.width() / n_layers;
    for (int l = 0; l <= n_layers; ++l) prof.edges[l] = box.x_lo + l * w;
    prof.energy.assign(n_layers, 0.0);

    double total = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const Eigen::Matrix2d G = field_gradient(mesh, field, t);
        const double e = mesh.tri_area(t) * G.squaredNorm();
        int l = static_cast<int>(std::floor((mesh.centroid(t).x() - box.x_lo) / w));
        l = std::clamp(l, 0, n_layers - 1);
        prof.energy[l] += e;
        total += e;
    }
    if (!(total > 0.0)) throw std::invalid_argument("layer_profile: field has no gradient energy");
    for (double& e : prof.energy) e /= total;
    return prof;
}

struct NeumannResult {
    TriMesh mesh;
    EigenResult eig;
    std::vector<Eigen::Vector2d> mode;  // eigenvector as a nodal field
    std::vector<double> det_field;      // det(grad phi_min) per triangle
    std::vector<double> grad_sq_field;  // |grad phi_min|^2 per triangle
    LayerProfile layers;
};

/// Minimal eigenmode of the mixed Dirichlet/Neumann configuration, with the
/// per-element determinant field and the x1-layer energy distribution.
inline NeumannResult run_neumann(double c, double delta, int level, int n_layers,
                                 const MinEigOptions& eig_opt = {}) {
    const DomainSpec dom = build_preset("neumann", {{"c", c}, {"delta", delta}});
    NeumannResult res;
    res.mesh = triangulate(dom, level);
    const OperatorSet ops = assemble(res.mesh, dom);
    res.eig = min_eig(ops.A, eig_opt);
    res.mode = expand_field(ops, res.eig.eigvec);
    res.det_field.resize(res.mesh.triangles.size());
    res.grad_sq_field.resize(res.mesh.triangles.size());
    for (std::size_t t = 0; t < res.mesh.triangles.size(); ++t) {
        const Eigen::Matrix2d G = field_gradient(res.mesh, res.mode, t);
        res.det_field[t] = G.determinant();
        res.grad_sq_field[t] = G.squaredNorm();
    }
    res.layers = layer_profile(res.mesh, res.mode, n_layers);
    return res;
}

// ---------------------------------------------------------------------------
// half-domain checks

/// Mean coercivity of the half-domain functional: A(M) - ((4-M)/4) K1 must
/// be positive semidefinite for 0 <= M < 4.
inline bool mean_coercivity_check(double M, int level, const MinEigOptions& eig_opt = {}) {
    if (!(M >= 0.0 && M < 4.0))
        throw std::invalid_argument("mean_coercivity_check: M must be in [0, 4)");
    const DomainSpec dom = build_preset("half", {{"M", M}});
    const TriMesh mesh = triangulate(dom, level);
    const OperatorSet ops = assemble(mesh, dom);
    const Eigen::SparseMatrix<double> pencil = ops.A - ((4.0 - M) / 4.0) * ops.K1;
    const double guard = sign_guard(pencil);
    if (pencil.nonZeros() == 0 || matrix_inf_norm(pencil) == 0.0) return true;  // M = 0
    const EigenResult eig = min_eig(pencil, eig_opt);
    return eig.lambda_min >= -guard;
}

/// Relative difference of the minimal eigenvalues at +c and -c on the
/// canonical preset; reflection symmetry makes them equal.
inline double symmetry_check(double c, int level, const MinEigOptions& eig_opt = {}) {
    const DomainSpec dp = build_preset("canonical", {{"c", c}});
    const DomainSpec dm = build_preset("canonical", {{"c", -c}});
    const TriMesh mp = triangulate(dp, level);
    const TriMesh mm = triangulate(dm, level);
    const double lp = min_eig(assemble(mp, dp).A, eig_opt).lambda_min;
    const double lm = min_eig(assemble(mm, dm).A, eig_opt).lambda_min;
    return std::abs(lp - lm) / std::max(1.0, std::abs(lp));
}

}  // namespace hadmean
