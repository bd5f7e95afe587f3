#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hadmean {

/// Axis-aligned rectangle carrying a constant weight value of f.
struct RectRegion {
    double x_lo = 0.0;
    double x_hi = 0.0;
    double y_lo = 0.0;
    double y_hi = 0.0;
    double weight = 0.0;
    std::string label;

    double width() const { return x_hi - x_lo; }
    double height() const { return y_hi - y_lo; }
    double area() const { return width() * height(); }
};

enum class BCKind {
    AllDirichlet,
    DirichletExceptRightEdge,
    DirichletWhereX1AtMost,
};

/// Boundary classification rule. Edges do not exist until meshing, so the
/// rule is evaluated geometrically on boundary nodes by the mesh module.
struct BCRule {
    BCKind kind = BCKind::AllDirichlet;
    std::optional<double> threshold;  // only for DirichletWhereX1AtMost
};

using ParamMap = std::map<std::string, double>;

/// A union of axis-aligned rectangles with piecewise-constant weight,
/// tiling a single bounding rectangle via vertical interfaces.
struct DomainSpec {
    std::vector<RectRegion> regions;
    BCRule bc_rule;
    std::string preset_name;
    ParamMap parameters;

    struct Box {
        double x_lo, x_hi, y_lo, y_hi;
        double width() const { return x_hi - x_lo; }
        double height() const { return y_hi - y_lo; }
    };

    Box bounding_box() const {
        if (regions.empty()) throw std::invalid_argument("DomainSpec: no regions");
        Box b{regions.front().x_lo, regions.front().x_hi,
              regions.front().y_lo, regions.front().y_hi};
        for (const auto& r : regions) {
            b.x_lo = std::min(b.x_lo, r.x_lo);
            b.x_hi = std::max(b.x_hi, r.x_hi);
            b.y_lo = std::min(b.y_lo, r.y_lo);
            b.y_hi = std::max(b.y_hi, r.y_hi);
        }
        return b;
    }

    double area() const {
        double a = 0.0;
        for (const auto& r : regions) a += r.area();
        return a;
    }

    /// Integral of f over the domain.
    double weight_integral() const {
        double s = 0.0;
        for (const auto& r : regions) s += r.weight * r.area();
        return s;
    }

    /// Interior vertical interface abscissae (strictly inside the bounding box).
    std::vector<double> interfaces() const {
        std::vector<double> xs;
        const Box b = bounding_box();
        for (const auto& r : regions) {
            if (r.x_lo > b.x_lo) xs.push_back(r.x_lo);
            if (r.x_hi < b.x_hi) xs.push_back(r.x_hi);
        }
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end(),
                             [](double a, double c) { return std::abs(a - c) < 1e-14; }),
                 xs.end());
        return xs;
    }
};

namespace detail {

inline double require_param(const ParamMap& p, const std::string& key,
                            const std::string& preset) {
    auto it = p.find(key);
    if (it == p.end())
        throw std::invalid_argument("build_preset(" + preset + "): missing parameter '" + key + "'");
    if (!std::isfinite(it->second))
        throw std::invalid_argument("build_preset(" + preset + "): parameter '" + key + "' not finite");
    return it->second;
}

inline std::optional<double> optional_param(const ParamMap& p, const std::string& key) {
    auto it = p.find(key);
    if (it == p.end()) return std::nullopt;
    return it->second;
}

}  // namespace detail

/// Checks that the regions tile a single rectangle with vertical interfaces
/// and pairwise-disjoint interiors. Throws on violation.
inline void check_tiling(const DomainSpec& d) {
    if (d.regions.empty()) throw std::invalid_argument("DomainSpec: no regions");
    auto rs = d.regions;
    std::sort(rs.begin(), rs.end(),
              [](const RectRegion& a, const RectRegion& b) { return a.x_lo < b.x_lo; });
    const double y_lo = rs.front().y_lo, y_hi = rs.front().y_hi;
    for (const auto& r : rs) {
        if (!(r.x_lo < r.x_hi) || !(r.y_lo < r.y_hi))
            throw std::invalid_argument("RectRegion '" + r.label + "': empty or inverted extent");
        if (!std::isfinite(r.weight))
            throw std::invalid_argument("RectRegion '" + r.label + "': weight not finite");
        if (std::abs(r.y_lo - y_lo) > 1e-14 || std::abs(r.y_hi - y_hi) > 1e-14)
            throw std::invalid_argument("DomainSpec: regions do not share the y-extent");
    }
    for (std::size_t i = 0; i + 1 < rs.size(); ++i) {
        if (std::abs(rs[i].x_hi - rs[i + 1].x_lo) > 1e-14)
            throw std::invalid_argument("DomainSpec: gap or overlap between regions '" +
                                        rs[i].label + "' and '" + rs[i + 1].label + "'");
    }
}

/// Mirror image about the line x1 = 0; region order is kept left-to-right.
inline DomainSpec reflect_x(const DomainSpec& d) {
    DomainSpec out = d;
    for (auto& r : out.regions) {
        const double lo = -r.x_hi, hi = -r.x_lo;
        r.x_lo = lo;
        r.x_hi = hi;
    }
    std::sort(out.regions.begin(), out.regions.end(),
              [](const RectRegion& a, const RectRegion& b) { return a.x_lo < b.x_lo; });
    return out;
}

/// Builds one of the named domain configurations.
///
/// canonical: four half-by-one rectangles on (-1,1)x(-1/2,1/2), weights
///            (-c, 0, 0, c), Dirichlet on the whole boundary.
/// half:      (-1,0)x(-1/2,1/2) split at x1 = -1/2 into weights (-M, 0),
///            right edge free.
/// thin:      like half but the zero strip has width delta; accepts k
///            (delta = 1/(2k), default M = 2 + 2/k), a raw delta, or M
///            alone (delta = (M-2)/4).
/// neumann:   (-1, delta)x(-1/2,1/2) with weight c left of x1 = 0 and a
///            zero strip of width delta; Dirichlet where x1 <= 0. For
///            delta = 0 the strip is omitted and only the right edge is free.
inline DomainSpec build_preset(const std::string& name, const ParamMap& params) {
    using detail::optional_param;
    using detail::require_param;

    DomainSpec d;
    d.preset_name = name;
    d.parameters = params;

    if (name == "canonical") {
        const double c = require_param(params, "c", name);
        d.regions = {
            {-1.0, -0.5, -0.5, 0.5, -c, "R_{-2}"},
            {-0.5, 0.0, -0.5, 0.5, 0.0, "R_{-1}"},
            {0.0, 0.5, -0.5, 0.5, 0.0, "R_{1}"},
            {0.5, 1.0, -0.5, 0.5, c, "R_{2}"},
        };
        d.bc_rule = {BCKind::AllDirichlet, std::nullopt};
    } else if (name == "half") {
        const double M = require_param(params, "M", name);
        d.regions = {
            {-1.0, -0.5, -0.5, 0.5, -M, "R_{-2}"},
            {-0.5, 0.0, -0.5, 0.5, 0.0, "R_{-1}"},
        };
        d.bc_rule = {BCKind::DirichletExceptRightEdge, std::nullopt};
    } else if (name == "thin") {
        const auto k = optional_param(params, "k");
        const auto raw_delta = optional_param(params, "delta");
        const auto M_in = optional_param(params, "M");
        double delta, M;
        if (k) {
            if (*k < 1.0 || *k != std::floor(*k))
                throw std::invalid_argument("build_preset(thin): k must be a positive integer");
            delta = 1.0 / (2.0 * *k);
            M = M_in ? *M_in : 2.0 + 2.0 / *k;
        } else if (raw_delta) {
            delta = *raw_delta;
            if (!M_in) throw std::invalid_argument("build_preset(thin): raw delta requires M");
            M = *M_in;
        } else if (M_in) {
            M = *M_in;
            delta = (M - 2.0) / 4.0;
        } else {
            throw std::invalid_argument("build_preset(thin): need k, delta or M");
        }
        if (!(delta > 0.0))
            throw std::invalid_argument("build_preset(thin): delta must be positive");
        d.regions = {
            {-1.0, -0.5, -0.5, 0.5, -M, "R_{-2}"},
            {-0.5, -0.5 + delta, -0.5, 0.5, 0.0, "R^delta"},
        };
        d.bc_rule = {BCKind::DirichletExceptRightEdge, std::nullopt};
        d.parameters["M"] = M;
        d.parameters["delta"] = delta;
    } else if (name == "neumann") {
        const double c = require_param(params, "c", name);
        const double delta = require_param(params, "delta", name);
        if (delta < 0.0)
            throw std::invalid_argument("build_preset(neumann): delta must be >= 0");
        d.regions = {{-1.0, 0.0, -0.5, 0.5, c, "R_-"}};
        if (delta > 0.0) {
            d.regions.push_back({0.0, delta, -0.5, 0.5, 0.0, "R^delta"});
            d.bc_rule = {BCKind::DirichletWhereX1AtMost, 0.0};
        } else {
            // degenerate Neumann boundary: only the vertical edge x1 = 0 is free
            d.bc_rule = {BCKind::DirichletExceptRightEdge, std::nullopt};
        }
    } else {
        throw std::invalid_argument("build_preset: unknown preset '" + name + "'");
    }

    check_tiling(d);
    return d;
}

}  // namespace hadmean
