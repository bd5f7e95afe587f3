#include <gtest/gtest.h>

#include <cmath>

#include "hadmean/experiments.hpp"

using namespace hadmean;

TEST(TheoryValues, Theorem5) {
    EXPECT_DOUBLE_EQ(theory_M_theorem5(1), 4.0);
    EXPECT_DOUBLE_EQ(theory_M_theorem5(2), 3.0);
    EXPECT_DOUBLE_EQ(theory_M_theorem5(10), 2.2);
    EXPECT_THROW(theory_M_theorem5(0), std::invalid_argument);
}

TEST(TheoryValues, Prop8ClosedForm) {
    // k = 1: the identity 1 - 4/M + (M-2)/2 = 0 reduces to M^2 = 8
    EXPECT_NEAR(theory_M_prop8(1), 2.0 * std::sqrt(2.0), 1e-14);
    EXPECT_THROW(theory_M_prop8(0), std::invalid_argument);
}

TEST(TheoryValues, Prop8RootIdentity) {
    for (int k = 1; k <= 1000; ++k) {
        const double M = theory_M_prop8(k);
        const double residual = 1.0 - 4.0 / M + k * (M - 2.0) / 2.0;
        EXPECT_LE(std::abs(residual), 1e-12) << "k=" << k;
    }
}

TEST(TheoryValues, Prop8Asymptotics) {
    const double k = 1e6;
    const double M = theory_M_prop8(static_cast<int>(k));
    const double expansion = 2.0 + 2.0 / k - 1.0 / (2.0 * k * k);
    EXPECT_NEAR(M, expansion, 1e-5);
    // the expansion also dominates from below Theorem 5's value
    EXPECT_LT(M, theory_M_theorem5(static_cast<int>(k)));
}

TEST(InsulationSweep, ZeroCoefficientIsPurelyElliptic) {
    const auto rows = run_insulation_sweep(0.0, 1);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_GT(rows[0].lambda_min, 0.0);
    EXPECT_TRUE(rows[0].pd);
    EXPECT_TRUE(rows[0].converged);
}

TEST(InsulationSweep, SharpCoefficientPositiveAndDecreasing) {
    const auto rows = run_insulation_sweep(4.0, 3);
    ASSERT_EQ(rows.size(), 3u);
    for (const auto& r : rows) {
        EXPECT_GT(r.lambda_min, 0.0) << "level " << r.level;
        EXPECT_TRUE(r.pd);
    }
    EXPECT_LT(rows[1].lambda_min, rows[0].lambda_min);
    EXPECT_LT(rows[2].lambda_min, rows[1].lambda_min);
    // counts consistent with the mesh invariants
    EXPECT_EQ(rows[1].n_triangles, 4 * rows[0].n_triangles);
    EXPECT_EQ(rows[2].n_triangles, 4 * rows[1].n_triangles);
}

TEST(InsulationSweep, BadLevelThrows) {
    EXPECT_THROW(run_insulation_sweep(4.0, 0), std::invalid_argument);
}

TEST(InsulationSweep, NonnegativeForAllCoefficientsUpToFour) {
    // discrete corollary of the continuum nonnegativity for |c| <= 4
    for (double c : {-4.0, -2.0, 1.5, 2.0, 3.5}) {
        const DomainSpec dom = build_preset("canonical", {{"c", c}});
        for (int level = 1; level <= 2; ++level) {
            const auto ops = assemble(triangulate(dom, level), dom);
            const auto eig = min_eig(ops.A);
            EXPECT_GE(eig.lambda_min, -sign_guard(ops.A)) << "c=" << c << " level=" << level;
        }
    }
}

TEST(Persistence, RequiresNegativeLevel) {
    // c = 4 keeps lambda_min positive, so the precondition fails
    EXPECT_THROW(refinement_persistence_check(4.0, 2), std::invalid_argument);
}

TEST(Persistence, NegativeModeSurvivesRefinement) {
    // far past the sharp bound the negative mode appears on coarse meshes
    ASSERT_LT(run_insulation_sweep(5.0, 3).back().lambda_min, 0.0);
    EXPECT_TRUE(refinement_persistence_check(5.0, 3));
}

TEST(Bisection, KOneRecoversSharpBound) {
    const BisectionTrace t = bisect_critical_M(1, 3, 1e-3);
    EXPECT_EQ(t.k, 1);
    EXPECT_DOUBLE_EQ(t.delta, 0.5);
    EXPECT_TRUE(t.monotone);
    EXPECT_LE(t.bracket_hi - t.bracket_lo, 1e-3);
    EXPECT_EQ(t.M_num, t.bracket_hi);
    // discrete subspace keeps the continuum bound: never below theory
    EXPECT_GE(t.M_num, theory_M_theorem5(1) - 1e-3);
    // and on a fine-enough mesh it lands close above 4
    EXPECT_LT(t.M_num, 4.5);

    // probes: nonnegative side below M_num, negative side above
    for (const auto& p : t.probes) {
        if (p.negative)
            EXPECT_GE(p.M, t.bracket_hi - 1e-12);
        else
            EXPECT_LE(p.M, t.bracket_lo + 1e-12);
    }
}

TEST(Bisection, DeterministicProbes) {
    const BisectionTrace a = bisect_critical_M(2, 2, 1e-2);
    const BisectionTrace b = bisect_critical_M(2, 2, 1e-2);
    ASSERT_EQ(a.probes.size(), b.probes.size());
    for (std::size_t i = 0; i < a.probes.size(); ++i) {
        EXPECT_EQ(a.probes[i].M, b.probes[i].M);
        EXPECT_EQ(a.probes[i].lambda_min, b.probes[i].lambda_min);
    }
}

TEST(Bisection, InvalidArguments) {
    EXPECT_THROW(bisect_critical_M(0, 2), std::invalid_argument);
    EXPECT_THROW(bisect_critical_M(1, 2, 0.0), std::invalid_argument);
}

TEST(MeanCoercivity, HalfPresetPencil) {
    EXPECT_TRUE(mean_coercivity_check(0.0, 2));
    EXPECT_TRUE(mean_coercivity_check(2.0, 2));
    EXPECT_TRUE(mean_coercivity_check(3.9, 2));
    EXPECT_THROW(mean_coercivity_check(4.0, 2), std::invalid_argument);
    EXPECT_THROW(mean_coercivity_check(-0.1, 2), std::invalid_argument);
}

TEST(Symmetry, ReflectionLeavesSpectrumUnchanged) {
    EXPECT_EQ(symmetry_check(0.0, 2), 0.0);
    EXPECT_LE(symmetry_check(3.0, 2), 1e-10);
    EXPECT_LE(symmetry_check(4.0, 2), 1e-10);
}

TEST(LayerProfile, UniformGradientMatchesLayerAreas) {
    const DomainSpec dom = build_preset("neumann", {{"c", -4.0}, {"delta", 1.0}});
    const TriMesh mesh = triangulate(dom, 2);
    // manufactured affine field: |grad|^2 constant, so the profile is
    // proportional to layer areas (equal widths -> equal shares)
    Eigen::Matrix2d B;
    B << 1.0, 0.5, -0.25, 2.0;
    std::vector<Eigen::Vector2d> field(mesh.nodes.size());
    for (std::size_t i = 0; i < field.size(); ++i) field[i] = B * mesh.nodes[i];
    const LayerProfile prof = layer_profile(mesh, field, 8);
    double sum = 0.0;
    for (double e : prof.energy) {
        EXPECT_NEAR(e, 1.0 / 8.0, 1e-12);
        sum += e;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(prof.edges.front(), -1.0);
    EXPECT_DOUBLE_EQ(prof.edges.back(), 1.0);
}

TEST(LayerProfile, SingleLayerTakesAllEnergy) {
    const DomainSpec dom = build_preset("neumann", {{"c", -4.0}, {"delta", 0.0}});
    const TriMesh mesh = triangulate(dom, 1);
    std::vector<Eigen::Vector2d> field(mesh.nodes.size());
    for (std::size_t i = 0; i < field.size(); ++i)
        field[i] = Eigen::Vector2d(mesh.nodes[i].y(), 0.0);
    const LayerProfile prof = layer_profile(mesh, field, 1);
    ASSERT_EQ(prof.energy.size(), 1u);
    EXPECT_NEAR(prof.energy[0], 1.0, 1e-12);
}

TEST(LayerProfile, RejectsZeroField) {
    const DomainSpec dom = build_preset("neumann", {{"c", -4.0}, {"delta", 1.0}});
    const TriMesh mesh = triangulate(dom, 1);
    const std::vector<Eigen::Vector2d> zero(mesh.nodes.size(), Eigen::Vector2d::Zero());
    EXPECT_THROW(layer_profile(mesh, zero, 4), std::invalid_argument);
}

TEST(RunNeumann, InterfaceConcentration) {
    // coarse version of the layer-concentration experiment
    const NeumannResult res = run_neumann(-4.0, 1.0, 3, 16);
    EXPECT_TRUE(res.eig.converged);
    double sum = 0.0;
    int peak = 0;
    for (int l = 0; l < res.layers.n_layers; ++l) {
        sum += res.layers.energy[l];
        if (res.layers.energy[l] > res.layers.energy[peak]) peak = l;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    // peak near the interface x1 = 0 (layer centers at -1 + (l+1/2)/8)
    const double center = -1.0 + (peak + 0.5) * 2.0 / 16.0;
    EXPECT_LE(std::abs(center), 2.5 * 2.0 / 16.0);
    EXPECT_EQ(res.det_field.size(), res.mesh.triangles.size());
}
