#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "trimer1d/bo.hpp"
#include "trimer1d/stm.hpp"

using namespace trimer1d;

namespace {

const ScanOptions narrow{8, 1e-10, 1};

int count_above_one(const StmKernel& k) {
    int n = 0;
    for (double l : kernel_eigenvalues(k))
        if (l > 1.0) ++n;
    return n;
}

double lambda_max(double eps, const MassParams& m, int parity) {
    return kernel_eigenvalues(build_kernel(eps, m, parity, default_stm_line_grid())).front();
}

StmState narrow_state(double r, int parity, double lo, double hi, const StmLineGrid& g = default_stm_line_grid()) {
    const MassParams m = make_masses(r);
    const ScanResult s = scan_energies(m, parity, g, {lo, hi}, -1, narrow);
    if (s.energies.size() != 1) throw std::runtime_error("expected one state in the window");
    return solve_state(m, parity, g, s.energies[0]);
}

} // namespace

TEST(Green2, NegativeAndElliptic) {
    const MassParams m = make_masses(4.0);
    for (double x : {-2.0, 0.0, 0.3, 1.5})
        for (double y : {-1.0, 0.2, 3.0}) EXPECT_LT(green2(x, y, -1.7, m), 0.0);
    // equal X^2/ax + Y^2/ay on an ellipse
    const double rho = 1.3;
    for (double th : {0.0, 0.4, 1.1, 2.5}) {
        const double x = rho * std::sqrt(m.alpha_x) * std::cos(th), y = rho * std::sqrt(m.alpha_y) * std::sin(th);
        EXPECT_NEAR(green2(x, y, -1.7, m), green2(rho * std::sqrt(m.alpha_x), 0.0, -1.7, m), 1e-15);
    }
}

TEST(Green2, MatchesIndependentComposition) {
    const MassParams m = make_masses(1.0);
    const double arg = std::sqrt(2.0) * std::sqrt(1.0 / 0.75 + 1.0);
    const double ref = -oracle::k0_integral(arg) / (2.0 * M_PI * std::sqrt(0.75));
    EXPECT_NEAR(green2(1.0, 1.0, -2.0, m), ref, 1e-12 * std::abs(ref));
}

TEST(Green2, Errors) {
    const MassParams m = make_masses(1.0);
    try {
        green2(0.0, 0.0, -2.0, m);
        FAIL() << "expected singular-argument";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::singular_argument);
    }
    EXPECT_THROW(green2(1.0, 0.0, 0.0, m), Error);
}

TEST(Kernel, ReflectionSymmetryAndFermionicZero) {
    const MassParams m = make_masses(3.0);
    for (double x : {0.2, 1.0, 2.5})
        for (double xp : {-1.3, 0.4, 3.0})
            for (int s : {1, -1})
                EXPECT_DOUBLE_EQ(stm_kernel_value(-x, -xp, -1.8, m, s), stm_kernel_value(x, xp, -1.8, m, s));
    EXPECT_EQ(stm_kernel_value(0.0, 0.0, -1.8, m, -1), 0.0);
}

TEST(Kernel, FiniteEntriesAndThreshold) {
    const MassParams m = make_masses(1.0);
    const StmKernel k = build_kernel(-2.0, m, 1, default_stm_line_grid());
    EXPECT_TRUE(k.matrix.allFinite());
    for (double eps : {-1.0, -0.5}) {
        try {
            build_kernel(eps, m, 1, default_stm_line_grid());
            FAIL() << "expected threshold-violation";
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::threshold_violation);
        }
    }
}

TEST(Kernel, LargestEigenvalueDecreasesWithDepth) {
    const MassParams m = make_masses(1.0);
    double prev = INFINITY;
    for (double eps : {-1.01, -1.5, -2.0, -3.0, -10.0, -60.0}) {
        const double l = lambda_max(eps, m, 1);
        EXPECT_LT(l, prev) << eps;
        prev = l;
    }
    EXPECT_GT(lambda_max(-2.0, m, 1), 1.0);
    EXPECT_LT(lambda_max(-2.2, m, 1), 1.0);
}

TEST(Scan, FermionicEmptyAtEqualMasses) {
    const MassParams m = make_masses(1.0);
    EXPECT_EQ(count_above_one(build_kernel(-1.0 - 1e-6, m, -1, default_stm_line_grid())), 0);
}

TEST(Scan, CountAtTwentyMatchesBornOppenheimer) {
    const MassParams m = make_masses(20.0);
    const double edge = -1.0 - 1e-6;
    const int bosonic = count_above_one(build_kernel(edge, m, 1, default_stm_line_grid()));
    const int fermionic = count_above_one(build_kernel(edge, m, -1, default_stm_line_grid()));
    EXPECT_EQ(bosonic, 3);
    EXPECT_EQ(fermionic, 3);
    EXPECT_EQ(bosonic + fermionic, count_states(m).numeric);
}

TEST(Scan, GroundStateGridRefinement) {
    const MassParams m = make_masses(1.0);
    const ScanResult a = scan_energies(m, 1, make_stm_line_grid(300, 0.5), {-2.1, -2.07}, -1, narrow);
    const ScanResult b = scan_energies(m, 1, make_stm_line_grid(400, 0.5), {-2.1, -2.07}, -1, narrow);
    ASSERT_EQ(a.energies.size(), 1u);
    ASSERT_EQ(b.energies.size(), 1u);
    EXPECT_LT(std::abs(a.energies[0] - b.energies[0]), 1e-6);
    EXPECT_NEAR(a.energies[0], -2.08773, 2e-5);
}

TEST(Scan, EnergiesSortedAndInsideWindow) {
    const MassParams m = make_masses(20.0);
    const ScanResult s = scan_energies(m, 1, default_stm_line_grid(), {-3.0, -1.2}, -1, narrow);
    ASSERT_EQ(s.energies.size(), 2u);
    EXPECT_LT(s.energies[0], s.energies[1]);
    for (double e : s.energies) {
        EXPECT_GT(e, -3.0);
        EXPECT_LT(e, -1.2);
    }
}

TEST(Scan, StmGroundLiesAboveBornOppenheimer) {
    for (double r : {1.0, 3.0, 8.0, 15.0, 25.0}) {
        const MassParams m = make_masses(r);
        const double e_bo = heavy_solve(m, default_bo_grid(), 1).energies[0];
        EXPECT_EQ(count_above_one(build_kernel(e_bo, m, 1, default_stm_line_grid())), 0) << r;
    }
}

TEST(Reconstruction, SelfConsistentOnTheLine) {
    for (const StmState& st : {narrow_state(1.0, 1, -2.1, -2.07), narrow_state(20.0, -1, -1.7, -1.6)}) {
        EXPECT_NEAR(st.eigenvalue, 1.0, 1e-8);
        const StmRowBuilder rb(st.grid, st.energy, st.masses, st.parity, st.line_parity);
        const double peak = st.line_values.cwiseAbs().maxCoeff();
        for (Index j = 0; j < st.grid.n_points; j += 7) {
            const double x = st.grid.points[j];
            EXPECT_NEAR(stm_evaluate(st, rb, x, 2.0 * x), st.line_values[j], 1e-4 * peak) << x;
        }
    }
}

TEST(Reconstruction, ParityAndGroundStatePositivity) {
    const Grid2D g = make_grid2d(24, 1.0, 24, 1.0);
    for (const StmState& st : {narrow_state(20.0, 1, -2.8, -2.6), narrow_state(20.0, -1, -1.7, -1.6)}) {
        const Vector psi = reconstruct_wavefunction(st, g, false);
        const Vector w = quad_weights_2d(g);
        EXPECT_NEAR((w.array() * psi.array().square()).sum(), 1.0, 1e-12);
        for (Index i = 0; i < g.nx(); ++i)
            for (Index j = 0; j < g.ny(); ++j) {
                EXPECT_NEAR(psi[g.flat(i, g.ny() - 1 - j)], st.parity * psi[g.flat(i, j)], 1e-6);
                EXPECT_NEAR(psi[g.flat(g.nx() - 1 - i, j)], psi[g.flat(i, j)], 1e-6);
                if (st.parity == 1) EXPECT_GT(psi[g.flat(i, j)], 0.0);
            }
        const Vector fast = reconstruct_wavefunction(st, g, true);
        EXPECT_LT((fast - psi).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Rescale, IdentityAndScaling) {
    const StmState st = narrow_state(20.0, -1, -1.7, -1.6);
    const Grid2D g1 = make_grid2d(20, 1.0, 20, 1.0), g2 = make_grid2d(20, 2.0, 20, 2.0);
    const Vector scaled = reconstruct_wavefunction(st, g1);
    const Vector same = rescale_to_physical(st, -0.5, g1);
    EXPECT_LT((same - scaled).cwiseAbs().maxCoeff(), 1e-12);
    // E_g = -0.125 halves sqrt(-2 E_g): the same scaled field on a grid twice as wide
    const Vector wide = rescale_to_physical(st, -0.125, g2);
    const Vector w2 = quad_weights_2d(g2);
    EXPECT_NEAR((w2.array() * wide.array().square()).sum(), 1.0, 1e-8);
    EXPECT_LT((wide - 0.5 * scaled).cwiseAbs().maxCoeff(), 1e-12);
    Index a = 0, b = 0;
    scaled.cwiseAbs().maxCoeff(&a);
    wide.cwiseAbs().maxCoeff(&b);
    const auto y_of = [](const Grid2D& g, Index k) { return g.grid_y.points[k % g.ny()]; };
    EXPECT_NEAR(std::abs(y_of(g2, b)), 2.0 * std::abs(y_of(g1, a)), 1e-12);
    EXPECT_GT(std::abs(y_of(g1, a)), 0.0);
    EXPECT_THROW(rescale_to_physical(st, 0.1, g1), Error);
}
