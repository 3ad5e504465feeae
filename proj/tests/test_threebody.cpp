#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "trimer1d/stm.hpp"
#include "trimer1d/threebody.hpp"
#include "trimer1d/twobody.hpp"

using namespace trimer1d;

namespace {

const double eg = -1e-2;

double depth_at(const PotentialShape& shape, double e) {
    return depth_for_energy(shape, e, default_two_body_grid(e)).depth;
}

ThreeBodyProblem problem(double r, double depth, const Grid2D& g, int px = 1, int py = 1) {
    return ThreeBodyProblem{make_masses(r), gaussian_shape(), depth, g, px, py, eg};
}

Matrix dense_symmetric(const ThreeBodyOperator& op) {
    Matrix h(op.size(), op.size());
    Vector e = Vector::Zero(op.size());
    for (Index c = 0; c < op.size(); ++c) {
        e.setZero();
        e[c] = 1.0;
        h.col(c) = op.apply_symmetric(e);
    }
    return h;
}

} // namespace

TEST(Assemble, FreeOperatorIsNonNegative) {
    const Grid2D g = make_grid2d(64, 2.0, 64, 2.0);
    for (int px : {1, -1})
        for (int py : {1, -1}) {
            const ThreeBodyOperator op = assemble(problem(5.0, 0.0, g, px, py));
            const Matrix h = dense_symmetric(op);
            EXPECT_LT((h - h.transpose()).cwiseAbs().maxCoeff(), 1e-10 * h.cwiseAbs().maxCoeff());
            Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
            EXPECT_GE(es.eigenvalues()[0], -1e-8) << px << " " << py;
        }
}

TEST(Assemble, CollocationFormIsSymmetricInQuadratureInnerProduct) {
    const Grid2D g = make_grid2d(48, 3.0, 32, 4.0);
    std::mt19937 rng(7);
    std::normal_distribution<double> nd;
    for (int px : {1, -1})
        for (int py : {1, -1}) {
            const ThreeBodyOperator op = assemble(problem(20.0, -0.3, g, px, py));
            const Vector w = op.weights();
            Vector u(op.size()), v(op.size());
            for (Index k = 0; k < op.size(); ++k) {
                u[k] = nd(rng);
                v[k] = nd(rng);
            }
            const double a = (w.array() * u.array() * op.apply(v).array()).sum();
            const double b = (w.array() * op.apply(u).array() * v.array()).sum();
            EXPECT_NEAR(a, b, 1e-8 * std::max(std::abs(a), 1.0)) << px << " " << py;
            const Vector s = op.to_symmetric(v);
            const Vector hs = op.apply_symmetric(s);
            EXPECT_LT((op.to_symmetric(op.apply(v)) - hs).norm(), 1e-8 * hs.norm());
        }
}

TEST(Assemble, StripPotentialCommutesWithReflections) {
    const Grid2D g = make_grid2d(40, 2.0, 30, 3.0);
    const auto [fp, fm] = potential_diag_2d(g, gaussian_shape());
    const Vector f = fp + fm;
    for (Index i = 0; i < g.nx(); ++i)
        for (Index j = 0; j < g.ny(); ++j) {
            const Index jm = g.ny() - 1 - j, im = g.nx() - 1 - i;
            EXPECT_NEAR(fp[g.flat(i, jm)], fm[g.flat(i, j)], 1e-15);
            EXPECT_NEAR(f[g.flat(i, jm)], f[g.flat(i, j)], 1e-15);
            EXPECT_NEAR(f[g.flat(im, j)], f[g.flat(i, j)], 1e-15);
        }
}

TEST(Assemble, Errors) {
    const Grid2D g = make_grid2d(16, 2.0, 16, 2.0);
    ThreeBodyProblem p = problem(1.0, -1.0, g);
    p.shape = contact_shape();
    try {
        assemble(p);
        FAIL() << "expected contact-not-representable";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::contact_not_representable);
    }
    EXPECT_THROW(assemble(problem(1.0, 0.5, g)), Error);
    EXPECT_THROW(assemble(problem(1.0, -1.0, g, 2, 1)), Error);
    const ThreeBodyOperator op = assemble(problem(1.0, -1.0, g));
    EXPECT_THROW(op.apply(Vector::Zero(3)), Error);
}

TEST(SolveLowest, GroundAndFirstExcitedParitiesAtTwenty) {
    const double v0 = depth_at(gaussian_shape(), eg);
    const Grid2D g = default_three_body_grid(eg, 128, 64);
    std::vector<std::tuple<double, int, int, Vector>> states;
    for (int px : {1, -1})
        for (int py : {1, -1}) {
            const ThreeBodySpectrum s = solve_lowest(problem(20.0, v0, g, px, py), 2, 1e-8);
            ASSERT_TRUE(s.converged) << px << " " << py;
            for (std::size_t k = 0; k < s.energies.size(); ++k) {
                states.emplace_back(s.energies[k], px, py, s.wavefunctions[k]);
                EXPECT_LE(s.residuals[k], 1e-8);
            }
        }
    std::sort(states.begin(), states.end(), [](const auto& a, const auto& b) { return std::get<0>(a) < std::get<0>(b); });
    EXPECT_EQ(std::get<1>(states[0]), 1);
    EXPECT_EQ(std::get<2>(states[0]), 1);
    EXPECT_EQ(std::get<1>(states[1]), 1);
    EXPECT_EQ(std::get<2>(states[1]), -1);
    EXPECT_EQ(classify_parity(std::get<3>(states[0]), g), std::make_pair(1, 1));
    EXPECT_EQ(classify_parity(std::get<3>(states[1]), g), std::make_pair(1, -1));
    // sector disjointness
    for (std::size_t a = 0; a < states.size(); ++a)
        for (std::size_t b = a + 1; b < states.size(); ++b)
            if (std::get<1>(states[a]) != std::get<1>(states[b]) || std::get<2>(states[a]) != std::get<2>(states[b]))
                EXPECT_GT(std::abs(std::get<0>(states[a]) - std::get<0>(states[b])), 1e-8);
}

TEST(SolveLowest, SectorRefinementStability) {
    const double v0 = depth_at(gaussian_shape(), eg);
    const ThreeBodySpectrum a = solve_lowest(problem(20.0, v0, default_three_body_grid(eg, 256, 128)), 1, 1e-10);
    const ThreeBodySpectrum b = solve_lowest(problem(20.0, v0, default_three_body_grid(eg, 384, 192)), 1, 1e-10);
    ASSERT_TRUE(a.converged && b.converged);
    EXPECT_NEAR(a.energies[0], b.energies[0], 1e-4 * std::abs(b.energies[0]));
}

TEST(SolveLowest, SelfConvergenceIsMonotone) {
    // square sector grids 64^2, 96^2, 128^2; L_y <= L_x keeps the far strips resolved
    const double v0 = depth_at(gaussian_shape(), eg);
    const double l = decay_length(eg);
    std::vector<double> e;
    for (Index n : {128, 192, 256}) {
        const ThreeBodySpectrum s = solve_lowest(problem(20.0, v0, make_grid2d(n, 0.25 * l, n, 0.25 * l)), 1, 1e-10);
        ASSERT_TRUE(s.converged) << n;
        e.push_back(s.energies[0]);
    }
    EXPECT_LT(std::abs(e[2] - e[1]), std::abs(e[1] - e[0]));
}

TEST(SolveLowest, BoundStateCriterion) {
    const double v0 = depth_at(gaussian_shape(), eg);
    const ThreeBodySpectrum s = solve_lowest(problem(20.0, v0, default_three_body_grid(eg, 128, 64)), 3, 1e-8);
    ASSERT_EQ(s.energies.size(), 3u);
    for (std::size_t k = 0; k < s.energies.size(); ++k) {
        EXPECT_EQ(s.bound[k], s.energies[k] < eg);
        if (k > 0) EXPECT_LE(s.energies[k - 1], s.energies[k]);
        const Vector w = quad_weights_2d(s.grid);
        EXPECT_NEAR((w.array() * s.wavefunctions[k].array().square()).sum(), 1.0, 1e-10);
    }
    EXPECT_TRUE(s.bound[0]);
    EXPECT_TRUE(s.bound[1]);
}

TEST(SolveLowest, DeeperPotentialLowersGroundState) {
    const double v0 = depth_at(gaussian_shape(), eg);
    const Grid2D g = default_three_body_grid(eg, 128, 64);
    double prev = INFINITY;
    for (double f : {0.9, 1.0, 1.1, 1.3}) {
        const ThreeBodySpectrum s = solve_lowest(problem(20.0, f * v0, g), 1, 1e-8);
        EXPECT_LT(s.energies[0], prev) << f;
        prev = s.energies[0];
    }
}

TEST(SolveLowest, NearStmReferenceAtOnePercentBinding) {
    const MassParams m = make_masses(20.0);
    const ScanResult ref = scan_energies(m, 1, default_stm_line_grid(), {-2.8, -2.6}, -1, ScanOptions{8, 1e-10, 1});
    ASSERT_EQ(ref.energies.size(), 1u);
    const double v0 = depth_at(gaussian_shape(), eg);
    const ThreeBodySpectrum s = solve_lowest(problem(20.0, v0, default_three_body_grid(eg)), 1, 1e-8);
    const double eps0 = s.energies[0] / std::abs(eg);
    EXPECT_LT(std::abs(eps0 / ref.energies[0] - 1.0), 0.10);
    EXPECT_GT(eps0, ref.energies[0]);
}

TEST(SolveLowest, InvalidArguments) {
    const ThreeBodyProblem p = problem(1.0, -0.5, make_grid2d(16, 2.0, 16, 2.0));
    EXPECT_THROW(solve_lowest(p, 0), Error);
    EXPECT_THROW(solve_lowest(p, 1, 0.0), Error);
}

TEST(ClassifyParity, ConstantMixedAndZeroFields) {
    const Grid2D g = make_grid2d(20, 1.0, 16, 1.0);
    EXPECT_EQ(classify_parity(Vector::Ones(g.total()), g), std::make_pair(1, 1));
    Vector odd(g.total()), mixed(g.total());
    for (Index i = 0; i < g.nx(); ++i)
        for (Index j = 0; j < g.ny(); ++j) {
            const double x = g.grid_x.points[i], y = g.grid_y.points[j];
            odd[g.flat(i, j)] = x * std::exp(-x * x - y * y);
            mixed[g.flat(i, j)] = (1.0 + x) * std::exp(-x * x - y * y);
        }
    EXPECT_EQ(classify_parity(odd, g), std::make_pair(-1, 1));
    try {
        classify_parity(mixed, g);
        FAIL() << "expected mixed-parity";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::mixed_parity);
    }
    EXPECT_THROW(classify_parity(Vector::Zero(g.total()), g), Error);
    EXPECT_THROW(classify_parity(Vector::Ones(5), g), Error);
}
