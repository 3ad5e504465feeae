#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "trimer1d/chebgrid.hpp"
#include "trimer1d/twobody.hpp"

using namespace trimer1d;

namespace {

Vector sample(const Grid1D& g, double (*f)(double)) {
    Vector v(g.n_points);
    for (Index i = 0; i < g.n_points; ++i) v[i] = f(g.points[i]);
    return v;
}

double gauss(double x) { return std::exp(-x * x); }

Vector reversal(const Vector& v) { return v.reverse(); }

std::vector<double> sorted_eigenvalues(const Matrix& a) {
    Eigen::EigenSolver<Matrix> es(a, false);
    std::vector<double> ev;
    for (Index k = 0; k < es.eigenvalues().size(); ++k) ev.push_back(es.eigenvalues()[k].real());
    std::sort(ev.begin(), ev.end());
    return ev;
}

} // namespace

TEST(Grid1D, SmallGridsExact) {
    const Grid1D g2 = make_grid(2, 1.0);
    EXPECT_NEAR(g2.points[0], 1.0, 1e-15);
    EXPECT_NEAR(g2.points[1], -1.0, 1e-15);
    const Grid1D g3 = make_grid(3, 1.0);
    EXPECT_EQ(g3.points[1], 0.0);
    const Grid1D g4 = make_grid(4, 2.5);
    for (Index i = 0; i < 4; ++i) EXPECT_EQ(g4.points[i], -g4.points[3 - i]);
}

TEST(Grid1D, Invariants) {
    for (Index n : {5, 16, 101, 256}) {
        const Grid1D g = make_grid(n, 3.0);
        for (Index i = 0; i < n; ++i) {
            EXPECT_NEAR(g.eta[i], std::cos((2.0 * i + 1.0) * M_PI / (2.0 * n)), 1e-15);
            EXPECT_GT(g.eta[i], -1.0);
            EXPECT_LT(g.eta[i], 1.0);
            EXPECT_EQ(g.points[i], -g.points[n - 1 - i]);
            if (i > 0) {
                EXPECT_LT(g.eta[i], g.eta[i - 1]);
                EXPECT_LT(g.points[i], g.points[i - 1]);
            }
        }
    }
}

TEST(Grid1D, InvalidArguments) {
    EXPECT_THROW(make_grid(1, 1.0), Error);
    EXPECT_THROW(make_grid(8, 0.0), Error);
    EXPECT_THROW(make_grid(8, -1.0), Error);
}

TEST(DiffMatrices, FirstDerivativeOfBasisFunction) {
    const double L = 2.0;
    const Grid1D g = make_grid(64, L);
    const DiffMatrices1D dm = diff_matrices(g);
    Vector f(g.n_points), df(g.n_points);
    for (Index i = 0; i < g.n_points; ++i) {
        const double x = g.points[i];
        f[i] = x / std::sqrt(L * L + x * x);
        df[i] = L * L / std::pow(L * L + x * x, 1.5);
    }
    EXPECT_LT((dm.d1 * f - df).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(DiffMatrices, ConstantsHaveZeroDerivatives) {
    for (Index n : {16, 200, 1000}) {
        const Grid1D g = make_grid(n, 3.0);
        const DiffMatrices1D dm = diff_matrices(g);
        const Vector one = Vector::Ones(n);
        EXPECT_LT((dm.d1 * one).cwiseAbs().maxCoeff(), 1e-10 * n);
        EXPECT_LT((dm.d2 * one).cwiseAbs().maxCoeff(), 1e-8 * n);
    }
}

TEST(DiffMatrices, SecondDerivativeOfGaussian) {
    const Grid1D g = make_grid(200, 4.0);
    const DiffMatrices1D dm = diff_matrices(g);
    Vector expect(g.n_points);
    for (Index i = 0; i < g.n_points; ++i) {
        const double x = g.points[i];
        expect[i] = (4 * x * x - 2) * std::exp(-x * x);
    }
    EXPECT_LT((dm.d2 * sample(g, gauss) - expect).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(DiffMatrices, FiniteForLargeGrids) {
    const Grid1D g = make_grid(4096, 5.0);
    const DiffMatrices1D dm = diff_matrices(g);
    EXPECT_TRUE(dm.d1.allFinite());
    EXPECT_TRUE(dm.d2.allFinite());
}

TEST(DiffMatrices, ReflectionEquivariance) {
    for (Index n : {15, 64}) {
        const Grid1D g = make_grid(n, 1.5);
        const DiffMatrices1D dm = diff_matrices(g);
        const Matrix p = Matrix::Identity(n, n).rowwise().reverse();
        EXPECT_LT((p * dm.d1 * p + dm.d1).cwiseAbs().maxCoeff(), 1e-10 * dm.d1.cwiseAbs().maxCoeff());
        EXPECT_LT((p * dm.d2 * p - dm.d2).cwiseAbs().maxCoeff(), 1e-10 * dm.d2.cwiseAbs().maxCoeff());
    }
}

TEST(QuadWeights, GaussianAndLorentzianIntegrals) {
    const Grid1D g = make_grid(200, 4.0);
    const Vector w = quad_weights(g).weights;
    EXPECT_NEAR(w.dot(sample(g, gauss)), std::sqrt(M_PI), 1e-8);
    Vector lor(g.n_points);
    for (Index i = 0; i < g.n_points; ++i) lor[i] = std::pow(1.0 + g.points[i] * g.points[i], -3.0);
    EXPECT_NEAR(w.dot(lor), 3.0 * M_PI / 8.0, 1e-8);
}

TEST(QuadWeights, PositiveSymmetricAndClosedForm) {
    const Grid1D g = make_grid(101, 2.0);
    const Vector w = quad_weights(g).weights;
    for (Index i = 0; i < g.n_points; ++i) {
        EXPECT_GT(w[i], 0.0);
        EXPECT_EQ(w[i], w[g.n_points - 1 - i]);
        const double eta = g.eta[i];
        EXPECT_NEAR(w[i], M_PI * 2.0 / (101.0 * (1.0 - eta * eta)), 1e-12 * w[i]);
    }
}

TEST(Interpolation, ExactAtNodesAndForConstants) {
    const Grid1D g = make_grid(40, 2.0);
    const Vector v = sample(g, gauss);
    Vector nodes = g.points;
    EXPECT_EQ(interpolate(g, v, nodes), v);
    Vector targets = Vector::LinSpaced(30, -9.0, 9.0);
    const Vector c = interpolate(g, Vector::Constant(40, 2.5), targets);
    EXPECT_LT((c.array() - 2.5).abs().maxCoeff(), 1e-13);
}

TEST(Interpolation, GaussianAtRandomTargets) {
    const Grid1D g = make_grid(200, 4.0);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-6.0, 6.0);
    Vector t(50);
    for (Index k = 0; k < 50; ++k) t[k] = u(rng);
    const Vector got = interpolate(g, sample(g, gauss), t);
    for (Index k = 0; k < 50; ++k) EXPECT_NEAR(got[k], gauss(t[k]), 1e-8);
}

TEST(Kron2D, SeparableSecondDerivative) {
    const Grid2D g = make_grid2d(64, 2.0, 64, 2.0);
    const auto dx = diff_matrices(g.grid_x), dy = diff_matrices(g.grid_y);
    const auto [dxx, dyy] = kron_2d(g, dx.d2, dy.d2);
    Vector f(g.total()), fxx(g.total()), fyy(g.total());
    for (Index i = 0; i < g.nx(); ++i)
        for (Index j = 0; j < g.ny(); ++j) {
            const double x = g.grid_x.points[i], y = g.grid_y.points[j];
            f[g.flat(i, j)] = gauss(x) * gauss(y);
            fxx[g.flat(i, j)] = (4 * x * x - 2) * gauss(x) * gauss(y);
            fyy[g.flat(i, j)] = gauss(x) * (4 * y * y - 2) * gauss(y);
        }
    EXPECT_LT((dxx * f - fxx).cwiseAbs().maxCoeff(), 1e-5);
    EXPECT_LT((dyy * f - fyy).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Kron2D, CommuteAndAnnihilateConstants) {
    const Grid2D g = make_grid2d(12, 1.0, 10, 1.5);
    const auto [dxx, dyy] = kron_2d(g, diff_matrices(g.grid_x).d2, diff_matrices(g.grid_y).d2);
    std::mt19937 rng(3);
    std::normal_distribution<double> n01;
    Vector v(g.total());
    for (Index k = 0; k < v.size(); ++k) v[k] = n01(rng);
    const Vector a = dxx * (dyy * v), b = dyy * (dxx * v);
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-8 * a.cwiseAbs().maxCoeff());
    Vector cy(g.total());
    for (Index i = 0; i < g.nx(); ++i)
        for (Index j = 0; j < g.ny(); ++j) cy[g.flat(i, j)] = std::sin(g.grid_x.points[i]);
    EXPECT_LT((dyy * cy).cwiseAbs().maxCoeff(), 1e-8 * g.total());
    EXPECT_LT((dxx.dense() * v - dxx * v).cwiseAbs().maxCoeff(), 1e-10 * (dxx * v).cwiseAbs().maxCoeff());
    EXPECT_THROW(kron_2d(g, Matrix::Zero(3, 3), diff_matrices(g.grid_y).d2), Error);
}

TEST(Potential, DiagonalEntries) {
    const Grid1D g = make_grid(9, 1.0);
    const Vector fg = potential_diag_1d(g, gaussian_shape());
    const Vector fl = potential_diag_1d(g, cubic_lorentzian_shape());
    for (Index i = 0; i < 9; ++i) {
        EXPECT_EQ(fg[i], std::exp(-g.points[i] * g.points[i]));
        EXPECT_NEAR(fl[i], std::pow(1.0 + g.points[i] * g.points[i], -3.0), 1e-15);
    }
    EXPECT_EQ(fg[4], 1.0);
    EXPECT_EQ(cubic_lorentzian_shape()(1.0), 0.125);
    EXPECT_THROW(potential_diag_1d(g, contact_shape()), Error);
}

TEST(Potential, TwoDimensionalEntries) {
    // odd grids put x = 0 and y = 0 on the grid
    const Grid2D g = make_grid2d(9, 1.0, 9, 1.0);
    const auto [fp, fm] = potential_diag_2d(g, gaussian_shape());
    for (Index i = 0; i < g.nx(); ++i)
        for (Index j = 0; j < g.ny(); ++j) {
            const double x = g.grid_x.points[i], y = g.grid_y.points[j];
            EXPECT_NEAR(fp[g.flat(i, j)], std::exp(-(x + y / 2) * (x + y / 2)), 1e-15);
            EXPECT_EQ(fp[g.flat(i, j)], fm[g.flat(i, g.ny() - 1 - j)]);
        }
    const auto [lp, lm] = potential_diag_2d(g, cubic_lorentzian_shape());
    EXPECT_EQ(lp[g.flat(4, 4)], 1.0);
    EXPECT_EQ(lm[g.flat(4, 4)], 1.0);
    const Grid2D h = make_grid2d(2, 1.0, 2, 2.0);  // points x = +-1, y = +-2
    EXPECT_NEAR(potential_diag_2d(h, gaussian_shape()).first[h.flat(0, 0)], std::exp(-4.0), 1e-15);
    EXPECT_THROW(potential_diag_2d(g, contact_shape()), Error);
}

TEST(Symmetry, FoldUnfoldRoundTrip) {
    const Grid2D g = make_grid2d(10, 1.0, 7, 1.0);
    for (int px : {1, -1})
        for (int py : {1, -1}) {
            const Sector2D s = make_sector2d(g, px, py);
            Vector v(g.total());
            for (Index i = 0; i < g.nx(); ++i)
                for (Index j = 0; j < g.ny(); ++j) {
                    const double x = g.grid_x.points[i], y = g.grid_y.points[j];
                    v[g.flat(i, j)] = (px == 1 ? std::cos(x) : std::sin(x)) * (py == 1 ? std::cosh(y) : y);
                }
            EXPECT_LT((s.unfold(s.fold(v)) - v).cwiseAbs().maxCoeff(), 1e-14);
        }
    EXPECT_THROW(make_sector(8, 0), Error);
    EXPECT_THROW(make_sector2d(g, 2, 1), Error);
}

TEST(Symmetry, ReducedOperatorMatchesFullAction) {
    const Grid2D g = make_grid2d(12, 1.0, 12, 1.3);
    const auto [dxx, dyy] = kron_2d(g, diff_matrices(g.grid_x).d2, diff_matrices(g.grid_y).d2);
    const Matrix full = dyy.dense();
    for (int px : {1, -1}) {
        const Sector2D s = make_sector2d(g, px, 1);
        const Matrix red = symmetry_reduce(full, g, px, 1);
        Vector v(g.total());
        for (Index i = 0; i < g.nx(); ++i)
            for (Index j = 0; j < g.ny(); ++j) {
                const double x = g.grid_x.points[i], y = g.grid_y.points[j];
                v[g.flat(i, j)] = (px == 1 ? std::cos(x) : std::sin(x)) * std::cos(y) * gauss(y);
            }
        const Vector got = red * s.fold(v);
        const Vector expect = s.fold(full * v);
        EXPECT_LT((got - expect).cwiseAbs().maxCoeff(), 1e-8 * expect.cwiseAbs().maxCoeff());
    }
}

TEST(Symmetry, SectorSpectraUnionEqualsFullSpectrum) {
    const Grid2D g = make_grid2d(16, 1.0, 16, 1.5);
    const auto [dxx, dyy] = kron_2d(g, diff_matrices(g.grid_x).d2, diff_matrices(g.grid_y).d2);
    const auto [fp, fm] = potential_diag_2d(g, gaussian_shape());
    Matrix h = -0.4 * dxx.dense() - 0.3 * dyy.dense();
    h.diagonal() += -2.0 * (fp + fm);
    std::vector<double> full = sorted_eigenvalues(h), parts;
    for (int px : {1, -1})
        for (int py : {1, -1}) {
            const auto ev = sorted_eigenvalues(symmetry_reduce(h, g, px, py));
            parts.insert(parts.end(), ev.begin(), ev.end());
        }
    std::sort(parts.begin(), parts.end());
    ASSERT_EQ(parts.size(), full.size());
    for (std::size_t k = 0; k < full.size(); ++k)
        EXPECT_NEAR(parts[k], full[k], 1e-8 * std::max(1.0, std::abs(full[k]))) << k;
}

TEST(Convergence, TwoBodyGaussianEnergySubgeometric) {
    const double v0 = -0.5;
    const double e400 = energy_for_depth(gaussian_shape(), v0, make_grid(400, 5.0)).energy;
    const double e500 = energy_for_depth(gaussian_shape(), v0, make_grid(500, 5.0)).energy;
    EXPECT_LT(std::abs(e400 - e500), 1e-8);
}
