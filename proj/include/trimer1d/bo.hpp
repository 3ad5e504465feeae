#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <string>
#include <vector>

#include "trimer1d/chebgrid.hpp"
#include "trimer1d/errors.hpp"
#include "trimer1d/masses.hpp"
#include "trimer1d/specfun.hpp"

namespace trimer1d {

enum class Branch { plus, minus };

/// Bound-state counting margin below the continuum threshold.
inline constexpr double bo_threshold_margin = 1e-9;

/// BO potential u_pm(Y) = -(1/ax) [(ax/|Y|) W0(pm (|Y|/ax) e^{-|Y|/ax}) + 1]^2.
inline double bo_potential(double y, const MassParams& m, Branch branch) {
    const double t = std::abs(y) / m.alpha_x;
    if (t == 0.0) return branch == Branch::plus ? -4.0 / m.alpha_x : 0.0;
    // W0(-t e^{-t}) = -t for t <= 1: the odd channel is unbound there
    if (branch == Branch::minus && t <= 1.0) return 0.0;
    const double z = (branch == Branch::plus ? 1.0 : -1.0) * t * std::exp(-t);
    const double bracket = lambert_w0(z) / t + 1.0;
    return -bracket * bracket / m.alpha_x;
}

/// Residual of e^{-kappa|Y|} = pm (sqrt(|u| ax) - 1), kappa = sqrt(|u|/ax).
inline double check_transcendental(double u, double y, const MassParams& m, Branch branch) {
    const double kappa = std::sqrt(std::abs(u) / m.alpha_x);
    const double rhs = std::sqrt(std::abs(u) * m.alpha_x) - 1.0;
    return std::exp(-kappa * std::abs(y)) - (branch == Branch::plus ? rhs : -rhs);
}

/// Light-particle decay constant sqrt(|u(Y)|/ax).
inline double light_kappa(double y, const MassParams& m, Branch branch) {
    return std::sqrt(std::abs(bo_potential(y, m, branch)) / m.alpha_x);
}

/// N_pm with int phi_pm(X|Y)^2 dX = 1.
inline double light_normalization(double kappa, double y, Branch branch) {
    const double inv = 1.0 / kappa;
    const double s = branch == Branch::plus ? 1.0 : -1.0;
    const double e = std::exp(-kappa * std::abs(y));
    return std::sqrt(0.5) / std::sqrt(std::abs(inv + s * e * (inv + std::abs(y))));
}

/// phi_pm(X|Y) = N_pm [e^{-kappa|X - Y/2|} pm e^{-kappa|X + Y/2|}].
inline double light_wavefunction(double x, double y, const MassParams& m, Branch branch) {
    const double u = bo_potential(y, m, branch);
    if (branch == Branch::minus && !(u < -1e-14))
        fail(ErrorCode::shallow_channel, "light_wavefunction: odd channel is unbound at this separation");
    const double kappa = std::sqrt(std::abs(u) / m.alpha_x);
    const double s = branch == Branch::plus ? 1.0 : -1.0;
    return light_normalization(kappa, y, branch) *
           (std::exp(-kappa * std::abs(x - 0.5 * y)) + s * std::exp(-kappa * std::abs(x + 0.5 * y)));
}

struct BoSolution {
    MassParams masses;
    Grid1D grid;
    std::vector<double> energies;      // extrapolated in grid size when available
    std::vector<double> grid_energies; // on the primary grid
    std::vector<Vector> heavy_wavefunctions;
    std::vector<int> parity_y;
    Branch light_channel = Branch::plus;
    std::vector<std::string> warnings;

    std::size_t size() const { return energies.size(); }
};

/// Default heavy-particle grid.
inline Grid1D default_bo_grid() { return make_grid(800, 1.0); }

namespace detail {

struct SectorEigen {
    std::vector<double> values;
    std::vector<Vector> vectors;  // full grid
};

inline SectorEigen bo_sector(const MassParams& m, const Grid1D& grid, const DiffMatrices1D& dm,
                             const Vector& w_full, int parity, bool want_vectors) {
    const SectorMap1D sec = make_sector(grid.n_points, parity);
    SectorEigen out;
    if (sec.size() == 0) return out;
    const Matrix r = reduce_1d(dm.d2, sec);
    const Vector sw = sec.fold_weights(w_full).array().sqrt();
    Matrix rs = sw.asDiagonal() * r * sw.cwiseInverse().asDiagonal();
    Matrix h = -0.5 * m.alpha_y * (rs + rs.transpose());
    for (Index a = 0; a < sec.size(); ++a)
        h(a, a) += bo_potential(grid.points[sec.kept[a]], m, Branch::plus);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) fail(ErrorCode::no_convergence, "heavy_solve: eigensolver failed");
    const double thr = m.bo_threshold() - bo_threshold_margin;
    for (Index k = 0; k < es.eigenvalues().size(); ++k) {
        if (!(es.eigenvalues()[k] < thr)) break;
        out.values.push_back(es.eigenvalues()[k]);
        if (want_vectors) {
            Vector v = sec.unfold(es.eigenvectors().col(k).cwiseQuotient(sw));
            v /= std::sqrt((w_full.array() * v.array().square()).sum());
            const Index c = parity == 1 ? grid.n_points / 2 : grid.n_points / 2 - 1;
            if (v[c] < 0.0) v = -v;
            out.vectors.push_back(v);
        }
    }
    return out;
}

} // namespace detail

/// Lowest states of -ay d^2/dY^2 + u_+(Y) below -1/ax, solved per Y-parity sector.
/// With `extrapolate`, energies are Richardson-corrected against a half-size grid
/// (the |Y| cusp of u_+ at Y = 0 makes the collocation error O(N^-2)).
inline BoSolution heavy_solve(const MassParams& m, const Grid1D& grid, int n_states, bool extrapolate = true) {
    require(n_states >= 1, ErrorCode::invalid_argument, "heavy_solve: n_states must be positive");
    BoSolution sol;
    sol.masses = m;
    sol.grid = grid;
    const DiffMatrices1D dm = diff_matrices(grid);
    const Vector w = quad_weights(grid).weights;
    const auto even = detail::bo_sector(m, grid, dm, w, 1, true);
    const auto odd = detail::bo_sector(m, grid, dm, w, -1, true);

    std::vector<double> ext_even = even.values, ext_odd = odd.values;
    if (extrapolate) {
        Index nc = grid.n_points / 2;
        if ((nc % 2) != (grid.n_points % 2)) ++nc;
        if (nc >= 8) {
            const Grid1D gc = make_grid(nc, grid.map_length);
            const DiffMatrices1D dmc = diff_matrices(gc);
            const Vector wc = quad_weights(gc).weights;
            const double n2 = double(grid.n_points) * grid.n_points, m2 = double(nc) * nc;
            const double factor = m2 / (n2 - m2);
            const auto ce = detail::bo_sector(m, gc, dmc, wc, 1, false);
            const auto co = detail::bo_sector(m, gc, dmc, wc, -1, false);
            for (std::size_t k = 0; k < ext_even.size() && k < ce.values.size(); ++k)
                ext_even[k] += (even.values[k] - ce.values[k]) * factor;
            for (std::size_t k = 0; k < ext_odd.size() && k < co.values.size(); ++k)
                ext_odd[k] += (odd.values[k] - co.values[k]) * factor;
        }
    }

    std::size_t ie = 0, io = 0;
    while (static_cast<int>(sol.energies.size()) < n_states && (ie < even.values.size() || io < odd.values.size())) {
        const bool take_even = io >= odd.values.size() ||
                               (ie < even.values.size() && even.values[ie] <= odd.values[io]);
        if (take_even) {
            sol.energies.push_back(ext_even[ie]);
            sol.grid_energies.push_back(even.values[ie]);
            sol.heavy_wavefunctions.push_back(even.vectors[ie]);
            sol.parity_y.push_back(1);
            ++ie;
        } else {
            sol.energies.push_back(ext_odd[io]);
            sol.grid_energies.push_back(odd.values[io]);
            sol.heavy_wavefunctions.push_back(odd.vectors[io]);
            sol.parity_y.push_back(-1);
            ++io;
        }
    }
    if (static_cast<int>(sol.energies.size()) < n_states)
        sol.warnings.push_back("fewer-states-than-requested: " + std::to_string(sol.energies.size()) +
                               " of " + std::to_string(n_states) + " states lie below the threshold");
    for (std::size_t k = 0; k < sol.parity_y.size(); ++k)
        if (sol.parity_y[k] != (k % 2 == 0 ? 1 : -1))
            sol.warnings.push_back("state parities do not alternate with n");
    return sol;
}

struct StateCount {
    int numeric = 0;
    double semiclassical = 0.0;
};

inline double semiclassical_count(const MassParams& m) {
    return 0.8781 * std::sqrt(1.0 + 2.0 * m.mass_ratio) - 0.5;
}

inline StateCount count_states(const MassParams& m, const Grid1D& grid) {
    const DiffMatrices1D dm = diff_matrices(grid);
    const Vector w = quad_weights(grid).weights;
    const auto even = detail::bo_sector(m, grid, dm, w, 1, false);
    const auto odd = detail::bo_sector(m, grid, dm, w, -1, false);
    return {static_cast<int>(even.values.size() + odd.values.size()), semiclassical_count(m)};
}

inline StateCount count_states(const MassParams& m) { return count_states(m, default_bo_grid()); }

namespace detail {

/// int phi(X|Y) [phi(X|Y+h) - 2 phi(X|Y) + phi(X|Y-h)] dX / h^2, integrated piecewise
/// between the kinks at |X| = |Y|/2, |Y +- h|/2.
inline double second_difference_overlap(double y, double h, const MassParams& m) {
    struct Light {
        double kappa, half, norm;
        double operator()(double x) const {
            return norm * (std::exp(-kappa * std::abs(x - half)) + std::exp(-kappa * std::abs(x + half)));
        }
    };
    auto make = [&](double yy) {
        const double k = light_kappa(yy, m, Branch::plus);
        return Light{k, 0.5 * std::abs(yy), light_normalization(k, yy, Branch::plus)};
    };
    const Light p0 = make(y), pp = make(y + h), pm = make(y - h);
    auto integrand = [&](double x) { return p0(x) * ((pp(x) - p0(x)) + (pm(x) - p0(x))); };

    std::vector<double> cuts{0.0, p0.half, pp.half, pm.half};
    std::sort(cuts.begin(), cuts.end());
    using gl = boost::math::quadrature::gauss<double, 30>;
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
        if (cuts[k + 1] > cuts[k]) sum += gl::integrate(integrand, cuts[k], cuts[k + 1]);
    const double kmin = std::min({p0.kappa, pp.kappa, pm.kappa});
    const double width = 2.0 / kmin;
    double a = cuts.back();
    for (int c = 0; c < 30; ++c, a += width) sum += gl::integrate(integrand, a, a + width);
    return 2.0 * sum / (h * h);
}

} // namespace detail

/// -int phi_+ d^2/dY^2 phi_+ dX at fixed Y by centred differences on the closed form,
/// step h = 1e-4 max(1, |Y|). Equals int (d phi_+/dY)^2 dX > 0.
/// The kinks put a |dY|^3 term in the overlap, so the difference quotient is O(h);
/// one Richardson step against h/2 removes it.
inline double light_curvature(double y, const MassParams& m) {
    const double h = 1e-4 * std::max(1.0, std::abs(y));
    return -(2.0 * detail::second_difference_overlap(y, 0.5 * h, m) - detail::second_difference_overlap(y, h, m));
}

/// Diagonal-corrected energy eps_n - ay int |phi_n|^2 int phi_+ d^2_Y phi_+ dX dY.
inline double diagonal_correction(const BoSolution& sol, int n) {
    require(n >= 0 && n < static_cast<int>(sol.size()), ErrorCode::invalid_argument,
            "diagonal_correction: state index out of range");
    const Vector w = quad_weights(sol.grid).weights;
    const Vector& phi = sol.heavy_wavefunctions[n];
    const double peak = (w.array() * phi.array().square()).maxCoeff();
    const Index nn = sol.grid.n_points;
    double acc = 0.0;
    // integrand is even in Y: evaluate on Y >= 0 and mirror
    for (Index i = 0; i < nn; ++i) {
        const Index mirror = nn - 1 - i;
        if (mirror < i) break;
        const double wp = w[i] * phi[i] * phi[i];
        if (wp < 1e-18 * peak) continue;
        const double c = light_curvature(sol.grid.points[i], sol.masses);
        acc += (mirror == i ? 1.0 : 2.0) * wp * c;
    }
    return sol.energies[n] + sol.masses.alpha_y * acc;
}

inline double diagonal_correction(const MassParams& m, int n, const Grid1D& grid) {
    return diagonal_correction(heavy_solve(m, grid, n + 1), n);
}

/// BO product state phi_+(X|Y) phi_n(Y) on a 2D grid (X along x, Y along y), normalized.
inline Vector bo_wavefunction_2d(const BoSolution& sol, int n, const Grid2D& g) {
    require(n >= 0 && n < static_cast<int>(sol.size()), ErrorCode::invalid_argument,
            "bo_wavefunction_2d: state index out of range");
    const Vector phi_y = interpolate(sol.grid, sol.heavy_wavefunctions[n], g.grid_y.points);
    Vector out(g.total());
    for (Index j = 0; j < g.ny(); ++j) {
        const double y = g.grid_y.points[j];
        const double k = light_kappa(y, sol.masses, Branch::plus);
        const double nrm = light_normalization(k, y, Branch::plus);
        for (Index i = 0; i < g.nx(); ++i) {
            const double x = g.grid_x.points[i];
            const double phi_x = nrm * (std::exp(-k * std::abs(x - 0.5 * y)) + std::exp(-k * std::abs(x + 0.5 * y)));
            out[g.flat(i, j)] = phi_x * phi_y[j];
        }
    }
    const Vector w = quad_weights_2d(g);
    out /= std::sqrt((w.array() * out.array().square()).sum());
    return out;
}

} // namespace trimer1d
