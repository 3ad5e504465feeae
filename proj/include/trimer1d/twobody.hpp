#pragma once

#include <Eigen/Cholesky>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <string>
#include <vector>

#include "trimer1d/chebgrid.hpp"
#include "trimer1d/errors.hpp"
#include "trimer1d/shapes.hpp"

namespace trimer1d {

struct TwoBodySolution {
    double energy = 0.0;  // E_g < 0
    double depth = 0.0;   // v0 < 0
    Vector wavefunction;  // on grid, even, quadrature-normalized, positive
    Grid1D grid;
    std::vector<std::string> warnings;

    /// Decay length 1/sqrt(2|E|).
    double decay_length() const { return 1.0 / std::sqrt(2.0 * std::abs(energy)); }
};

inline double decay_length(double energy) { return 1.0 / std::sqrt(2.0 * std::abs(energy)); }

/// Default two-body grid: N = 2500, L = min(max(5, 3 l_g), 40). The cap keeps the
/// unit potential range resolved at the origin when l_g is very large.
inline Grid1D default_two_body_grid(double energy, Index n_points = 2500) {
    return make_grid(n_points, std::min(std::max(5.0, 3.0 * decay_length(energy)), 40.0));
}

namespace detail {

/// Birman-Schwinger operator F^{1/2} (-D2/2 - E)^{-1} F^{1/2} in one parity sector,
/// symmetrized with the folded quadrature weights. Its largest eigenvalue is 1/|v0|
/// for the shallowest depth binding at E.
class BirmanSchwinger {
public:
    BirmanSchwinger(const Grid1D& grid, const PotentialShape& shape, int parity)
        : grid_(grid), sector_(make_sector(grid.n_points, parity)) {
        const DiffMatrices1D dm = diff_matrices(grid);
        const Matrix r = reduce_1d(dm.d2, sector_);
        const Vector w = sector_.fold_weights(quad_weights(grid).weights);
        sqrt_w_ = w.array().sqrt();
        // W^{1/2} R W^{-1/2} is symmetric up to rounding
        Matrix rs = sqrt_w_.asDiagonal() * r * sqrt_w_.cwiseInverse().asDiagonal();
        kinetic_ = -0.25 * (rs + rs.transpose());
        sqrt_f_ = sector_.fold(potential_diag_1d(grid, shape)).cwiseMax(0.0).cwiseSqrt();
    }

    struct Result {
        double mu = 0.0;
        Vector y;
        Eigen::LLT<Matrix> llt;
    };

    Result largest(double energy, const Vector* deflate = nullptr, double deflate_mu = 0.0) const {
        const Index n = sector_.size();
        Matrix a = kinetic_;
        a.diagonal().array() -= energy;
        Result res;
        res.llt.compute(a);
        if (res.llt.info() != Eigen::Success)
            fail(ErrorCode::no_convergence, "two-body: kinetic operator is not positive definite");
        Vector y = sqrt_f_.cwiseProduct(sqrt_w_);
        if (y.norm() == 0.0) fail(ErrorCode::no_convergence, "two-body: potential vanishes on the grid");
        if (sector_.parity == -1) {
            for (Index a = 0; a < n; ++a) y[a] *= grid_.points[sector_.kept[a]];
        }
        auto apply = [&](const Vector& v) {
            Vector out = sqrt_f_.cwiseProduct(res.llt.solve(sqrt_f_.cwiseProduct(v)));
            if (deflate) out -= deflate_mu * deflate->dot(v) * (*deflate);
            return out;
        };
        if (deflate) y -= deflate->dot(y) * (*deflate);
        y.normalize();
        double mu = 0.0;
        for (int it = 0; it < 5000; ++it) {
            Vector z = apply(y);
            const double mu_new = y.dot(z);
            const double nz = z.norm();
            if (nz == 0.0) break;
            y = z / nz;
            if (std::abs(mu_new - mu) <= 1e-15 * std::abs(mu_new) && it > 2) {
                mu = mu_new;
                break;
            }
            mu = mu_new;
        }
        res.mu = mu;
        res.y = y;
        return res;
    }

    /// Full-grid wavefunction psi = A^{-1} F^{1/2} y, normalized and positive at the centre.
    Vector wavefunction(const Result& r) const {
        Vector psi_s = r.llt.solve(sqrt_f_.cwiseProduct(r.y));
        Vector psi = sector_.unfold(psi_s.cwiseQuotient(sqrt_w_));
        const Vector w = quad_weights(grid_).weights;
        const double norm = std::sqrt((w.array() * psi.array().square()).sum());
        psi /= norm;
        const Index c = grid_.n_points / 2;
        if (psi[c] < 0.0) psi = -psi;
        return psi;
    }

private:
    Grid1D grid_;
    SectorMap1D sector_;
    Vector sqrt_w_;
    Matrix kinetic_;
    Vector sqrt_f_;
};

inline void check_two_body_solution(TwoBodySolution& sol, const detail::BirmanSchwinger& even,
                                    const detail::BirmanSchwinger::Result& ground,
                                    const PotentialShape& shape) {
    const auto second = even.largest(sol.energy, &ground.y, ground.mu);
    const detail::BirmanSchwinger odd(sol.grid, shape, -1);
    const auto first_odd = odd.largest(sol.energy);
    if (second.mu > first_odd.mu)
        sol.warnings.push_back("second depth eigenvalue belongs to an even state");
    // mu_2(E) increases toward threshold, so a second even state with E_1 < E_2 < 0
    // shows up as |v0| mu_2 >= 1 close to E = 0
    const double probe = 1e-3 * sol.energy;
    const auto ground_near = even.largest(probe);
    const auto second_near = even.largest(probe, &ground_near.y, ground_near.mu);
    if (std::abs(sol.depth) * std::max(second.mu, second_near.mu) >= 1.0)
        sol.warnings.push_back("a second even bound state exists at this depth");
    const Vector& psi = sol.wavefunction;
    const double edge = std::max(std::abs(psi[0]), std::abs(psi[psi.size() - 1]));
    if (edge > 1e-6 * psi.cwiseAbs().maxCoeff())
        sol.warnings.push_back("grid-too-coarse: wavefunction has not decayed at the outermost points");
    const Index mid = sol.grid.n_points / 2;
    if (std::abs(sol.grid.points[mid] - sol.grid.points[mid - 1]) > 0.5)
        sol.warnings.push_back("grid-too-coarse: point spacing at the origin exceeds half the potential range");
}

} // namespace detail

inline TwoBodySolution contact_solution(double depth, const Grid1D& grid) {
    TwoBodySolution sol;
    sol.depth = depth;
    sol.energy = -0.5 * depth * depth;
    sol.grid = grid;
    const double k = std::abs(depth);
    sol.wavefunction = (-k * grid.points.array().abs()).exp() * std::sqrt(k);
    const Vector w = quad_weights(grid).weights;
    sol.wavefunction /= std::sqrt((w.array() * sol.wavefunction.array().square()).sum());
    return sol;
}

/// Smallest |v0| such that the shape binds at the given energy.
inline TwoBodySolution depth_for_energy(const PotentialShape& shape, double energy, const Grid1D& grid) {
    require(energy < 0.0 && std::isfinite(energy), ErrorCode::invalid_argument,
            "depth_for_energy: energy must be negative");
    if (shape.is_contact()) return contact_solution(-std::sqrt(-2.0 * energy), grid);
    const detail::BirmanSchwinger even(grid, shape, 1);
    const auto res = even.largest(energy);
    if (!(res.mu > 0.0) || !std::isfinite(res.mu))
        fail(ErrorCode::no_convergence, "depth_for_energy: no positive Birman-Schwinger eigenvalue");
    TwoBodySolution sol;
    sol.energy = energy;
    sol.depth = -1.0 / res.mu;
    sol.grid = grid;
    sol.wavefunction = even.wavefunction(res);
    detail::check_two_body_solution(sol, even, res, shape);
    return sol;
}

/// -v0^2 (int f)^2 / 2; uses quadrature when the shape carries no integral.
inline double weak_binding_estimate(const PotentialShape& shape, double depth) {
    if (shape.is_contact()) return -0.5 * depth * depth;
    double integral = 0.0;
    if (shape.integral) {
        integral = *shape.integral;
    } else {
        const Grid1D g = make_grid(2000, 5.0);
        integral = quad_weights(g).weights.dot(potential_diag_1d(g, shape));
    }
    return -0.5 * depth * depth * integral * integral;
}

/// Ground-state energy of -d^2/dx^2 / 2 + v0 f(x).
inline TwoBodySolution energy_for_depth(const PotentialShape& shape, double depth, const Grid1D& grid) {
    require(depth < 0.0 && std::isfinite(depth), ErrorCode::invalid_argument,
            "energy_for_depth: depth must be negative");
    if (shape.is_contact()) return contact_solution(depth, grid);
    const detail::BirmanSchwinger even(grid, shape, 1);
    const double v = std::abs(depth);
    auto g = [&](double e) { return v * even.largest(e).mu - 1.0; };

    double e_a = weak_binding_estimate(shape, depth);
    if (!(e_a < 0.0)) e_a = -1e-3;
    double g_a = g(e_a);
    double e_b = e_a, g_b = g_a;
    int guard = 0;
    if (g_a > 0.0) {
        while (g_b > 0.0) {
            e_a = e_b;
            g_a = g_b;
            e_b *= 4.0;
            g_b = g(e_b);
            if (++guard > 200) fail(ErrorCode::no_convergence, "energy_for_depth: bracket search failed");
        }
    } else {
        while (g_b <= 0.0) {
            e_a = e_b;
            g_a = g_b;
            e_b *= 0.25;
            if (e_b > -1e-300 || ++guard > 200)
                fail(ErrorCode::grid_too_coarse, "energy_for_depth: no bound state resolved on this grid");
            g_b = g(e_b);
        }
    }
    const bool a_low = e_a < e_b;
    const double lo = a_low ? e_a : e_b, f_lo = a_low ? g_a : g_b;
    const double hi = a_low ? e_b : e_a, f_hi = a_low ? g_b : g_a;
    std::uintmax_t max_iter = 200;
    const auto bracket = boost::math::tools::toms748_solve(
        g, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(52), max_iter);
    const double e = 0.5 * (bracket.first + bracket.second);
    const auto res = even.largest(e);
    TwoBodySolution sol;
    sol.energy = e;
    sol.depth = depth;
    sol.grid = grid;
    sol.wavefunction = even.wavefunction(res);
    detail::check_two_body_solution(sol, even, res, shape);
    return sol;
}

} // namespace trimer1d
