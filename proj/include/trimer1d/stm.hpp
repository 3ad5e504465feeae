#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "trimer1d/chebgrid.hpp"
#include "trimer1d/errors.hpp"
#include "trimer1d/masses.hpp"
#include "trimer1d/parallel.hpp"
#include "trimer1d/specfun.hpp"

namespace trimer1d {

/// Two-dimensional Green function at scaled energy eps < 0:
/// G = -K0(sqrt|eps| sqrt(X^2/ax + Y^2/ay)) / (2 pi sqrt(ax ay)).
inline double green2(double x, double y, double eps, const MassParams& m) {
    require(eps < 0.0, ErrorCode::invalid_argument, "green2: energy must be negative");
    if (x == 0.0 && y == 0.0) fail(ErrorCode::singular_argument, "green2: logarithmic singularity at the origin");
    const double rho = std::sqrt(x * x / m.alpha_x + y * y / m.alpha_y);
    return -bessel_k0(std::sqrt(-eps) * rho) / (2.0 * std::numbers::pi * std::sqrt(m.alpha_x * m.alpha_y));
}

/// Continuous kernel K(X, X') = 4 [K0(k rho_-) + s K0(k rho_+)] / (2 pi sqrt(ax ay)) on the
/// line Y = 2X, with rho_pm^2 = (X-X')^2/ax + (2X pm 2X')^2/ay and s the exchange sign.
inline double stm_kernel_value(double x, double xp, double eps, const MassParams& m, int exchange) {
    const double k = std::sqrt(-eps);
    const double pref = 4.0 / (2.0 * std::numbers::pi * std::sqrt(m.alpha_x * m.alpha_y));
    const double q1 = (x - xp) * (x - xp) / m.alpha_x + 4.0 * (x - xp) * (x - xp) / m.alpha_y;
    const double q2 = (x - xp) * (x - xp) / m.alpha_x + 4.0 * (x + xp) * (x + xp) / m.alpha_y;
    if (q1 == q2 && exchange == -1) return 0.0;
    if (q1 == 0.0 || q2 == 0.0) fail(ErrorCode::singular_argument, "stm kernel: coincident arguments");
    return pref * (bessel_k0(k * std::sqrt(q1)) + exchange * bessel_k0(k * std::sqrt(q2)));
}

/// Half-line Chebyshev grid carrying a function of definite parity on the line:
/// X_j = L (1 + t_j)/(1 - t_j) with t_j Chebyshev-Gauss roots, and g(-X) = p g(X).
/// Avoids collocating across the cusp of psi(X, 2X) at X = 0.
struct StmLineGrid {
    Index n_points = 0;
    double map_length = 0.5;
    Vector t;
    Vector points;
    Vector weights;
    Vector bary;

    Index size() const { return n_points; }
};

inline StmLineGrid make_stm_line_grid(Index n_points, double map_length) {
    require(n_points >= 2, ErrorCode::invalid_argument, "stm line grid: need at least 2 points");
    require(map_length > 0.0, ErrorCode::invalid_argument, "stm line grid: map length must be positive");
    StmLineGrid g;
    g.n_points = n_points;
    g.map_length = map_length;
    g.t.resize(n_points);
    g.points.resize(n_points);
    g.weights.resize(n_points);
    const double N = static_cast<double>(n_points);
    for (Index j = 0; j < n_points; ++j) {
        const double th = (2.0 * j + 1.0) * std::numbers::pi / (2.0 * N);
        const double t = std::cos(th);
        g.t[j] = t;
        g.points[j] = map_length * (1.0 + t) / (1.0 - t);
        g.weights[j] = std::numbers::pi / N * std::sin(th) * 2.0 * map_length / ((1.0 - t) * (1.0 - t));
    }
    g.bary = barycentric_weights(n_points);
    return g;
}

/// Default line grid used by the scan.
inline StmLineGrid default_stm_line_grid() { return make_stm_line_grid(240, 0.5); }

namespace detail {

/// Interpolation rows (value, d/dX) at X >= 0 for data on the half-line grid.
inline void stm_line_rows(const StmLineGrid& g, double u, Vector& val, Vector& der) {
    const Index n = g.n_points;
    const double L = g.map_length;
    const double s = (u - L) / (u + L);
    const double dsdx = 2.0 * L / ((u + L) * (u + L));
    val.setZero(n);
    der.setZero(n);
    for (Index j = 0; j < n; ++j) {
        if (std::abs(s - g.t[j]) < 1e-15) {
            val[j] = 1.0;
            // first-derivative row of the Chebyshev-Gauss collocation matrix
            const double sj = 1.0 - g.t[j] * g.t[j];
            for (Index k = 0; k < n; ++k) {
                if (k == j) {
                    der[k] = 0.5 * g.t[j] / sj;
                } else {
                    const double sign = ((j + k) % 2 == 0) ? 1.0 : -1.0;
                    der[k] = sign / (g.t[j] - g.t[k]) * std::sqrt((1.0 - g.t[k] * g.t[k]) / sj);
                }
            }
            der *= dsdx;
            return;
        }
    }
    double sq = 0.0, sdq = 0.0;
    for (Index j = 0; j < n; ++j) {
        const double d = s - g.t[j];
        val[j] = g.bary[j] / d;
        der[j] = -g.bary[j] / (d * d);
        sq += val[j];
        sdq += der[j];
    }
    for (Index j = 0; j < n; ++j) der[j] = (der[j] / sq - val[j] * sdq / (sq * sq)) * dsdx;
    val /= sq;
}

} // namespace detail

/// Nystrom row for the STM right-hand side at target (X, Y):
///   psi(X, Y) = sum_j row_j g(X_j)
/// with both Green-function terms, the line parity g(-X) = p g(X) folded in, and
/// generalized singularity subtraction about each term's nearest point X*.
class StmRowBuilder {
public:
    StmRowBuilder(const StmLineGrid& grid, double eps, const MassParams& m, int exchange, int line_parity)
        : g_(grid), m_(m), s_(exchange), p_(line_parity) {
        k_ = std::sqrt(-eps);
        a_ = 1.0 / m.alpha_x + 4.0 / m.alpha_y;
        pref_ = 4.0 / (2.0 * std::numbers::pi * std::sqrt(m.alpha_x * m.alpha_y));
    }

    void row(double x, double y, Vector& out) const {
        const Index n = g_.n_points;
        out.setZero(n);
        Vector val(n), der(n), kp(n), km(n);
        for (int term = 0; term < 2; ++term) {
            const double c = term == 0 ? -2.0 : 2.0;  // q = (X-X')^2/ax + (Y + c X')^2/ay
            const double sign = term == 0 ? 1.0 : double(s_);
            const double xs = (x / m_.alpha_x - c * y / m_.alpha_y) / a_;
            auto q = [&](double xp) {
                const double dx = x - xp, dy = y + c * xp;
                return dx * dx / m_.alpha_x + dy * dy / m_.alpha_y;
            };
            const double qmin = std::max(q(xs), 0.0);
            const double i0 = std::numbers::pi * std::exp(-k_ * std::sqrt(qmin)) / (k_ * std::sqrt(a_));
            const double tol = 1e-14 * std::max(1.0, std::abs(xs));
            double s0 = 0.0, s1 = 0.0;
            for (Index j = 0; j < n; ++j) {
                const double xj = g_.points[j];
                const double w = g_.weights[j];
                const double qp = q(xj), qm = q(-xj);
                kp[j] = (std::abs(xj - xs) <= tol || qp <= 0.0) ? 0.0 : bessel_k0(k_ * std::sqrt(qp));
                km[j] = (std::abs(-xj - xs) <= tol || qm <= 0.0) ? 0.0 : bessel_k0(k_ * std::sqrt(qm));
                s0 += (kp[j] + km[j]) * w;
                s1 += kp[j] * w * (xj - xs) + km[j] * w * (-xj - xs);
            }
            detail::stm_line_rows(g_, std::abs(xs), val, der);
            if (xs < 0.0) {
                val *= p_;
                der *= -p_;
            }
            const double f = sign * pref_;
            for (Index j = 0; j < n; ++j)
                out[j] += f * ((kp[j] + p_ * km[j]) * g_.weights[j] + (i0 - s0) * val[j] - s1 * der[j]);
        }
    }

private:
    StmLineGrid g_;
    MassParams m_;
    int s_;
    int p_;
    double k_, a_, pref_;
};

struct StmKernel {
    double energy = 0.0;
    MassParams masses;
    int parity = 1;       // exchange sign: +1 bosonic, -1 fermionic
    int line_parity = 1;  // p in g(-X) = p g(X); X-parity times exchange sign
    StmLineGrid grid;
    Matrix matrix;
};

/// Nystrom matrix M_ij on the line Y = 2X. parity_x selects the X-reflection sector
/// of the three-body state (all bound states found here are X-even).
inline StmKernel build_kernel(double eps, const MassParams& m, int parity, const StmLineGrid& grid,
                              int parity_x = 1) {
    require_parity(parity);
    require_parity(parity_x);
    if (!(eps < -1.0)) fail(ErrorCode::threshold_violation, "build_kernel: energy must lie below -1");
    StmKernel k;
    k.energy = eps;
    k.masses = m;
    k.parity = parity;
    k.line_parity = parity * parity_x;
    k.grid = grid;
    const Index n = grid.n_points;
    k.matrix.resize(n, n);
    const StmRowBuilder rb(grid, eps, m, parity, k.line_parity);
    parallel_for(0, n, [&](std::ptrdiff_t i) {
        Vector r(n);
        const double x = grid.points[i];
        rb.row(x, 2.0 * x, r);
        k.matrix.row(i) = r.transpose();
    });
    return k;
}

/// Real kernel eigenvalues in descending order; complex pairs are dropped.
inline std::vector<double> kernel_eigenvalues(const StmKernel& k) {
    Eigen::EigenSolver<Matrix> es(k.matrix, false);
    if (es.info() != Eigen::Success) fail(ErrorCode::no_convergence, "kernel eigenvalues did not converge");
    std::vector<double> out;
    for (Index i = 0; i < es.eigenvalues().size(); ++i) {
        const auto z = es.eigenvalues()[i];
        if (std::abs(z.imag()) <= 1e-10 * std::max(1.0, std::abs(z.real()))) out.push_back(z.real());
    }
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

struct ScanOptions {
    int probes = 200;
    double energy_tol = 1e-10;
    int parity_x = 1;
};

struct ScanResult {
    std::vector<double> energies;  // ascending
    std::vector<std::string> warnings;
};

/// All energies in (lo, hi) at which a kernel eigenvalue equals 1. The number of real
/// eigenvalues above 1 counts the states below eps; each jump between log-spaced probes
/// is refined on the corresponding ordered eigenvalue.
inline ScanResult scan_energies(const MassParams& m, int parity, const StmLineGrid& grid,
                                std::pair<double, double> window = {-60.0, -1.0 - 1e-6},
                                int n_states = -1, const ScanOptions& opt = {}) {
    const double lo = window.first, hi = window.second;
    require(lo < hi, ErrorCode::invalid_argument, "scan_energies: empty window");
    require(hi <= -1.0 - 1e-6 + 1e-15, ErrorCode::threshold_violation,
            "scan_energies: window must end at or below -1 - 1e-6");
    require(opt.probes >= 2, ErrorCode::invalid_argument, "scan_energies: need at least 2 probes");
    ScanResult res;
    const int np = opt.probes;
    std::vector<double> eps(np);
    const double la = std::log(-lo), lb = std::log(-hi);
    for (int i = 0; i < np; ++i) eps[i] = -std::exp(la + (lb - la) * i / (np - 1));
    eps.front() = lo;
    eps.back() = hi;

    auto eigs = [&](double e) { return kernel_eigenvalues(build_kernel(e, m, parity, grid, opt.parity_x)); };
    auto count = [](const std::vector<double>& ev) {
        return static_cast<int>(std::count_if(ev.begin(), ev.end(), [](double v) { return v > 1.0; }));
    };
    std::vector<int> counts(np);
    for (int i = 0; i < np; ++i) counts[i] = count(eigs(eps[i]));
    if (counts.front() > 0)
        res.warnings.push_back("window-clipped: " + std::to_string(counts.front()) +
                               " state(s) lie below the lower window edge");

    int found = counts.front();
    for (int i = 0; i + 1 < np; ++i) {
        if (counts[i + 1] < counts[i]) res.warnings.push_back("non-monotone eigenvalue count in scan");
        for (int idx = std::max(found, counts[i]); idx < counts[i + 1]; ++idx) {
            if (n_states >= 0 && static_cast<int>(res.energies.size()) >= n_states) break;
            auto f = [&](double e) {
                const auto ev = eigs(e);
                return (idx < static_cast<int>(ev.size()) ? ev[idx] : 0.0) - 1.0;
            };
            double a = eps[i], b = eps[i + 1];
            double fa = f(a), fb = f(b);
            if (!(fa < 0.0 && fb > 0.0)) {
                res.warnings.push_back("unbracketed eigenvalue crossing near " + std::to_string(0.5 * (a + b)));
                continue;
            }
            std::uintmax_t it = 200;
            const double tol = opt.energy_tol;
            const auto r = boost::math::tools::toms748_solve(
                f, a, b, fa, fb, [tol](double u, double v) { return std::abs(u - v) <= tol; }, it);
            res.energies.push_back(0.5 * (r.first + r.second));
        }
        found = std::max(found, counts[i + 1]);
    }
    if (counts.back() > 0 && counts[np - 2] < counts.back() && np > 2)
        res.warnings.push_back("window-clipped: a crossing lies in the last probe interval");
    std::sort(res.energies.begin(), res.energies.end());
    return res;
}

struct StmState {
    double energy = 0.0;
    MassParams masses;
    int parity = 1;       // exchange sign, equals the Y-parity of psi
    int line_parity = 1;
    StmLineGrid grid;
    Vector line_values;   // psi(X_j, 2 X_j) on the half-line grid, arbitrary scale
    double eigenvalue = 1.0;

    int parity_y() const { return parity; }
};

/// Line solution at a converged energy: eigenvector of the kernel eigenvalue nearest 1.
inline StmState solve_state(const MassParams& m, int parity, const StmLineGrid& grid, double eps,
                            int parity_x = 1) {
    const StmKernel k = build_kernel(eps, m, parity, grid, parity_x);
    Eigen::EigenSolver<Matrix> es(k.matrix, true);
    if (es.info() != Eigen::Success) fail(ErrorCode::no_convergence, "solve_state: eigensolver failed");
    Index best = 0;
    double dist = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double d = std::abs(es.eigenvalues()[i] - std::complex<double>(1.0, 0.0));
        if (d < dist) {
            dist = d;
            best = i;
        }
    }
    StmState st;
    st.energy = eps;
    st.masses = m;
    st.parity = parity;
    st.line_parity = k.line_parity;
    st.grid = grid;
    st.eigenvalue = es.eigenvalues()[best].real();
    st.line_values = es.eigenvectors().col(best).real();
    const double sum = grid.weights.dot(st.line_values);
    if (sum < 0.0) st.line_values = -st.line_values;
    st.line_values /= st.line_values.cwiseAbs().maxCoeff();
    return st;
}

/// Value of the reconstructed wavefunction at one point (unnormalized).
inline double stm_evaluate(const StmState& st, const StmRowBuilder& rb, double x, double y) {
    Vector r(st.grid.n_points);
    rb.row(x, y, r);
    return r.dot(st.line_values);
}

/// psi(X, Y) on a 2D grid in scaled coordinates, quadrature-normalized, with the
/// Y > 0 lobe made positive. With exploit_symmetry only one quadrant is evaluated
/// and the rest filled by the X- and Y-reflection parities.
inline Vector reconstruct_wavefunction(const StmState& st, const Grid2D& g, bool exploit_symmetry = true) {
    const StmRowBuilder rb(st.grid, st.energy, st.masses, st.parity, st.line_parity);
    const int px = st.line_parity * st.parity;
    const Index nx = g.nx(), ny = g.ny();
    Vector out(g.total());
    const Index ix_end = exploit_symmetry ? (nx + 1) / 2 : nx;
    const Index jy_end = exploit_symmetry ? (ny + 1) / 2 : ny;
    parallel_for(0, ix_end, [&](std::ptrdiff_t i) {
        Vector r(st.grid.n_points);
        for (Index j = 0; j < jy_end; ++j) {
            rb.row(g.grid_x.points[i], g.grid_y.points[j], r);
            out[g.flat(i, j)] = r.dot(st.line_values);
        }
    });
    if (exploit_symmetry) {
        for (Index i = 0; i < ix_end; ++i)
            for (Index j = 0; j < jy_end; ++j) {
                const double v = out[g.flat(i, j)];
                const Index mi = nx - 1 - i, mj = ny - 1 - j;
                out[g.flat(mi, j)] = px * v;
                out[g.flat(i, mj)] = st.parity * v;
                out[g.flat(mi, mj)] = px * st.parity * v;
            }
    }
    const Vector w = quad_weights_2d(g);
    out /= std::sqrt((w.array() * out.array().square()).sum());
    double lobe = 0.0;
    for (Index i = 0; i < nx; ++i)
        for (Index j = 0; j < ny; ++j)
            if (st.parity == 1 || g.grid_y.points[j] > 0.0) lobe += w[g.flat(i, j)] * out[g.flat(i, j)];
    if (lobe < 0.0) out = -out;
    return out;
}

/// psi(x, y) = psi~(x/l_g, y/l_g) on a grid in unscaled coordinates, renormalized there.
inline Vector rescale_to_physical(const StmState& st, double two_body_energy, const Grid2D& physical,
                                  bool exploit_symmetry = true) {
    require(two_body_energy < 0.0, ErrorCode::invalid_argument, "rescale_to_physical: energy must be negative");
    const double scale = std::sqrt(-2.0 * two_body_energy);
    const Grid2D scaled = make_grid2d(physical.nx(), physical.grid_x.map_length * scale, physical.ny(),
                                      physical.grid_y.map_length * scale);
    Vector psi = reconstruct_wavefunction(st, scaled, exploit_symmetry);
    const Vector w = quad_weights_2d(physical);
    psi /= std::sqrt((w.array() * psi.array().square()).sum());
    return psi;
}

} // namespace trimer1d
