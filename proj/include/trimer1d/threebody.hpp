#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "trimer1d/chebgrid.hpp"
#include "trimer1d/errors.hpp"
#include "trimer1d/masses.hpp"
#include "trimer1d/shapes.hpp"

namespace trimer1d {

struct ThreeBodyProblem {
    MassParams masses;
    PotentialShape shape;
    double depth = 0.0;  // v0 <= 0
    Grid2D grid;         // full grid; the solver works on one parity sector of it
    int parity_x = 1;
    int parity_y = 1;
    std::optional<double> two_body_energy;  // bound-state threshold when known
};

/// Default full grid: 256 x 128 points with L_x = l_g/2 and L_y = l_g.
inline Grid2D default_three_body_grid(double two_body_energy, Index nx = 256, Index ny = 128) {
    const double l = 1.0 / std::sqrt(2.0 * std::abs(two_body_energy));
    return make_grid2d(nx, 0.5 * l, ny, l);
}

/// Sector-restricted H = -(ax/2) Dxx - (ay/2) Dyy + v0 (F+ + F-), applied matrix-free.
/// W H is symmetric for the folded quadrature weights W, so S H S^{-1} with S = W^{1/2}
/// is a symmetric operator; both forms are exposed.
class ThreeBodyOperator {
public:
    explicit ThreeBodyOperator(const ThreeBodyProblem& p) : problem_(p) {
        if (p.shape.is_contact())
            fail(ErrorCode::contact_not_representable, "three-body: contact interaction needs the STM solver");
        require(p.depth <= 0.0, ErrorCode::invalid_argument, "three-body: depth must be non-positive");
        require_parity(p.parity_x);
        require_parity(p.parity_y);
        sector_ = make_sector2d(p.grid, p.parity_x, p.parity_y);
        require(sector_.size() > 0, ErrorCode::dimension_mismatch, "three-body: empty parity sector");
        const DiffMatrices1D dx = diff_matrices(p.grid.grid_x);
        const DiffMatrices1D dy = diff_matrices(p.grid.grid_y);
        rx_ = reduce_1d(dx.d2, sector_.x);
        ry_ = reduce_1d(dy.d2, sector_.y);
        sx_ = sector_.x.fold_weights(quad_weights(p.grid.grid_x).weights).cwiseSqrt();
        sy_ = sector_.y.fold_weights(quad_weights(p.grid.grid_y).weights).cwiseSqrt();
        auto sym = [](const Matrix& r, const Vector& s) {
            Matrix m = s.asDiagonal() * r * s.cwiseInverse().asDiagonal();
            return Matrix(0.5 * (m + m.transpose()));
        };
        kx_ = -0.5 * p.masses.alpha_x * sym(rx_, sx_);
        ky_ = -0.5 * p.masses.alpha_y * sym(ry_, sy_);
        const auto [fp, fm] = potential_diag_2d(p.grid, p.shape);
        potential_ = p.depth * sector_.fold(fp + fm);
    }

    const ThreeBodyProblem& problem() const { return problem_; }
    const Sector2D& sector() const { return sector_; }
    Index size() const { return sector_.size(); }
    Index nx() const { return sector_.nx(); }
    Index ny() const { return sector_.ny(); }
    const Vector& potential() const { return potential_; }
    const Matrix& kinetic_x() const { return kx_; }
    const Matrix& kinetic_y() const { return ky_; }

    /// Folded quadrature weights W (flat, sector-sized).
    Vector weights() const {
        Vector w(size());
        for (Index a = 0; a < nx(); ++a)
            for (Index b = 0; b < ny(); ++b) w[a * ny() + b] = sx_[a] * sx_[a] * sy_[b] * sy_[b];
        return w;
    }

    /// Collocation form on sector values.
    Vector apply(const Vector& v) const {
        require(v.size() == size(), ErrorCode::dimension_mismatch, "three-body: vector size mismatch");
        Eigen::Map<const FieldMatrix> p(v.data(), nx(), ny());
        FieldMatrix r = -0.5 * problem_.masses.alpha_x * (rx_ * p) - 0.5 * problem_.masses.alpha_y * (p * ry_.transpose());
        Vector out = Eigen::Map<const Vector>(r.data(), r.size());
        out += potential_.cwiseProduct(v);
        return out;
    }

    /// Symmetric form S H S^{-1}.
    Vector apply_symmetric(const Vector& v) const {
        Eigen::Map<const FieldMatrix> p(v.data(), nx(), ny());
        FieldMatrix r = kx_ * p + p * ky_.transpose();
        Vector out = Eigen::Map<const Vector>(r.data(), r.size());
        out += potential_.cwiseProduct(v);
        return out;
    }

    Vector to_symmetric(const Vector& v) const { return scale(v, false); }
    Vector from_symmetric(const Vector& v) const { return scale(v, true); }

    /// Dense collocation matrix, for M <= 1e4.
    Matrix dense() const {
        require(size() <= 10000, ErrorCode::invalid_argument, "three-body: dense form limited to 1e4 points");
        Matrix h(size(), size());
        Vector e = Vector::Zero(size());
        for (Index c = 0; c < size(); ++c) {
            e.setZero();
            e[c] = 1.0;
            h.col(c) = apply(e);
        }
        return h;
    }

    /// Grid spacing at the origin relative to the unit potential range, in r = x +- y/2.
    double origin_spacing() const {
        auto h = [](const Grid1D& g) {
            const Index c = g.n_points / 2;
            return g.points[c - 1] - g.points[c];
        };
        return std::max(h(problem_.grid.grid_x), 0.5 * h(problem_.grid.grid_y));
    }

private:
    Vector scale(const Vector& v, bool inverse) const {
        Vector out(v.size());
        for (Index a = 0; a < nx(); ++a)
            for (Index b = 0; b < ny(); ++b) {
                const double s = sx_[a] * sy_[b];
                out[a * ny() + b] = inverse ? v[a * ny() + b] / s : v[a * ny() + b] * s;
            }
        return out;
    }

    ThreeBodyProblem problem_;
    Sector2D sector_;
    Matrix rx_, ry_;
    Vector sx_, sy_;
    Matrix kx_, ky_;
    Vector potential_;
};

inline ThreeBodyOperator assemble(const ThreeBodyProblem& p) { return ThreeBodyOperator(p); }

struct ThreeBodySpectrum {
    Grid2D grid;
    std::vector<double> energies;
    std::vector<Vector> wavefunctions;  // full grid, quadrature-normalized
    std::vector<std::pair<int, int>> sectors;
    std::vector<double> residuals;      // ||H psi - E psi|| / |E| in the weighted norm
    std::vector<bool> bound;
    bool converged = false;
    int iterations = 0;
    std::vector<std::string> warnings;
};

struct DavidsonOptions {
    int max_iterations = 400;
    int max_basis = 40;
    double spurious_tail = 0.05;  // spectral_tail above which a mode counts as unresolved
    int max_extra = 32;           // extra Ritz pairs tolerated to step past unresolved modes
};

/// Flip the global sign so the (Y > 0 lobe of the) field has positive weighted mean.
inline void align_sign(Vector& psi, const Grid2D& g, int parity_y) {
    const Vector w = quad_weights_2d(g);
    double lobe = 0.0;
    for (Index i = 0; i < g.nx(); ++i)
        for (Index j = 0; j < g.ny(); ++j)
            if (parity_y == 1 || g.grid_y.points[j] > 0.0) lobe += w[g.flat(i, j)] * psi[g.flat(i, j)];
    if (lobe < 0.0) psi = -psi;
}

namespace detail {

struct DavidsonResult {
    Vector theta;
    Matrix ritz;
    std::vector<double> residuals;
    bool converged = false;
    int iterations = 0;
};

/// Block Davidson for the `want` lowest eigenpairs of the symmetric sector operator,
/// preconditioned with (K - theta)^{-1} for the separable kinetic part K, applied by
/// fast diagonalization of its two factors.
inline DavidsonResult davidson(const ThreeBodyOperator& op, int want, const Matrix& guesses, double tol,
                               const DavidsonOptions& opt) {
    const Index m = op.size();
    const Index nx = op.nx(), ny = op.ny();
    Eigen::SelfAdjointEigenSolver<Matrix> ex(op.kinetic_x()), ey(op.kinetic_y());
    const Matrix& qx = ex.eigenvectors();
    const Matrix& qy = ey.eigenvectors();
    const Vector& lx = ex.eigenvalues();
    const Vector& ly = ey.eigenvalues();
    auto precondition = [&](const Vector& r, double theta) {
        Eigen::Map<const FieldMatrix> rm(r.data(), nx, ny);
        FieldMatrix c = qx.transpose() * rm * qy;
        for (Index a = 0; a < nx; ++a)
            for (Index b = 0; b < ny; ++b) {
                double d = lx[a] + ly[b] - theta;
                if (std::abs(d) < 1e-10) d = d < 0 ? -1e-10 : 1e-10;
                c(a, b) /= d;
            }
        FieldMatrix t = qx * c * qy.transpose();
        return Vector(Eigen::Map<const Vector>(t.data(), t.size()));
    };

    const int max_basis = std::max(opt.max_basis, 3 * want + 4);
    Matrix v(m, 0), hv(m, 0);
    auto append = [&](Vector t) {
        for (int pass = 0; pass < 2; ++pass)
            if (v.cols() > 0) t -= v * (v.transpose() * t);
        const double nt = t.norm();
        if (!(nt > 1e-12)) return false;
        t /= nt;
        v.conservativeResize(Eigen::NoChange, v.cols() + 1);
        hv.conservativeResize(Eigen::NoChange, hv.cols() + 1);
        v.col(v.cols() - 1) = t;
        hv.col(hv.cols() - 1) = op.apply_symmetric(t);
        return true;
    };
    for (Index c = 0; c < guesses.cols(); ++c) append(guesses.col(c));

    DavidsonResult out;
    out.residuals.assign(want, 0.0);
    int it = 0;
    for (; it < opt.max_iterations; ++it) {
        const Matrix t = v.transpose() * hv;
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (t + t.transpose()));
        const int k = static_cast<int>(std::min<Index>(want, es.eigenvalues().size()));
        out.theta = es.eigenvalues().head(k);
        out.ritz = v * es.eigenvectors().leftCols(k);
        const Matrix hritz = hv * es.eigenvectors().leftCols(k);
        bool all = true;
        std::vector<Vector> corrections;
        for (int j = 0; j < k; ++j) {
            const Vector r = hritz.col(j) - out.theta[j] * out.ritz.col(j);
            out.residuals[j] = r.norm() / std::max(std::abs(out.theta[j]), 1e-300);
            if (out.residuals[j] > tol) {
                all = false;
                corrections.push_back(precondition(r, out.theta[j]));
            }
        }
        if (all && k == want) {
            out.converged = true;
            break;
        }
        if (v.cols() + static_cast<Index>(corrections.size()) > max_basis) {
            const int keep = static_cast<int>(std::min<Index>(2 * want, es.eigenvalues().size()));
            const Matrix nv = v * es.eigenvectors().leftCols(keep);
            const Matrix nhv = hv * es.eigenvectors().leftCols(keep);
            v = nv;
            hv = nhv;
        }
        bool grew = false;
        for (auto& c : corrections) grew = append(c) || grew;
        if (!grew) break;
    }
    out.iterations = it;
    return out;
}

} // namespace detail

/// Lowest n_states eigenpairs of the sector Hamiltonian. Ritz pairs whose spectral tail
/// marks them as localized on unresolved collocation points are discarded (and counted
/// in the warnings); the block is widened until enough resolved states converge.
inline ThreeBodySpectrum solve_lowest(const ThreeBodyProblem& problem, int n_states, double tol = 1e-8,
                                      const DavidsonOptions& opt = {}) {
    require(n_states >= 1, ErrorCode::invalid_argument, "solve_lowest: n_states must be positive");
    require(tol > 0.0, ErrorCode::invalid_argument, "solve_lowest: tolerance must be positive");
    const ThreeBodyOperator op(problem);
    const Index m = op.size();
    const Index nx = op.nx(), ny = op.ny();
    const int nev = static_cast<int>(std::min<Index>(n_states, m));
    const Grid2D& g = problem.grid;
    ThreeBodySpectrum out;
    out.grid = g;
    if (op.origin_spacing() > 0.2)
        out.warnings.push_back("two-scale resolution: grid spacing at the origin exceeds 0.2 potential ranges");

    // smooth starting vectors of the sector's parity: Gaussians times low monomials
    const double lxm = g.grid_x.map_length, lym = g.grid_y.map_length;
    Matrix guesses(m, nev + 2);
    for (int k = 0; k < nev + 2; ++k) {
        Vector s(m);
        const int ax = k % 2, by = k / 2;
        for (Index a = 0; a < nx; ++a)
            for (Index b = 0; b < ny; ++b) {
                const double x = g.grid_x.points[op.sector().x.kept[a]] / lxm;
                const double y = g.grid_y.points[op.sector().y.kept[b]] / lym;
                s[a * ny + b] = std::exp(-(x * x + y * y)) * std::pow(x * x, ax) * std::pow(y * y, by) *
                                (problem.parity_x == -1 ? x : 1.0) * (problem.parity_y == -1 ? y : 1.0);
            }
        guesses.col(k) = op.to_symmetric(s);
    }

    const Vector wfull = quad_weights_2d(g);
    int want = nev;
    int total_iterations = 0;
    std::vector<int> keep;
    std::vector<Vector> fields;
    detail::DavidsonResult dr;
    for (;;) {
        dr = detail::davidson(op, want, guesses, tol, opt);
        total_iterations += dr.iterations;
        keep.clear();
        fields.clear();
        for (Index j = 0; j < dr.theta.size(); ++j) {
            Vector psi = op.sector().unfold(op.from_symmetric(dr.ritz.col(j)));
            psi /= std::sqrt((wfull.array() * psi.array().square()).sum());
            fields.push_back(std::move(psi));
            if (spectral_tail(g, fields.back()) <= opt.spurious_tail) keep.push_back(static_cast<int>(j));
        }
        const int spurious = static_cast<int>(dr.theta.size()) - static_cast<int>(keep.size());
        if (static_cast<int>(keep.size()) >= nev || !dr.converged || want >= nev + opt.max_extra ||
            want >= m)
            break;
        want = static_cast<int>(std::min<Index>(nev + spurious + 1, m));
        guesses = dr.ritz;
    }
    out.converged = dr.converged;
    out.iterations = total_iterations;
    if (!out.converged)
        out.warnings.push_back("no-convergence: Davidson iteration budget exhausted; residuals reported");
    const int discarded = static_cast<int>(dr.theta.size()) - static_cast<int>(keep.size());
    if (discarded > 0)
        out.warnings.push_back("discarded " + std::to_string(discarded) +
                               " unresolved grid-localized mode(s); consider other map lengths");
    if (static_cast<int>(keep.size()) < nev)
        out.warnings.push_back("only " + std::to_string(keep.size()) + " resolved state(s) found");

    const double thr = problem.two_body_energy.value_or(0.0);
    for (int idx = 0; idx < static_cast<int>(keep.size()) && idx < nev; ++idx) {
        const int j = keep[idx];
        Vector psi = std::move(fields[j]);
        align_sign(psi, g, problem.parity_y);
        out.energies.push_back(dr.theta[j]);
        out.wavefunctions.push_back(std::move(psi));
        out.sectors.emplace_back(problem.parity_x, problem.parity_y);
        out.residuals.push_back(dr.residuals[j]);
        out.bound.push_back(dr.theta[j] < thr);
    }
    return out;
}

/// Reflection parities of a full-grid field from its overlaps with the mirrored field.
inline std::pair<int, int> classify_parity(const Vector& psi, const Grid2D& g) {
    require(psi.size() == g.total(), ErrorCode::dimension_mismatch, "classify_parity: size mismatch");
    const Vector w = quad_weights_2d(g);
    double nn = 0.0, ox = 0.0, oy = 0.0;
    for (Index i = 0; i < g.nx(); ++i)
        for (Index j = 0; j < g.ny(); ++j) {
            const double v = psi[g.flat(i, j)];
            const double wv = w[g.flat(i, j)] * v;
            nn += wv * v;
            ox += wv * psi[g.flat(g.nx() - 1 - i, j)];
            oy += wv * psi[g.flat(i, g.ny() - 1 - j)];
        }
    require(nn > 0.0, ErrorCode::invalid_argument, "classify_parity: zero field");
    ox /= nn;
    oy /= nn;
    if (std::abs(ox) < 0.999 || std::abs(oy) < 0.999)
        fail(ErrorCode::mixed_parity, "classify_parity: field has no definite reflection parity");
    return {ox > 0 ? 1 : -1, oy > 0 ? 1 : -1};
}

} // namespace trimer1d
