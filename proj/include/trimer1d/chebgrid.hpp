#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "trimer1d/errors.hpp"
#include "trimer1d/shapes.hpp"

namespace trimer1d {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// Nx-by-Ny field view; row-major so that (i, j) sits at flat index i*Ny + j.
using FieldMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Rational-Chebyshev collocation grid on the real line.
/// eta_i = cos((2i+1)pi/(2N)), x_i = L eta_i / sqrt(1 - eta_i^2); both strictly
/// decreasing in i, and x_i = -x_{N-1-i}.
struct Grid1D {
    Index n_points = 0;
    double map_length = 1.0;
    Vector eta;
    Vector points;

    Index size() const { return n_points; }
};

inline Grid1D make_grid(Index n_points, double map_length) {
    require(n_points >= 2, ErrorCode::invalid_argument, "make_grid: need at least 2 points");
    require(map_length > 0.0 && std::isfinite(map_length), ErrorCode::invalid_argument,
            "make_grid: map length must be positive");
    Grid1D g;
    g.n_points = n_points;
    g.map_length = map_length;
    g.eta.resize(n_points);
    g.points.resize(n_points);
    const double N = static_cast<double>(n_points);
    for (Index i = 0; i < n_points; ++i) {
        const double theta = (2.0 * i + 1.0) * std::numbers::pi / (2.0 * N);
        g.eta[i] = std::cos(theta);
        // sqrt(1 - eta^2) = sin(theta) without cancellation
        g.points[i] = map_length * g.eta[i] / std::sin(theta);
    }
    // enforce exact point symmetry
    for (Index i = 0; i < n_points / 2; ++i) {
        const Index m = n_points - 1 - i;
        const double e = 0.5 * (g.eta[i] - g.eta[m]);
        const double x = 0.5 * (g.points[i] - g.points[m]);
        g.eta[i] = e;
        g.eta[m] = -e;
        g.points[i] = x;
        g.points[m] = -x;
    }
    if (n_points % 2 == 1) {
        g.eta[n_points / 2] = 0.0;
        g.points[n_points / 2] = 0.0;
    }
    return g;
}

struct DiffMatrices1D {
    Matrix d1;
    Matrix d2;
};

/// D1 = A delta1 and D2 = A^2 delta2 + B delta1 with A = (1-eta^2)^{3/2}/L and
/// B = -3 eta (1-eta^2)^2 / L^2.
inline DiffMatrices1D diff_matrices(const Grid1D& grid) {
    const Index n = grid.n_points;
    const double L = grid.map_length;
    const double N = static_cast<double>(n);
    Vector s(n);  // 1 - eta^2
    for (Index i = 0; i < n; ++i) {
        const double th = (2.0 * i + 1.0) * std::numbers::pi / (2.0 * N);
        s[i] = std::sin(th) * std::sin(th);
    }
    Matrix delta1(n, n), delta2(n, n);
    for (Index i = 0; i < n; ++i) {
        const double ei = grid.eta[i];
        for (Index j = 0; j < n; ++j) {
            if (i == j) {
                delta1(i, i) = 0.5 * ei / s[i];
                delta2(i, i) = ei * ei / (s[i] * s[i]) - (N * N - 1.0) / (3.0 * s[i]);
            } else {
                const double diff = ei - grid.eta[j];
                const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
                const double d1 = sign / diff * std::sqrt(s[j] / s[i]);
                delta1(i, j) = d1;
                delta2(i, j) = d1 * (ei / s[i] - 2.0 / diff);
            }
        }
    }
    DiffMatrices1D out;
    out.d1.resize(n, n);
    out.d2.resize(n, n);
    for (Index i = 0; i < n; ++i) {
        const double a = std::pow(s[i], 1.5) / L;
        const double b = -3.0 * grid.eta[i] * s[i] * s[i] / (L * L);
        out.d1.row(i) = a * delta1.row(i);
        out.d2.row(i) = a * a * delta2.row(i) + b * delta1.row(i);
    }
    return out;
}

struct QuadWeights {
    Vector weights;
};

/// Chebyshev-Gauss quadrature composed with the algebraic map:
/// w_i = pi L / (N (1 - eta_i^2)).
inline QuadWeights quad_weights(const Grid1D& grid) {
    const Index n = grid.n_points;
    const double N = static_cast<double>(n);
    QuadWeights q;
    q.weights.resize(n);
    for (Index i = 0; i < n; ++i) {
        const double th = (2.0 * i + 1.0) * std::numbers::pi / (2.0 * N);
        const double s = std::sin(th);
        q.weights[i] = std::numbers::pi * grid.map_length / (N * s * s);
    }
    for (Index i = 0; i < n / 2; ++i) {
        const double w = 0.5 * (q.weights[i] + q.weights[n - 1 - i]);
        q.weights[i] = w;
        q.weights[n - 1 - i] = w;
    }
    return q;
}

/// Barycentric weights of the first-kind Chebyshev nodes.
inline Vector barycentric_weights(Index n) {
    Vector w(n);
    const double N = static_cast<double>(n);
    for (Index j = 0; j < n; ++j)
        w[j] = ((j % 2 == 0) ? 1.0 : -1.0) * std::sin((2.0 * j + 1.0) * std::numbers::pi / (2.0 * N));
    return w;
}

inline double map_to_eta(double x, double L) {
    if (std::isinf(x)) return x > 0 ? 1.0 : -1.0;
    return x / std::hypot(L, x);
}

/// Row of barycentric interpolation coefficients at mapped coordinate eta.
inline Vector interpolation_row(const Grid1D& grid, const Vector& bw, double eta) {
    const Index n = grid.n_points;
    Vector row = Vector::Zero(n);
    for (Index j = 0; j < n; ++j) {
        if (eta == grid.eta[j]) {
            row[j] = 1.0;
            return row;
        }
    }
    double denom = 0.0;
    for (Index j = 0; j < n; ++j) {
        row[j] = bw[j] / (eta - grid.eta[j]);
        denom += row[j];
    }
    return row / denom;
}

/// Interpolation row at physical coordinate x; a grid point selects its own value.
inline Vector interpolation_row_at(const Grid1D& grid, const Vector& bw, double x) {
    for (Index j = 0; j < grid.n_points; ++j)
        if (x == grid.points[j]) {
            Vector row = Vector::Zero(grid.n_points);
            row[j] = 1.0;
            return row;
        }
    return interpolation_row(grid, bw, map_to_eta(x, grid.map_length));
}

/// Barycentric interpolation in eta. Exact at grid points.
inline Vector interpolate(const Grid1D& grid, const Vector& values, const Vector& targets) {
    require(values.size() == grid.n_points, ErrorCode::dimension_mismatch,
            "interpolate: value count differs from grid size");
    const Vector bw = barycentric_weights(grid.n_points);
    Vector out(targets.size());
    for (Index k = 0; k < targets.size(); ++k) out[k] = interpolation_row_at(grid, bw, targets[k]).dot(values);
    return out;
}

/// Dense interpolation matrix from grid values to target points.
inline Matrix interpolation_matrix(const Grid1D& grid, const Vector& targets) {
    const Vector bw = barycentric_weights(grid.n_points);
    Matrix m(targets.size(), grid.n_points);
    for (Index k = 0; k < targets.size(); ++k) m.row(k) = interpolation_row_at(grid, bw, targets[k]).transpose();
    return m;
}

struct Grid2D {
    Grid1D grid_x;
    Grid1D grid_y;

    Index nx() const { return grid_x.n_points; }
    Index ny() const { return grid_y.n_points; }
    Index total() const { return nx() * ny(); }
    Index flat(Index i, Index j) const { return i * ny() + j; }
};

inline Grid2D make_grid2d(Index nx, double lx, Index ny, double ly) {
    return {make_grid(nx, lx), make_grid(ny, ly)};
}

inline bool same_grid(const Grid2D& a, const Grid2D& b) {
    return a.nx() == b.nx() && a.ny() == b.ny() && a.grid_x.map_length == b.grid_x.map_length &&
           a.grid_y.map_length == b.grid_y.map_length;
}

/// Flat tensor-product quadrature weights w_x(i) w_y(j).
inline Vector quad_weights_2d(const Grid2D& g) {
    const Vector wx = quad_weights(g.grid_x).weights;
    const Vector wy = quad_weights(g.grid_y).weights;
    Vector w(g.total());
    for (Index i = 0; i < g.nx(); ++i)
        for (Index j = 0; j < g.ny(); ++j) w[g.flat(i, j)] = wx[i] * wy[j];
    return w;
}

/// Tensor-product barycentric interpolation of a flat field onto another grid.
inline Vector interpolate_2d(const Grid2D& from, const Vector& values, const Grid2D& to) {
    require(values.size() == from.total(), ErrorCode::dimension_mismatch,
            "interpolate_2d: value count differs from grid size");
    const Matrix ix = interpolation_matrix(from.grid_x, to.grid_x.points);
    const Matrix iy = interpolation_matrix(from.grid_y, to.grid_y.points);
    Eigen::Map<const FieldMatrix> f(values.data(), from.nx(), from.ny());
    FieldMatrix out = ix * f * iy.transpose();
    return Eigen::Map<const Vector>(out.data(), out.size());
}

/// Fraction of the squared rational-Chebyshev coefficient mass of a 2D field carried
/// by modes in the upper half of either index range. Resolved fields give values near
/// rounding level; fields localized on single collocation points give O(1).
inline double spectral_tail(const Grid2D& g, const Vector& values) {
    require(values.size() == g.total(), ErrorCode::dimension_mismatch, "spectral_tail: size mismatch");
    auto transform = [](Index n) {
        Matrix t(n, n);
        for (Index k = 0; k < n; ++k)
            for (Index i = 0; i < n; ++i)
                t(k, i) = std::cos(k * (2.0 * i + 1.0) * std::numbers::pi / (2.0 * n)) * (k == 0 ? 1.0 : 2.0) / n;
        return t;
    };
    Eigen::Map<const FieldMatrix> p(values.data(), g.nx(), g.ny());
    const FieldMatrix c = transform(g.nx()) * p * transform(g.ny()).transpose();
    const double total = c.squaredNorm();
    if (total == 0.0) return 0.0;
    double high = 0.0;
    for (Index k = 0; k < g.nx(); ++k)
        for (Index l = 0; l < g.ny(); ++l)
            if (2 * k >= g.nx() || 2 * l >= g.ny()) high += c(k, l) * c(k, l);
    return high / total;
}

enum class Axis { x, y };

/// One Kronecker factor of a 2D operator: factor (x) 1_y or 1_x (x) factor,
/// applied matrix-free to row-major flat vectors.
class KronOperator {
public:
    KronOperator() = default;
    KronOperator(Matrix factor, Axis axis, Index nx, Index ny)
        : factor_(std::move(factor)), axis_(axis), nx_(nx), ny_(ny) {
        const Index expect = axis == Axis::x ? nx : ny;
        require(factor_.rows() == expect && factor_.cols() == expect, ErrorCode::dimension_mismatch,
                "KronOperator: factor size does not match grid");
    }

    Index size() const { return nx_ * ny_; }
    Axis axis() const { return axis_; }
    const Matrix& factor() const { return factor_; }

    Vector apply(const Vector& v) const {
        require(v.size() == size(), ErrorCode::dimension_mismatch, "KronOperator: vector size mismatch");
        Eigen::Map<const FieldMatrix> p(v.data(), nx_, ny_);
        FieldMatrix r = axis_ == Axis::x ? FieldMatrix(factor_ * p) : FieldMatrix(p * factor_.transpose());
        return Eigen::Map<const Vector>(r.data(), r.size());
    }

    Vector operator*(const Vector& v) const { return apply(v); }

    /// Dense M-by-M form, available for M <= 1e4.
    Matrix dense() const {
        require(size() <= 10000, ErrorCode::invalid_argument,
                "KronOperator: dense form limited to 1e4 points");
        Matrix m = Matrix::Zero(size(), size());
        if (axis_ == Axis::x) {
            for (Index i = 0; i < nx_; ++i)
                for (Index k = 0; k < nx_; ++k)
                    for (Index j = 0; j < ny_; ++j) m(i * ny_ + j, k * ny_ + j) = factor_(i, k);
        } else {
            for (Index i = 0; i < nx_; ++i)
                for (Index j = 0; j < ny_; ++j)
                    for (Index l = 0; l < ny_; ++l) m(i * ny_ + j, i * ny_ + l) = factor_(j, l);
        }
        return m;
    }

private:
    Matrix factor_;
    Axis axis_ = Axis::x;
    Index nx_ = 0;
    Index ny_ = 0;
};

/// Dxx = D2x (x) 1_y and Dyy = 1_x (x) D2y.
inline std::pair<KronOperator, KronOperator> kron_2d(const Grid2D& g, const Matrix& d2x, const Matrix& d2y) {
    return {KronOperator(d2x, Axis::x, g.nx(), g.ny()), KronOperator(d2y, Axis::y, g.nx(), g.ny())};
}

/// Diagonal of F with F_ii = f(x_i).
inline Vector potential_diag_1d(const Grid1D& grid, const PotentialShape& shape) {
    if (shape.is_contact())
        fail(ErrorCode::contact_not_representable, "contact interaction has no collocation matrix");
    Vector f(grid.n_points);
    for (Index i = 0; i < grid.n_points; ++i) f[i] = shape(grid.points[i]);
    return f;
}

/// Diagonals of F+ and F-: f(x_i + y_j/2) and f(x_i - y_j/2) at flat index i*Ny + j.
inline std::pair<Vector, Vector> potential_diag_2d(const Grid2D& g, const PotentialShape& shape) {
    if (shape.is_contact())
        fail(ErrorCode::contact_not_representable, "contact interaction has no collocation matrix");
    Vector fp(g.total()), fm(g.total());
    for (Index i = 0; i < g.nx(); ++i) {
        const double x = g.grid_x.points[i];
        for (Index j = 0; j < g.ny(); ++j) {
            const double y = g.grid_y.points[j];
            fp[g.flat(i, j)] = shape(x + 0.5 * y);
            fm[g.flat(i, j)] = shape(x - 0.5 * y);
        }
    }
    return {fp, fm};
}

inline void require_parity(int p) {
    require(p == 1 || p == -1, ErrorCode::invalid_argument, "parity flag must be +1 or -1");
}

/// Parity sector of a symmetric 1D grid. Keeps the points with x > 0 (indices
/// 0 .. N/2-1) plus, for odd N and even parity, the centre point x = 0.
struct SectorMap1D {
    Index n_full = 0;
    int parity = 1;
    std::vector<Index> kept;

    Index size() const { return static_cast<Index>(kept.size()); }
    bool has_centre() const { return n_full % 2 == 1 && parity == 1; }

    Vector fold(const Vector& full) const {
        require(full.size() == n_full, ErrorCode::dimension_mismatch, "fold: size mismatch");
        Vector h(size());
        for (Index a = 0; a < size(); ++a) h[a] = full[kept[a]];
        return h;
    }

    Vector unfold(const Vector& half) const {
        require(half.size() == size(), ErrorCode::dimension_mismatch, "unfold: size mismatch");
        Vector full = Vector::Zero(n_full);
        for (Index a = 0; a < size(); ++a) {
            const Index i = kept[a];
            full[i] = half[a];
            const Index m = n_full - 1 - i;
            if (m != i) full[m] = parity * half[a];
        }
        return full;
    }

    /// Diagonal of U^T W U: the weights of the folded inner product.
    Vector fold_weights(const Vector& w_full) const {
        Vector h(size());
        for (Index a = 0; a < size(); ++a) {
            const Index i = kept[a];
            h[a] = (n_full - 1 - i == i) ? w_full[i] : 2.0 * w_full[i];
        }
        return h;
    }
};

inline SectorMap1D make_sector(Index n_full, int parity) {
    require_parity(parity);
    SectorMap1D s;
    s.n_full = n_full;
    s.parity = parity;
    for (Index i = 0; i < n_full / 2; ++i) s.kept.push_back(i);
    if (n_full % 2 == 1 && parity == 1) s.kept.push_back(n_full / 2);
    return s;
}

/// R = S D U for a reflection-equivariant 1D operator D.
inline Matrix reduce_1d(const Matrix& d, const SectorMap1D& s) {
    require(d.rows() == s.n_full && d.cols() == s.n_full, ErrorCode::dimension_mismatch,
            "reduce_1d: operator size mismatch");
    const Index n = s.size();
    Matrix r(n, n);
    for (Index a = 0; a < n; ++a) {
        const Index i = s.kept[a];
        for (Index b = 0; b < n; ++b) {
            const Index j = s.kept[b];
            const Index m = s.n_full - 1 - j;
            r(a, b) = (m == j) ? d(i, j) : d(i, j) + s.parity * d(i, m);
        }
    }
    return r;
}

/// Parity sector of a Grid2D: product of the x and y sectors, flat index a*Ny_s + b.
struct Sector2D {
    SectorMap1D x;
    SectorMap1D y;

    Index nx() const { return x.size(); }
    Index ny() const { return y.size(); }
    Index size() const { return nx() * ny(); }

    Vector fold(const Vector& full) const {
        require(full.size() == x.n_full * y.n_full, ErrorCode::dimension_mismatch, "fold: size mismatch");
        Vector h(size());
        for (Index a = 0; a < nx(); ++a)
            for (Index b = 0; b < ny(); ++b) h[a * ny() + b] = full[x.kept[a] * y.n_full + y.kept[b]];
        return h;
    }

    Vector unfold(const Vector& half) const {
        require(half.size() == size(), ErrorCode::dimension_mismatch, "unfold: size mismatch");
        const Index fnx = x.n_full, fny = y.n_full;
        Vector full = Vector::Zero(fnx * fny);
        for (Index a = 0; a < nx(); ++a) {
            const Index i = x.kept[a], mi = fnx - 1 - i;
            for (Index b = 0; b < ny(); ++b) {
                const Index j = y.kept[b], mj = fny - 1 - j;
                const double v = half[a * ny() + b];
                full[i * fny + j] = v;
                full[mi * fny + j] = x.parity * v;
                full[i * fny + mj] = y.parity * v;
                full[mi * fny + mj] = x.parity * y.parity * v;
            }
        }
        return full;
    }
};

inline Sector2D make_sector2d(const Grid2D& g, int parity_x, int parity_y) {
    return {make_sector(g.nx(), parity_x), make_sector(g.ny(), parity_y)};
}

/// Restriction of a dense M-by-M operator that commutes with both reflections
/// to one parity sector: S op U, acting on the quadrant values.
inline Matrix symmetry_reduce(const Matrix& op, const Grid2D& g, int parity_x, int parity_y) {
    require(op.rows() == g.total() && op.cols() == g.total(), ErrorCode::dimension_mismatch,
            "symmetry_reduce: operator size mismatch");
    const Sector2D s = make_sector2d(g, parity_x, parity_y);
    Matrix r(s.size(), s.size());
    Vector e = Vector::Zero(s.size());
    for (Index c = 0; c < s.size(); ++c) {
        e.setZero();
        e[c] = 1.0;
        r.col(c) = s.fold(op * s.unfold(e));
    }
    return r;
}

} // namespace trimer1d
