#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include "trimer1d/bo.hpp"
#include "trimer1d/chebgrid.hpp"
#include "trimer1d/errors.hpp"
#include "trimer1d/parallel.hpp"
#include "trimer1d/shapes.hpp"
#include "trimer1d/stm.hpp"
#include "trimer1d/threebody.hpp"
#include "trimer1d/twobody.hpp"

namespace trimer1d {

/// eps_n = E_n / |E_g|.
inline double scaled_energy(double three_body, double two_body) {
    require(two_body != 0.0, ErrorCode::invalid_argument, "scaled_energy: two-body energy must be nonzero");
    return three_body / std::abs(two_body);
}

/// (eps_BO - eps_STM) / eps_STM.
inline double relative_error(double bo, double stm) {
    require(stm != 0.0, ErrorCode::invalid_argument, "relative_error: reference must be nonzero");
    return (bo - stm) / stm;
}

/// A real field sampled on a full Grid2D (flat, row-major).
struct GridField {
    Grid2D grid;
    Vector values;
};

inline double field_norm2(const GridField& f) {
    return (quad_weights_2d(f.grid).array() * f.values.array().square()).sum();
}

/// [int psi_a psi_b]^2 after bringing both fields onto the finer grid (more points;
/// ties broken by grid parameters, not argument order) and renormalizing there.
inline double fidelity(const GridField& a, const GridField& b, std::vector<std::string>* warnings = nullptr) {
    require(a.values.size() == a.grid.total() && b.values.size() == b.grid.total(),
            ErrorCode::dimension_mismatch, "fidelity: field size differs from its grid");
    if (warnings) {
        try {
            if (classify_parity(a.values, a.grid) != classify_parity(b.values, b.grid))
                warnings->push_back("parity-mismatch: fields lie in different symmetry sectors");
        } catch (const Error&) {
        }
    }
    Grid2D target = a.grid;
    Vector va = a.values, vb = b.values;
    if (!same_grid(a.grid, b.grid)) {
        // order the pair canonically so the result is symmetric in its arguments
        const bool a_finer = a.grid.total() > b.grid.total() ||
                             (a.grid.total() == b.grid.total() &&
                              std::make_tuple(a.grid.nx(), a.grid.grid_x.map_length, a.grid.grid_y.map_length) >=
                                  std::make_tuple(b.grid.nx(), b.grid.grid_x.map_length, b.grid.grid_y.map_length));
        if (a_finer) {
            vb = interpolate_2d(b.grid, b.values, a.grid);
        } else {
            target = b.grid;
            va = interpolate_2d(a.grid, a.values, b.grid);
        }
    }
    const Vector w = quad_weights_2d(target);
    const double na = (w.array() * va.array().square()).sum();
    const double nb = (w.array() * vb.array().square()).sum();
    if (!(na > 0.0 && nb > 0.0)) return 0.0;
    const double ov = (w.array() * va.array() * vb.array()).sum();
    return std::clamp(ov * ov / (na * nb), 0.0, 1.0);
}

/// STM bound states of one mass ratio, both exchange parities, ordered by energy so
/// that index n matches the three-body state label (even n bosonic, odd n fermionic).
struct StmReference {
    MassParams masses;
    std::vector<StmState> states;
    std::vector<std::string> warnings;

    std::vector<double> energies() const {
        std::vector<double> e;
        for (const auto& s : states) e.push_back(s.energy);
        return e;
    }
};

struct StmReferenceOptions {
    StmLineGrid grid = default_stm_line_grid();
    std::pair<double, double> window{-60.0, -1.0 - 1e-6};
    int probes = 200;
    int max_states = -1;  // per parity; negative means all
};

inline StmReference stm_reference_from_energies(const MassParams& m, const StmLineGrid& grid,
                                                const std::vector<double>& bosonic,
                                                const std::vector<double>& fermionic) {
    StmReference ref;
    ref.masses = m;
    for (double e : bosonic) ref.states.push_back(solve_state(m, 1, grid, e));
    for (double e : fermionic) ref.states.push_back(solve_state(m, -1, grid, e));
    std::sort(ref.states.begin(), ref.states.end(),
              [](const StmState& a, const StmState& b) { return a.energy < b.energy; });
    return ref;
}

inline StmReference stm_reference(const MassParams& m, const StmReferenceOptions& opt = {}) {
    ScanOptions so;
    so.probes = opt.probes;
    const ScanResult b = scan_energies(m, 1, opt.grid, opt.window, opt.max_states, so);
    const ScanResult f = scan_energies(m, -1, opt.grid, opt.window, opt.max_states, so);
    StmReference ref = stm_reference_from_energies(m, opt.grid, b.energies, f.energies);
    for (const auto& w : b.warnings) ref.warnings.push_back("bosonic: " + w);
    for (const auto& w : f.warnings) ref.warnings.push_back("fermionic: " + w);
    return ref;
}

/// Default grid in scaled coordinates for comparing BO and STM wavefunctions.
inline Grid2D default_comparison_grid() { return make_grid2d(192, 1.0, 192, 1.0); }

/// Fidelity between the BO product state n and the STM state n, on a scaled grid.
inline double bo_stm_fidelity(const BoSolution& bo, const StmReference& ref, int n,
                              const Grid2D& grid = default_comparison_grid()) {
    require(n >= 0 && n < static_cast<int>(bo.size()) && n < static_cast<int>(ref.states.size()),
            ErrorCode::invalid_argument, "bo_stm_fidelity: state index out of range");
    const GridField a{grid, bo_wavefunction_2d(bo, n, grid)};
    const GridField b{grid, reconstruct_wavefunction(ref.states[n], grid)};
    return fidelity(a, b);
}

struct SweepRow {
    double two_body_energy = 0.0;
    int n = 0;
    double scaled_energy = 0.0;
    double fidelity = 0.0;
    std::string shape;
    double mass_ratio = 0.0;
    double depth = 0.0;
    double energy = 0.0;  // three-body energy E_n
    int parity_y = 1;
    double residual = 0.0;
    bool bound = false;
    bool converged = false;
    std::string note;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<double> stm_energies;  // reference eps_n, index n
    std::vector<std::string> warnings;
};

struct SweepOptions {
    Index nx = 256;  // full grid points; the solver uses one quadrant
    Index ny = 128;
    double map_x_factor = 0.5;  // L_x = factor * l_g
    double map_y_factor = 1.0;  // L_y = factor * l_g
    double tol = 1e-8;
    Index two_body_points = 2500;
    StmReferenceOptions stm;
};

/// For each E_g: depth from the two-body solver, the lowest three-body states of the
/// bosonic and fermionic X-even sectors merged by energy, their scaled energies, and
/// fidelities against the rescaled STM states with the same index.
inline SweepResult universality_sweep(const MassParams& m, const PotentialShape& shape,
                                      const std::vector<double>& energies, int n_states,
                                      const SweepOptions& opt = {},
                                      const StmReference* reference = nullptr) {
    require(!shape.is_contact(), ErrorCode::contact_not_representable,
            "universality_sweep: finite-range shape required");
    require(n_states >= 1, ErrorCode::invalid_argument, "universality_sweep: n_states must be positive");
    SweepResult out;
    StmReference local;
    if (!reference) {
        local = stm_reference(m, opt.stm);
        reference = &local;
    }
    out.stm_energies = reference->energies();
    for (const auto& w : reference->warnings) out.warnings.push_back("stm reference: " + w);

    std::vector<std::vector<SweepRow>> per_energy(energies.size());
    parallel_for(0, static_cast<std::ptrdiff_t>(energies.size()), [&](std::ptrdiff_t k) {
        const double eg = energies[k];
        auto& rows = per_energy[k];
        try {
            const TwoBodySolution tb = depth_for_energy(shape, eg, default_two_body_grid(eg, opt.two_body_points));
            const double l = decay_length(eg);
            const Grid2D grid = make_grid2d(opt.nx, opt.map_x_factor * l, opt.ny, opt.map_y_factor * l);
            struct Found {
                double e;
                int py;
                Vector psi;
                double res;
                bool conv;
            };
            std::vector<Found> found;
            for (int py : {1, -1}) {
                ThreeBodyProblem p{m, shape, tb.depth, grid, 1, py, eg};
                const ThreeBodySpectrum sp = solve_lowest(p, (n_states + 1) / 2 + 1, opt.tol);
                for (std::size_t j = 0; j < sp.energies.size(); ++j)
                    found.push_back({sp.energies[j], py, sp.wavefunctions[j], sp.residuals[j], sp.converged});
            }
            std::sort(found.begin(), found.end(), [](const Found& a, const Found& b) { return a.e < b.e; });
            for (int n = 0; n < n_states && n < static_cast<int>(found.size()); ++n) {
                SweepRow row;
                row.two_body_energy = eg;
                row.n = n;
                row.shape = shape.label;
                row.mass_ratio = m.mass_ratio;
                row.depth = tb.depth;
                row.energy = found[n].e;
                row.scaled_energy = scaled_energy(found[n].e, eg);
                row.parity_y = found[n].py;
                row.residual = found[n].res;
                row.converged = found[n].conv;
                row.bound = found[n].e < eg;
                if (!row.converged) row.note = "not sufficiently converged";
                if (n < static_cast<int>(reference->states.size())) {
                    const StmState& st = reference->states[n];
                    if (st.parity != found[n].py) {
                        row.note += row.note.empty() ? "" : "; ";
                        row.note += "parity differs from STM state";
                    }
                    const GridField a{grid, found[n].psi};
                    const GridField b{grid, rescale_to_physical(st, eg, grid)};
                    row.fidelity = fidelity(a, b);
                } else {
                    row.fidelity = std::nan("");
                    row.note += row.note.empty() ? "" : "; ";
                    row.note += "no STM state with this index";
                }
                rows.push_back(row);
            }
        } catch (const std::exception& e) {
            SweepRow row;
            row.two_body_energy = eg;
            row.n = -1;
            row.shape = shape.label;
            row.mass_ratio = m.mass_ratio;
            row.scaled_energy = std::nan("");
            row.fidelity = std::nan("");
            row.note = std::string("failed: ") + e.what();
            rows.push_back(row);
        }
    });
    for (auto& rows : per_energy)
        for (auto& r : rows) out.rows.push_back(std::move(r));
    return out;
}

} // namespace trimer1d
