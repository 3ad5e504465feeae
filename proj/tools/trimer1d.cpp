// Command-line front end: one subcommand per solver plus sweeps and figure data.

#include <cstdarg>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "trimer1d/trimer1d.hpp"

using namespace trimer1d;

namespace {

struct Output {
    Table table;
    std::vector<std::string> summary;
    std::vector<std::string> warnings;
    std::optional<GridFieldFile> field;
};

void line(Output& o, const char* fmt, ...) __attribute__((format(printf, 2, 3)));
void line(Output& o, const char* fmt, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    o.summary.emplace_back(buf);
}

void add_warnings(Output& o, const std::string& prefix, const std::vector<std::string>& ws) {
    for (const auto& w : ws) o.warnings.push_back(prefix.empty() ? w : prefix + ": " + w);
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) v.push_back(parse_double(item, what));
    return v;
}

long as_long(int v) { return static_cast<long>(v); }

std::string parity_name(int p) { return p == 1 ? "bosonic" : "fermionic"; }

StmLineGrid stm_grid(const RunConfig& c) {
    const StmLineGrid d = default_stm_line_grid();
    return make_stm_line_grid(c.grid_n.value_or(static_cast<int>(d.n_points)), c.map_length.value_or(d.map_length));
}

StmReference load_reference(const MassParams& m, const StmLineGrid& grid, int per_parity, Output& o) {
    const std::pair<double, double> window{-60.0, -1.0 - 1e-6};
    const ScanResult b = cached_scan_energies(m, 1, grid, window, per_parity);
    const ScanResult f = cached_scan_energies(m, -1, grid, window, per_parity);
    add_warnings(o, "stm bosonic", b.warnings);
    add_warnings(o, "stm fermionic", f.warnings);
    return stm_reference_from_energies(m, grid, b.energies, f.energies);
}

Grid1D two_body_grid(const RunConfig& c, double energy_scale) {
    const Index n = c.grid_n.value_or(2500);
    if (c.map_length) return make_grid(n, *c.map_length);
    return default_two_body_grid(energy_scale, n);
}

// -- subcommands -------------------------------------------------------------

Output run_two_body(const RunConfig& c) {
    require(c.depth.has_value() != c.two_body_energy.has_value(), ErrorCode::config_invalid,
            "two-body: give exactly one of --depth or --two-body-energy");
    const PotentialShape shape = shape_from_name(c.shape);
    TwoBodySolution sol;
    if (c.depth) {
        const double scale = shape.is_contact() ? -0.5 * *c.depth * *c.depth : weak_binding_estimate(shape, *c.depth);
        sol = energy_for_depth(shape, *c.depth, two_body_grid(c, scale));
    } else {
        sol = depth_for_energy(shape, *c.two_body_energy, two_body_grid(c, *c.two_body_energy));
    }
    Output o;
    o.table.columns = {"shape", "depth", "energy", "abs_energy_over_depth2", "decay_length", "grid_n", "map_length"};
    const double ratio = std::abs(sol.energy) / (sol.depth * sol.depth);
    o.table.add({shape.label, sol.depth, sol.energy, ratio, sol.decay_length(), static_cast<long>(sol.grid.n_points),
                 sol.grid.map_length});
    line(o, "two-body %s v0=%.12g E=%.12g |E|/v0^2=%.8g", shape.label.c_str(), sol.depth, sol.energy, ratio);
    add_warnings(o, "", sol.warnings);
    return o;
}

Output run_bo(const RunConfig& c) {
    const MassParams m = make_masses(c.mass_ratio);
    const Grid1D grid = make_grid(c.grid_n.value_or(static_cast<int>(default_bo_grid().n_points)),
                                  c.map_length.value_or(default_bo_grid().map_length));
    const BoSolution sol = heavy_solve(m, grid, c.n_states);
    Output o;
    o.table.columns = {"mass_ratio", "n", "parity_y", "epsilon", "epsilon_grid", "epsilon_diagonal"};
    for (std::size_t n = 0; n < sol.size(); ++n) {
        const double diag = diagonal_correction(sol, static_cast<int>(n));
        o.table.add({m.mass_ratio, static_cast<long>(n), as_long(sol.parity_y[n]), sol.energies[n],
                     sol.grid_energies[n], diag});
        line(o, "bo M/m=%g n=%zu eps=%.10f eps_diag=%.10f", m.mass_ratio, n, sol.energies[n], diag);
    }
    add_warnings(o, "", sol.warnings);
    return o;
}

Output run_stm(const RunConfig& c) {
    const MassParams m = make_masses(c.mass_ratio);
    const StmLineGrid grid = stm_grid(c);
    const int parity = c.parity_sign();
    const ScanResult r = cached_scan_energies(m, parity, grid, {-60.0, -1.0 - 1e-6}, c.n_states);
    Output o;
    o.table.columns = {"mass_ratio", "parity", "n", "epsilon"};
    for (std::size_t k = 0; k < r.energies.size(); ++k) {
        o.table.add({m.mass_ratio, parity_name(parity), static_cast<long>(k), r.energies[k]});
        line(o, "stm M/m=%g %s k=%zu eps=%.10f", m.mass_ratio, parity_name(parity).c_str(), k, r.energies[k]);
    }
    if (r.energies.empty()) line(o, "stm M/m=%g %s: no bound state", m.mass_ratio, parity_name(parity).c_str());
    add_warnings(o, "", r.warnings);
    if (!c.field_out.empty() && !r.energies.empty()) {
        const StmState st = solve_state(m, parity, grid, r.energies.front());
        const Grid2D g = make_grid2d(c.grid_nx.value_or(128), 1.0, c.grid_ny.value_or(128), 1.0);
        GridFieldFile f{g.nx(), g.ny(), 1.0, 1.0, 1, parity, st.energy, {{"source", "stm"}}, reconstruct_wavefunction(st, g)};
        f.metadata["mass_ratio"] = format_double(m.mass_ratio);
        f.metadata["coordinates"] = "scaled";
        o.field = std::move(f);
    }
    return o;
}

struct ThreeBodySetup {
    PotentialShape shape;
    TwoBodySolution two_body;
    Grid2D grid;
};

ThreeBodySetup three_body_setup(const RunConfig& c) {
    ThreeBodySetup s{shape_from_name(c.shape), {}, {}};
    require(!s.shape.is_contact(), ErrorCode::config_invalid, "three-body: contact shape is not representable");
    require(c.depth.has_value() != c.two_body_energy.has_value(), ErrorCode::config_invalid,
            "three-body: give exactly one of --depth or --two-body-energy");
    if (c.depth) {
        s.two_body = energy_for_depth(s.shape, *c.depth, default_two_body_grid(weak_binding_estimate(s.shape, *c.depth)));
    } else {
        s.two_body = depth_for_energy(s.shape, *c.two_body_energy, default_two_body_grid(*c.two_body_energy));
    }
    const Index nx = c.grid_nx.value_or(256), ny = c.grid_ny.value_or(128);
    if (c.map_length) s.grid = make_grid2d(nx, 0.5 * *c.map_length, ny, *c.map_length);
    else s.grid = default_three_body_grid(s.two_body.energy, nx, ny);
    return s;
}

Output run_three_body(const RunConfig& c) {
    const MassParams m = make_masses(c.mass_ratio);
    const ThreeBodySetup s = three_body_setup(c);
    const ThreeBodyProblem p{m, s.shape, s.two_body.depth, s.grid, 1, c.parity_sign(), s.two_body.energy};
    const ThreeBodySpectrum sp = solve_lowest(p, c.n_states, c.tol);
    Output o;
    o.table.columns = {"mass_ratio", "shape",    "depth",   "two_body_energy", "parity", "k",
                       "energy",     "epsilon",  "residual", "bound",          "converged"};
    for (std::size_t k = 0; k < sp.energies.size(); ++k) {
        const double eps = scaled_energy(sp.energies[k], s.two_body.energy);
        o.table.add({m.mass_ratio, s.shape.label, s.two_body.depth, s.two_body.energy, c.parity,
                     static_cast<long>(k), sp.energies[k], eps, sp.residuals[k], static_cast<long>(sp.bound[k]),
                     static_cast<long>(sp.converged)});
        line(o, "three-body M/m=%g %s %s k=%zu E=%.10g eps=%.8f%s", m.mass_ratio, s.shape.label.c_str(),
             c.parity.c_str(), k, sp.energies[k], eps, sp.bound[k] ? "" : " (unbound)");
    }
    add_warnings(o, "two-body", s.two_body.warnings);
    add_warnings(o, "", sp.warnings);
    if (!c.field_out.empty() && !sp.energies.empty()) {
        GridFieldFile f{s.grid.nx(), s.grid.ny(), s.grid.grid_x.map_length, s.grid.grid_y.map_length,
                        1, c.parity_sign(), sp.energies.front(), {{"source", "three-body"}}, sp.wavefunctions.front()};
        f.metadata["mass_ratio"] = format_double(m.mass_ratio);
        f.metadata["shape"] = s.shape.label;
        f.metadata["depth"] = format_double(s.two_body.depth);
        f.metadata["coordinates"] = "physical";
        o.field = std::move(f);
    }
    return o;
}

std::vector<double> sweep_energies(const RunConfig& c) {
    if (!c.energies.empty()) return parse_list(c.energies, "energies");
    return {-1e-1, -1e-2, -1e-3};
}

SweepOptions sweep_options(const RunConfig& c) {
    SweepOptions so;
    so.nx = c.grid_nx.value_or(256);
    so.ny = c.grid_ny.value_or(128);
    so.tol = c.tol;
    return so;
}

void add_sweep_rows(Output& o, const SweepResult& r) {
    for (const auto& row : r.rows) {
        const double ref = row.n >= 0 && row.n < static_cast<int>(r.stm_energies.size()) ? r.stm_energies[row.n]
                                                                                          : std::nan("");
        o.table.add({row.shape, row.mass_ratio, row.two_body_energy, static_cast<long>(row.n), row.scaled_energy,
                     row.fidelity, ref, row.depth, as_long(row.parity_y), row.residual,
                     static_cast<long>(row.bound), static_cast<long>(row.converged), row.note});
        if (row.n >= 0)
            line(o, "sweep %s M/m=%g Eg=%g n=%d eps=%.8f F=%.6f eps_stm=%.8f", row.shape.c_str(), row.mass_ratio,
                 row.two_body_energy, row.n, row.scaled_energy, row.fidelity, ref);
        else
            line(o, "sweep %s M/m=%g Eg=%g %s", row.shape.c_str(), row.mass_ratio, row.two_body_energy,
                 row.note.c_str());
    }
    add_warnings(o, "", r.warnings);
}

const std::vector<std::string> sweep_columns = {"shape",  "mass_ratio", "two_body_energy", "n",      "epsilon",
                                                "fidelity", "epsilon_stm", "depth",       "parity_y", "residual",
                                                "bound",  "converged",  "note"};

Output run_sweep(const RunConfig& c) {
    const MassParams m = make_masses(c.mass_ratio);
    const PotentialShape shape = shape_from_name(c.shape);
    Output o;
    o.table.columns = sweep_columns;
    const StmReference ref = load_reference(m, stm_grid(c), -1, o);
    add_sweep_rows(o, universality_sweep(m, shape, sweep_energies(c), c.n_states, sweep_options(c), &ref));
    return o;
}

Output run_fidelity(const RunConfig& c, const std::vector<std::string>& files) {
    Output o;
    if (!files.empty()) {
        require(files.size() == 2, ErrorCode::config_invalid, "fidelity: expects two grid-field files");
        const GridFieldFile a = read_grid_field(files[0]), b = read_grid_field(files[1]);
        std::vector<std::string> ws;
        const double f = fidelity({a.grid(), a.values}, {b.grid(), b.values}, &ws);
        o.table.columns = {"file_a", "file_b", "fidelity"};
        o.table.add({files[0], files[1], f});
        line(o, "fidelity %.10f", f);
        add_warnings(o, "", ws);
        return o;
    }
    const MassParams m = make_masses(c.mass_ratio);
    const StmReference ref = load_reference(m, stm_grid(c), (c.n_states + 1) / 2, o);
    const BoSolution bo = heavy_solve(m, default_bo_grid(), c.n_states);
    const Grid2D g = make_grid2d(c.grid_nx.value_or(192), 1.0, c.grid_ny.value_or(192), 1.0);
    o.table.columns = {"mass_ratio", "n", "epsilon_bo", "epsilon_stm", "relative_error", "fidelity"};
    for (int n = 0; n < c.n_states && n < static_cast<int>(bo.size()) && n < static_cast<int>(ref.states.size());
         ++n) {
        const double f = bo_stm_fidelity(bo, ref, n, g);
        const double d = relative_error(bo.energies[n], ref.states[n].energy);
        o.table.add({m.mass_ratio, static_cast<long>(n), bo.energies[n], ref.states[n].energy, d, f});
        line(o, "fidelity M/m=%g n=%d bo=%.8f stm=%.8f delta=%.6f F=%.6f", m.mass_ratio, n, bo.energies[n],
             ref.states[n].energy, d, f);
    }
    add_warnings(o, "bo", bo.warnings);
    return o;
}

// -- figure data -------------------------------------------------------------

Output figure_fig3(const RunConfig&) {
    Output o;
    o.table.columns = {"mass_ratio", "n_max_numeric", "n_max_semiclassical"};
    for (int r = 1; r <= 25; ++r) {
        const StateCount sc = count_states(make_masses(r));
        o.table.add({static_cast<double>(r), as_long(sc.numeric), sc.semiclassical});
        line(o, "fig3 M/m=%d n_max=%d semiclassical=%.4f", r, sc.numeric, sc.semiclassical);
    }
    return o;
}

Output figure_fig45(const RunConfig& c, bool diagonal) {
    Output o;
    if (diagonal)
        o.table.columns = {"mass_ratio", "n",       "epsilon_bo",        "epsilon_diagonal",
                           "epsilon_stm", "delta_bo", "delta_diagonal"};
    else
        o.table.columns = {"mass_ratio", "n", "epsilon_bo", "epsilon_stm", "delta_epsilon", "fidelity"};
    const std::vector<double> ratios = {1, 5, 10, 15, 20, 25};
    for (double r : ratios) {
        const MassParams m = make_masses(r);
        const StmReference ref = load_reference(m, stm_grid(c), -1, o);
        const BoSolution bo = heavy_solve(m, default_bo_grid(), c.n_states);
        for (int n = 0; n < c.n_states && n < static_cast<int>(bo.size()) && n < static_cast<int>(ref.states.size());
             ++n) {
            const double stm = ref.states[n].energy;
            if (diagonal) {
                const double d = diagonal_correction(bo, n);
                o.table.add({r, static_cast<long>(n), bo.energies[n], d, stm, relative_error(bo.energies[n], stm),
                             relative_error(d, stm)});
                line(o, "fig5 M/m=%g n=%d bo=%.8f diag=%.8f stm=%.8f", r, n, bo.energies[n], d, stm);
            } else {
                const double f = bo_stm_fidelity(bo, ref, n);
                o.table.add({r, static_cast<long>(n), bo.energies[n], stm, relative_error(bo.energies[n], stm), f});
                line(o, "fig4 M/m=%g n=%d bo=%.8f stm=%.8f F=%.6f", r, n, bo.energies[n], stm, f);
            }
        }
    }
    return o;
}

Output figure_fig6(const RunConfig& c) {
    Output o;
    o.table.columns = {"shape", "abs_two_body_energy", "abs_depth", "abs_depth_asymptote", "abs_energy_over_depth2"};
    for (const PotentialShape& shape : {gaussian_shape(), cubic_lorentzian_shape()}) {
        for (int k = 0; k <= 12; ++k) {
            const double e = -std::pow(10.0, -4.0 + 0.25 * k);
            const TwoBodySolution s = depth_for_energy(shape, e, two_body_grid(c, e));
            const double asym = std::sqrt(2.0 * std::abs(e)) / *shape.integral;
            o.table.add({shape.label, std::abs(e), std::abs(s.depth), asym, std::abs(e) / (s.depth * s.depth)});
            line(o, "fig6 %s |E|=%.4g |v0|=%.10g asymptote=%.10g", shape.label.c_str(), std::abs(e), std::abs(s.depth),
                 asym);
            add_warnings(o, shape.label, s.warnings);
        }
    }
    return o;
}

Output figure_fig7(const RunConfig& c) {
    Output o;
    o.table.columns = sweep_columns;
    const MassParams m = make_masses(c.mass_ratio);
    const StmReference ref = load_reference(m, stm_grid(c), -1, o);
    for (const PotentialShape& shape : {gaussian_shape(), cubic_lorentzian_shape()})
        add_sweep_rows(o, universality_sweep(m, shape, sweep_energies(c), c.n_states, sweep_options(c), &ref));
    return o;
}

Output run_figure(const RunConfig& c) {
    if (c.figure == "fig3") return figure_fig3(c);
    if (c.figure == "fig4") return figure_fig45(c, false);
    if (c.figure == "fig5") return figure_fig45(c, true);
    if (c.figure == "fig6") return figure_fig6(c);
    return figure_fig7(c);
}

// -- driver ------------------------------------------------------------------

void print_error(ErrorCode code, const std::string& message) {
    nlohmann::ordered_json j;
    j["error"] = to_string(code);
    j["message"] = message;
    std::cerr << j.dump() << "\n";
}

int emit(const RunConfig& c, const Output& o) {
    for (const auto& s : o.summary) std::cout << s << "\n";
    for (const auto& w : o.warnings) std::cerr << "warning: " << w << "\n";
    std::string text;
    if (c.format == "json") {
        auto j = to_json(o.table, &c);
        j["warnings"] = o.warnings;
        text = j.dump(2) + "\n";
    } else {
        text = to_csv(o.table, &c);
    }
    if (c.out.empty() || c.out == "-") {
        if (!c.out.empty()) std::cout << text;
    } else {
        write_text(c.out, text);
    }
    if (o.field) write_grid_field(c.field_out, *o.field);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bound states of the one-dimensional heavy-heavy-light three-body system"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for all subcommands");

    std::map<std::string, std::string> flags;
    std::string config_path;
    std::vector<std::string> files;
    struct Flag {
        const char* name;
        const char* help;
    };
    const std::vector<Flag> common = {
        {"mass-ratio", "heavy/light mass ratio M/m (default 1)"},
        {"shape", "contact | gaussian | lorentzian3 (default gaussian)"},
        {"depth", "potential depth v0 < 0"},
        {"two-body-energy", "target two-body energy E_g < 0"},
        {"parity", "bosonic | fermionic (default bosonic)"},
        {"grid-n", "1D grid points"},
        {"grid-nx", "2D grid points along X"},
        {"grid-ny", "2D grid points along Y"},
        {"map-length", "map length L (for 2D grids: L_y, with L_x = L_y/2)"},
        {"tol", "eigensolver tolerance (default 1e-8)"},
        {"n-states", "number of states (default 1)"},
        {"energies", "comma-separated E_g list for sweeps"},
        {"out", "output file; '-' writes the table to stdout"},
        {"format", "csv | json (default csv)"},
        {"field-out", "write the lowest state as a grid-field file"},
        {"threads", "worker threads; 0 uses all cores (default 1)"},
    };
    const std::vector<std::pair<const char*, const char*>> subs = {
        {"two-body", "Two-body depth/energy relation"},
        {"bo", "Born-Oppenheimer spectrum"},
        {"stm", "Zero-range spectrum from the integral equation"},
        {"three-body", "Finite-range three-body spectrum"},
        {"sweep", "Universality sweep over two-body energies"},
        {"fidelity", "Fidelity of two grid-field files, or BO vs STM"},
        {"figure-data", "CSV data behind fig3..fig7"},
    };
    for (const auto& [name, desc] : subs) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", config_path, "key = value config file; flags override it");
        for (const auto& f : common) sub->add_option(std::string("--") + f.name, flags[f.name], f.help);
        if (std::string(name) == "figure-data")
            sub->add_option("--figure", flags["figure"], "fig3 | fig4 | fig5 | fig6 | fig7")->required();
        if (std::string(name) == "fidelity") sub->add_option("files", files, "two grid-field files");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error(ErrorCode::config_invalid, e.what());
        return 2;
    }

    try {
        RunConfig cfg;
        cfg.method = app.get_subcommands().front()->get_name();
        if (!config_path.empty())
            for (const auto& [k, v] : read_config_file(config_path)) {
                if (k == "method") {
                    if (v != cfg.method)
                        fail(ErrorCode::config_invalid, "config method '" + v + "' differs from subcommand");
                    continue;
                }
                set_config_value(cfg, k, v);
            }
        const CLI::App* sub = app.get_subcommands().front();
        for (const auto& [k, v] : flags)
            if (const CLI::Option* opt = sub->get_option_no_throw("--" + k); opt && opt->count() > 0)
                set_config_value(cfg, k, v);
        validate(cfg);
        require(cfg.field_out.empty() || cfg.method == "stm" || cfg.method == "three-body",
                ErrorCode::config_invalid, "--field-out applies to stm and three-body only");
        set_num_threads(cfg.threads);

        Output o;
        if (cfg.method == "two-body") o = run_two_body(cfg);
        else if (cfg.method == "bo") o = run_bo(cfg);
        else if (cfg.method == "stm") o = run_stm(cfg);
        else if (cfg.method == "three-body") o = run_three_body(cfg);
        else if (cfg.method == "sweep") o = run_sweep(cfg);
        else if (cfg.method == "fidelity") o = run_fidelity(cfg, files);
        else o = run_figure(cfg);
        return emit(cfg, o);
    } catch (const Error& e) {
        const ErrorCode code = e.code();
        const bool config = code == ErrorCode::config_invalid || code == ErrorCode::io_failure;
        print_error(config ? code : ErrorCode::solver_failure,
                    config ? std::string(e.what()) : std::string(to_string(code)) + ": " + e.what());
        return config ? 2 : 1;
    } catch (const std::exception& e) {
        print_error(ErrorCode::solver_failure, e.what());
        return 1;
    }
}
