#pragma once

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "trimer1d/chebgrid.hpp"
#include "trimer1d/errors.hpp"
#include "trimer1d/stm.hpp"

namespace trimer1d {

/// Shortest exact text for a double: 17 significant digits, round-trips through strtod.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& s, const std::string& what) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    // ERANGE on underflow still yields the nearest subnormal, which round-trips
    if (s.empty() || end != s.c_str() + s.size() || (errno == ERANGE && std::isinf(v)))
        fail(ErrorCode::config_invalid, what + ": not a number: '" + s + "'");
    return v;
}

inline long parse_int(const std::string& s, const std::string& what) {
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
        fail(ErrorCode::config_invalid, what + ": not an integer: '" + s + "'");
    return v;
}

// ---------------------------------------------------------------------------
// Run configuration

/// Resolved run parameters. Unset optionals fall back to the solver defaults.
struct RunConfig {
    std::string method;  // two-body | bo | stm | three-body | sweep | fidelity | figure-data
    double mass_ratio = 1.0;
    std::string shape = "gaussian";
    std::optional<double> depth;
    std::optional<double> two_body_energy;
    std::string parity = "bosonic";
    std::optional<int> grid_n;
    std::optional<int> grid_nx;
    std::optional<int> grid_ny;
    std::optional<double> map_length;
    double tol = 1e-8;
    int n_states = 1;
    std::string energies;  // comma-separated E_g list for sweeps
    std::string figure;    // fig3 .. fig7
    std::string out;
    std::string format = "csv";
    std::string field_out;
    int threads = 1;

    int parity_sign() const { return parity == "fermionic" ? -1 : 1; }
};

/// Recognized keys, in emission order.
inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "method",   "mass-ratio", "shape",    "depth",    "two-body-energy", "parity", "grid-n",
        "grid-nx",  "grid-ny",    "map-length", "tol",    "n-states",        "energies", "figure",
        "out",      "format",     "field-out", "threads"};
    return keys;
}

inline void set_config_value(RunConfig& c, const std::string& key, const std::string& value) {
    const std::string what = "config key '" + key + "'";
    if (key == "method") c.method = value;
    else if (key == "mass-ratio") c.mass_ratio = parse_double(value, what);
    else if (key == "shape") c.shape = value;
    else if (key == "depth") c.depth = parse_double(value, what);
    else if (key == "two-body-energy") c.two_body_energy = parse_double(value, what);
    else if (key == "parity") c.parity = value;
    else if (key == "grid-n") c.grid_n = static_cast<int>(parse_int(value, what));
    else if (key == "grid-nx") c.grid_nx = static_cast<int>(parse_int(value, what));
    else if (key == "grid-ny") c.grid_ny = static_cast<int>(parse_int(value, what));
    else if (key == "map-length") c.map_length = parse_double(value, what);
    else if (key == "tol") c.tol = parse_double(value, what);
    else if (key == "n-states") c.n_states = static_cast<int>(parse_int(value, what));
    else if (key == "energies") c.energies = value;
    else if (key == "figure") c.figure = value;
    else if (key == "out") c.out = value;
    else if (key == "format") c.format = value;
    else if (key == "field-out") c.field_out = value;
    else if (key == "threads") c.threads = static_cast<int>(parse_int(value, what));
    else fail(ErrorCode::config_invalid, "unknown config key '" + key + "'");
}

/// key = value lines; '#' starts a comment; underscores in keys are read as dashes.
inline std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail(ErrorCode::config_invalid, "config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        for (char& ch : key)
            if (ch == '_') ch = '-';
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

inline std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(ErrorCode::io_failure, "cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

inline void validate(const RunConfig& c) {
    static const std::vector<std::string> methods = {"two-body", "bo",       "stm",        "three-body",
                                                     "sweep",    "fidelity", "figure-data"};
    auto in = [](const std::string& v, std::initializer_list<const char*> set) {
        for (const char* s : set)
            if (v == s) return true;
        return false;
    };
    auto bad = [](const std::string& msg) { fail(ErrorCode::config_invalid, msg); };
    if (std::find(methods.begin(), methods.end(), c.method) == methods.end()) bad("unknown method '" + c.method + "'");
    if (!(c.mass_ratio > 0.0 && std::isfinite(c.mass_ratio))) bad("mass-ratio must be positive");
    if (!in(c.shape, {"contact", "gaussian", "lorentzian3", "cubic_lorentzian"})) bad("unknown shape '" + c.shape + "'");
    if (!in(c.parity, {"bosonic", "fermionic"})) bad("parity must be bosonic or fermionic");
    if (!in(c.format, {"csv", "json"})) bad("format must be csv or json");
    if (c.depth && !(*c.depth < 0.0 && std::isfinite(*c.depth))) bad("depth must be negative");
    if (c.two_body_energy && !(*c.two_body_energy < 0.0 && std::isfinite(*c.two_body_energy)))
        bad("two-body-energy must be negative");
    if (c.grid_n && *c.grid_n < 4) bad("grid-n must be at least 4");
    if (c.grid_nx && (*c.grid_nx < 4 || *c.grid_nx % 2)) bad("grid-nx must be even and at least 4");
    if (c.grid_ny && (*c.grid_ny < 4 || *c.grid_ny % 2)) bad("grid-ny must be even and at least 4");
    if (c.map_length && !(*c.map_length > 0.0)) bad("map-length must be positive");
    if (!(c.tol > 0.0 && c.tol < 1.0)) bad("tol must lie in (0, 1)");
    if (c.n_states < 1 || c.n_states > 64) bad("n-states must lie in [1, 64]");
    if (c.threads < 0) bad("threads must be non-negative");
    if (c.method == "figure-data" && !in(c.figure, {"fig3", "fig4", "fig5", "fig6", "fig7"}))
        bad("figure must be one of fig3..fig7");
}

/// Every key with its resolved value; unset optionals are empty strings.
inline std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c) {
    auto opt_d = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    auto opt_i = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
    return {{"method", c.method},
            {"mass-ratio", format_double(c.mass_ratio)},
            {"shape", c.shape},
            {"depth", opt_d(c.depth)},
            {"two-body-energy", opt_d(c.two_body_energy)},
            {"parity", c.parity},
            {"grid-n", opt_i(c.grid_n)},
            {"grid-nx", opt_i(c.grid_nx)},
            {"grid-ny", opt_i(c.grid_ny)},
            {"map-length", opt_d(c.map_length)},
            {"tol", format_double(c.tol)},
            {"n-states", std::to_string(c.n_states)},
            {"energies", c.energies},
            {"figure", c.figure},
            {"out", c.out},
            {"format", c.format},
            {"field-out", c.field_out},
            {"threads", std::to_string(c.threads)}};
}

inline nlohmann::ordered_json config_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    for (const auto& [k, v] : config_entries(c)) j[k] = v;
    return j;
}

// ---------------------------------------------------------------------------
// Result tables

using Cell = std::variant<double, long, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row) {
        require(row.size() == columns.size(), ErrorCode::dimension_mismatch, "Table::add: row width mismatch");
        rows.push_back(std::move(row));
    }
};

inline std::string cell_text(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
    if (const auto* i = std::get_if<long>(&c)) return std::to_string(*i);
    const std::string& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + "\"";
}

/// Config echo as '# key=value' lines, then a header row and data rows.
inline std::string to_csv(const Table& t, const RunConfig* config = nullptr) {
    std::string s;
    if (config)
        for (const auto& [k, v] : config_entries(*config)) s += "# " + k + "=" + v + "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + t.columns[i];
    s += "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + cell_text(row[i]);
        s += "\n";
    }
    return s;
}

inline nlohmann::ordered_json cell_json(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) {
        if (std::isfinite(*d)) return *d;
        return format_double(*d);
    }
    if (const auto* i = std::get_if<long>(&c)) return *i;
    return std::get<std::string>(c);
}

inline nlohmann::ordered_json to_json(const Table& t, const RunConfig* config = nullptr) {
    nlohmann::ordered_json j;
    if (config) j["config"] = config_json(*config);
    j["columns"] = t.columns;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
        nlohmann::ordered_json r;
        for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = cell_json(row[i]);
        j["rows"].push_back(std::move(r));
    }
    return j;
}

inline void write_text(const std::string& path, const std::string& text) {
    if (const auto dir = std::filesystem::path(path).parent_path(); !dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(ErrorCode::io_failure, "cannot open '" + path + "' for writing");
    f << text;
    if (!f) fail(ErrorCode::io_failure, "write to '" + path + "' failed");
}

inline std::string read_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail(ErrorCode::io_failure, "cannot open '" + path + "' for reading");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// Grid field files

/// A 2D field with the grid it lives on and its labels.
struct GridFieldFile {
    Index nx = 0, ny = 0;
    double lx = 1.0, ly = 1.0;
    int parity_x = 1, parity_y = 1;
    double energy = 0.0;
    std::map<std::string, std::string> metadata;  // values must not contain newlines
    Vector values;                                 // row-major, index i*ny + j

    Grid2D grid() const { return make_grid2d(nx, lx, ny, ly); }
};

inline constexpr const char* grid_field_magic = "trimer1d-gridfield 1";

inline std::string serialize(const GridFieldFile& f) {
    require(f.values.size() == f.nx * f.ny, ErrorCode::dimension_mismatch, "GridFieldFile: payload size mismatch");
    std::string s = std::string("# ") + grid_field_magic + "\n";
    s += "nx " + std::to_string(f.nx) + "\n";
    s += "ny " + std::to_string(f.ny) + "\n";
    s += "lx " + format_double(f.lx) + "\n";
    s += "ly " + format_double(f.ly) + "\n";
    s += "parity_x " + std::to_string(f.parity_x) + "\n";
    s += "parity_y " + std::to_string(f.parity_y) + "\n";
    s += "energy " + format_double(f.energy) + "\n";
    for (const auto& [k, v] : f.metadata) {
        require(k.find_first_of(" \n") == std::string::npos && v.find('\n') == std::string::npos,
                ErrorCode::invalid_argument, "GridFieldFile: metadata must be single-line, key without spaces");
        s += "meta " + k + " " + v + "\n";
    }
    s += "data\n";
    for (Index i = 0; i < f.values.size(); ++i) s += format_double(f.values[i]) + "\n";
    return s;
}

inline GridFieldFile deserialize_grid_field(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    auto bad = [](const std::string& m) { fail(ErrorCode::io_failure, "GridFieldFile: " + m); };
    if (!std::getline(in, line) || line != std::string("# ") + grid_field_magic) bad("missing header line");
    GridFieldFile f;
    bool have_nx = false, have_ny = false;
    while (std::getline(in, line) && line != "data") {
        const auto sp = line.find(' ');
        if (sp == std::string::npos) bad("malformed header line '" + line + "'");
        const std::string key = line.substr(0, sp), val = line.substr(sp + 1);
        if (key == "nx") f.nx = parse_int(val, "nx"), have_nx = true;
        else if (key == "ny") f.ny = parse_int(val, "ny"), have_ny = true;
        else if (key == "lx") f.lx = parse_double(val, "lx");
        else if (key == "ly") f.ly = parse_double(val, "ly");
        else if (key == "parity_x") f.parity_x = static_cast<int>(parse_int(val, "parity_x"));
        else if (key == "parity_y") f.parity_y = static_cast<int>(parse_int(val, "parity_y"));
        else if (key == "energy") f.energy = parse_double(val, "energy");
        else if (key == "meta") {
            const auto sp2 = val.find(' ');
            if (sp2 == std::string::npos) f.metadata[val] = "";
            else f.metadata[val.substr(0, sp2)] = val.substr(sp2 + 1);
        } else bad("unknown header key '" + key + "'");
    }
    if (line != "data") bad("missing data section");
    if (!have_nx || !have_ny || f.nx < 1 || f.ny < 1) bad("grid size missing");
    f.values.resize(f.nx * f.ny);
    for (Index i = 0; i < f.values.size(); ++i) {
        if (!std::getline(in, line)) bad("payload truncated");
        f.values[i] = line == "nan" ? std::nan("") : parse_double(line, "payload");
    }
    return f;
}

inline void write_grid_field(const std::string& path, const GridFieldFile& f) { write_text(path, serialize(f)); }

inline GridFieldFile read_grid_field(const std::string& path) {
    try {
        return deserialize_grid_field(read_text(path));
    } catch (const Error& e) {
        fail(e.code(), std::string(e.what()) + " (" + path + ")");
    }
}

// ---------------------------------------------------------------------------
// STM scan cache

/// Scan with results memoized under $TRIMER1D_CACHE_DIR, keyed by every input that
/// affects the energies. Without the variable this is a plain scan.
inline ScanResult cached_scan_energies(const MassParams& m, int parity, const StmLineGrid& grid,
                                       std::pair<double, double> window, int n_states,
                                       const ScanOptions& opt = {}) {
    const char* dir = std::getenv("TRIMER1D_CACHE_DIR");
    if (!dir || !*dir) return scan_energies(m, parity, grid, window, n_states, opt);
    const std::string key = "stm_r" + format_double(m.mass_ratio) + "_p" + std::to_string(parity) + "_px" +
                            std::to_string(opt.parity_x) + "_n" + std::to_string(grid.n_points) + "_L" +
                            format_double(grid.map_length) + "_w" + format_double(window.first) + "_" +
                            format_double(window.second) + "_k" + std::to_string(n_states) + "_pr" +
                            std::to_string(opt.probes) + "_t" + format_double(opt.energy_tol);
    const std::filesystem::path path = std::filesystem::path(dir) / (key + ".json");
    std::error_code ec;
    if (std::filesystem::exists(path, ec)) {
        try {
            const auto j = nlohmann::json::parse(read_text(path.string()));
            ScanResult r;
            for (const auto& e : j.at("energies")) r.energies.push_back(parse_double(e.get<std::string>(), "cache"));
            for (const auto& w : j.at("warnings")) r.warnings.push_back(w.get<std::string>());
            return r;
        } catch (const std::exception&) {
            // unreadable entry: recompute and overwrite
        }
    }
    ScanResult r = scan_energies(m, parity, grid, window, n_states, opt);
    nlohmann::ordered_json j;
    j["key"] = key;
    j["energies"] = nlohmann::ordered_json::array();
    for (double e : r.energies) j["energies"].push_back(format_double(e));
    j["warnings"] = r.warnings;
    try {
        write_text(path.string(), j.dump(1) + "\n");
    } catch (const Error&) {
        // cache is best-effort
    }
    return r;
}

} // namespace trimer1d
