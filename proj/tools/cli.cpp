#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "splitpde/errors.hpp"

namespace splitpde::cli {

namespace {

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string token;
    for (char ch : s) {
        if (ch == ',' || ch == ' ' || ch == '\t') {
            if (!token.empty()) out.push_back(std::move(token));
            token.clear();
        } else {
            token.push_back(ch);
        }
    }
    if (!token.empty()) out.push_back(std::move(token));
    return out;
}

double parse_double(const std::string& s, const std::string& key, int line) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        pos = std::string::npos;
    }
    if (pos != s.size()) {
        throw ConfigError("config line " + std::to_string(line) + ": bad number for '" + key +
                          "': " + s);
    }
    return v;
}

int parse_int(const std::string& s, const std::string& key, int line) {
    const double v = parse_double(s, key, line);
    if (v != std::floor(v)) {
        throw ConfigError("config line " + std::to_string(line) + ": '" + key +
                          "' must be an integer");
    }
    return static_cast<int>(v);
}

bool parse_bool(const std::string& s, const std::string& key, int line) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("config line " + std::to_string(line) + ": '" + key +
                      "' must be true or false");
}

void validate(const RunConfig& c) {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError("config: " + what);
    };
    require(c.domain.bx > c.domain.ax && c.domain.by > c.domain.ay,
            "field 'domain' is degenerate");
    require(c.nx >= 1 && c.ny >= 1, "fields 'nx'/'ny' must be >= 1");
    require(c.p >= 1 && c.p <= 16, "field 'p' must be in [1, 16]");
    require(c.tau > 0.0 && std::isfinite(c.tau), "field 'tau' must be positive");
    require(c.T > 0.0 && std::isfinite(c.T), "field 'T' must be positive");
    require(c.adaptive_tol > 0.0, "field 'adaptive_tol' must be positive");
    require(c.expv_tol > 0.0, "field 'expv_tol' must be positive");
    require(c.cg_tol > 0.0, "field 'cg_tol' must be positive");
    require(c.cg_max_iter >= 1, "field 'cg_max_iter' must be >= 1");
    require(c.poisson_solver == "cg" || c.poisson_solver == "cholesky",
            "field 'poisson_solver' must be cg or cholesky");
    require(c.initial == "gaussian",
            "field 'initial': only the builtin 'gaussian' is available here; custom "
            "profiles go through the library interpolate() hook");
    require(std::isfinite(c.amplitude), "field 'amplitude' must be finite");
    require(c.width > 0.0, "field 'width' must be positive");
    require(!c.schemes.empty(), "field 'schemes' must not be empty");
    for (const auto& s : c.schemes) scheme_registry(s);
    scheme_registry(c.scheme);
    scheme_registry(c.reference_scheme);
    require(!c.tau_list.empty(), "field 'tau_list' must not be empty");
    for (double t : c.tau_list) require(t > 0.0, "field 'tau_list' entries must be positive");
    require(std::is_sorted(c.tau_list.rbegin(), c.tau_list.rend()),
            "field 'tau_list' must be decreasing");
    require(!c.p_list.empty(), "field 'p_list' must not be empty");
    for (int p : c.p_list) require(p >= 1 && p <= 16, "field 'p_list' entries must be in [1,16]");
    require(!c.h_list.empty(), "field 'h_list' must not be empty");
    for (double h : c.h_list) require(h > 0.0, "field 'h_list' entries must be positive");
    require(std::is_sorted(c.h_list.rbegin(), c.h_list.rend()),
            "field 'h_list' must be decreasing");
    for (double t : c.snapshot_times)
        require(t >= 0.0 && t <= c.T, "field 'snapshot_times' entries must lie in [0, T]");
    require(c.threads >= 0, "field 'threads' must be >= 0");
}

}  // namespace

RunConfig parse_config(std::istream& in) {
    RunConfig config;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::size_t eq = line.find('=');
        std::string key = line.substr(0, eq == std::string::npos ? line.size() : eq);
        key.erase(std::remove_if(key.begin(), key.end(), [](char c) { return std::isspace(c); }),
                  key.end());
        if (key.empty()) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": missing '=' after '" +
                              key + "'");
        }
        std::string value = line.substr(eq + 1);
        const std::size_t b = value.find_first_not_of(" \t\r");
        const std::size_t e = value.find_last_not_of(" \t\r");
        value = b == std::string::npos ? "" : value.substr(b, e - b + 1);
        if (value.empty()) {
            throw ConfigError("config line " + std::to_string(line_no) + ": empty value for '" +
                              key + "'");
        }

        auto vals = split_list(value);
        if (key == "domain") {
            if (vals.size() != 4)
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": 'domain' needs 4 numbers (ax bx ay by)");
            config.domain = {parse_double(vals[0], key, line_no), parse_double(vals[1], key, line_no),
                             parse_double(vals[2], key, line_no), parse_double(vals[3], key, line_no)};
        } else if (key == "nx") {
            config.nx = parse_int(value, key, line_no);
        } else if (key == "ny") {
            config.ny = parse_int(value, key, line_no);
        } else if (key == "p") {
            config.p = parse_int(value, key, line_no);
        } else if (key == "scheme") {
            config.scheme = value;
        } else if (key == "tau") {
            config.tau = parse_double(value, key, line_no);
        } else if (key == "T") {
            config.T = parse_double(value, key, line_no);
        } else if (key == "adaptive") {
            config.adaptive = parse_bool(value, key, line_no);
        } else if (key == "adaptive_tol") {
            config.adaptive_tol = parse_double(value, key, line_no);
        } else if (key == "expv_tol") {
            config.expv_tol = parse_double(value, key, line_no);
        } else if (key == "cg_tol") {
            config.cg_tol = parse_double(value, key, line_no);
        } else if (key == "cg_max_iter") {
            config.cg_max_iter = parse_int(value, key, line_no);
        } else if (key == "poisson_solver") {
            config.poisson_solver = value;
        } else if (key == "initial") {
            config.initial = value;
        } else if (key == "amplitude") {
            config.amplitude = parse_double(value, key, line_no);
        } else if (key == "width") {
            config.width = parse_double(value, key, line_no);
        } else if (key == "center_x") {
            config.center_x = parse_double(value, key, line_no);
        } else if (key == "center_y") {
            config.center_y = parse_double(value, key, line_no);
        } else if (key == "snapshot_times") {
            config.snapshot_times.clear();
            for (const auto& v : vals)
                config.snapshot_times.push_back(parse_double(v, key, line_no));
        } else if (key == "schemes") {
            config.schemes = vals;
        } else if (key == "tau_list") {
            config.tau_list.clear();
            for (const auto& v : vals) config.tau_list.push_back(parse_double(v, key, line_no));
        } else if (key == "reference_scheme") {
            config.reference_scheme = value;
        } else if (key == "reference_tau") {
            config.reference_tau = parse_double(value, key, line_no);
        } else if (key == "p_list") {
            config.p_list.clear();
            for (const auto& v : vals) config.p_list.push_back(parse_int(v, key, line_no));
        } else if (key == "h_list") {
            config.h_list.clear();
            for (const auto& v : vals) config.h_list.push_back(parse_double(v, key, line_no));
        } else if (key == "reference_h") {
            config.reference_h = parse_double(value, key, line_no);
        } else if (key == "threads") {
            config.threads = parse_int(value, key, line_no);
        } else {
            throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key +
                              "'");
        }
    }
    validate(config);
    return config;
}

RunConfig parse_config_text(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

std::vector<std::pair<std::string, std::string>> effective_config(const RunConfig& c) {
    auto join_d = [](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt_g17(v[i]);
        return s;
    };
    auto join_i = [](const std::vector<int>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
        return s;
    };
    auto join_s = [](const std::vector<std::string>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + v[i];
        return s;
    };
    std::vector<std::pair<std::string, std::string>> e;
    e.emplace_back("domain", fmt_g17(c.domain.ax) + " " + fmt_g17(c.domain.bx) + " " +
                                 fmt_g17(c.domain.ay) + " " + fmt_g17(c.domain.by));
    e.emplace_back("nx", std::to_string(c.nx));
    e.emplace_back("ny", std::to_string(c.ny));
    e.emplace_back("p", std::to_string(c.p));
    e.emplace_back("scheme", c.scheme);
    e.emplace_back("tau", fmt_g17(c.tau));
    e.emplace_back("T", fmt_g17(c.T));
    e.emplace_back("adaptive", c.adaptive ? "true" : "false");
    e.emplace_back("adaptive_tol", fmt_g17(c.adaptive_tol));
    e.emplace_back("expv_tol", fmt_g17(c.expv_tol));
    e.emplace_back("cg_tol", fmt_g17(c.cg_tol));
    e.emplace_back("cg_max_iter", std::to_string(c.cg_max_iter));
    e.emplace_back("poisson_solver", c.poisson_solver);
    e.emplace_back("initial", c.initial);
    e.emplace_back("amplitude", fmt_g17(c.amplitude));
    e.emplace_back("width", fmt_g17(c.width));
    e.emplace_back("center_x", fmt_g17(c.center_x));
    e.emplace_back("center_y", fmt_g17(c.center_y));
    e.emplace_back("snapshot_times",
                   c.snapshot_times.empty() ? "final" : join_d(c.snapshot_times));
    e.emplace_back("schemes", join_s(c.schemes));
    e.emplace_back("tau_list", join_d(c.tau_list));
    e.emplace_back("reference_scheme", c.reference_scheme);
    e.emplace_back("reference_tau", fmt_g17(c.reference_tau));
    e.emplace_back("p_list", join_i(c.p_list));
    e.emplace_back("h_list", join_d(c.h_list));
    e.emplace_back("reference_h", fmt_g17(c.reference_h));
    e.emplace_back("threads", std::to_string(c.threads));
    return e;
}

SolverOptions solver_options(const RunConfig& c) {
    SolverOptions opts;
    opts.expv_tol = c.expv_tol;
    opts.poisson.tol = c.cg_tol;
    opts.poisson.max_iter = c.cg_max_iter;
    opts.poisson.method = c.poisson_solver == "cholesky" ? PoissonOptions::Method::cholesky
                                                         : PoissonOptions::Method::cg;
    return opts;
}

std::function<std::complex<double>(double, double)> initial_condition(const RunConfig& c) {
    return gaussian_initial(c.amplitude, c.width, c.center_x, c.center_y);
}

void write_snapshot(std::ostream& os, const RunConfig& config, const Mesh& mesh,
                    const State& state) {
    os << "# splitpde snapshot (x y re im over interior nodes, lexicographic; "
          "boundary is identically zero)\n";
    for (const auto& [k, v] : effective_config(config)) os << "# " << k << " = " << v << "\n";
    os << "# time = " << fmt_g17(state.t) << "\n";
    os << "# rows = " << state.c.size() << "\n";
    for (std::size_t i = 0; i < state.c.size(); ++i) {
        const auto [x, y] = mesh.node_coords(mesh.interior()[static_cast<int>(i)]);
        os << fmt_g17(x) << ' ' << fmt_g17(y) << ' ' << fmt_g17(state.c[i].real()) << ' '
           << fmt_g17(state.c[i].imag()) << '\n';
    }
}

Snapshot read_snapshot(std::istream& is) {
    Snapshot snap;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string tag = "# time = ";
            if (line.rfind(tag, 0) == 0) snap.time = std::stod(line.substr(tag.size()));
            continue;
        }
        std::istringstream row(line);
        double x, y, re, im;
        if (!(row >> x >> y >> re >> im)) {
            throw InputError("read_snapshot: malformed row: " + line);
        }
        snap.x.push_back(x);
        snap.y.push_back(y);
        snap.values.emplace_back(re, im);
    }
    return snap;
}

namespace {

void write_table_files(const std::string& out_dir, const std::string& stem,
                       const std::vector<ConvergenceTable>& tables, const RunConfig& config) {
    std::filesystem::create_directories(out_dir);
    const auto echo = effective_config(config);
    for (const auto& table : tables) {
        std::string label = table.label;
        std::replace(label.begin(), label.end(), '=', '_');
        const std::string path = out_dir + "/" + stem + "_" + label + ".csv";
        std::ofstream os(path);
        if (!os) throw InputError("cannot open output file " + path);
        write_csv(os, table, echo);
        std::cout << "wrote " << path << "\n";
    }
}

void print_table(const ConvergenceTable& table) {
    std::cout << table.label << ":\n";
    for (const auto& row : table.rows) {
        std::printf("  param %-12.6g error_l2 %-14.6e", row.param, row.error_l2);
        if (std::isfinite(row.observed_order)) {
            std::printf(" order %6.3f%s", row.observed_order,
                        row.below_floor ? " (below floor)" : "");
        }
        std::printf("\n");
    }
    if (std::isfinite(table.fitted_order)) {
        std::printf("  fitted order %.3f over rows %d..%d\n", table.fitted_order,
                    table.window_begin, table.window_end - 1);
    }
}

}  // namespace

int cmd_solve(const RunConfig& config, const std::string& out_dir, bool check) {
    std::filesystem::create_directories(out_dir);
    const Operators ops = build_operators(build_mesh(config.domain, config.nx, config.ny, config.p));
    const std::vector<std::complex<double>> c0 = interpolate(ops.mesh, initial_condition(config));
    Stepper stepper(ops, solver_options(config));

    const double norm0 = m_norm(c0, ops.mass);
    std::ofstream norm_log(out_dir + "/norm_log.csv");
    for (const auto& [k, v] : effective_config(config)) norm_log << "# " << k << " = " << v << "\n";
    norm_log << "step,time,m_norm,rel_drift\n";
    double max_drift = 0.0;

    std::vector<double> snap_times = config.snapshot_times;
    if (snap_times.empty()) snap_times.push_back(config.T);
    std::sort(snap_times.begin(), snap_times.end());

    std::vector<State> snapshots;
    double next_snap = snap_times.empty() ? -1.0 : snap_times.front();
    std::size_t snap_idx = 0;

    const Observer observer = [&](const StepRecord& rec) {
        const double drift = std::abs(rec.m_norm - norm0) / norm0;
        max_drift = std::max(max_drift, drift);
        norm_log << rec.step << ',' << fmt_g17(rec.time) << ',' << fmt_g17(rec.m_norm) << ','
                 << fmt_g17(drift) << '\n';
        ObserverSignal sig;
        while (snap_idx < snap_times.size() && rec.time >= snap_times[snap_idx] - 1e-12) {
            sig.take_snapshot = true;
            ++snap_idx;
        }
        (void)next_snap;
        return sig;
    };

    State final;
    if (config.adaptive) {
        AdaptiveResult res = evolve_adaptive(stepper, scheme_registry(config.scheme), config.tau,
                                             config.T, config.adaptive_tol, State{c0, 0.0},
                                             observer);
        std::cout << "adaptive run: " << res.accepted << " accepted, " << res.rejected
                  << " rejected steps\n";
        final = std::move(res.final);
        snapshots.push_back(final);
    } else {
        EvolveResult res = evolve(stepper, scheme_registry(config.scheme), config.tau, config.T,
                                  State{c0, 0.0}, observer);
        final = std::move(res.final);
        snapshots = std::move(res.snapshots);
        if (snapshots.empty()) snapshots.push_back(final);
    }

    for (const State& s : snapshots) {
        char name[64];
        std::snprintf(name, sizeof(name), "snapshot_t%.6g.txt", s.t);
        std::ofstream os(out_dir + "/" + std::string(name));
        write_snapshot(os, config, ops.mesh, s);
        std::cout << "wrote " << out_dir << "/" << name << "\n";
    }
    std::cout << "final time " << final.t << ", M-norm " << m_norm(final.c, ops.mass)
              << ", max relative norm drift " << max_drift << "\n";

    if (check && max_drift > 1e-10) {
        std::cout << "CHECK FAILED: relative norm drift " << max_drift << " > 1e-10\n";
        return 2;
    }
    return 0;
}

int cmd_converge_time(const RunConfig& config, const std::string& out_dir, bool check) {
    TemporalStudyConfig study;
    study.problem.domain = config.domain;
    study.problem.nx = config.nx;
    study.problem.ny = config.ny;
    study.problem.p = config.p;
    study.problem.initial = initial_condition(config);
    study.problem.T = config.T;
    study.problem.solver = solver_options(config);
    study.schemes = config.schemes;
    study.taus = config.tau_list;
    study.reference_scheme = config.reference_scheme;
    study.reference_tau = config.reference_tau;
    study.threads = config.threads;

    const auto tables = temporal_study(study);
    write_table_files(out_dir, "converge_time", tables, config);

    int rc = 0;
    for (const auto& table : tables) {
        print_table(table);
        if (!check) continue;
        const int nominal = scheme_registry(table.label).order;
        if (!std::isfinite(table.fitted_order) ||
            std::abs(table.fitted_order - nominal) > 0.25) {
            std::cout << "CHECK FAILED: " << table.label << " fitted order "
                      << table.fitted_order << " not within 0.25 of " << nominal << "\n";
            rc = 2;
        }
    }
    return rc;
}

int cmd_converge_space(const RunConfig& config, const std::string& out_dir, bool check) {
    SpatialStudyConfig study;
    study.domain = config.domain;
    study.initial = initial_condition(config);
    study.T = config.T;
    study.tau = config.tau;
    study.scheme = config.scheme;
    study.p_list = config.p_list;
    study.h_list = config.h_list;
    study.reference_h = config.reference_h;
    study.solver = solver_options(config);
    study.threads = config.threads;

    const auto tables = spatial_study(study);
    write_table_files(out_dir, "converge_space", tables, config);

    int rc = 0;
    for (std::size_t i = 0; i < tables.size(); ++i) {
        print_table(tables[i]);
        if (!check) continue;
        const auto& rows = tables[i].rows;
        const double finest = rows.back().error_l2;
        for (std::size_t r = 0; r + 1 < rows.size(); ++r) {
            if (finest >= rows[r].error_l2) continue;
            std::cout << "CHECK FAILED: " << tables[i].label
                      << " monotonicity gate: finest-h error is not the smallest\n";
            rc = 2;
        }
        const int expected = config.p_list[i] + 1;
        if (!std::isfinite(tables[i].fitted_order) ||
            std::abs(tables[i].fitted_order - expected) > 0.3) {
            std::cout << "CHECK FAILED: " << tables[i].label << " fitted slope "
                      << tables[i].fitted_order << " not within 0.3 of " << expected << "\n";
            rc = 2;
        }
    }
    return rc;
}

int cmd_poisson_check(const RunConfig& config, const std::string& out_dir, bool check) {
    PoissonStudyConfig study;
    study.domain = config.domain;
    study.p_list = config.p_list;
    study.h_list = config.h_list;
    study.solver = solver_options(config).poisson;
    study.threads = config.threads;

    const auto tables = poisson_study(study);
    write_table_files(out_dir, "poisson_check", tables, config);

    int rc = 0;
    for (std::size_t i = 0; i < tables.size(); ++i) {
        print_table(tables[i]);
        if (!check) continue;
        const int expected = config.p_list[i] + 1;
        if (!std::isfinite(tables[i].fitted_order) ||
            std::abs(tables[i].fitted_order - expected) > 0.3) {
            std::cout << "CHECK FAILED: " << tables[i].label << " slope "
                      << tables[i].fitted_order << " not within 0.3 of " << expected << "\n";
            rc = 2;
        }
    }
    return rc;
}

}  // namespace splitpde::cli
