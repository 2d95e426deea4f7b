#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "splitpde/flows.hpp"
#include "splitpde/harness.hpp"

namespace splitpde::cli {

/// Everything a run needs, with defaults reproducing the standard test case:
/// Omega = [0,5]^2, psi0 = 10 exp(-10((x-2.5)^2+(y-2.5)^2)), T = 0.1,
/// 25x25 elements of degree 2.
struct RunConfig {
    Rect domain{0.0, 5.0, 0.0, 5.0};
    int nx = 25;
    int ny = 25;
    int p = 2;
    std::string scheme = "strang";
    double tau = 5e-4;
    double T = 0.1;
    bool adaptive = false;
    double adaptive_tol = 1e-6;

    double expv_tol = 1e-12;
    double cg_tol = 1e-12;
    int cg_max_iter = 20000;
    std::string poisson_solver = "cg";  // cg | cholesky

    // Initial condition: the builtin gaussian profile. Custom profiles go
    // through the library API (interpolate accepts any callable).
    std::string initial = "gaussian";
    double amplitude = 10.0;
    double width = 10.0;
    double center_x = 2.5;
    double center_y = 2.5;

    std::vector<double> snapshot_times;  // empty: final time only

    // Sweep controls for the converge-* and poisson-check subcommands.
    std::vector<std::string> schemes{"lie", "strang", "ruth3", "blanes_moan4"};
    std::vector<double> tau_list{4e-3, 2e-3, 1e-3, 5e-4};
    std::string reference_scheme = "blanes_moan4";
    double reference_tau = 0.0;  // 0: min(tau_list)/16
    std::vector<int> p_list{1, 2};
    std::vector<double> h_list{1.0, 0.5, 0.25, 0.125, 0.0625};
    double reference_h = 0.0;  // 0: min(h_list)/2
    int threads = 0;
};

/// Parses `key = value` lines with '#' comments. Unknown keys are rejected
/// with their line number; missing keys keep their defaults; all values are
/// validated. An empty stream yields the defaults above.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_text(const std::string& text);

/// The complete effective configuration in canonical order and formatting;
/// echoed into the header of every output file.
std::vector<std::pair<std::string, std::string>> effective_config(const RunConfig& config);

SolverOptions solver_options(const RunConfig& config);
std::function<std::complex<double>(double, double)> initial_condition(const RunConfig& config);

/// Snapshot I/O: rows `x y re im` over interior nodes in lexicographic order,
/// 17 significant digits; the boundary is identically zero and is not stored.
void write_snapshot(std::ostream& os, const RunConfig& config, const Mesh& mesh,
                    const State& state);
struct Snapshot {
    std::vector<double> x, y;
    std::vector<std::complex<double>> values;
    double time = 0.0;
};
Snapshot read_snapshot(std::istream& is);

/// Subcommands. Return 0 on success, 2 on an acceptance-gate breach when
/// check is set; solver failures surface as exceptions.
int cmd_solve(const RunConfig& config, const std::string& out_dir, bool check);
int cmd_converge_time(const RunConfig& config, const std::string& out_dir, bool check);
int cmd_converge_space(const RunConfig& config, const std::string& out_dir, bool check);
int cmd_poisson_check(const RunConfig& config, const std::string& out_dir, bool check);

}  // namespace splitpde::cli
