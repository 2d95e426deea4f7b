// splitpde: Schrodinger-Poisson splitting solver and convergence harness.
#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "cli.hpp"
#include "splitpde/errors.hpp"

namespace {

splitpde::cli::RunConfig load_config(const std::string& path) {
    if (path.empty()) return splitpde::cli::parse_config_text("");
    std::ifstream in(path);
    if (!in) throw splitpde::ConfigError("cannot open config file " + path);
    return splitpde::cli::parse_config(in);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"2D Schrodinger-Poisson solver: Gauss-Lobatto spectral elements in space, "
                 "operator splitting (orders 1-4) in time"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    bool check = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "key = value configuration file");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_flag("--check", check, "nonzero exit when the acceptance gate is breached");
    };

    CLI::App* solve = app.add_subcommand("solve", "propagate to T, write snapshots + norm log");
    CLI::App* ct = app.add_subcommand("converge-time", "temporal order sweep (CSV per scheme)");
    CLI::App* cs = app.add_subcommand("converge-space", "spatial order sweep (CSV per degree)");
    CLI::App* pc = app.add_subcommand("poisson-check", "manufactured Poisson solution study");
    for (CLI::App* sub : {solve, ct, cs, pc}) add_common(sub);

    CLI11_PARSE(app, argc, argv);

    try {
        const splitpde::cli::RunConfig config = load_config(config_path);
        if (solve->parsed()) return splitpde::cli::cmd_solve(config, out_dir, check);
        if (ct->parsed()) return splitpde::cli::cmd_converge_time(config, out_dir, check);
        if (cs->parsed()) return splitpde::cli::cmd_converge_space(config, out_dir, check);
        if (pc->parsed()) return splitpde::cli::cmd_poisson_check(config, out_dir, check);
    } catch (const splitpde::SolverError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
