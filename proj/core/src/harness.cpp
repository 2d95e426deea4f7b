#include "splitpde/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "../src/detail_rules.hpp"
#include "splitpde/errors.hpp"

namespace splitpde {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

double l2_error(std::span<const std::complex<double>> a,
                std::span<const std::complex<double>> b, std::span<const double> mass) {
    if (a.size() != b.size() || a.size() != mass.size()) {
        throw InputError("l2_error: layout mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += mass[i] * std::norm(a[i] - b[i]);
    return std::sqrt(acc);
}

double h1_seminorm_error(std::span<const std::complex<double>> a,
                         std::span<const std::complex<double>> b, const CsrMatrix& k) {
    if (a.size() != b.size() || static_cast<int>(a.size()) != k.n) {
        throw InputError("h1_seminorm_error: layout mismatch");
    }
    std::vector<std::complex<double>> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
    const std::complex<double> q = k.quadratic_form(diff, diff);
    return std::sqrt(std::max(0.0, q.real()));
}

double l2_error_vs_function(const Mesh& mesh, std::span<const std::complex<double>> coeffs,
                            const std::function<std::complex<double>(double, double)>& exact) {
    if (static_cast<int>(coeffs.size()) != mesh.n_interior()) {
        throw InputError("l2_error_vs_function: layout mismatch");
    }
    const GLBasis& basis = mesh.basis();
    const int n1 = basis.n_nodes();
    std::vector<double> qx, qw;
    detail::gauss_legendre(basis.degree + 3, qx, qw);
    const int nq = static_cast<int>(qx.size());

    std::vector<double> lv(static_cast<std::size_t>(nq) * n1);
    for (int q = 0; q < nq; ++q)
        for (int i = 0; i < n1; ++i)
            lv[static_cast<std::size_t>(q) * n1 + i] = lagrange_eval(basis, i, qx[q]);

    std::vector<std::complex<double>> cell(static_cast<std::size_t>(n1) * n1);
    double acc = 0.0;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        for (int j = 0; j < n1; ++j) {
            for (int i = 0; i < n1; ++i) {
                const int dof = mesh.interior_index(mesh.global_node(e, i, j));
                cell[static_cast<std::size_t>(j) * n1 + i] = dof >= 0 ? coeffs[dof] : 0.0;
            }
        }
        const int kx = e % mesh.nx();
        const int ky = e / mesh.nx();
        const double x0 = mesh.domain().ax + kx * mesh.hx();
        const double y0 = mesh.domain().ay + ky * mesh.hy();
        for (int qj = 0; qj < nq; ++qj) {
            const double y = y0 + 0.5 * (qx[qj] + 1.0) * mesh.hy();
            for (int qi = 0; qi < nq; ++qi) {
                const double x = x0 + 0.5 * (qx[qi] + 1.0) * mesh.hx();
                std::complex<double> val = 0.0;
                for (int j = 0; j < n1; ++j) {
                    std::complex<double> rowv = 0.0;
                    for (int i = 0; i < n1; ++i)
                        rowv += cell[static_cast<std::size_t>(j) * n1 + i] *
                                lv[static_cast<std::size_t>(qi) * n1 + i];
                    val += rowv * lv[static_cast<std::size_t>(qj) * n1 + j];
                }
                acc += qw[qi] * qw[qj] * std::norm(val - exact(x, y)) * mesh.jac_det();
            }
        }
    }
    return std::sqrt(acc);
}

void annotate_orders(ConvergenceTable& table, double floor) {
    auto& rows = table.rows;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        rows[r].below_floor = rows[r].error_l2 < 100.0 * floor;
        if (r == 0) {
            rows[r].observed_order = kNaN;
        } else {
            rows[r].observed_order = std::log(rows[r - 1].error_l2 / rows[r].error_l2) /
                                     std::log(rows[r - 1].param / rows[r].param);
        }
    }

    // Asymptotic window: the longest contiguous run with decreasing errors,
    // all of them above the floor.
    int best_begin = 0, best_end = 0;
    int begin = -1;
    auto close_run = [&](int end) {
        if (begin >= 0 && end - begin > best_end - best_begin) {
            best_begin = begin;
            best_end = end;
        }
        begin = -1;
    };
    for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
        const bool ok = !rows[r].below_floor &&
                        (begin < 0 || rows[r].error_l2 < rows[r - 1].error_l2);
        if (ok) {
            if (begin < 0) begin = r;
        } else {
            close_run(r);
            if (!rows[r].below_floor) begin = r;
        }
    }
    close_run(static_cast<int>(rows.size()));
    table.window_begin = best_begin;
    table.window_end = best_end;

    // Least-squares slope of log(error) vs log(param) over the window.
    const int n = best_end - best_begin;
    if (n >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (int r = best_begin; r < best_end; ++r) {
            const double x = std::log(rows[r].param);
            const double y = std::log(rows[r].error_l2);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        table.fitted_order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    } else {
        table.fitted_order = kNaN;
    }
}

std::function<std::complex<double>(double, double)> gaussian_initial(double amplitude,
                                                                     double width, double cx,
                                                                     double cy) {
    return [=](double x, double y) -> std::complex<double> {
        return amplitude * std::exp(-width * ((x - cx) * (x - cx) + (y - cy) * (y - cy)));
    };
}

void parallel_for(int n, int n_threads, const std::function<void(int)>& body) {
    if (n <= 0) return;
    int threads = n_threads;
    if (threads <= 0) {
        threads = static_cast<int>(std::thread::hardware_concurrency());
        if (const char* env = std::getenv("SPLITPDE_THREADS")) {
            const int cap = std::atoi(env);
            if (cap > 0) threads = std::min(threads, cap);
        }
    }
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                if (failed.load()) return;
                try {
                    body(i);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    failed.store(true);
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<ConvergenceTable> temporal_study(const TemporalStudyConfig& config) {
    const StudyProblem& pr = config.problem;
    if (config.taus.empty()) throw ConfigError("temporal_study: empty tau list");
    for (std::size_t i = 1; i < config.taus.size(); ++i) {
        if (!(config.taus[i] < config.taus[i - 1])) {
            throw ConfigError("temporal_study: tau list must be decreasing");
        }
    }

    const Operators ops = build_operators(build_mesh(pr.domain, pr.nx, pr.ny, pr.p));
    const std::vector<std::complex<double>> c0 = interpolate(ops.mesh, pr.initial);

    double tau_ref = config.reference_tau;
    if (tau_ref <= 0.0) tau_ref = config.taus.back() / 16.0;
    const Scheme ref_scheme = scheme_registry(config.reference_scheme);

    Stepper ref_stepper(ops, pr.solver);
    const EvolveResult ref = evolve(ref_stepper, ref_scheme, tau_ref, pr.T, State{c0, 0.0});
    const double floor = pr.solver.expv_tol * m_norm(ref.final.c, ops.mass);

    struct Job {
        int scheme_idx;
        int tau_idx;
    };
    std::vector<Job> jobs;
    for (int s = 0; s < static_cast<int>(config.schemes.size()); ++s)
        for (int t = 0; t < static_cast<int>(config.taus.size()); ++t) jobs.push_back({s, t});

    std::vector<ConvergenceTable> tables(config.schemes.size());
    for (std::size_t s = 0; s < config.schemes.size(); ++s) {
        tables[s].label = config.schemes[s];
        tables[s].rows.resize(config.taus.size());
    }

    parallel_for(static_cast<int>(jobs.size()), config.threads, [&](int j) {
        const Scheme scheme = scheme_registry(config.schemes[jobs[j].scheme_idx]);
        const double tau = config.taus[jobs[j].tau_idx];
        Stepper stepper(ops, pr.solver);
        const EvolveResult run = evolve(stepper, scheme, tau, pr.T, State{c0, 0.0});
        ConvergenceRow& row = tables[jobs[j].scheme_idx].rows[jobs[j].tau_idx];
        row.param = tau;
        row.error_l2 = l2_error(run.final.c, ref.final.c, ops.mass);
        row.error_h1 = h1_seminorm_error(run.final.c, ref.final.c, ops.stiffness);
    });

    for (auto& table : tables) annotate_orders(table, floor);
    return tables;
}

std::vector<ConvergenceTable> spatial_study(const SpatialStudyConfig& config) {
    if (config.h_list.empty()) throw ConfigError("spatial_study: empty h list");
    for (std::size_t i = 1; i < config.h_list.size(); ++i) {
        if (!(config.h_list[i] < config.h_list[i - 1])) {
            throw ConfigError("spatial_study: h list must be decreasing");
        }
    }
    const double lx = config.domain.bx - config.domain.ax;
    double h_ref = config.reference_h;
    if (h_ref <= 0.0) h_ref = config.h_list.back() / 2.0;

    const Scheme scheme = scheme_registry(config.scheme);
    std::vector<ConvergenceTable> tables(config.p_list.size());

    for (std::size_t ip = 0; ip < config.p_list.size(); ++ip) {
        const int p = config.p_list[ip];
        tables[ip].label = "p=" + std::to_string(p);
        tables[ip].rows.resize(config.h_list.size());

        const int nx_ref = static_cast<int>(std::lround(lx / h_ref));
        const Operators ref_ops =
            build_operators(build_mesh(config.domain, nx_ref, nx_ref, p));
        const std::vector<std::complex<double>> ref_c0 = interpolate(ref_ops.mesh, config.initial);
        Stepper ref_stepper(ref_ops, config.solver);
        const EvolveResult ref =
            evolve(ref_stepper, scheme, config.tau, config.T, State{ref_c0, 0.0});

        parallel_for(static_cast<int>(config.h_list.size()), config.threads, [&](int ih) {
            const double h = config.h_list[ih];
            const int nx = static_cast<int>(std::lround(lx / h));
            const Operators ops = build_operators(build_mesh(config.domain, nx, nx, p));
            const std::vector<std::complex<double>> c0 = interpolate(ops.mesh, config.initial);
            Stepper stepper(ops, config.solver);
            const EvolveResult run =
                evolve(stepper, scheme, config.tau, config.T, State{c0, 0.0});

            // Evaluate the coarse solution on the reference node grid and take
            // the reference mesh's weighted norm of the difference.
            std::vector<std::complex<double>> on_ref(ref_ops.n_dofs());
            for (int i = 0; i < ref_ops.n_dofs(); ++i) {
                const auto [x, y] = ref_ops.mesh.node_coords(ref_ops.mesh.interior()[i]);
                on_ref[i] = fe_eval(ops.mesh, run.final.c, x, y);
            }
            ConvergenceRow& row = tables[ip].rows[ih];
            row.param = ops.mesh.h();
            row.error_l2 = l2_error(on_ref, ref.final.c, ref_ops.mass);
            row.error_h1 = h1_seminorm_error(on_ref, ref.final.c, ref_ops.stiffness);
        });

        // Spatial errors bottom out against the reference mesh rather than the
        // time-integrator tolerance; the monotone-window rule alone governs.
        annotate_orders(tables[ip], 0.0);
    }
    return tables;
}

std::vector<ConvergenceTable> poisson_study(const PoissonStudyConfig& config) {
    const double lx = config.domain.bx - config.domain.ax;
    const double ly = config.domain.by - config.domain.ay;
    const double kx = M_PI / lx;
    const double ky = M_PI / ly;
    auto exact = [&](double x, double y) {
        return std::sin(kx * (x - config.domain.ax)) * std::sin(ky * (y - config.domain.ay));
    };
    // f = Delta u; the discrete problem solves K d = -(M f).
    const double lap = -(kx * kx + ky * ky);

    std::vector<ConvergenceTable> tables(config.p_list.size());
    for (std::size_t ip = 0; ip < config.p_list.size(); ++ip) {
        const int p = config.p_list[ip];
        tables[ip].label = "p=" + std::to_string(p);
        tables[ip].rows.resize(config.h_list.size());

        parallel_for(static_cast<int>(config.h_list.size()), config.threads, [&](int ih) {
            const double h = config.h_list[ih];
            const int nx = static_cast<int>(std::lround(lx / h));
            const Operators ops = build_operators(build_mesh(config.domain, nx, nx, p));
            std::vector<double> rhs(ops.n_dofs());
            std::vector<std::complex<double>> u(ops.n_dofs());
            for (int i = 0; i < ops.n_dofs(); ++i) {
                const auto [x, y] = ops.mesh.node_coords(ops.mesh.interior()[i]);
                rhs[i] = -ops.mass[i] * lap * exact(x, y);
                u[i] = exact(x, y);
            }
            PoissonSolver solver(ops.stiffness, config.solver);
            const std::vector<double> d = solver.solve(rhs);
            std::vector<std::complex<double>> dc(d.begin(), d.end());
            ConvergenceRow& row = tables[ip].rows[ih];
            row.param = ops.mesh.h();
            row.error_l2 = l2_error_vs_function(
                ops.mesh, dc, [&](double x, double y) -> std::complex<double> {
                    return exact(x, y);
                });
            row.error_h1 = h1_seminorm_error(dc, u, ops.stiffness);
        });
        annotate_orders(tables[ip], 0.0);
    }
    return tables;
}

namespace {
std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
}  // namespace

void write_csv(std::ostream& os, const ConvergenceTable& table,
               std::span<const std::pair<std::string, std::string>> config_echo) {
    os << "# table = " << table.label << "\n";
    for (const auto& [key, value] : config_echo) os << "# " << key << " = " << value << "\n";
    if (table.window_end > table.window_begin + 1) {
        os << "# fitted_order = " << fmt_g17(table.fitted_order) << " (rows "
           << table.window_begin << ".." << table.window_end - 1 << ")\n";
    }
    bool any_floor = false;
    for (const auto& row : table.rows) any_floor = any_floor || row.below_floor;
    if (any_floor) {
        os << "# below_floor_rows =";
        for (std::size_t r = 0; r < table.rows.size(); ++r)
            if (table.rows[r].below_floor) os << ' ' << r;
        os << " (orders left empty: error at the solver-tolerance floor)\n";
    }
    os << "param,error_l2,error_h1,observed_order\n";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const ConvergenceRow& row = table.rows[r];
        os << fmt_g17(row.param) << ',' << fmt_g17(row.error_l2) << ',';
        if (std::isfinite(row.error_h1)) os << fmt_g17(row.error_h1);
        os << ',';
        if (r > 0 && std::isfinite(row.observed_order) && !row.below_floor) {
            os << fmt_g17(row.observed_order);
        }
        os << '\n';
    }
}

}  // namespace splitpde
