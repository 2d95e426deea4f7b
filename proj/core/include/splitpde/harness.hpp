#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "splitpde/flows.hpp"

namespace splitpde {

/// Discrete L2 distance sqrt(sum_i M_ii |a_i - b_i|^2).
double l2_error(std::span<const std::complex<double>> a,
                std::span<const std::complex<double>> b, std::span<const double> mass);

/// Discrete H1 seminorm distance sqrt((a-b)^H K (a-b)).
double h1_seminorm_error(std::span<const std::complex<double>> a,
                         std::span<const std::complex<double>> b, const CsrMatrix& k);

/// Continuous L2 error of the FE function against an analytic field,
/// integrated element-wise with a (p+3)-point Gauss-Legendre rule per axis.
/// Nodal sampling would miss the dominant error component (node values
/// superconverge), so manufactured-solution studies use this.
double l2_error_vs_function(const Mesh& mesh, std::span<const std::complex<double>> coeffs,
                            const std::function<std::complex<double>(double, double)>& exact);

struct ConvergenceRow {
    double param;            // tau or h
    double error_l2;
    double error_h1;         // NaN when not measured
    double observed_order;   // NaN for the first row
    bool below_floor;        // error under 100x the solver floor; order unreliable
};

struct ConvergenceTable {
    std::string label;
    std::vector<ConvergenceRow> rows;
    double fitted_order;     // least-squares slope over [window_begin, window_end)
    int window_begin = 0;
    int window_end = 0;
};

/// Pairwise observed orders, floor flags and the least-squares order over the
/// asymptotic window (the longest contiguous run of rows with decreasing
/// errors staying >= 100x floor).
void annotate_orders(ConvergenceTable& table, double floor);

/// The Gaussian profile amplitude * exp(-width ((x-cx)^2 + (y-cy)^2)).
std::function<std::complex<double>(double, double)> gaussian_initial(double amplitude = 10.0,
                                                                     double width = 10.0,
                                                                     double cx = 2.5,
                                                                     double cy = 2.5);

struct StudyProblem {
    Rect domain{0.0, 5.0, 0.0, 5.0};
    int nx = 25;
    int ny = 25;
    int p = 2;
    std::function<std::complex<double>(double, double)> initial = gaussian_initial();
    double T = 0.1;
    SolverOptions solver;
};

struct TemporalStudyConfig {
    StudyProblem problem;
    std::vector<std::string> schemes{"lie", "strang", "ruth3", "blanes_moan4"};
    std::vector<double> taus{4e-3, 2e-3, 1e-3, 5e-4};
    std::string reference_scheme = "blanes_moan4";
    double reference_tau = 0.0;  // 0: min(taus)/16
    int threads = 0;             // 0: hardware concurrency
};

/// Global L2/H1 errors at T against a refined-in-time reference on the same
/// mesh, one table per scheme.
std::vector<ConvergenceTable> temporal_study(const TemporalStudyConfig& config);

struct SpatialStudyConfig {
    Rect domain{0.0, 5.0, 0.0, 5.0};
    std::function<std::complex<double>(double, double)> initial = gaussian_initial();
    double T = 0.1;
    double tau = 0.002;
    std::string scheme = "strang";
    std::vector<int> p_list{1, 2};
    std::vector<double> h_list{1.0, 0.5, 0.25, 0.125, 0.0625};
    double reference_h = 0.0;  // 0: min(h_list)/2
    SolverOptions solver;
    int threads = 0;
};

/// Errors at T against the finest-mesh reference, evaluated on the reference
/// mesh's node grid with its quadrature weights; one table per degree p.
std::vector<ConvergenceTable> spatial_study(const SpatialStudyConfig& config);

struct PoissonStudyConfig {
    Rect domain{0.0, 5.0, 0.0, 5.0};
    std::vector<int> p_list{1, 2};
    std::vector<double> h_list{1.0, 0.5, 0.25, 0.125, 0.0625};
    PoissonOptions solver;
    int threads = 0;
};

/// Manufactured-solution study for the Poisson building block:
/// u = sin(pi x / Lx) sin(pi y / Ly), forcing f = Delta u.
std::vector<ConvergenceTable> poisson_study(const PoissonStudyConfig& config);

/// CSV emission: '#'-prefixed header lines echoing the configuration, then
/// `param,error_l2,error_h1,observed_order` rows (17 significant digits;
/// empty observed_order on the first row). Byte-identical across runs.
void write_csv(std::ostream& os, const ConvergenceTable& table,
               std::span<const std::pair<std::string, std::string>> config_echo);

/// Worker-pool map over [0, n) used by the sweeps; n_threads = 0 picks the
/// hardware concurrency, capped by SPLITPDE_THREADS when set.
void parallel_for(int n, int n_threads, const std::function<void(int)>& body);

}  // namespace splitpde
