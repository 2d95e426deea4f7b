#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "splitpde/assembly.hpp"
#include "splitpde/sparse_linalg.hpp"

namespace splitpde {

/// Discrete wavefunction: complex coefficients over interior DOFs plus the
/// current time.
struct State {
    std::vector<std::complex<double>> c;
    double t = 0.0;
};

/// Splitting composition: per stage k the kinetic subflow advances by
/// alpha_k tau, then the potential subflow by beta_k tau. Stages with
/// beta_k = 0 skip the Poisson solve entirely.
struct Scheme {
    struct Stage {
        double alpha;
        double beta;
    };
    std::string name;
    std::vector<Stage> stages;
    int order = 1;
};

/// Coefficient tables: lie, strang, ruth3, blanes_moan4. Throws ConfigError
/// on an unknown name. All tables satisfy sum(alpha) = sum(beta) = 1; the
/// nontrivial ones carry no closed-form certificate and are pinned by the
/// empirical order tests.
Scheme scheme_registry(const std::string& name);

struct SolverOptions {
    double expv_tol = 1e-12;
    PoissonOptions poisson;
    int max_krylov = 60;
};

/// Per-evolution handle bundling the operators with solver scratch space.
/// Not shareable across concurrent calls; one Stepper per thread.
class Stepper {
public:
    explicit Stepper(const Operators& ops, SolverOptions opts = {});

    const Operators& ops() const { return *ops_; }
    const SolverOptions& options() const { return opts_; }

    /// Kinetic subflow: c <- exp(-(i/2) tau M^{-1} K) c. Conserves the M-norm
    /// within solver tolerance; leaves s.t untouched.
    void phi_a(double tau, State& s);

    /// Potential subflow: d = -K^{-1} F(c), then c_i <- exp(-i tau d_i) c_i.
    /// Preserves |c_i| entrywise; leaves s.t untouched.
    void phi_b(double tau, State& s);

    /// One full splitting step; advances s.t by tau.
    void splitting_step(const Scheme& scheme, double tau, State& s);

private:
    const Operators* ops_;
    SolverOptions opts_;
    PoissonSolver poisson_;
    ExpvWorkspace expv_ws_;
};

struct StepRecord {
    long step;
    double time;
    double m_norm;
};

struct ObserverSignal {
    bool take_snapshot = false;
    bool abort = false;
};

/// Called after every accepted step with norm/time diagnostics.
using Observer = std::function<ObserverSignal(const StepRecord&)>;

struct EvolveResult {
    State final;
    std::vector<State> snapshots;
    long steps = 0;
    bool aborted = false;
};

/// Fixed-step propagation to time T. tau is snapped to T/round(T/tau) so the
/// final time is hit exactly. Aborts with a diagnostic on non-finite states.
EvolveResult evolve(Stepper& stepper, const Scheme& scheme, double tau, double T, State initial,
                    const Observer& observer = {});

struct AdaptiveStepRecord {
    double time;
    double tau;
    double error_estimate;
    bool accepted;
};

struct AdaptiveResult {
    State final;
    std::vector<AdaptiveStepRecord> log;
    long accepted = 0;
    long rejected = 0;
};

/// Adaptive propagation with a step-doubling error estimate:
/// err = ||one tau step - two tau/2 steps||_M / (2^q - 1), accepted when
/// err <= tol; the next step is 0.9 tau (tol/err)^{1/(q+1)} clamped to
/// [tau/4, 4 tau], and the final step is clipped to land on T.
AdaptiveResult evolve_adaptive(Stepper& stepper, const Scheme& scheme, double tau0, double T,
                               double tol, State initial, const Observer& observer = {});

}  // namespace splitpde
