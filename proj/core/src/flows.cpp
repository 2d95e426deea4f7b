#include "splitpde/flows.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "splitpde/errors.hpp"

namespace splitpde {

Scheme scheme_registry(const std::string& name) {
    if (name == "lie") {
        return Scheme{"lie", {{1.0, 1.0}}, 1};
    }
    if (name == "strang") {
        return Scheme{"strang", {{0.5, 1.0}, {0.5, 0.0}}, 2};
    }
    if (name == "ruth3") {
        // Ruth's rational third-order composition. Under the A-then-B stage
        // convention used here the kinetic flow takes (7/24, 3/4, -1/24) and
        // the potential flow (2/3, -2/3, 1); the transposed pairing drops to
        // first order (see the scheme-order tests).
        return Scheme{"ruth3",
                      {{7.0 / 24.0, 2.0 / 3.0}, {3.0 / 4.0, -2.0 / 3.0}, {-1.0 / 24.0, 1.0}},
                      3};
    }
    if (name == "blanes_moan4") {
        // Blanes-Moan 6-stage fourth-order PRK composition (palindromic,
        // 7 kinetic / 6 potential applications; the trailing beta = 0 stage
        // keeps the A-then-B stage shape).
        const double a1 = 0.0792036964311957;
        const double a2 = 0.3531729060497740;
        const double a3 = -0.0420650803577195;
        const double a4 = 1.0 - 2.0 * (a1 + a2 + a3);
        const double b1 = 0.209515106613362;
        const double b2 = -0.143851773179818;
        const double b3 = 0.5 - b1 - b2;
        return Scheme{"blanes_moan4",
                      {{a1, b1}, {a2, b2}, {a3, b3}, {a4, b3}, {a3, b2}, {a2, b1}, {a1, 0.0}},
                      4};
    }
    throw ConfigError("scheme_registry: unknown scheme '" + name + "'");
}

Stepper::Stepper(const Operators& ops, SolverOptions opts)
    : ops_(&ops),
      opts_(opts),
      poisson_(ops.stiffness, opts.poisson),
      expv_ws_(ops.n_dofs(), opts.max_krylov) {}

void Stepper::phi_a(double tau, State& s) {
    if (tau == 0.0) return;
    s.c = expv(ops_->stiffness, ops_->mass, tau, s.c, opts_.expv_tol, expv_ws_);
}

void Stepper::phi_b(double tau, State& s) {
    if (tau == 0.0) return;
    std::vector<double> f = compute_F(ops_->mass, s.c);
    for (double& v : f) v = -v;
    const std::vector<double> d = poisson_.solve(f);
    const std::vector<double> phase = potential_diagonal(d);
    for (std::size_t i = 0; i < s.c.size(); ++i) {
        const double theta = tau * phase[i];
        s.c[i] *= std::complex<double>(std::cos(theta), -std::sin(theta));
    }
}

void Stepper::splitting_step(const Scheme& scheme, double tau, State& s) {
    for (const Scheme::Stage& stage : scheme.stages) {
        if (stage.alpha != 0.0) phi_a(stage.alpha * tau, s);
        if (stage.beta != 0.0) phi_b(stage.beta * tau, s);
    }
    s.t += tau;
}

namespace {

bool finite(const State& s) {
    for (const auto& v : s.c) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    }
    return true;
}

}  // namespace

EvolveResult evolve(Stepper& stepper, const Scheme& scheme, double tau, double T, State initial,
                    const Observer& observer) {
    if (!(tau > 0.0) || !(T > 0.0)) throw ConfigError("evolve: tau and T must be positive");

    const long n_steps = std::max(1L, std::lround(T / tau));
    const double tau_snapped = T / static_cast<double>(n_steps);

    EvolveResult result;
    result.final = std::move(initial);
    for (long step = 1; step <= n_steps; ++step) {
        stepper.splitting_step(scheme, tau_snapped, result.final);
        if (!finite(result.final)) {
            throw SolverError("evolve: non-finite state after step " + std::to_string(step) +
                                  " (t = " + std::to_string(result.final.t) + ")",
                              std::numeric_limits<double>::quiet_NaN());
        }
        result.steps = step;
        if (observer) {
            const double norm = m_norm(result.final.c, stepper.ops().mass);
            const ObserverSignal sig = observer({step, result.final.t, norm});
            if (sig.take_snapshot) result.snapshots.push_back(result.final);
            if (sig.abort) {
                result.aborted = true;
                break;
            }
        }
    }
    return result;
}

AdaptiveResult evolve_adaptive(Stepper& stepper, const Scheme& scheme, double tau0, double T,
                               double tol, State initial, const Observer& observer) {
    if (!(tau0 > 0.0) || !(T > 0.0)) throw ConfigError("evolve_adaptive: tau0 and T must be positive");
    if (!(tol > 0.0)) throw ConfigError("evolve_adaptive: tol must be positive");

    const double denom = std::pow(2.0, scheme.order) - 1.0;
    AdaptiveResult result;
    result.final = std::move(initial);
    double tau = std::min(tau0, T);
    long step_index = 0;

    while (result.final.t < T * (1.0 - 1e-14)) {
        if (tau < 1e-12 * T) {
            throw SolverError("evolve_adaptive: step size stagnated at tau = " +
                                  std::to_string(tau),
                              tau);
        }
        const double remaining = T - result.final.t;
        const double tau_try = std::min(tau, remaining);

        State coarse = result.final;
        stepper.splitting_step(scheme, tau_try, coarse);
        State fine = result.final;
        stepper.splitting_step(scheme, 0.5 * tau_try, fine);
        stepper.splitting_step(scheme, 0.5 * tau_try, fine);

        std::vector<std::complex<double>> diff(fine.c.size());
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = fine.c[i] - coarse.c[i];
        const double err = m_norm(diff, stepper.ops().mass) / denom;

        // The coarse state is the accepted one, so tol = inf reduces exactly
        // to the fixed-step loop.
        const bool accept = err <= tol;
        result.log.push_back({result.final.t, tau_try, err, accept});
        if (accept) {
            result.final = std::move(coarse);
            ++result.accepted;
            ++step_index;
            if (observer) {
                const double norm = m_norm(result.final.c, stepper.ops().mass);
                const ObserverSignal sig = observer({step_index, result.final.t, norm});
                if (sig.abort) break;
            }
        } else {
            ++result.rejected;
        }
        const double grow =
            err > 0.0 ? 0.9 * std::pow(tol / err, 1.0 / (scheme.order + 1)) : 4.0;
        tau = tau_try * std::min(4.0, std::max(0.25, grow));
    }
    return result;
}

}  // namespace splitpde
