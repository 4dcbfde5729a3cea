#pragma once

#include "vssqn/solvers/schemes.hpp"

namespace vssqn {

namespace detail {

/// Plain first-order loops: SGD and two-sequence acceleration.
inline RunResult run_first_order(const StochasticProblem& problem, const SolverConfig& cfg, bool accelerate) {
    require_stop_rule(cfg);
    const auto& meta = problem.meta();
    RunResult res;
    RunLog log(problem, cfg, res);
    Vector x = initial_point(problem, cfg);
    Vector x_prev = x;
    RngStream rng(cfg.seed, cfg.stream);

    ScalarSchedule step = ScalarSchedule::constant(1.0);
    BatchSchedule batch = BatchSchedule::constant(1);
    std::optional<double> momentum;
    if (accelerate) {
        if (cfg.step) {
            step = *cfg.step;
        } else {
            step = ScalarSchedule::constant(1.0 / need_meta(meta.lipschitz_L, "lipschitz_L", "APG_BASELINE"));
        }
        batch = cfg.batch ? *cfg.batch : BatchSchedule::geometric(cfg.n0.value_or(1.0), cfg.rate, 0);
        if (meta.tau && meta.lipschitz_L) {
            double sk = std::sqrt(*meta.lipschitz_L / *meta.tau);
            momentum = (sk - 1.0) / (sk + 1.0);
            res.theory["momentum"] = *momentum;
        }
    } else {
        double g0 = cfg.gamma0 ? *cfg.gamma0 : 1.0 / need_meta(meta.lipschitz_L, "lipschitz_L", "SGD");
        step = cfg.step ? *cfg.step : ScalarSchedule::power(g0, -1.0, 1);
        batch = cfg.batch ? *cfg.batch : BatchSchedule::constant(cfg.n0.value_or(1.0));
    }
    WeightedAverager running;

    log.record(0, 0, x, std::nullopt, 0.0, nan(), nan(), nan());
    long k = 0;
    while (true) {
        if (cfg.horizon && k >= *cfg.horizon) {
            res.termination = Termination::horizon;
            break;
        }
        const std::uint64_t N = batch(k);
        if (cfg.sample_budget && res.total_samples + N > *cfg.sample_budget) {
            res.termination = Termination::budget;
            break;
        }
        const double gamma = step(k);
        Vector y = x;
        if (accelerate && k > 0) {
            double beta = momentum ? *momentum : static_cast<double>(k) / static_cast<double>(k + 3);
            y = x + beta * (x - x_prev);
        }
        const SampleHandle h = rng.take(N);
        res.total_samples += N;
        res.total_grad_evals += N;
        Vector g;
        problem.bind(h, 0.0)(y, g);
        if (!g.allFinite()) throw OracleError(0, problem.name() + ": non-finite gradient at k=" + std::to_string(k));
        Vector x_next = y - gamma * g;
        if (cfg.observer) {
            IterationTrace t;
            t.k = k;
            t.x = &y;
            t.x_next = &x_next;
            t.gradient = &g;
            t.handle = h;
            t.gamma = gamma;
            cfg.observer(t);
        }
        const double step_norm = (x_next - x).norm();
        x_prev = std::move(x);
        x = std::move(x_next);
        ++k;
        if (!x.allFinite()) throw Error("iterate became non-finite at k=" + std::to_string(k));
        if (cfg.average) running.add(x, 1.0);
        log.record(k, k, x, g.norm(), step_norm, gamma, nan(), nan());
        if (step_norm == 0.0) {
            res.termination = Termination::zero_step;
            break;
        }
    }
    log.finish(x);
    res.iterations = k;
    res.x_final = x;
    if (cfg.average) res.x_running_mean = running.empty() ? x : running.mean();
    return res;
}

} // namespace detail

inline RunResult run_baseline(const StochasticProblem& problem, const SolverConfig& cfg) {
    detail::require_scheme(cfg, {Scheme::sgd, Scheme::sqn_unit, Scheme::apg_baseline}, "run_baseline");
    switch (cfg.scheme) {
    case Scheme::sgd: return detail::run_first_order(problem, cfg, false);
    case Scheme::apg_baseline: return detail::run_first_order(problem, cfg, true);
    default: return detail::run_plan(problem, cfg, detail::plan_sqn_unit(problem, cfg));
    }
}

/// Dispatch on cfg.scheme.
inline RunResult run_solver(const StochasticProblem& problem, const SolverConfig& cfg) {
    switch (cfg.scheme) {
    case Scheme::vs_sqn: return run_vs_sqn(problem, cfg);
    case Scheme::svs_sqn_moreau:
    case Scheme::svs_sqn_diminishing: return run_svs_sqn(problem, cfg);
    case Scheme::rvs_sqn: return run_rvs_sqn(problem, cfg);
    case Scheme::rsvs_sqn: return run_rsvs_sqn(problem, cfg);
    default: return run_baseline(problem, cfg);
    }
}

} // namespace vssqn
