#pragma once

#include "vssqn/hessian/bounds.hpp"
#include "vssqn/solvers/driver.hpp"

#include <algorithm>
#include <cmath>

namespace vssqn {

namespace detail {

inline double need_meta(const std::optional<double>& v, const char* field, const char* scheme) {
    if (!v) throw ConfigError(field, std::string(scheme) + " needs it from the problem or an explicit step");
    return *v;
}

inline void require_scheme(const SolverConfig& cfg, std::initializer_list<Scheme> allowed, const char* op) {
    for (Scheme s : allowed)
        if (cfg.scheme == s) return;
    throw ConfigError("solver.scheme", std::string(op) + " does not run " + to_string(cfg.scheme));
}

/// Pilot estimate of the noise level sqrt(E|g - mean g|^2) at x0, on a stream disjoint from the run.
inline double estimate_nu2(const StochasticProblem& problem, const Vector& x0, std::uint64_t seed,
                           std::size_t pilots = 100) {
    if (problem.deterministic()) return 0.0;
    RngStream rng(seed, 0x9E3779B97F4A7C15ULL);
    std::vector<Vector> gs;
    Vector mean = Vector::Zero(x0.size()), g;
    for (std::size_t i = 0; i < pilots; ++i) {
        SampleHandle h = rng.take(1);
        problem.sample_gradient(x0, h[0], 0.0, g);
        gs.push_back(g);
        mean += g;
    }
    mean /= static_cast<double>(pilots);
    double var = 0;
    for (const auto& v : gs) var += (v - mean).squaredNorm();
    return std::sqrt(var / static_cast<double>(pilots - 1));
}

inline Plan plan_vs(const StochasticProblem& problem, const SolverConfig& cfg) {
    Plan p;
    const auto& meta = problem.meta();
    const double nu1 = cfg.nu1.value_or(0.0);
    double n0 = cfg.n0.value_or(1.0);
    if (meta.tau && meta.lipschitz_L) {
        BoundParams bp;
        bp.L = meta.lipschitz_L;
        bp.tau = meta.tau;
        bp.m = cfg.m;
        bp.n = problem.dim();
        auto b = theoretical_bounds(HessianRegime::sc_smooth, bp);
        p.theory["lambda_lo"] = b.lambda_lo;
        p.theory["lambda_hi"] = b.lambda_hi;
        p.theory["gamma_theory"] = 1.0 / (*meta.lipschitz_L * b.lambda_hi);
        double n0_theory = nu1 > 0 ? 2.0 * nu1 * nu1 * b.lambda_hi / (*meta.tau * *meta.tau * b.lambda_lo) : 0.0;
        p.theory["n0_theory"] = n0_theory;
        if (!cfg.n0) n0 = std::max(1.0, std::ceil(n0_theory));
    } else if (!cfg.step) {
        need_meta(meta.tau, "tau", "VS_SQN");
        need_meta(meta.lipschitz_L, "lipschitz_L", "VS_SQN");
    }
    p.step = cfg.step ? *cfg.step : ScalarSchedule::constant(p.theory.at("gamma_theory"));
    p.batch = cfg.batch ? *cfg.batch : BatchSchedule::geometric(n0, cfg.rate, 0);
    p.mode = PairMode::strongly_convex;
    return p;
}

inline Plan plan_svs_moreau(const StochasticProblem& problem, const SolverConfig& cfg) {
    Plan p;
    const auto* comp = problem.composite();
    if (!comp) throw ConfigError("problem", "SVS_SQN_MOREAU needs a composite problem with a prox");
    const double tau = need_meta(problem.meta().tau, "tau", "SVS_SQN_MOREAU");
    const double L = comp->smooth_lipschitz();
    const double n = static_cast<double>(problem.dim());
    const double cap = std::min(2.0 / L, std::cbrt(4.0 * (n + 1) * (n + 1) / (tau * tau)));
    p.theory["eta_cap"] = cap;
    double eta = cap;
    if (cfg.eta) {
        if (!cfg.eta->is_constant()) throw ConfigError("solver.eta", "Moreau mode uses a fixed eta");
        eta = (*cfg.eta)(1);
    }
    if (eta > cap * (1 + 1e-12))
        throw ConfigError("solver.eta", "eta = " + std::to_string(eta) +
                                            " exceeds the bound min{2/L, (4(n+1)^2/tau^2)^(1/3)} = " +
                                            std::to_string(cap));
    BoundParams bp;
    bp.tau = tau;
    bp.eta_k = eta;
    bp.m = cfg.m;
    bp.n = problem.dim();
    auto b = theoretical_bounds(HessianRegime::sc_moreau, bp);
    p.theory["lambda_lo"] = b.lambda_lo;
    p.theory["lambda_hi"] = b.lambda_hi;
    p.theory["eta"] = eta;
    p.theory["gamma_theory"] = tau * eta * eta / (4.0 * (1.0 + n));
    p.step = cfg.step ? *cfg.step : ScalarSchedule::constant(p.theory["gamma_theory"]);
    p.eta = ScalarSchedule::constant(eta);
    p.batch = cfg.batch ? *cfg.batch : BatchSchedule::geometric(cfg.n0.value_or(1.0), cfg.rate, 0);
    p.moreau = true;
    return p;
}

inline Plan plan_svs_diminishing(const StochasticProblem& problem, const SolverConfig& cfg) {
    Plan p;
    const double n = static_cast<double>(problem.dim());
    const double nu1 = cfg.nu1.value_or(0.0);
    std::optional<double> tau = problem.meta().tau;
    if (!tau && (!cfg.eta || !cfg.step)) need_meta(tau, "tau", "SVS_SQN_DIMINISHING");
    if (tau) {
        // eta_k = (2(n+1)^2/(tau^2 (k+2)))^(1/3), gamma_k = tau eta_k^2 / (1+n)
        const double eta_base = std::cbrt(2.0 * (n + 1) * (n + 1) / (*tau * *tau));
        p.eta = ScalarSchedule::power(eta_base, -1.0 / 3.0, 2);
        p.step = ScalarSchedule::power(*tau * eta_base * eta_base / (1.0 + n), -2.0 / 3.0, 2);
        p.theory["gamma0_theory"] = p.step(0);
        p.theory["n0_theory"] = std::pow(2.0, 4.0 / 3.0) * nu1 * nu1 * std::cbrt(n + 1) / std::pow(*tau, 5.0 / 3.0);
    }
    if (cfg.eta) p.eta = *cfg.eta;
    if (cfg.step) p.step = *cfg.step;
    if (!(cfg.batch_exponent > 1)) throw ConfigError("solver.batch_exponent", "must exceed 1");
    double n0 = cfg.n0.value_or(std::max(1.0, std::ceil(p.theory.count("n0_theory") ? p.theory["n0_theory"] : 1.0)));
    p.batch = cfg.batch ? *cfg.batch : BatchSchedule::polynomial(n0, cfg.batch_exponent + 2.0 / 3.0, 2);
    p.mode = PairMode::strongly_convex;
    return p;
}

inline Plan plan_rvs(const StochasticProblem& problem, const SolverConfig& cfg) {
    Plan p;
    const auto& meta = problem.meta();
    const double eps = cfg.epsilon;
    if (!(eps > 0 && eps < 1)) throw ConfigError("solver.epsilon", "must lie in (0,1)");
    const double a = 2.0 + eps, b = eps, c = 1.0 - 2.0 * eps / 3.0;
    const std::size_t n = problem.dim();
    p.delta = 1.0;
    p.delta_bar = cfg.delta_bar.value_or(eps / (2.0 * static_cast<double>(cfg.m + n)));
    const double mu0 = cfg.mu0.value_or(1.0);
    const double nu1 = cfg.nu1.value_or(0.0);
    const double alpha = cfg.alpha.value_or(meta.alpha_growth.value_or(meta.tau.value_or(1.0)));
    p.theory["a"] = a;
    p.theory["b"] = b;
    p.theory["c"] = c;
    p.theory["delta_bar"] = p.delta_bar;
    double gamma0 = cfg.gamma0.value_or(0.0);
    double n0 = cfg.n0.value_or(1.0);
    if (meta.lipschitz_L) {
        BoundParams bp;
        bp.L = meta.lipschitz_L;
        bp.mu0 = mu0;
        bp.mu_k = mu0;
        bp.m = cfg.m;
        bp.n = n;
        bp.delta_bar = p.delta_bar;
        auto bd = theoretical_bounds(HessianRegime::c_smooth, bp);
        // gamma_k <= lambda_lo / (lambda_hi_k^2 (L + mu0)) is tightest at k = 1
        double g0 = bd.lambda_lo / (bd.lambda_hi * bd.lambda_hi * (*meta.lipschitz_L + mu0));
        p.theory["lambda_lo"] = bd.lambda_lo;
        p.theory["lambda_base"] = *bd.lambda_base;
        p.theory["gamma0_theory"] = g0;
        if (!cfg.gamma0) gamma0 = g0;
        double lam = *bd.lambda_base;
        double n0_theory =
            nu1 > 0 ? (*meta.lipschitz_L + mu0) * lam * lam * nu1 * nu1 * gamma0 / (alpha * bd.lambda_lo * mu0) : 0.0;
        p.theory["n0_theory"] = n0_theory;
        if (!cfg.n0) n0 = std::max(1.0, std::ceil(n0_theory));
    } else if (!cfg.gamma0 && !cfg.step) {
        need_meta(meta.lipschitz_L, "lipschitz_L", "RVS_SQN");
    }
    p.batch = cfg.batch ? *cfg.batch : BatchSchedule::polynomial(n0, a, 0);
    p.step = cfg.step ? *cfg.step : ScalarSchedule::power(gamma0, -b);
    p.mu = cfg.mu ? *cfg.mu : ScalarSchedule::power(mu0, -c);
    p.mode = PairMode::convex;
    p.alternation = true;
    p.k_start = 1;
    return p;
}

inline Plan plan_rsvs(const StochasticProblem& problem, const SolverConfig& cfg) {
    Plan p;
    if (!cfg.horizon) throw ConfigError("solver.horizon", "RSVS_SQN needs the horizon K up front");
    const auto& meta = problem.meta();
    const double K = static_cast<double>(*cfg.horizon);
    const double eps = cfg.epsilon;
    if (!(eps > 0)) throw ConfigError("solver.epsilon", "must be positive");
    const std::size_t n = problem.dim();
    const double eps_bar = 5.0 * eps / 3.0;
    const double gamma = cfg.c_gamma * std::pow(K, -1.0 / 3.0 + eps_bar);
    double mu = std::pow(K, -1.0 / 3.0), eta = mu;
    if (cfg.mu) {
        if (!cfg.mu->is_constant()) throw ConfigError("solver.mu", "rsVS-SQN keeps mu constant");
        mu = (*cfg.mu)(1);
    }
    if (cfg.eta) {
        if (!cfg.eta->is_constant()) throw ConfigError("solver.eta", "rsVS-SQN keeps eta constant");
        eta = (*cfg.eta)(1);
    }
    p.delta = cfg.delta.value_or(std::min(1.0, eps / static_cast<double>(n + cfg.m - 1)));
    p.delta_bar = cfg.delta_bar.value_or(std::min(1.0, eps / static_cast<double>(n + cfg.m)));
    BoundParams bp;
    bp.eta_k = eta;
    bp.mu0 = mu;
    bp.mu_k = mu;
    bp.m = cfg.m;
    bp.n = n;
    bp.delta = p.delta;
    bp.delta_bar = p.delta_bar;
    auto bd = theoretical_bounds(HessianRegime::c_smoothed, bp);
    const double nu1 = cfg.nu1.value_or(0.0);
    const double alpha = cfg.alpha.value_or(meta.alpha_growth.value_or(meta.tau.value_or(1.0)));
    double C = 0.0;
    if (nu1 > 0) {
        C = 2.0 * (1.0 + mu * eta) * bd.lambda_hi * bd.lambda_hi * nu1 * nu1 * gamma * gamma / (alpha * eta);
        if (!std::isfinite(C))
            throw ConfigError("solver.nu1", "C overflows (lambda_hi = " + std::to_string(bd.lambda_hi) +
                                                "); no admissible N0");
    }
    const double base = bd.lambda_lo * mu * gamma;
    double n0 = cfg.n0.value_or(C > 0 ? std::floor(C / base) + 1.0 : 1.0);
    if (C > 0 && !(n0 > C / base))
        throw ConfigError("solver.n0", "N0 = " + std::to_string(n0) + " must exceed C/(lambda_lo mu gamma) = " +
                                           std::to_string(C / base));
    p.theory["gamma"] = gamma;
    p.theory["mu"] = mu;
    p.theory["eta"] = eta;
    p.theory["delta"] = p.delta;
    p.theory["delta_bar"] = p.delta_bar;
    p.theory["lambda_lo"] = bd.lambda_lo;
    p.theory["lambda_hi"] = bd.lambda_hi;
    p.theory["C"] = C;
    p.theory["n0"] = n0;
    if (!(cfg.batch_exponent > 1)) throw ConfigError("solver.batch_exponent", "must exceed 1");
    p.batch = cfg.batch ? *cfg.batch : BatchSchedule::polynomial(n0, cfg.batch_exponent, 1);
    p.step = cfg.step ? *cfg.step : ScalarSchedule::constant(gamma);
    p.mu = ScalarSchedule::constant(mu);
    p.eta = ScalarSchedule::constant(eta);
    p.mode = PairMode::convex;
    p.weight_base = base;
    p.weight_c = C;
    return p;
}

inline Plan plan_sqn_unit(const StochasticProblem& problem, const SolverConfig& cfg) {
    Plan p;
    const auto& meta = problem.meta();
    double gamma = cfg.gamma0.value_or(0.0);
    if (meta.tau && meta.lipschitz_L) {
        BoundParams bp;
        bp.L = meta.lipschitz_L;
        bp.tau = meta.tau;
        bp.m = cfg.m;
        bp.n = problem.dim();
        auto b = theoretical_bounds(HessianRegime::sc_smooth, bp);
        p.theory["gamma_threshold"] = 1.0 / (*meta.lipschitz_L * b.lambda_hi);
        if (!cfg.gamma0) gamma = 2.0 * p.theory["gamma_threshold"];
    } else if (!cfg.gamma0 && !cfg.step) {
        need_meta(meta.tau, "tau", "SQN_UNIT");
    }
    p.batch = BatchSchedule::constant(1);
    p.step = cfg.step ? *cfg.step : ScalarSchedule::power(gamma, -1.0);
    p.k_start = 1;
    return p;
}

} // namespace detail

inline RunResult run_vs_sqn(const StochasticProblem& problem, const SolverConfig& cfg) {
    detail::require_scheme(cfg, {Scheme::vs_sqn}, "run_vs_sqn");
    return detail::run_plan(problem, cfg, detail::plan_vs(problem, cfg));
}

inline RunResult run_svs_sqn(const StochasticProblem& problem, const SolverConfig& cfg) {
    detail::require_scheme(cfg, {Scheme::svs_sqn_moreau, Scheme::svs_sqn_diminishing}, "run_svs_sqn");
    auto plan = cfg.scheme == Scheme::svs_sqn_moreau ? detail::plan_svs_moreau(problem, cfg)
                                                     : detail::plan_svs_diminishing(problem, cfg);
    return detail::run_plan(problem, cfg, plan);
}

inline RunResult run_rvs_sqn(const StochasticProblem& problem, const SolverConfig& cfg) {
    detail::require_scheme(cfg, {Scheme::rvs_sqn}, "run_rvs_sqn");
    return detail::run_plan(problem, cfg, detail::plan_rvs(problem, cfg));
}

inline RunResult run_rsvs_sqn(const StochasticProblem& problem, const SolverConfig& cfg) {
    detail::require_scheme(cfg, {Scheme::rsvs_sqn}, "run_rsvs_sqn");
    return detail::run_plan(problem, cfg, detail::plan_rsvs(problem, cfg));
}

} // namespace vssqn
