#pragma once

#include "vssqn/core/problem.hpp"
#include "vssqn/hessian/lbfgs.hpp"
#include "vssqn/regularization.hpp"
#include "vssqn/smoothing/moreau.hpp"
#include "vssqn/solvers/averaging.hpp"
#include "vssqn/solvers/config.hpp"

#include <chrono>
#include <cmath>

namespace vssqn::detail {

/// Fully resolved schedules and flags for one run of the shared SQN loop.
struct Plan {
    BatchSchedule batch = BatchSchedule::constant(1);
    ScalarSchedule step = ScalarSchedule::constant(1.0);
    std::optional<ScalarSchedule> mu;
    std::optional<ScalarSchedule> eta;
    PairMode mode = PairMode::strongly_convex;
    double delta = 1.0;
    double delta_bar = 1.0;
    long k_start = 0;
    bool alternation = false;
    bool moreau = false;
    bool pairs = true;
    // rsVS averaging weights w_k = weight_base - weight_c / N_k
    std::optional<double> weight_base;
    double weight_c = 0.0;
    std::map<std::string, double> theory;
};

/// Decides which iterations get a row and fills the records.
class RunLog {
public:
    RunLog(const StochasticProblem& problem, const SolverConfig& cfg, RunResult& out)
        : problem_(problem), cfg_(cfg), out_(out), start_(std::chrono::steady_clock::now()) {}

    static bool cadence(long done) {
        if (done <= 10000) return true;
        long stride = 1;
        for (long t = done; t >= 10000; t /= 10) stride *= 10;
        return done % stride == 0;
    }

    void record(long k, long done, const Vector& x, std::optional<double> grad_norm, double step_norm, double gamma,
                double mu, double eta, bool force = false) {
        last_logged_ = false;
        if (!force && !cfg_.full_log && !cadence(done)) {
            pending_ = {k, done, grad_norm, step_norm, gamma, mu, eta};
            return;
        }
        IterateRecord r;
        r.k = k;
        r.samples_cum = out_.total_samples;
        r.grad_evals_cum = out_.total_grad_evals;
        if (cfg_.record_values) {
            r.fval = problem_.value(x);
            r.gap = problem_.gap(x);
        }
        r.grad_norm = grad_norm;
        r.step_norm = step_norm;
        r.gamma = gamma;
        r.mu = mu;
        r.eta = eta;
        r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
        out_.records.push_back(r);
        last_logged_ = true;
    }

    /// Make sure the final iterate has a row.
    void finish(const Vector& x) {
        if (last_logged_) return;
        const auto& p = pending_;
        record(p.k, p.done, x, p.grad_norm, p.step_norm, p.gamma, p.mu, p.eta, true);
    }

private:
    struct Pending {
        long k = 0;
        long done = 0;
        std::optional<double> grad_norm;
        double step_norm = 0;
        double gamma = 0, mu = 0, eta = 0;
    };

    const StochasticProblem& problem_;
    const SolverConfig& cfg_;
    RunResult& out_;
    std::chrono::steady_clock::time_point start_;
    Pending pending_;
    bool last_logged_ = true;
};

inline Vector initial_point(const StochasticProblem& problem, const SolverConfig& cfg) {
    const auto n = static_cast<Eigen::Index>(problem.dim());
    if (!cfg.x0) return Vector::Zero(n);
    if (cfg.x0->size() != n) throw ConfigError("x0", "dimension mismatch");
    require_finite(*cfg.x0, "x0");
    return *cfg.x0;
}

inline void require_stop_rule(const SolverConfig& cfg) {
    if (!cfg.horizon && !cfg.sample_budget) throw ConfigError("horizon", "a horizon or a sample budget is required");
    if (cfg.horizon && *cfg.horizon < 1) throw ConfigError("horizon", "must be >= 1");
}

inline double nan() { return std::numeric_limits<double>::quiet_NaN(); }

/**
 * The loop shared by every quasi-Newton scheme:
 * pair at odd k from the previous batch, fresh batch, x <- x - gamma H g.
 */
inline RunResult run_plan(const StochasticProblem& problem, const SolverConfig& cfg, const Plan& plan) {
    require_stop_rule(cfg);
    const CompositeStructure* comp = problem.composite();
    if (plan.moreau && !comp) throw ConfigError("problem", "Moreau smoothing needs a composite problem with a prox");

    RunResult res;
    res.theory = plan.theory;
    RunLog log(problem, cfg, res);
    Vector x = initial_point(problem, cfg);
    const Vector center = x;
    RngStream rng(cfg.seed, cfg.stream);
    LbfgsMemory mem(cfg.m, plan.mode, plan.delta, plan.delta_bar);
    AlternationState alt;
    if (plan.alternation) alt.mu_current = (*plan.mu)(plan.k_start);
    WeightedAverager weighted;

    const double smooth_L = comp ? comp->smooth_lipschitz() : 0.0;
    auto moreau_grad = [&](const SampleHandle& h, const Vector& at, double eta, std::uint64_t& evals) {
        auto inner = comp->bind_smooth(h);
        auto hp = [comp](const Vector& v, double t) { return comp->h_prox(v, t); };
        MoreauResult mr = moreau_composite(inner, hp, smooth_L, at, eta, cfg.prox);
        evals += h.count * static_cast<std::uint64_t>(mr.inner_iterations);
        return mr.grad;
    };

    log.record(plan.k_start, 0, x, std::nullopt, 0.0, nan(), nan(), nan());
    long k = plan.k_start;
    long done = 0;
    std::optional<Vector> x_prev;
    SampleHandle prev_handle;
    while (true) {
        if (cfg.horizon && done >= *cfg.horizon) {
            res.termination = Termination::horizon;
            break;
        }
        const std::uint64_t N = plan.batch(k);
        if (cfg.sample_budget && res.total_samples + N > *cfg.sample_budget) {
            res.termination = Termination::budget;
            break;
        }
        const double gamma = plan.step(k);
        const double mu = plan.mu ? (*plan.mu)(k) : 0.0;
        const double eta = plan.eta ? (*plan.eta)(k) : 0.0;
        if (plan.alternation && k > plan.k_start) alt = alternation_step(alt, k, *plan.mu);

        if (plan.pairs && k % 2 != 0 && x_prev) {
            Vector s = x - *x_prev;
            if (s.squaredNorm() > 0) {
                Vector gi, gp;
                if (plan.moreau) {
                    gi = moreau_grad(prev_handle, x, eta, res.total_grad_evals);
                    gp = moreau_grad(prev_handle, *x_prev, eta, res.total_grad_evals);
                } else {
                    const double pair_eta = eta > 0 ? std::pow(eta, plan.delta) : 0.0;
                    auto bg = problem.bind(prev_handle, pair_eta);
                    bg(x, gi);
                    bg(*x_prev, gp);
                    res.total_grad_evals += 2 * prev_handle.count;
                }
                const double pair_mu = plan.mode == PairMode::convex ? (plan.alternation ? alt.mu_current : mu) : 0.0;
                mem.push(collect_pair(plan.mode, x, *x_prev, gi, gp, pair_mu, eta, plan.delta_bar, k));
            }
        }

        const SampleHandle h = rng.take(N);
        res.total_samples += N;
        Vector g;
        if (plan.moreau) {
            g = moreau_grad(h, x, eta, res.total_grad_evals);
        } else {
            problem.bind(h, eta)(x, g);
            res.total_grad_evals += N;
        }
        if (mu > 0) g = reg_value_grad(RegularizedView(mu, center), x, g).grad;
        if (!g.allFinite()) throw OracleError(0, problem.name() + ": non-finite gradient at k=" + std::to_string(k));

        Vector x_next = x - gamma * mem.apply(g);
        if (plan.weight_base) weighted.add(x, *plan.weight_base - plan.weight_c / static_cast<double>(N));
        if (cfg.observer) {
            IterationTrace t;
            t.k = k;
            t.x = &x;
            t.x_next = &x_next;
            t.gradient = &g;
            t.memory = &mem;
            t.handle = h;
            t.gamma = gamma;
            t.mu = mu;
            t.eta = eta;
            cfg.observer(t);
        }
        const double step_norm = (x_next - x).norm();
        x_prev = std::move(x);
        x = std::move(x_next);
        prev_handle = h;
        ++k;
        ++done;
        if (!x.allFinite()) throw Error("iterate became non-finite at k=" + std::to_string(k));
        log.record(k, done, x, g.norm(), step_norm, gamma, plan.mu ? mu : nan(), plan.eta ? eta : nan());
        if (step_norm == 0.0) {
            res.termination = Termination::zero_step;
            break;
        }
    }
    log.finish(x);
    res.iterations = done;
    res.x_final = x;
    if (plan.weight_base) res.x_averaged = weighted.empty() ? x : weighted.mean();
    return res;
}

} // namespace vssqn::detail
