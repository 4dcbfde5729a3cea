#pragma once

#include "vssqn/harness/config.hpp"
#include "vssqn/harness/oracles.hpp"
#include "vssqn/harness/output.hpp"
#include "vssqn/problems/isotonic.hpp"
#include "vssqn/problems/lewis_overton.hpp"
#include "vssqn/problems/logistic.hpp"
#include "vssqn/problems/quadratic.hpp"
#include "vssqn/solvers/baseline.hpp"

#include <future>
#include <memory>
#include <mutex>

namespace vssqn {

/// Problem keys (`problem.*`) after parsing, before any data is generated.
struct ProblemSpec {
    std::string kind = "quadratic"; // quadratic | l1_quadratic | logistic | isotonic | lewis_overton
    std::size_t n = 20;
    double kappa = 100.0;
    Convexity convexity = Convexity::strongly_convex;
    QuadraticNoise noise;
    std::string file;   // saved quadratic to load instead of generating
    std::string dataset; // sparse dataset path for logistic
    double l1_weight = 0.1;
    std::size_t rows = 1000;
    double density = 0.05;
    double support = 0.1;
    double weight_scale = 1.0;
    LogisticSpec logistic;
    double eta = 0.1;          // isotonic penalty parameter
    double noise_sd = 0.01;    // isotonic target noise
    std::optional<std::uint64_t> seed; // instance seed; defaults to the run seed
    bool reference = false;            // logistic: solve for f* so gaps can be logged
};

inline ProblemSpec parse_problem_spec(const KeyValueConfig& c) {
    ProblemSpec p;
    p.kind = c.get_string("problem.kind", p.kind);
    if (p.kind != "quadratic" && p.kind != "l1_quadratic" && p.kind != "logistic" && p.kind != "isotonic" &&
        p.kind != "lewis_overton")
        throw ConfigError("problem.kind", "unknown problem '" + p.kind + "'");
    if (auto v = c.get_u64("problem.n")) p.n = *v;
    p.kappa = c.get_double("problem.kappa", p.kappa);
    auto conv = c.get_string("problem.convexity", "strongly_convex");
    if (conv == "strongly_convex") p.convexity = Convexity::strongly_convex;
    else if (conv == "convex") p.convexity = Convexity::convex;
    else throw ConfigError("problem.convexity", "expected strongly_convex or convex, got '" + conv + "'");
    p.noise.spread = c.get_double("problem.spread", p.noise.spread);
    p.noise.additive_sigma = c.get_double("problem.sigma", p.noise.additive_sigma);
    p.file = c.get_string("problem.file", "");
    p.dataset = c.get_string("problem.dataset", "");
    p.l1_weight = c.get_double("problem.l1_weight", p.l1_weight);
    if (auto v = c.get_u64("problem.rows")) p.rows = *v;
    p.density = c.get_double("problem.density", p.density);
    p.support = c.get_double("problem.support", p.support);
    p.weight_scale = c.get_double("problem.weight_scale", p.weight_scale);
    p.logistic.mu_l2 = c.get_double("problem.mu_l2", 0.0);
    p.logistic.lambda_l1 = c.get_double("problem.lambda_l1", 0.0);
    auto sm = c.get_string("problem.l1_smoothing", "none");
    if (sm == "none") p.logistic.smoothing = L1Smoothing::none;
    else if (sm == "huber") p.logistic.smoothing = L1Smoothing::huber;
    else if (sm == "pseudo_huber") p.logistic.smoothing = L1Smoothing::pseudo_huber;
    else throw ConfigError("problem.l1_smoothing", "expected none, huber or pseudo_huber, got '" + sm + "'");
    p.logistic.huber_eta = c.get_double("problem.huber_eta", p.logistic.huber_eta);
    p.logistic.pseudo_eps = c.get_double("problem.pseudo_eps", p.logistic.pseudo_eps);
    p.eta = c.get_double("problem.eta", p.eta);
    p.noise_sd = c.get_double("problem.noise_sd", p.noise_sd);
    p.seed = c.get_u64("problem.seed");
    p.reference = c.get_bool("problem.reference").value_or(false);
    return p;
}

inline std::unique_ptr<StochasticProblem> build_problem(const ProblemSpec& p, std::uint64_t run_seed) {
    RngStream rng(p.seed.value_or(run_seed), 0xD1B54A32D192ED03ULL);
    if (p.kind == "lewis_overton") return std::make_unique<LewisOverton>();
    if (p.kind == "quadratic" || p.kind == "l1_quadratic") {
        QuadraticEnsemble q = p.file.empty() ? quad_make(p.n, p.kappa, p.convexity, rng, p.noise) : load_quadratic(p.file);
        if (p.kind == "quadratic") return std::make_unique<QuadraticEnsemble>(std::move(q));
        auto l1 = std::make_unique<L1QuadraticProblem>(std::move(q), p.l1_weight);
        l1->set_reference(l1->solve_reference());
        return l1;
    }
    if (p.kind == "logistic") {
        SparseDataset d = p.dataset.empty()
                              ? make_sparse_logistic(p.rows, p.n, p.density, p.support, p.weight_scale, rng)
                              : load_sparse_dataset(p.dataset, p.n);
        auto lp = std::make_unique<LogisticProblem>(std::move(d), p.logistic);
        if (p.reference) lp->set_reference(lp->solve_reference());
        return lp;
    }
    return std::make_unique<IsotonicLasso>(make_isotonic_lasso(p.rows, p.n, p.eta, rng, p.noise_sd));
}

/// Solver keys (`solver.*`).
inline SolverConfig parse_solver_config(const KeyValueConfig& c) {
    SolverConfig s;
    s.scheme = parse_scheme(c.get_string("solver.scheme", "VS_SQN"));
    if (auto v = c.get_u64("solver.m")) s.m = *v;
    if (auto v = c.get_u64("solver.horizon")) s.horizon = static_cast<long>(*v);
    s.sample_budget = c.get_u64("solver.budget");
    s.batch = c.get_batch("solver.batch");
    s.step = c.get_scalar("solver.step");
    s.mu = c.get_scalar("solver.mu");
    s.eta = c.get_scalar("solver.eta");
    s.epsilon = c.get_double("solver.epsilon", s.epsilon);
    s.c_gamma = c.get_double("solver.c_gamma", s.c_gamma);
    s.delta = c.get_double("solver.delta");
    s.delta_bar = c.get_double("solver.delta_bar");
    s.n0 = c.get_double("solver.n0");
    s.rate = c.get_double("solver.rate", s.rate);
    s.batch_exponent = c.get_double("solver.batch_exponent", s.batch_exponent);
    s.gamma0 = c.get_double("solver.gamma0");
    s.mu0 = c.get_double("solver.mu0");
    s.nu1 = c.get_double("solver.nu1");
    s.alpha = c.get_double("solver.alpha");
    if (auto v = c.get_u64("solver.stream")) s.stream = *v;
    s.x0 = c.get_vector("solver.x0");
    s.average = c.get_bool("solver.average").value_or(false);
    s.full_log = c.get_bool("solver.full_log").value_or(false);
    s.record_values = c.get_bool("solver.record_values").value_or(true);
    s.prox.tolerance = c.get_double("solver.prox_tol", s.prox.tolerance);
    if (auto v = c.get_u64("solver.prox_max_iters")) s.prox.max_inner_iters = static_cast<int>(*v);
    if (!s.horizon && !s.sample_budget) throw ConfigError("solver.horizon", "set solver.horizon or solver.budget");
    return s;
}

struct MetricsSpec {
    double sparsity_threshold = 1e-4;
    bool constraint_violation = false;
};

inline MetricsSpec parse_metrics(const KeyValueConfig& c, const ProblemSpec& p) {
    MetricsSpec m;
    m.sparsity_threshold = c.get_double("metrics.sparsity_threshold", m.sparsity_threshold);
    m.constraint_violation = c.get_bool("metrics.constraint_violation").value_or(p.kind == "isotonic");
    return m;
}

/// Everything a cell's keys decide, parsed without building data.
struct CellSettings {
    ProblemSpec problem;
    SolverConfig solver;
    MetricsSpec metrics;
    std::optional<double> step_scale; // constant step c / L, resolved once L is known
};

inline CellSettings parse_cell_settings(const KeyValueConfig& c) {
    CellSettings s;
    s.problem = parse_problem_spec(c);
    s.solver = parse_solver_config(c);
    s.metrics = parse_metrics(c, s.problem);
    s.step_scale = c.get_double("solver.step_scale");
    if (s.step_scale) {
        if (s.solver.step) throw ConfigError("solver.step_scale", "conflicts with solver.step");
        if (!(*s.step_scale > 0)) throw ConfigError("solver.step_scale", "must be positive");
    }
    c.check_all_used();
    return s;
}

/// One (configuration, seed) pair of an experiment.
struct Cell {
    std::string label;
    std::uint64_t seed = 1;
    KeyValueConfig config;
    std::vector<std::pair<std::string, std::string>> assignments; // sweep values of this cell
};

/**
 * Expands `sweep.<key> = v1; v2; ...` into the cartesian product, times the
 * seeds in `run.seeds`. All `zip.<key>` lists advance together as one more
 * axis; an empty zip value leaves that key unset. `seed_override` replaces
 * the seed list.
 */
inline std::vector<Cell> expand_cells(const KeyValueConfig& top, std::optional<std::uint64_t> seed_override = {}) {
    const std::string name = top.get_string("run.name", "run");
    std::vector<std::uint64_t> seeds;
    if (seed_override) {
        seeds.push_back(*seed_override);
        top.raw("run.seeds");
    } else {
        for (const auto& s : detail::split(top.get_string("run.seeds", "1"), ','))
            seeds.push_back(KeyValueConfig::to_u64("run.seeds", s));
    }
    if (seeds.empty()) throw ConfigError("run.seeds", "no seeds given");

    // each axis is a list of positions; a position is a list of (key, value)
    using Assignment = std::vector<std::pair<std::string, std::string>>;
    std::vector<std::vector<Assignment>> axes;
    std::vector<std::pair<std::string, std::vector<std::string>>> zips;
    KeyValueConfig base;
    for (const auto& [k, v] : top.entries()) {
        if (k == "run.name" || k == "run.seeds") continue;
        const bool sweep = k.rfind("sweep.", 0) == 0, zip = k.rfind("zip.", 0) == 0;
        if (!sweep && !zip) {
            base.set(k, v);
            continue;
        }
        top.raw(k);
        auto values = detail::split(v, ';');
        if (values.empty()) throw ConfigError(k, "empty sweep");
        if (zip) {
            if (!zips.empty() && zips.front().second.size() != values.size())
                throw ConfigError(k, "zip lists must have equal length");
            zips.emplace_back(k.substr(4), values);
            continue;
        }
        std::vector<Assignment> axis;
        for (const auto& val : values) axis.push_back({{k.substr(6), val}});
        axes.push_back(std::move(axis));
    }
    if (!zips.empty()) {
        std::vector<Assignment> axis(zips.front().second.size());
        for (const auto& [key, values] : zips)
            for (std::size_t i = 0; i < values.size(); ++i)
                if (!values[i].empty()) axis[i].emplace_back(key, values[i]);
        axes.push_back(std::move(axis));
    }

    std::vector<Cell> cells;
    std::vector<std::size_t> idx(axes.size(), 0);
    std::size_t combo = 0;
    while (true) {
        for (std::uint64_t seed : seeds) {
            Cell c;
            c.seed = seed;
            c.config = base;
            for (std::size_t i = 0; i < axes.size(); ++i)
                for (const auto& [key, val] : axes[i][idx[i]]) {
                    if (base.has(key)) c.config.erase(key);
                    c.config.set(key, val);
                    c.assignments.emplace_back(key, val);
                }
            char buf[64];
            std::snprintf(buf, sizeof buf, "_c%02zu_s%llu", combo, static_cast<unsigned long long>(seed));
            c.label = name + buf;
            cells.push_back(std::move(c));
        }
        ++combo;
        std::size_t d = 0;
        while (d < axes.size() && ++idx[d] == axes[d].size()) idx[d++] = 0;
        if (d == axes.size()) break;
    }
    return cells;
}

/// Parses every key of a cell without building data; config errors surface here.
inline void validate_cell(const Cell& cell) { parse_cell_settings(cell.config); }

/// Shares built problems between cells with the same problem keys and seed.
class ProblemCache {
public:
    std::shared_ptr<const StochasticProblem> get(const Cell& cell, const ProblemSpec& spec) {
        std::string key = std::to_string(spec.seed.value_or(cell.seed));
        for (const auto& [k, v] : cell.config.entries())
            if (k.rfind("problem.", 0) == 0) key += "\n" + k + "=" + v;
        std::promise<std::shared_ptr<const StochasticProblem>> promise;
        std::shared_future<std::shared_ptr<const StochasticProblem>> fut;
        bool owner = false;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = entries_.find(key);
            if (it == entries_.end()) {
                fut = promise.get_future().share();
                entries_.emplace(key, fut);
                owner = true;
            } else {
                fut = it->second;
            }
        }
        if (owner) {
            try {
                promise.set_value(build_problem(spec, cell.seed));
            } catch (...) {
                promise.set_exception(std::current_exception());
            }
        }
        return fut.get();
    }

private:
    std::mutex mutex_;
    std::map<std::string, std::shared_future<std::shared_ptr<const StochasticProblem>>> entries_;
};

struct CellOutcome {
    RunResult result;
    Summary summary;
    std::string csv;
};

inline CellOutcome run_cell(const Cell& cell, ProblemCache* cache = nullptr) {
    CellSettings settings = parse_cell_settings(cell.config);
    const ProblemSpec& pspec = settings.problem;
    SolverConfig& scfg = settings.solver;
    const MetricsSpec& metrics = settings.metrics;
    scfg.seed = cell.seed;
    std::shared_ptr<const StochasticProblem> problem =
        cache ? cache->get(cell, pspec) : std::shared_ptr<const StochasticProblem>(build_problem(pspec, cell.seed));

    if (settings.step_scale) {
        const auto& L = problem->meta().lipschitz_L;
        if (!L) throw ConfigError("solver.step_scale", "problem has no Lipschitz bound");
        scfg.step = ScalarSchedule::constant(*settings.step_scale / *L);
    }

    CellOutcome out;
    out.result = run_solver(*problem, scfg);
    const RunResult& r = out.result;
    out.csv = format_csv(r.records);

    Summary& s = out.summary;
    s.put("run", cell.label);
    s.put("problem", problem->name());
    s.put("scheme", to_string(scfg.scheme));
    s.put("seed", cell.seed);
    for (const auto& [k, v] : cell.assignments) s.put("sweep." + k, v);
    s.put("termination", to_string(r.termination));
    s.put("iterations", r.iterations);
    s.put("total_samples", r.records.empty() ? r.total_samples : r.records.back().samples_cum);
    s.put("total_grad_evals", r.total_grad_evals);
    if (!r.records.empty()) {
        s.put("initial_fval", r.records.front().fval);
        s.put("initial_gap", r.records.front().gap);
    }
    s.put("final_fval", problem->value(r.x_final));
    s.put("final_gap", problem->gap(r.x_final));
    const auto& meta = problem->meta();
    if (meta.x_star) s.put("dist_to_opt", (r.x_final - *meta.x_star).norm());
    s.put("sparsity_threshold", metrics.sparsity_threshold);
    s.put("sparsity_count", static_cast<std::uint64_t>(sparsity_count(r.x_final, metrics.sparsity_threshold)));
    const std::optional<Vector>& avg = r.x_averaged ? r.x_averaged : r.x_running_mean;
    if (avg) {
        s.put("averaged_fval", problem->value(*avg));
        s.put("averaged_gap", problem->gap(*avg));
        s.put("averaged_sparsity_count", static_cast<std::uint64_t>(sparsity_count(*avg, metrics.sparsity_threshold)));
        if (meta.x_star) s.put("averaged_dist_to_opt", (*avg - *meta.x_star).norm());
    }
    if (metrics.constraint_violation) {
        s.put("constraint_violation", constraint_violation(r.x_final));
        if (avg) s.put("averaged_constraint_violation", constraint_violation(*avg));
    }
    for (const auto& [k, v] : r.theory) s.put("theory." + k, v);
    return out;
}

} // namespace vssqn
