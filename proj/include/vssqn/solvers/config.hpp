#pragma once

#include "vssqn/core/rng.hpp"
#include "vssqn/core/schedule.hpp"
#include "vssqn/core/types.hpp"
#include "vssqn/hessian/lbfgs.hpp"
#include "vssqn/smoothing/moreau.hpp"

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vssqn {

enum class Scheme { vs_sqn, svs_sqn_moreau, svs_sqn_diminishing, rvs_sqn, rsvs_sqn, sgd, sqn_unit, apg_baseline };

inline std::string to_string(Scheme s) {
    switch (s) {
    case Scheme::vs_sqn: return "VS_SQN";
    case Scheme::svs_sqn_moreau: return "SVS_SQN_MOREAU";
    case Scheme::svs_sqn_diminishing: return "SVS_SQN_DIMINISHING";
    case Scheme::rvs_sqn: return "RVS_SQN";
    case Scheme::rsvs_sqn: return "RSVS_SQN";
    case Scheme::sgd: return "SGD";
    case Scheme::sqn_unit: return "SQN_UNIT";
    case Scheme::apg_baseline: return "APG_BASELINE";
    }
    return "?";
}

inline Scheme parse_scheme(const std::string& name, const std::string& field = "solver.scheme") {
    for (Scheme s : {Scheme::vs_sqn, Scheme::svs_sqn_moreau, Scheme::svs_sqn_diminishing, Scheme::rvs_sqn,
                     Scheme::rsvs_sqn, Scheme::sgd, Scheme::sqn_unit, Scheme::apg_baseline})
        if (to_string(s) == name) return s;
    throw ConfigError(field, "unknown scheme '" + name + "'");
}

/// What one iteration did, for replay checks.
struct IterationTrace {
    long k = 0;
    const Vector* x = nullptr;
    const Vector* x_next = nullptr;
    const Vector* gradient = nullptr; // the (regularized) gradient fed to H_k
    const LbfgsMemory* memory = nullptr;
    SampleHandle handle;
    double gamma = 0.0;
    double mu = 0.0;  // 0 when the scheme does not regularize
    double eta = 0.0; // 0 when the scheme does not smooth
};

using IterationObserver = std::function<void(const IterationTrace&)>;

struct SolverConfig {
    Scheme scheme = Scheme::vs_sqn;
    std::size_t m = 1;
    std::optional<long> horizon;
    std::optional<std::uint64_t> sample_budget;

    // schedule overrides; empty means the theory default for the scheme
    std::optional<BatchSchedule> batch;
    std::optional<ScalarSchedule> step;
    std::optional<ScalarSchedule> mu;
    std::optional<ScalarSchedule> eta;

    double epsilon = 0.1;
    double c_gamma = 1.0;
    std::optional<double> delta;
    std::optional<double> delta_bar;
    std::optional<double> n0;
    double rate = 0.95;           // rho or q of geometric schedules
    double batch_exponent = 1.1;  // a of the sVS diminishing and rsVS schedules
    std::optional<double> gamma0; // rVS, SGD and unit-batch SQN base step
    std::optional<double> mu0;    // rVS base regularization

    std::optional<double> nu1;
    std::optional<double> alpha;

    std::uint64_t seed = 1;
    std::uint64_t stream = 0;
    std::optional<Vector> x0;

    bool average = false;      // SGD: keep the running mean of iterates
    bool full_log = false;     // log every iteration regardless of count
    bool record_values = true; // evaluate f and the gap when logging
    ProxSpec prox;
    IterationObserver observer;
};

struct IterateRecord {
    long k = 0;
    std::uint64_t samples_cum = 0;
    std::uint64_t grad_evals_cum = 0;
    std::optional<double> fval;
    std::optional<double> gap;
    std::optional<double> grad_norm;
    double step_norm = 0.0;
    double wall_ms = 0.0;
    double gamma = std::numeric_limits<double>::quiet_NaN();
    double mu = std::numeric_limits<double>::quiet_NaN();
    double eta = std::numeric_limits<double>::quiet_NaN();
};

enum class Termination { budget, horizon, zero_step };

inline std::string to_string(Termination t) {
    switch (t) {
    case Termination::budget: return "budget";
    case Termination::horizon: return "horizon";
    case Termination::zero_step: return "zero-step";
    }
    return "?";
}

struct RunResult {
    std::vector<IterateRecord> records;
    Vector x_final;
    std::optional<Vector> x_averaged;     // weighted average, rsVS-SQN only
    std::optional<Vector> x_running_mean; // SGD with averaging
    Termination termination = Termination::horizon;
    long iterations = 0;
    std::uint64_t total_samples = 0;
    std::uint64_t total_grad_evals = 0;
    std::map<std::string, double> theory; // theoretical and used constants
};

} // namespace vssqn
