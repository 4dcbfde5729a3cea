#pragma once

#include "vssqn/harness/config.hpp"

#include <string>
#include <utility>
#include <vector>

namespace vssqn {

namespace detail {

// Desk-scale synthetic stand-in for a sparse binary text dataset.
inline constexpr const char* kLogisticData = R"(
problem.kind = logistic
problem.n = 200
problem.rows = 2000
problem.density = 0.1
problem.support = 0.1
problem.weight_scale = 1
problem.reference = true
)";

inline const std::vector<std::pair<std::string, std::string>>& preset_table() {
    static const std::vector<std::pair<std::string, std::string>> table = {
        {"sc_smooth", std::string(kLogisticData) + R"(
run.name = sc_smooth
run.seeds = 1,2,3
problem.mu_l2 = 0.1
solver.budget = 10000
solver.batch = geometric:1:0.95
solver.step = 0.1
solver.m = 5
sweep.solver.scheme = VS_SQN;APG_BASELINE
)"},
        {"sc_nonsmooth", std::string(kLogisticData) + R"(
run.name = sc_nonsmooth
run.seeds = 1,2,3
problem.mu_l2 = 0.01
problem.lambda_l1 = 0.01
problem.l1_smoothing = huber
problem.huber_eta = 0.1
solver.budget = 100000
solver.batch = geometric:1:0.95
solver.eta = 0.1
solver.step = 0.01
solver.m = 5
sweep.solver.scheme = SVS_SQN_MOREAU;APG_BASELINE
)"},
        {"c_smooth", std::string(kLogisticData) + R"(
run.name = c_smooth
run.seeds = 1,2,3
solver.budget = 100000
solver.epsilon = 0.1
solver.m = 5
zip.solver.scheme = RVS_SQN;SQN_UNIT;APG_BASELINE
zip.solver.gamma0 = 1;1;
)"},
        {"c_nonsmooth", std::string(kLogisticData) + R"(
run.name = c_nonsmooth
run.seeds = 1,2,3
problem.lambda_l1 = 0.01
problem.l1_smoothing = huber
solver.scheme = RSVS_SQN
solver.horizon = 1000
solver.epsilon = 0.1
solver.m = 5
)"},
        {"illcond_sweep", R"(
run.name = illcond_sweep
run.seeds = 1,2,3
problem.kind = quadratic
problem.n = 20
problem.sigma = 0.01
solver.budget = 200000
solver.batch = geometric:1:0.99
sweep.problem.kappa = 1e5;1e6;1e7;1e8
zip.solver.scheme = VS_SQN;VS_SQN;APG_BASELINE
zip.solver.m = 1;10;
zip.solver.step = 0.3;0.3;
zip.solver.step_scale = ;;1
)"},
        {"sparsity", R"(
run.name = sparsity
run.seeds = 1,2,3
problem.kind = logistic
problem.n = 500
problem.rows = 2000
problem.density = 0.02
problem.support = 0.1
problem.weight_scale = 2
problem.lambda_l1 = 3e-3
problem.l1_smoothing = pseudo_huber
problem.pseudo_eps = 1e-6
solver.budget = 100000
solver.epsilon = 0.1
solver.m = 5
solver.average = true
zip.solver.scheme = RVS_SQN;SGD
zip.solver.gamma0 = 1;
)"},
        {"isotonic", R"(
run.name = isotonic
run.seeds = 1,2,3
problem.kind = isotonic
problem.n = 20
problem.rows = 200
problem.eta = 0.01
solver.scheme = RSVS_SQN
solver.horizon = 2000
solver.eta = 0.01
solver.mu = 1e-3
solver.c_gamma = 0.1
solver.m = 5
)"},
        {"lewis_overton", R"(
run.name = lewis_overton
run.seeds = 1
problem.kind = lewis_overton
solver.scheme = SVS_SQN_DIMINISHING
solver.horizon = 500
solver.batch = constant:1
solver.m = 1
sweep.solver.x0 = 1,0;0.7071067811865476,0.7071067811865476;0,1;-0.7071067811865476,0.7071067811865476;-1,0;-0.7071067811865476,-0.7071067811865476;0,-1;0.7071067811865476,-0.7071067811865476;2,2
)"},
    };
    return table;
}

} // namespace detail

inline std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& [n, t] : detail::preset_table()) names.push_back(n);
    return names;
}

inline std::string preset_text(const std::string& name) {
    for (const auto& [n, t] : detail::preset_table())
        if (n == name) return t;
    throw ConfigError("--preset", "unknown preset '" + name + "'");
}

inline KeyValueConfig preset_config(const std::string& name) {
    return KeyValueConfig::parse(preset_text(name), "preset:" + name);
}

} // namespace vssqn
