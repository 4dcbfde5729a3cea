#pragma once

#include "vssqn/core/problem.hpp"
#include "vssqn/smoothing/smoothers.hpp"

#include <cmath>
#include <functional>
#include <limits>

namespace vssqn {

struct ProxSpec {
    enum class Kind { closed_form_l1, projection_set, inner_solver };
    Kind kind = Kind::inner_solver;
    double tolerance = 1e-10;
    int max_inner_iters = 100000;
};

/// A function given by its value and its prox map prox_{t f}.
struct ProxFunction {
    ScalarFunction value;
    std::function<Vector(const Vector&, double)> prox;
};

inline ProxFunction l1_function(double weight = 1.0) {
    return {[weight](const Vector& x) { return weight * x.lpNorm<1>(); },
            [weight](const Vector& x, double t) { return prox_soft_threshold(x, weight * t); }};
}

inline ProxFunction indicator_function(Projector project) {
    return {[project](const Vector& x) {
                return (x - project(x)).squaredNorm() == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
            },
            [project](const Vector& x, double) { return project(x); }};
}

struct MoreauResult {
    double value = 0.0;
    Vector grad;
    Vector prox;
    double residual = 0.0;
    int inner_iterations = 0;
};

/// Moreau envelope through a closed-form prox.
inline MoreauResult moreau_value_grad(const ProxFunction& f, const Vector& x, double eta) {
    require_eta(eta);
    MoreauResult r;
    r.prox = f.prox(x, eta);
    Vector d = x - r.prox;
    double fu = f.value(r.prox);
    // an indicator evaluated at its own projection may register a rounding-level miss
    if (!std::isfinite(fu)) fu = 0.0;
    r.value = fu + d.squaredNorm() / (2.0 * eta);
    r.grad = d / eta;
    return r;
}

/**
 * @brief Moreau envelope of g + h where g is smooth and h has a prox.
 *
 * Solves min_u g(u) + h(u) + |u - x|^2/(2 eta) by proximal gradient with step
 * 1/(L + 1/eta). Stops when the gradient-mapping norm is at most
 * tolerance*(1 + |x|).
 */
inline MoreauResult moreau_composite(const BatchGradient& smooth_grad, const std::function<Vector(const Vector&, double)>& h_prox,
                                     double smooth_L, const Vector& x, double eta, const ProxSpec& spec = {},
                                     const Vector* warm_start = nullptr, const ScalarFunction& smooth_value = {},
                                     const ScalarFunction& h_value = {}) {
    require_eta(eta);
    if (!(smooth_L >= 0)) throw ConfigError("lipschitz_L", "inner solver needs a Lipschitz bound");
    const double t = 1.0 / (smooth_L + 1.0 / eta);
    const double target = spec.tolerance * (1.0 + x.norm());
    Vector u = warm_start ? *warm_start : x;
    Vector g(x.size()), next(x.size());
    MoreauResult r;
    for (int it = 1; it <= spec.max_inner_iters; ++it) {
        smooth_grad(u, g);
        g += (u - x) / eta;
        next = h_prox ? h_prox(u - t * g, t) : Vector(u - t * g);
        r.residual = (u - next).norm() / t;
        u.swap(next);
        r.inner_iterations = it;
        if (r.residual <= target) break;
    }
    if (r.residual > target) throw ProxError(r.residual, r.inner_iterations);
    r.prox = u;
    r.grad = (x - u) / eta;
    r.value = std::numeric_limits<double>::quiet_NaN();
    if (smooth_value) {
        double hv = h_value ? h_value(u) : 0.0;
        r.value = smooth_value(u) + hv + (u - x).squaredNorm() / (2.0 * eta);
    }
    return r;
}

} // namespace vssqn
