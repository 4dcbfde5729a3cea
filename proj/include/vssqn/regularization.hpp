#pragma once

#include "vssqn/core/schedule.hpp"
#include "vssqn/core/types.hpp"

#include <functional>
#include <optional>

namespace vssqn {

/// f(x) + (mu/2)|x - center|^2 around an optional base value.
class RegularizedView {
public:
    RegularizedView(double mu, Vector center, std::function<double(const Vector&)> base_value = {})
        : mu_(mu), center_(std::move(center)), base_value_(std::move(base_value)) {
        if (!(mu > 0) || !std::isfinite(mu)) throw ConfigError("mu", "regularization parameter must be positive");
    }

    double mu() const noexcept { return mu_; }
    const Vector& center() const noexcept { return center_; }
    bool has_value() const noexcept { return static_cast<bool>(base_value_); }
    double base_value(const Vector& x) const { return base_value_(x); }

private:
    double mu_;
    Vector center_;
    std::function<double(const Vector&)> base_value_;
};

struct RegValueGrad {
    std::optional<double> value;
    Vector grad;
};

inline RegValueGrad reg_value_grad(const RegularizedView& view, const Vector& x, const Vector& sampled_grad) {
    RegValueGrad r;
    Vector d = x - view.center();
    r.grad = sampled_grad + view.mu() * d;
    if (view.has_value()) r.value = view.base_value(x) + 0.5 * view.mu() * d.squaredNorm();
    return r;
}

/// Parameters frozen into curvature pairs. Updated only at even k.
struct AlternationState {
    double mu_current = 1.0;
    std::optional<double> eta_current;
    long last_update_k = 0;
};

/// Holds at odd k; at even k moves to the schedule values, which must strictly decrease.
inline AlternationState alternation_step(const AlternationState& state, long k, const ScalarSchedule& mu_sched,
                                         const ScalarSchedule* eta_sched = nullptr) {
    if (k % 2 != 0) return state;
    AlternationState next = state;
    double mu = mu_sched(k);
    if (!(mu < state.mu_current))
        throw ConfigError("mu", "alternation requires mu_k < mu_{k-1} at even k=" + std::to_string(k));
    next.mu_current = mu;
    if (eta_sched) {
        double eta = (*eta_sched)(k);
        if (state.eta_current && !(eta < *state.eta_current))
            throw ConfigError("eta", "alternation requires eta_k < eta_{k-1} at even k=" + std::to_string(k));
        next.eta_current = eta;
    }
    next.last_update_k = k;
    return next;
}

} // namespace vssqn
