#pragma once

#include "vssqn/core/types.hpp"

#include <cmath>
#include <optional>
#include <string>

namespace vssqn {

enum class HessianRegime { sc_smooth, sc_moreau, c_smooth, c_smoothed };

inline std::string to_string(HessianRegime r) {
    switch (r) {
    case HessianRegime::sc_smooth: return "SC-smooth";
    case HessianRegime::sc_moreau: return "SC-Moreau";
    case HessianRegime::c_smooth: return "C-smooth";
    case HessianRegime::c_smoothed: return "C-smoothed";
    }
    return "?";
}

struct BoundParams {
    std::optional<double> L;
    std::optional<double> tau;
    std::size_t m = 1;
    std::size_t n = 1;
    std::optional<double> mu_k;
    std::optional<double> eta_k;
    std::optional<double> mu0;
    double delta = 1.0;
    double delta_bar = 1.0;
};

struct HessianBounds {
    double lambda_lo = 0.0;
    double lambda_hi = 0.0;
    /// k-independent factor of lambda_hi in the C-smooth regime.
    std::optional<double> lambda_base;
    HessianRegime regime = HessianRegime::sc_smooth;
};

namespace detail {
inline double need(const std::optional<double>& v, const char* field) {
    if (!v) throw ConfigError(field, "required by the selected bound regime");
    if (!(*v > 0)) throw ConfigError(field, "must be positive");
    return *v;
}
} // namespace detail

/// Eigenvalue bounds on H_k. Large powers go through logs; overflow yields +inf.
inline HessianBounds theoretical_bounds(HessianRegime regime, const BoundParams& p) {
    if (p.m < 1 || p.n < 1) throw ConfigError("m", "m and n must be >= 1");
    const double mn = static_cast<double>(p.m + p.n);
    const double md = static_cast<double>(p.m);
    HessianBounds b;
    b.regime = regime;
    switch (regime) {
    case HessianRegime::sc_smooth: {
        double L = detail::need(p.L, "L"), tau = detail::need(p.tau, "tau");
        b.lambda_lo = 1.0 / (L * mn);
        b.lambda_hi = std::exp(md * std::log(L * mn / tau));
        break;
    }
    case HessianRegime::sc_moreau: {
        double eta = detail::need(p.eta_k, "eta_k"), tau = detail::need(p.tau, "tau");
        b.lambda_lo = eta / mn;
        b.lambda_hi = std::exp(md * std::log(mn / (eta * tau)));
        break;
    }
    case HessianRegime::c_smooth: {
        double L = detail::need(p.L, "L"), mu0 = detail::need(p.mu0, "mu0"), mu_k = detail::need(p.mu_k, "mu_k");
        double M = L + std::pow(mu0, p.delta_bar);
        b.lambda_lo = 1.0 / (mn * M);
        double log_base = (mn - 1.0) * std::log(mn * M) - std::lgamma(static_cast<double>(p.n));
        b.lambda_base = std::exp(log_base);
        b.lambda_hi = std::exp(log_base - p.delta_bar * mn * std::log(mu_k));
        break;
    }
    case HessianRegime::c_smoothed: {
        double eta = detail::need(p.eta_k, "eta_k"), mu0 = detail::need(p.mu0, "mu0"),
               mu_k = detail::need(p.mu_k, "mu_k");
        double M = 1.0 / std::pow(eta, p.delta) + std::pow(mu0, p.delta_bar);
        b.lambda_lo = 1.0 / (mn * M);
        b.lambda_hi = std::exp((mn - 1.0) * std::log(mn * M) - std::lgamma(static_cast<double>(p.n)) -
                               mn * p.delta_bar * std::log(mu_k));
        break;
    }
    }
    return b;
}

} // namespace vssqn
