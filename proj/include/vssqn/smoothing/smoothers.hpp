#pragma once

#include "vssqn/core/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace vssqn {

struct ValueGrad {
    double value = 0.0;
    Vector grad;
};

using ScalarFunction = std::function<double(const Vector&)>;
using GradientFunction = std::function<Vector(const Vector&)>;
using Projector = std::function<Vector(const Vector&)>;

inline void require_eta(double eta) {
    if (!(eta > 0) || !std::isfinite(eta)) throw ConfigError("eta", "smoothing parameter must be positive");
}

/// sign(x_i) * max(|x_i| - threshold, 0)
inline Vector prox_soft_threshold(const Vector& x, double threshold) {
    if (!(threshold >= 0)) throw ConfigError("threshold", "must be non-negative");
    Vector out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double a = std::abs(x[i]) - threshold;
        out[i] = a > 0 ? std::copysign(a, x[i]) : 0.0;
    }
    return out;
}

/// Affine forms z_i = a_i'x + b_i, one per row of `a`.
struct AffineTerms {
    Matrix a;
    Vector b;

    Eigen::Index count() const { return a.rows(); }
    Vector eval(const Vector& x) const { return a * x + b; }
    double max_value(const Vector& x) const { return eval(x).maxCoeff(); }
};

/// eta*ln(sum exp(z_i/eta)) - eta*ln(count), with max-subtraction.
inline ValueGrad lse_smooth_max(const AffineTerms& terms, const Vector& x, double eta) {
    require_eta(eta);
    if (terms.count() < 2) throw ConfigError("terms", "need at least two affine forms");
    Vector z = terms.eval(x);
    double zmax = z.maxCoeff();
    Vector w = ((z.array() - zmax) / eta).exp().matrix();
    double sum = w.sum();
    w /= sum;
    ValueGrad r;
    r.value = zmax + eta * std::log(sum) - eta * std::log(static_cast<double>(terms.count()));
    r.grad = terms.a.transpose() * w;
    return r;
}

/// Componentwise Huber: t^2/(2eta) on |t| <= eta, |t| - eta/2 beyond.
inline ValueGrad huber_l1(const Vector& x, double eta) {
    require_eta(eta);
    ValueGrad r;
    r.grad.resize(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double t = x[i];
        if (std::abs(t) <= eta) {
            r.value += t * t / (2.0 * eta);
            r.grad[i] = t / eta;
        } else {
            r.value += std::abs(t) - eta / 2.0;
            r.grad[i] = t > 0 ? 1.0 : -1.0;
        }
    }
    return r;
}

/// sqrt(|x|^2 + eta^2) - eta
inline ValueGrad norm2_smooth(const Vector& x, double eta) {
    require_eta(eta);
    double r2 = x.squaredNorm() + eta * eta;
    double root = std::sqrt(r2);
    ValueGrad r;
    // written as |x|^2/(root + eta) to avoid cancellation near x = 0
    r.value = x.squaredNorm() / (root + eta);
    r.grad = x / root;
    return r;
}

/// dist(x, X)^2 / (2 eta) with gradient (x - P(x)) / eta.
inline ValueGrad indicator_smooth(const Vector& x, const Projector& project, double eta) {
    require_eta(eta);
    Vector d = x - project(x);
    ValueGrad r;
    r.value = d.squaredNorm() / (2.0 * eta);
    r.grad = d / eta;
    return r;
}

/// (2(n+1)^2 / (tau^2 (k+2)))^(1/3)
inline double eta_schedule_diminishing(std::size_t n, double tau, long k) {
    if (!(tau > 0)) throw ConfigError("tau", "must be positive");
    if (k < 0) throw ConfigError("k", "must be non-negative");
    double np1 = static_cast<double>(n) + 1.0;
    return std::cbrt(2.0 * np1 * np1 / (tau * tau * static_cast<double>(k + 2)));
}

/**
 * @brief A smoothed function f_eta with its smoothing constants.
 *
 * The gradient is (alpha_smooth/eta)-Lipschitz and
 * f_eta <= f <= f_eta + eta*beta.
 */
struct SmoothedView {
    double eta = 1.0;
    double alpha_smooth = 1.0;
    double beta = 0.0;
    std::function<ValueGrad(const Vector&)> eval;
    ScalarFunction original;
    std::function<Vector(const Vector&, double)> prox;

    double value(const Vector& x) const { return eval(x).value; }
    Vector gradient(const Vector& x) const { return eval(x).grad; }
    double lipschitz() const { return alpha_smooth / eta; }
};

inline SmoothedView norm2_view(double eta) {
    require_eta(eta);
    SmoothedView v;
    v.eta = eta;
    v.alpha_smooth = 1.0;
    v.beta = 1.0;
    v.eval = [eta](const Vector& x) { return norm2_smooth(x, eta); };
    v.original = [](const Vector& x) { return x.norm(); };
    return v;
}

inline SmoothedView lse_view(AffineTerms terms, double eta) {
    require_eta(eta);
    SmoothedView v;
    v.eta = eta;
    v.alpha_smooth = terms.a.rowwise().squaredNorm().maxCoeff();
    v.beta = std::log(static_cast<double>(terms.count()));
    v.eval = [terms, eta](const Vector& x) { return lse_smooth_max(terms, x, eta); };
    v.original = [terms](const Vector& x) { return terms.max_value(x); };
    return v;
}

inline SmoothedView huber_view(std::size_t n, double eta) {
    require_eta(eta);
    SmoothedView v;
    v.eta = eta;
    v.alpha_smooth = 1.0;
    v.beta = static_cast<double>(n) / 2.0;
    v.eval = [eta](const Vector& x) { return huber_l1(x, eta); };
    v.original = [](const Vector& x) { return x.lpNorm<1>(); };
    v.prox = [](const Vector& x, double t) { return prox_soft_threshold(x, t); };
    return v;
}

inline SmoothedView indicator_view(Projector project, double eta) {
    require_eta(eta);
    SmoothedView v;
    v.eta = eta;
    v.alpha_smooth = 1.0;
    v.beta = 0.0;
    v.eval = [project, eta](const Vector& x) { return indicator_smooth(x, project, eta); };
    v.original = [project](const Vector& x) {
        return (x - project(x)).squaredNorm() == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    };
    v.prox = [project](const Vector& x, double) { return project(x); };
    return v;
}

struct ChainReport {
    double max_violation = -std::numeric_limits<double>::infinity();
    std::size_t violations = 0;
    std::size_t checked = 0;
    bool pass = true;
};

/// Checks f_{eta_k1}(x) <= f_{eta_k}(x) + (eta_k^2/eta_k1 - eta_k) B^2 / 2 at every point.
inline ChainReport check_smoothing_chain(const ScalarFunction& f_k, const ScalarFunction& f_k1, double eta_k,
                                         double eta_k1, double B, const std::vector<Vector>& points) {
    require_eta(eta_k);
    require_eta(eta_k1);
    if (eta_k1 > eta_k) throw ConfigError("eta_k1", "must not exceed eta_k");
    double slack = 0.5 * (eta_k * eta_k / eta_k1 - eta_k) * B * B;
    ChainReport rep;
    for (const auto& x : points) {
        double v = f_k1(x) - f_k(x) - slack;
        rep.max_violation = std::max(rep.max_violation, v);
        if (v > 1e-12) ++rep.violations;
        ++rep.checked;
    }
    rep.pass = rep.violations == 0;
    return rep;
}

struct SandwichReport {
    double worst_lower = -std::numeric_limits<double>::infinity(); // max of f_eta - f
    double worst_upper = -std::numeric_limits<double>::infinity(); // max of f - f_eta - eta*beta
    bool pass = true;
};

/// f_eta <= f <= f_eta + eta*beta on every point, up to `tol`.
inline SandwichReport check_sandwich(const SmoothedView& view, const std::vector<Vector>& points,
                                     double tol = 1e-12) {
    SandwichReport rep;
    for (const auto& x : points) {
        double fe = view.value(x);
        double f = view.original(x);
        rep.worst_lower = std::max(rep.worst_lower, fe - f);
        rep.worst_upper = std::max(rep.worst_upper, f - fe - view.eta * view.beta);
    }
    rep.pass = rep.worst_lower <= tol && rep.worst_upper <= tol;
    return rep;
}

} // namespace vssqn
