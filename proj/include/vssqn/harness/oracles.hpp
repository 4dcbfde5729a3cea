#pragma once

#include "vssqn/core/types.hpp"
#include "vssqn/smoothing/smoothers.hpp"
#include "vssqn/solvers/config.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace vssqn {

using ValueGradFunction = std::function<ValueGrad(const Vector&)>;

struct FdReport {
    double max_rel_error = 0.0;
    std::size_t worst_point = 0;
    std::size_t points = 0;
    bool passed = true;
};

/**
 * Central differences against the analytic gradient. Per point the error is
 * |fd - g|_inf / max(1, |g|_inf). The step defaults to 1e-6 (1 + |x|).
 */
inline FdReport fd_check(const ValueGradFunction& f, const std::vector<Vector>& points,
                         std::optional<double> step = std::nullopt, double threshold = 1e-5) {
    FdReport r;
    r.points = points.size();
    for (std::size_t p = 0; p < points.size(); ++p) {
        Vector x = points[p];
        const double h = step.value_or(1e-6 * (1.0 + x.norm()));
        const Vector g = f(x).grad;
        Vector fd(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double xi = x[i];
            x[i] = xi + h;
            const double fp = f(x).value;
            x[i] = xi - h;
            const double fm = f(x).value;
            x[i] = xi;
            fd[i] = (fp - fm) / (2.0 * h);
        }
        const double err = (fd - g).lpNorm<Eigen::Infinity>() / std::max(1.0, g.lpNorm<Eigen::Infinity>());
        if (!(err <= r.max_rel_error)) {
            r.max_rel_error = std::isnan(err) ? std::numeric_limits<double>::infinity() : err;
            r.worst_point = p;
        }
    }
    r.passed = r.max_rel_error <= threshold;
    return r;
}

/// Entries with |x_i| <= threshold.
inline std::size_t sparsity_count(const Vector& x, double threshold = 1e-4) {
    std::size_t c = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (std::abs(x[i]) <= threshold) ++c;
    return c;
}

enum class RateModel { linear_in_k, power_in_k };

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t points = 0;
};

/// Least squares of log(gap) against k or log k.
inline RateFit rate_fit(const std::vector<double>& k, const std::vector<double>& gap, RateModel model) {
    if (k.size() != gap.size()) throw Error("rate_fit: length mismatch");
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < k.size(); ++i) {
        if (!(gap[i] > 0) || !std::isfinite(gap[i])) continue;
        if (model == RateModel::power_in_k && !(k[i] > 0)) continue;
        xs.push_back(model == RateModel::linear_in_k ? k[i] : std::log(k[i]));
        ys.push_back(std::log(gap[i]));
    }
    if (xs.size() < 20)
        throw Error("rate_fit: insufficient points (" + std::to_string(xs.size()) + " usable, need 20)");
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (!(sxx > 0)) throw Error("rate_fit: abscissae are all equal");
    RateFit f;
    f.points = xs.size();
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double e = ys[i] - (f.intercept + f.slope * xs[i]);
        sse += e * e;
    }
    f.r_squared = syy > 0 ? 1.0 - sse / syy : 1.0;
    return f;
}

inline RateFit rate_fit(const std::vector<IterateRecord>& log, RateModel model) {
    std::vector<double> k, gap;
    for (const auto& r : log) {
        k.push_back(static_cast<double>(r.k));
        gap.push_back(r.gap.value_or(std::numeric_limits<double>::quiet_NaN()));
    }
    return rate_fit(k, gap, model);
}

/**
 * Projection onto the monotone cone by enumerating every active set of the
 * chain constraints. Each active set fixes a partition into runs whose
 * values are the run means; the closest feasible candidate is the answer.
 */
inline Vector brute_force_monotone_projection(const Vector& x) {
    const auto n = x.size();
    if (n <= 1) return x;
    if (n > 20) throw Error("brute_force_monotone_projection: n too large");
    Vector best;
    double best_d = std::numeric_limits<double>::infinity();
    const std::uint64_t patterns = std::uint64_t{1} << (n - 1);
    Vector cand(n);
    for (std::uint64_t mask = 0; mask < patterns; ++mask) {
        Eigen::Index start = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const bool tied = i + 1 < n && ((mask >> i) & 1U);
            if (!tied) {
                const double mean = x.segment(start, i - start + 1).mean();
                cand.segment(start, i - start + 1).setConstant(mean);
                start = i + 1;
            }
        }
        bool feasible = true;
        for (Eigen::Index i = 0; i + 1 < n; ++i)
            if (cand[i] > cand[i + 1] + 1e-15 * (1.0 + std::abs(cand[i]))) feasible = false;
        if (!feasible) continue;
        const double d = (cand - x).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = cand;
        }
    }
    return best;
}

} // namespace vssqn
