#pragma once

#include "vssqn/core/rng.hpp"
#include "vssqn/core/types.hpp"

#include <functional>
#include <optional>
#include <string>

namespace vssqn {

/// Mean gradient of one fixed batch, evaluated at any point: out = grad(x).
using BatchGradient = std::function<void(const Vector& x, Vector& out)>;

/// Splitting f = E[F(., w)] + h with h deterministic and prox-friendly.
class CompositeStructure {
public:
    virtual ~CompositeStructure() = default;
    virtual double h_value(const Vector& x) const = 0;
    /// prox of t*h at x.
    virtual Vector h_prox(const Vector& x, double t) const = 0;
    /// Mean gradient of the smooth part over a batch.
    virtual BatchGradient bind_smooth(const SampleHandle& batch) const = 0;
    /// Gradient Lipschitz bound of the smooth part, uniform over realizations.
    virtual double smooth_lipschitz() const = 0;
};

/**
 * @brief Stochastic oracle f(x) = E[F(x, w)].
 *
 * `eta` selects a smoothed integrand F_eta when the problem carries a
 * nonsmooth term. eta = 0 means the raw integrand, with a subgradient at kinks.
 */
class StochasticProblem {
public:
    virtual ~StochasticProblem() = default;

    virtual std::string name() const = 0;
    virtual const ProblemMeta& meta() const = 0;
    std::size_t dim() const { return meta().n; }

    virtual void sample_gradient(const Vector& x, const Realization& w, double eta, Vector& out) const = 0;

    /// Batch mean bound to fixed realizations. Default sums in index order.
    virtual BatchGradient bind(const SampleHandle& batch, double eta) const {
        return [this, batch, eta](const Vector& x, Vector& out) {
            out.setZero(x.size());
            Vector g(x.size());
            for (std::uint64_t j = 0; j < batch.count; ++j) {
                sample_gradient(x, batch[j], eta, g);
                if (!g.allFinite()) throw OracleError(j, name() + ": non-finite sample gradient");
                out += g;
            }
            out /= static_cast<double>(batch.count);
        };
    }

    /// True objective f (including any nonsmooth part), when computable.
    virtual std::optional<double> value(const Vector&) const { return std::nullopt; }

    /// f(x) - f*, when f* is known.
    virtual std::optional<double> gap(const Vector& x) const {
        auto f = value(x);
        if (f && meta().f_star) return *f - *meta().f_star;
        return std::nullopt;
    }

    virtual bool deterministic() const { return false; }
    virtual const CompositeStructure* composite() const { return nullptr; }
};

struct SampledGradient {
    Vector gradient;
    SampleHandle handle;
};

/// Mean of `batch` fresh sampled gradients at x; advances `rng` by exactly `batch`.
inline SampledGradient sample_average_gradient(const StochasticProblem& problem, const Vector& x,
                                               std::uint64_t batch, RngStream& rng, double eta = 0.0) {
    if (batch < 1) throw ConfigError("batch", "must be >= 1");
    require_finite(x, "x");
    SampledGradient r;
    r.handle = rng.take(batch);
    problem.bind(r.handle, eta)(x, r.gradient);
    if (!r.gradient.allFinite()) throw OracleError(0, problem.name() + ": non-finite batch gradient");
    return r;
}

/// Re-evaluate a stored batch at another point.
inline Vector replay_gradient(const StochasticProblem& problem, const SampleHandle& handle, const Vector& x,
                              double eta = 0.0) {
    Vector g;
    problem.bind(handle, eta)(x, g);
    return g;
}

} // namespace vssqn
