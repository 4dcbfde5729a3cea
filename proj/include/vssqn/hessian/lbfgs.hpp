#pragma once

#include "vssqn/core/types.hpp"

#include <cmath>
#include <deque>
#include <vector>

namespace vssqn {

/// (SC): plain sampled-gradient differences. (C): regularized by mu^delta_bar * s.
enum class PairMode { strongly_convex, convex };

struct CurvaturePair {
    Vector s;
    Vector y;
    long formed_at = 0;
    double mu_used = 0.0;
    double eta_used = 0.0;

    double sy() const { return s.dot(y); }
};

/**
 * Builds (s, y) from two gradients taken on the same batch.
 * In convex mode the caller passes gradients of F at smoothing eta^delta;
 * y then gets + mu^delta_bar * s.
 */
inline CurvaturePair collect_pair(PairMode mode, const Vector& x_i, const Vector& x_prev, const Vector& grad_at_xi,
                                  const Vector& grad_at_xprev, double mu_i, double eta_i, double delta_bar,
                                  long formed_at) {
    CurvaturePair p;
    p.s = x_i - x_prev;
    p.y = grad_at_xi - grad_at_xprev;
    p.formed_at = formed_at;
    p.eta_used = eta_i;
    if (mode == PairMode::convex) {
        if (!(mu_i > 0)) throw ConfigError("mu", "convex pairs need mu > 0");
        p.mu_used = mu_i;
        p.y += std::pow(mu_i, delta_bar) * p.s;
    }
    double sy = p.sy();
    if (!(sy > 0) || !std::isfinite(sy)) throw CurvatureError(formed_at, sy);
    return p;
}

/// The m most recent pairs; applies H_k by the two-loop recursion.
class LbfgsMemory {
public:
    explicit LbfgsMemory(std::size_t m, PairMode mode = PairMode::strongly_convex, double delta = 1.0,
                         double delta_bar = 1.0)
        : m_(m), mode_(mode), delta_(delta), delta_bar_(delta_bar) {
        if (m < 1) throw ConfigError("m", "memory depth must be >= 1");
        if (!(delta > 0 && delta <= 1)) throw ConfigError("delta", "must lie in (0,1]");
        if (!(delta_bar > 0 && delta_bar <= 1)) throw ConfigError("delta_bar", "must lie in (0,1]");
    }

    void push(CurvaturePair p) {
        if (!pairs_.empty() && p.formed_at <= pairs_.back().formed_at)
            throw ConfigError("formed_at", "pairs must arrive in increasing iteration order");
        double sy = p.sy();
        if (!(sy > 0) || !std::isfinite(sy)) throw CurvatureError(p.formed_at, sy);
        pairs_.push_back(std::move(p));
        if (pairs_.size() > m_) pairs_.pop_front();
    }

    /// Scaling of H_{k,0} from the newest pair; 1 when empty.
    double initial_scaling() const {
        if (pairs_.empty()) return 1.0;
        const auto& p = pairs_.back();
        return p.sy() / p.y.squaredNorm();
    }

    Vector apply(const Vector& v) const {
        if (pairs_.empty()) return v;
        const std::size_t count = pairs_.size();
        std::vector<double> alpha(count), rho(count);
        Vector q = v;
        for (std::size_t i = count; i-- > 0;) {
            const auto& p = pairs_[i];
            rho[i] = 1.0 / p.sy();
            alpha[i] = rho[i] * p.s.dot(q);
            q -= alpha[i] * p.y;
        }
        Vector r = initial_scaling() * q;
        for (std::size_t i = 0; i < count; ++i) {
            const auto& p = pairs_[i];
            double beta = rho[i] * p.y.dot(r);
            r += (alpha[i] - beta) * p.s;
        }
        return r;
    }

    std::size_t m() const noexcept { return m_; }
    std::size_t size() const noexcept { return pairs_.size(); }
    bool empty() const noexcept { return pairs_.empty(); }
    PairMode mode() const noexcept { return mode_; }
    double delta() const noexcept { return delta_; }
    double delta_bar() const noexcept { return delta_bar_; }
    const std::deque<CurvaturePair>& pairs() const noexcept { return pairs_; }
    const CurvaturePair& newest() const { return pairs_.back(); }

private:
    std::size_t m_;
    PairMode mode_;
    double delta_;
    double delta_bar_;
    std::deque<CurvaturePair> pairs_;
};

inline Vector apply_inverse_hessian(const LbfgsMemory& mem, const Vector& v) { return mem.apply(v); }

} // namespace vssqn
