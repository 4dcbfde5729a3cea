#pragma once

#include "vssqn/core/types.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

namespace vssqn {

/// Sample size N_k as a function of the iteration index.
class BatchSchedule {
public:
    enum class Kind { geometric, polynomial, constant };

    /// ceil(n0 * rate^-(k+offset)), rate in (0,1).
    static BatchSchedule geometric(double n0, double rate, int offset = 0) {
        check_n0(n0);
        if (!(rate > 0 && rate < 1)) throw ConfigError("batch.rate", "must lie in (0,1)");
        return BatchSchedule(Kind::geometric, n0, rate, 0.0, offset);
    }

    /// ceil(n0 * (k+offset)^exponent), exponent > 0.
    static BatchSchedule polynomial(double n0, double exponent, int offset = 0) {
        check_n0(n0);
        if (!(exponent > 0)) throw ConfigError("batch.exponent", "must be positive");
        if (offset < 0) throw ConfigError("batch.offset", "must be non-negative");
        return BatchSchedule(Kind::polynomial, n0, 0.0, exponent, offset);
    }

    static BatchSchedule constant(double n0) {
        check_n0(n0);
        return BatchSchedule(Kind::constant, n0, 0.0, 0.0, 0);
    }

    std::uint64_t operator()(long k) const {
        double v = n0_;
        switch (kind_) {
        case Kind::geometric: v = n0_ * std::pow(rate_, -static_cast<double>(k + offset_)); break;
        case Kind::polynomial: v = n0_ * std::pow(static_cast<double>(k + offset_), exponent_); break;
        case Kind::constant: break;
        }
        // ceil is taken with a relative slack of 1e-12 so values like 18.000000000000004 stay 18
        double c = std::ceil(v * (1.0 - 1e-12));
        if (c < 1.0) c = 1.0;
        if (!(c < 1e15)) throw ConfigError("batch", "sample size overflow at k=" + std::to_string(k));
        return static_cast<std::uint64_t>(c);
    }

    Kind kind() const noexcept { return kind_; }
    double n0() const noexcept { return n0_; }
    double rate() const noexcept { return rate_; }
    double exponent() const noexcept { return exponent_; }
    int offset() const noexcept { return offset_; }

private:
    BatchSchedule(Kind kind, double n0, double rate, double exponent, int offset)
        : kind_(kind), n0_(n0), rate_(rate), exponent_(exponent), offset_(offset) {}

    static void check_n0(double n0) {
        if (!(n0 >= 1.0) || !std::isfinite(n0)) throw ConfigError("batch.n0", "must be >= 1");
    }

    Kind kind_;
    double n0_;
    double rate_;
    double exponent_;
    int offset_;
};

/// Steplength, regularization or smoothing parameter as a function of k.
class ScalarSchedule {
public:
    enum class Kind { constant, power, horizon_constant };

    static ScalarSchedule constant(double value) {
        check_base(value);
        return ScalarSchedule(Kind::constant, value, 0.0, 0, 0);
    }

    /// base * (k+offset)^exponent; k+offset must be >= 1 when evaluated.
    static ScalarSchedule power(double base, double exponent, int offset = 0) {
        check_base(base);
        return ScalarSchedule(Kind::power, base, exponent, offset, 0);
    }

    /// base * K^exponent for every k.
    static ScalarSchedule horizon_constant(double base, double exponent, long horizon) {
        check_base(base);
        if (horizon < 1) throw ConfigError("horizon", "must be >= 1");
        return ScalarSchedule(Kind::horizon_constant, base, exponent, 0, horizon);
    }

    double operator()(long k) const {
        switch (kind_) {
        case Kind::constant: return base_;
        case Kind::power: {
            long t = k + offset_;
            if (t < 1) throw ConfigError("schedule", "power schedule evaluated at k+offset < 1");
            return base_ * std::pow(static_cast<double>(t), exponent_);
        }
        case Kind::horizon_constant: return base_ * std::pow(static_cast<double>(horizon_), exponent_);
        }
        return base_;
    }

    Kind kind() const noexcept { return kind_; }
    double base() const noexcept { return base_; }
    double exponent() const noexcept { return exponent_; }
    int offset() const noexcept { return offset_; }

    /// True when the value never changes with k.
    bool is_constant() const noexcept { return kind_ != Kind::power || exponent_ == 0.0; }

private:
    ScalarSchedule(Kind kind, double base, double exponent, int offset, long horizon)
        : kind_(kind), base_(base), exponent_(exponent), offset_(offset), horizon_(horizon) {}

    static void check_base(double b) {
        if (!(b > 0) || !std::isfinite(b)) throw ConfigError("schedule.base", "must be positive and finite");
    }

    Kind kind_;
    double base_;
    double exponent_;
    int offset_;
    long horizon_;
};

inline std::uint64_t schedule_eval(const BatchSchedule& s, long k) { return s(k); }
inline double schedule_eval(const ScalarSchedule& s, long k) { return s(k); }

} // namespace vssqn
