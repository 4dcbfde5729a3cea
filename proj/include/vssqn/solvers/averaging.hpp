#pragma once

#include "vssqn/core/types.hpp"

#include <vector>

namespace vssqn {

/// Running sum of w_i x_i and w_i.
class WeightedAverager {
public:
    void add(const Vector& x, double w) {
        if (!(w > 0) || !std::isfinite(w)) throw ConfigError("weight", "must be positive");
        if (total_ == 0.0) sum_ = Vector::Zero(x.size());
        sum_ += w * x;
        total_ += w;
    }

    bool empty() const noexcept { return total_ == 0.0; }
    double total_weight() const noexcept { return total_; }
    Vector mean() const {
        if (empty()) throw Error("average of an empty sequence");
        return sum_ / total_;
    }

private:
    Vector sum_;
    double total_ = 0.0;
};

inline Vector weighted_average(const std::vector<Vector>& xs, const std::vector<double>& weights) {
    if (xs.size() != weights.size()) throw ConfigError("weights", "length differs from the iterate count");
    if (xs.empty()) throw ConfigError("xs", "empty sequence");
    WeightedAverager acc;
    for (std::size_t i = 0; i < xs.size(); ++i) acc.add(xs[i], weights[i]);
    return acc.mean();
}

} // namespace vssqn
