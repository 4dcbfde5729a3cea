#pragma once

#include "vssqn/core/problem.hpp"
#include "vssqn/smoothing/smoothers.hpp"

namespace vssqn {

/// The three affine pieces of max{2|x1| + x2, 3 x2}.
inline const AffineTerms& lewis_overton_terms() {
    static const AffineTerms terms = [] {
        AffineTerms t;
        t.a.resize(3, 2);
        t.a << 2, 1, -2, 1, 0, 3;
        t.b = Vector::Zero(3);
        return t;
    }();
    return terms;
}

/// |x|^2/2 + max{2|x1| + x2, 3 x2}; eta > 0 smooths the max by log-sum-exp.
inline ValueGrad lewis_overton_oracle(const Vector& x, double eta) {
    if (x.size() != 2) throw ConfigError("x", "Lewis-Overton instance is two-dimensional");
    if (eta < 0) throw ConfigError("eta", "must be non-negative");
    const auto& t = lewis_overton_terms();
    ValueGrad r;
    if (eta > 0) {
        r = lse_smooth_max(t, x, eta);
    } else {
        Vector z = t.eval(x);
        Eigen::Index j;
        r.value = z.maxCoeff(&j); // first maximizer
        r.grad = t.a.row(j).transpose();
    }
    r.value += 0.5 * x.squaredNorm();
    r.grad += x;
    return r;
}

class LewisOverton : public StochasticProblem {
public:
    LewisOverton() {
        meta_.n = 2;
        meta_.tau = 1.0;
        meta_.lipschitz_L = 1.0;
        meta_.f_star = -0.5;
        meta_.x_star = Vector(2);
        (*meta_.x_star) << 0.0, -1.0;
        meta_.alpha_growth = 1.0;
    }

    std::string name() const override { return "lewis_overton"; }
    const ProblemMeta& meta() const override { return meta_; }

    void sample_gradient(const Vector& x, const Realization&, double eta, Vector& out) const override {
        out = lewis_overton_oracle(x, eta).grad;
    }

    BatchGradient bind(const SampleHandle&, double eta) const override {
        return [eta](const Vector& x, Vector& out) { out = lewis_overton_oracle(x, eta).grad; };
    }

    std::optional<double> value(const Vector& x) const override { return lewis_overton_oracle(x, 0.0).value; }
    bool deterministic() const override { return true; }

private:
    ProblemMeta meta_;
};

} // namespace vssqn
