#pragma once

#include "vssqn/core/problem.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <vector>

namespace vssqn {

/// Euclidean projection onto {x_1 <= ... <= x_n} by pooling adjacent violators.
inline Vector pava_project(const Vector& x) {
    struct Block {
        double sum;
        Eigen::Index count;
        double mean() const { return sum / static_cast<double>(count); }
    };
    std::vector<Block> blocks;
    blocks.reserve(static_cast<std::size_t>(x.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        blocks.push_back({x[i], 1});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
            Block top = blocks.back();
            blocks.pop_back();
            blocks.back().sum += top.sum;
            blocks.back().count += top.count;
        }
    }
    Vector out(x.size());
    Eigen::Index pos = 0;
    for (const auto& b : blocks) {
        out.segment(pos, b.count).setConstant(b.mean());
        pos += b.count;
    }
    return out;
}

/// max_i (x_i - x_{i+1})_+, i.e. max (Cx)_+ for the chain difference matrix.
inline double constraint_violation(const Vector& x) {
    double v = 0;
    for (Eigen::Index i = 0; i + 1 < x.size(); ++i) v = std::max(v, x[i] - x[i + 1]);
    return v;
}

/**
 * @brief Least squares under a monotone chain constraint.
 *
 * F(x, i) = (a_i'x - b_i)^2 / 2 for a uniformly drawn row i, so f is the
 * row-average. The constraint enters as dist^2 / (2 eta).
 */
class IsotonicLasso : public StochasticProblem {
public:
    IsotonicLasso(Matrix A, Vector b, double eta, Vector planted = {})
        : A_(std::move(A)), b_(std::move(b)), eta_(eta), planted_(std::move(planted)) {
        if (A_.rows() != b_.size()) throw ConfigError("b", "size mismatch with A");
        if (!(eta_ > 0)) throw ConfigError("eta", "must be positive");
        meta_.n = static_cast<std::size_t>(A_.cols());
        Eigen::SelfAdjointEigenSolver<Matrix> es(A_.transpose() * A_ / static_cast<double>(A_.rows()),
                                                 Eigen::EigenvaluesOnly);
        double lmax = es.eigenvalues().maxCoeff();
        meta_.lipschitz_L = lmax + 1.0 / eta_;
        meta_.sample_lipschitz = A_.rowwise().squaredNorm().maxCoeff() + 1.0 / eta_;
        double lmin = es.eigenvalues().minCoeff();
        if (lmin > 1e-12 * lmax) meta_.tau = lmin;
    }

    std::string name() const override { return "isotonic"; }
    const ProblemMeta& meta() const override { return meta_; }

    void sample_gradient(const Vector& x, const Realization& w, double eta, Vector& out) const override {
        SampleRng r(w);
        auto i = static_cast<Eigen::Index>(r.below(static_cast<std::uint64_t>(A_.rows())));
        out = (A_.row(i).dot(x) - b_[i]) * A_.row(i).transpose();
        out += (x - pava_project(x)) / (eta > 0 ? eta : eta_);
    }

    BatchGradient bind(const SampleHandle& batch, double eta) const override {
        Vector weight = Vector::Zero(A_.rows());
        for (std::uint64_t j = 0; j < batch.count; ++j) {
            SampleRng r(batch[j]);
            weight[static_cast<Eigen::Index>(r.below(static_cast<std::uint64_t>(A_.rows())))] += 1.0;
        }
        weight /= static_cast<double>(batch.count);
        const double e = eta > 0 ? eta : eta_;
        return [this, weight = std::move(weight), e](const Vector& x, Vector& out) {
            Vector res = (A_ * x - b_).cwiseProduct(weight);
            out = A_.transpose() * res;
            out += (x - pava_project(x)) / e;
        };
    }

    /// Row-average least squares without the constraint.
    double least_squares(const Vector& x) const {
        return 0.5 * (A_ * x - b_).squaredNorm() / static_cast<double>(A_.rows());
    }

    /// Smoothed objective at the instance's eta.
    std::optional<double> value(const Vector& x) const override {
        return least_squares(x) + (x - pava_project(x)).squaredNorm() / (2.0 * eta_);
    }

    double eta() const noexcept { return eta_; }
    const Matrix& design() const noexcept { return A_; }
    const Vector& targets() const noexcept { return b_; }
    const Vector& planted() const noexcept { return planted_; }

private:
    Matrix A_;
    Vector b_;
    double eta_;
    Vector planted_;
    ProblemMeta meta_;
};

/**
 * Gaussian design, b = A(x0 + sigma). The first and last quarters of x0 are
 * sorted draws from U[-10,0] and U[0,10]; the middle is zero.
 */
inline IsotonicLasso make_isotonic_lasso(std::size_t rows, std::size_t n, double eta, RngStream& rng,
                                         double noise_sd = 0.01) {
    if (n < 4) throw ConfigError("n", "must be >= 4");
    const auto dim = static_cast<Eigen::Index>(n);
    const auto p = static_cast<Eigen::Index>(rows);
    SampleRng r = rng.next();
    Vector x0 = Vector::Zero(dim);
    const Eigen::Index q = dim / 4;
    std::vector<double> lo(static_cast<std::size_t>(q)), hi(static_cast<std::size_t>(q));
    for (auto& v : lo) v = -10.0 * r.uniform();
    for (auto& v : hi) v = 10.0 * r.uniform();
    std::sort(lo.begin(), lo.end());
    std::sort(hi.begin(), hi.end());
    for (Eigen::Index i = 0; i < q; ++i) {
        x0[i] = lo[static_cast<std::size_t>(i)];
        x0[dim - q + i] = hi[static_cast<std::size_t>(i)];
    }
    Matrix A(p, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index i = 0; i < p; ++i) A(i, j) = r.normal();
    Vector sigma(dim);
    for (Eigen::Index i = 0; i < dim; ++i) sigma[i] = noise_sd * r.normal();
    Vector b = A * (x0 + sigma);
    return IsotonicLasso(std::move(A), std::move(b), eta, std::move(x0));
}

} // namespace vssqn
