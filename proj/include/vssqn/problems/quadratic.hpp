#pragma once

#include "vssqn/core/problem.hpp"
#include "vssqn/smoothing/smoothers.hpp"

#include <Eigen/QR>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <string>

namespace vssqn {

enum class Convexity { strongly_convex, convex };

/// Per-sample perturbation of the quadratic.
struct QuadraticNoise {
    double spread = 0.5;         // eigenvalue multipliers uniform in [1-spread, 1+spread]
    double additive_sigma = 0.0; // extra N(0, sigma^2 I) on the gradient
};

/**
 * @brief F(x,w) = x'Q(w)x/2 + c(w)'x with Q(w) = V diag(lambda .* m(w)) V'.
 *
 * m(w) has bounded mean-one entries and c(w) = -Q(w) x0 + sigma xi(w), so the
 * noise grows with |x - x0| and E[grad F(x0, w)] = 0.
 */
class QuadraticEnsemble : public StochasticProblem {
public:
    QuadraticEnsemble(Vector eigenvalues, Matrix frame, Vector planted, QuadraticNoise noise, Convexity convexity)
        : lambda_(std::move(eigenvalues)), frame_(std::move(frame)), planted_(std::move(planted)), noise_(noise),
          convexity_(convexity) {
        const auto n = lambda_.size();
        if (frame_.rows() != n || frame_.cols() != n || planted_.size() != n)
            throw ConfigError("quadratic", "dimension mismatch");
        if (!(noise_.spread >= 0 && noise_.spread < 1)) throw ConfigError("noise.spread", "must lie in [0,1)");
        if (!(noise_.additive_sigma >= 0)) throw ConfigError("noise.sigma", "must be non-negative");
        if (lambda_.minCoeff() < 0) throw ConfigError("eigenvalues", "must be non-negative");
        double lmax = lambda_.maxCoeff(), lmin = lambda_.minCoeff();
        meta_.n = static_cast<std::size_t>(n);
        meta_.lipschitz_L = lmax;
        meta_.sample_lipschitz = lmax * (1.0 + noise_.spread);
        if (lmin > 0) {
            meta_.tau = lmin;
            meta_.alpha_growth = lmin;
        } else {
            double pos = lmax;
            for (Eigen::Index i = 0; i < n; ++i)
                if (lambda_[i] > 0) pos = std::min(pos, lambda_[i]);
            meta_.alpha_growth = pos;
        }
        meta_.x_star = planted_;
        Vector z = frame_.transpose() * planted_;
        meta_.f_star = -0.5 * (lambda_.array() * z.array().square()).sum();
        meta_.nu1 = noise_.spread * lmax / std::sqrt(3.0);
        meta_.nu2 = noise_.additive_sigma * std::sqrt(static_cast<double>(n));
        meta_.validate();
    }

    std::string name() const override { return "quadratic"; }
    const ProblemMeta& meta() const override { return meta_; }

    void sample_gradient(const Vector& x, const Realization& w, double, Vector& out) const override {
        Vector mult, xi;
        draw(w, mult, xi);
        evaluate(x, mult, xi, out);
    }

    BatchGradient bind(const SampleHandle& batch, double) const override {
        const auto n = lambda_.size();
        Vector msum = Vector::Zero(n), xisum = Vector::Zero(n);
        Vector mult, xi;
        for (std::uint64_t j = 0; j < batch.count; ++j) {
            draw(batch[j], mult, xi);
            msum += mult;
            if (noise_.additive_sigma > 0) xisum += xi;
        }
        const double inv = 1.0 / static_cast<double>(batch.count);
        Vector mbar = msum * inv, xibar = xisum * inv;
        return [this, mbar = std::move(mbar), xibar = std::move(xibar)](const Vector& x, Vector& out) {
            evaluate(x, mbar, xibar, out);
        };
    }

    std::optional<double> value(const Vector& x) const override {
        return 0.5 * curvature_norm(x - planted_) + *meta_.f_star;
    }

    std::optional<double> gap(const Vector& x) const override { return 0.5 * curvature_norm(x - planted_); }

    /// Exact mean gradient E[Q](x - x0).
    Vector mean_gradient(const Vector& x) const {
        Vector z = frame_.transpose() * (x - planted_);
        return frame_ * (lambda_.array() * z.array()).matrix();
    }

    Matrix mean_matrix() const { return frame_ * lambda_.asDiagonal() * frame_.transpose(); }

    const Vector& eigenvalues() const noexcept { return lambda_; }
    const Matrix& frame() const noexcept { return frame_; }
    const Vector& planted() const noexcept { return planted_; }
    const QuadraticNoise& noise() const noexcept { return noise_; }
    Convexity convexity() const noexcept { return convexity_; }

private:
    void draw(const Realization& w, Vector& mult, Vector& xi) const {
        const auto n = lambda_.size();
        SampleRng r(w);
        mult.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) mult[i] = 1.0 + noise_.spread * (2.0 * r.uniform() - 1.0);
        if (noise_.additive_sigma > 0) {
            xi.resize(n);
            for (Eigen::Index i = 0; i < n; ++i) xi[i] = r.normal();
        }
    }

    void evaluate(const Vector& x, const Vector& mult, const Vector& xi, Vector& out) const {
        Vector z = frame_.transpose() * (x - planted_);
        out = frame_ * (lambda_.array() * mult.array() * z.array()).matrix();
        if (noise_.additive_sigma > 0) out += noise_.additive_sigma * xi;
    }

    double curvature_norm(const Vector& d) const {
        Vector z = frame_.transpose() * d;
        return (lambda_.array() * z.array().square()).sum();
    }

    Vector lambda_;
    Matrix frame_;
    Vector planted_;
    QuadraticNoise noise_;
    Convexity convexity_;
    ProblemMeta meta_;
};

/// Spectrum uniform on [1, kappa] (SC) or [0, kappa] (C) with both ends pinned, random orthogonal frame.
inline QuadraticEnsemble quad_make(std::size_t n, double kappa, Convexity convexity, RngStream& rng,
                                   QuadraticNoise noise = {}) {
    if (!(kappa >= 1)) throw ConfigError("kappa", "must be >= 1");
    if (n < 2) throw ConfigError("n", "must be >= 2");
    const auto dim = static_cast<Eigen::Index>(n);
    SampleRng r = rng.next();
    const double lo = convexity == Convexity::strongly_convex ? 1.0 : 0.0;
    Vector lambda(dim);
    lambda[0] = lo;
    lambda[1] = kappa;
    for (Eigen::Index i = 2; i < dim; ++i) lambda[i] = lo + (kappa - lo) * r.uniform();
    Matrix g(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index i = 0; i < dim; ++i) g(i, j) = r.normal();
    Matrix frame = Eigen::HouseholderQR<Matrix>(g).householderQ();
    Vector planted(dim);
    for (Eigen::Index i = 0; i < dim; ++i) planted[i] = r.normal();
    return QuadraticEnsemble(std::move(lambda), std::move(frame), std::move(planted), noise, convexity);
}

/// Structured text form of an ensemble, for reproducing a run elsewhere.
inline void save_quadratic(const QuadraticEnsemble& q, const std::string& path) {
    nlohmann::json j;
    j["format"] = "vssqn.quadratic";
    j["version"] = 1;
    j["convexity"] = q.convexity() == Convexity::strongly_convex ? "SC" : "C";
    j["spread"] = q.noise().spread;
    j["additive_sigma"] = q.noise().additive_sigma;
    j["eigenvalues"] = std::vector<double>(q.eigenvalues().data(), q.eigenvalues().data() + q.eigenvalues().size());
    j["planted"] = std::vector<double>(q.planted().data(), q.planted().data() + q.planted().size());
    j["frame_colmajor"] = std::vector<double>(q.frame().data(), q.frame().data() + q.frame().size());
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(1) << '\n';
}

inline QuadraticEnsemble load_quadratic(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, e.what());
    }
    if (j.value("format", "") != "vssqn.quadratic" || j.value("version", 0) != 1)
        throw ConfigError("format", "not a version 1 quadratic ensemble file");
    auto ev = j.at("eigenvalues").get<std::vector<double>>();
    auto pl = j.at("planted").get<std::vector<double>>();
    auto fr = j.at("frame_colmajor").get<std::vector<double>>();
    const auto n = static_cast<Eigen::Index>(ev.size());
    if (static_cast<Eigen::Index>(fr.size()) != n * n) throw ConfigError("frame_colmajor", "size mismatch");
    QuadraticNoise noise{j.at("spread").get<double>(), j.at("additive_sigma").get<double>()};
    return QuadraticEnsemble(Eigen::Map<Vector>(ev.data(), n), Eigen::Map<Matrix>(fr.data(), n, n),
                             Eigen::Map<Vector>(pl.data(), n), noise,
                             j.at("convexity") == "SC" ? Convexity::strongly_convex : Convexity::convex);
}

/**
 * @brief Quadratic ensemble plus weight * |x|_1.
 *
 * eta > 0 in the oracle swaps |x|_1 for its Huber smoothing. Also exposes the
 * composite split used by Moreau smoothing.
 */
class L1QuadraticProblem : public StochasticProblem, public CompositeStructure {
public:
    L1QuadraticProblem(QuadraticEnsemble quad, double weight) : quad_(std::move(quad)), weight_(weight) {
        if (!(weight >= 0)) throw ConfigError("lambda_l1", "must be non-negative");
        meta_ = quad_.meta();
        meta_.x_star.reset();
        meta_.f_star.reset();
    }

    std::string name() const override { return "l1_quadratic"; }
    const ProblemMeta& meta() const override { return meta_; }

    void sample_gradient(const Vector& x, const Realization& w, double eta, Vector& out) const override {
        quad_.sample_gradient(x, w, 0.0, out);
        add_l1(x, eta, out);
    }

    BatchGradient bind(const SampleHandle& batch, double eta) const override {
        auto inner = quad_.bind(batch, 0.0);
        return [this, inner = std::move(inner), eta](const Vector& x, Vector& out) {
            inner(x, out);
            add_l1(x, eta, out);
        };
    }

    std::optional<double> value(const Vector& x) const override { return *quad_.value(x) + h_value(x); }

    const CompositeStructure* composite() const override { return this; }
    double h_value(const Vector& x) const override { return weight_ * x.lpNorm<1>(); }
    Vector h_prox(const Vector& x, double t) const override { return prox_soft_threshold(x, weight_ * t); }
    BatchGradient bind_smooth(const SampleHandle& batch) const override { return quad_.bind(batch, 0.0); }
    double smooth_lipschitz() const override { return *quad_.meta().sample_lipschitz; }

    /// Minimizer of the exact objective by accelerated proximal gradient.
    Vector solve_reference(double tol = 1e-13, int max_iter = 200000) const {
        const double L = *quad_.meta().lipschitz_L;
        const double t = 1.0 / L;
        const auto n = static_cast<Eigen::Index>(meta_.n);
        Vector x = Vector::Zero(n), y = x, prev = x;
        double theta = 1.0;
        for (int it = 0; it < max_iter; ++it) {
            Vector nx = h_prox(y - t * quad_.mean_gradient(y), t);
            double nt = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
            y = nx + ((theta - 1.0) / nt) * (nx - x);
            prev = x;
            x = nx;
            theta = nt;
            if ((x - prev).norm() <= tol * (1.0 + x.norm()) && it > 10) {
                if ((h_prox(x - t * quad_.mean_gradient(x), t) - x).norm() <= tol * (1.0 + x.norm())) break;
                theta = 1.0; // restart
                y = x;
            }
        }
        return x;
    }

    void set_reference(const Vector& x_star) {
        meta_.x_star = x_star;
        meta_.f_star = *value(x_star);
    }

    const QuadraticEnsemble& quadratic() const noexcept { return quad_; }
    double weight() const noexcept { return weight_; }

private:
    void add_l1(const Vector& x, double eta, Vector& out) const {
        if (weight_ == 0) return;
        if (eta > 0) {
            out += weight_ * huber_l1(x, eta).grad;
        } else {
            for (Eigen::Index i = 0; i < x.size(); ++i)
                out[i] += weight_ * (x[i] > 0 ? 1.0 : (x[i] < 0 ? -1.0 : 0.0));
        }
    }

    QuadraticEnsemble quad_;
    double weight_;
    ProblemMeta meta_;
};

} // namespace vssqn
