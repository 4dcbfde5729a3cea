#pragma once

#include "vssqn/core/problem.hpp"
#include "vssqn/smoothing/smoothers.hpp"

#include <Eigen/SparseCore>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace vssqn {

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct SparseDataset {
    SparseRows features; // one sample per row
    Vector labels;       // entries in {-1, +1}
    std::optional<Vector> planted;
};

/// How lambda_l1 * |x|_1 enters the oracle.
enum class L1Smoothing {
    none,        // subgradient sign(x)
    huber,       // Huber with the solver's eta (or the problem default)
    pseudo_huber // sum sqrt(x_i^2 + eps), a smooth penalty in its own right
};

struct LogisticSpec {
    double mu_l2 = 0.0;
    double lambda_l1 = 0.0;
    L1Smoothing smoothing = L1Smoothing::none;
    double huber_eta = 1e-3;
    double pseudo_eps = 1e-6;
};

namespace detail {
/// log(1 + exp(-m)) without overflow.
inline double softplus_neg(double m) { return m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m)); }
/// 1 / (1 + exp(m))
inline double sigmoid_neg(double m) {
    if (m >= 0) {
        double e = std::exp(-m);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(m));
}
} // namespace detail

/// f(x) = mean log(1 + exp(-v_i u_i'x)) + mu/2 |x|^2 + lambda * penalty(x); samples drawn with replacement.
class LogisticProblem : public StochasticProblem, public CompositeStructure {
public:
    LogisticProblem(SparseDataset data, LogisticSpec spec) : data_(std::move(data)), spec_(spec) {
        if (data_.features.rows() == 0) throw ConfigError("data", "empty dataset");
        if (data_.labels.size() != data_.features.rows()) throw ConfigError("labels", "size mismatch");
        for (Eigen::Index i = 0; i < data_.labels.size(); ++i)
            if (data_.labels[i] != 1.0 && data_.labels[i] != -1.0) throw ConfigError("labels", "must be -1 or +1");
        if (spec_.mu_l2 < 0 || spec_.lambda_l1 < 0) throw ConfigError("regularization", "must be non-negative");
        meta_.n = static_cast<std::size_t>(data_.features.cols());
        double rmax = 0;
        for (Eigen::Index i = 0; i < data_.features.rows(); ++i)
            rmax = std::max(rmax, data_.features.row(i).squaredNorm());
        double L = 0.25 * rmax + spec_.mu_l2;
        smooth_L_ = L;
        if (spec_.lambda_l1 > 0 && spec_.smoothing == L1Smoothing::pseudo_huber)
            L += spec_.lambda_l1 / std::sqrt(spec_.pseudo_eps);
        meta_.lipschitz_L = L;
        meta_.sample_lipschitz = L;
        if (spec_.mu_l2 > 0) meta_.tau = spec_.mu_l2;
    }

    std::string name() const override { return "logistic"; }
    const ProblemMeta& meta() const override { return meta_; }

    void sample_gradient(const Vector& x, const Realization& w, double eta, Vector& out) const override {
        out.setZero(x.size());
        add_loss_gradient(x, pick(w), 1.0, out);
        add_regularizer(x, eta, out);
    }

    BatchGradient bind(const SampleHandle& batch, double eta) const override {
        std::vector<Eigen::Index> rows(batch.count);
        for (std::uint64_t j = 0; j < batch.count; ++j) rows[j] = pick(batch[j]);
        return [this, rows = std::move(rows), eta](const Vector& x, Vector& out) {
            out.setZero(x.size());
            for (auto r : rows) add_loss_gradient(x, r, 1.0, out);
            out /= static_cast<double>(rows.size());
            add_regularizer(x, eta, out);
            if (!out.allFinite()) throw OracleError(0, "logistic: non-finite batch gradient");
        };
    }

    /// Full-data objective; the l1 term is exact unless the penalty is pseudo-Huber.
    std::optional<double> value(const Vector& x) const override {
        Vector margins = data_.features * x;
        double loss = 0;
        for (Eigen::Index i = 0; i < margins.size(); ++i) loss += detail::softplus_neg(data_.labels[i] * margins[i]);
        loss /= static_cast<double>(margins.size());
        loss += 0.5 * spec_.mu_l2 * x.squaredNorm();
        if (spec_.lambda_l1 > 0) {
            if (spec_.smoothing == L1Smoothing::pseudo_huber)
                loss += spec_.lambda_l1 * (x.array().square() + spec_.pseudo_eps).sqrt().sum();
            else
                loss += spec_.lambda_l1 * x.lpNorm<1>();
        }
        return loss;
    }

    /// Full-data gradient at smoothing eta.
    Vector full_gradient(const Vector& x, double eta = 0.0) const {
        Vector out = Vector::Zero(x.size());
        for (Eigen::Index i = 0; i < data_.features.rows(); ++i) add_loss_gradient(x, i, 1.0, out);
        out /= static_cast<double>(data_.features.rows());
        add_regularizer(x, eta, out);
        return out;
    }

    /// h = lambda |x|_1 split off when the l1 term is not pseudo-Huber.
    const CompositeStructure* composite() const override {
        return spec_.lambda_l1 > 0 && spec_.smoothing != L1Smoothing::pseudo_huber ? this : nullptr;
    }
    double h_value(const Vector& x) const override { return spec_.lambda_l1 * x.lpNorm<1>(); }
    Vector h_prox(const Vector& x, double t) const override { return prox_soft_threshold(x, spec_.lambda_l1 * t); }
    BatchGradient bind_smooth(const SampleHandle& batch) const override {
        std::vector<Eigen::Index> rows(batch.count);
        for (std::uint64_t j = 0; j < batch.count; ++j) rows[j] = pick(batch[j]);
        return [this, rows = std::move(rows)](const Vector& x, Vector& out) {
            out.setZero(x.size());
            for (auto r : rows) add_loss_gradient(x, r, 1.0, out);
            out /= static_cast<double>(rows.size());
            if (spec_.mu_l2 > 0) out += spec_.mu_l2 * x;
        };
    }
    double smooth_lipschitz() const override { return smooth_L_; }

    /// Minimizer of value() by accelerated proximal gradient on the full data, with restarts.
    Vector solve_reference(int max_iter = 20000, double tol = 1e-12) const {
        const double t = 1.0 / *meta_.lipschitz_L;
        const bool prox = composite() != nullptr;
        auto step = [&](const Vector& y) {
            Vector z = y - t * smooth_full_gradient(y);
            return prox ? prox_soft_threshold(z, spec_.lambda_l1 * t) : z;
        };
        Vector x = Vector::Zero(static_cast<Eigen::Index>(meta_.n)), y = x;
        double theta = 1.0;
        double fx = *value(x);
        for (int it = 0; it < max_iter; ++it) {
            Vector nx = step(y);
            double fn = *value(nx);
            if (fn > fx) { // restart on non-monotone progress
                theta = 1.0;
                y = x;
                continue;
            }
            double nt = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
            y = nx + ((theta - 1.0) / nt) * (nx - x);
            const double moved = (nx - x).norm();
            x = std::move(nx);
            fx = fn;
            theta = nt;
            if (moved <= tol * (1.0 + x.norm())) break;
        }
        return x;
    }

    void set_reference(const Vector& x_star) {
        meta_.x_star = x_star;
        meta_.f_star = *value(x_star);
    }

    const SparseDataset& data() const noexcept { return data_; }
    const LogisticSpec& spec() const noexcept { return spec_; }

private:
    Eigen::Index pick(const Realization& w) const {
        SampleRng r(w);
        return static_cast<Eigen::Index>(r.below(static_cast<std::uint64_t>(data_.features.rows())));
    }

    /// Full-data gradient of everything except a prox-handled l1 term.
    Vector smooth_full_gradient(const Vector& x) const {
        Vector out = Vector::Zero(x.size());
        for (Eigen::Index i = 0; i < data_.features.rows(); ++i) add_loss_gradient(x, i, 1.0, out);
        out /= static_cast<double>(data_.features.rows());
        if (spec_.mu_l2 > 0) out += spec_.mu_l2 * x;
        if (spec_.lambda_l1 > 0 && spec_.smoothing == L1Smoothing::pseudo_huber)
            out += spec_.lambda_l1 * (x.array() / (x.array().square() + spec_.pseudo_eps).sqrt()).matrix();
        return out;
    }

    void add_loss_gradient(const Vector& x, Eigen::Index row, double scale, Vector& out) const {
        double margin = 0;
        for (SparseRows::InnerIterator it(data_.features, row); it; ++it) margin += it.value() * x[it.index()];
        double v = data_.labels[row];
        double c = -scale * v * detail::sigmoid_neg(v * margin);
        for (SparseRows::InnerIterator it(data_.features, row); it; ++it) out[it.index()] += c * it.value();
    }

    void add_regularizer(const Vector& x, double eta, Vector& out) const {
        if (spec_.mu_l2 > 0) out += spec_.mu_l2 * x;
        if (spec_.lambda_l1 == 0) return;
        const double lam = spec_.lambda_l1;
        switch (spec_.smoothing) {
        case L1Smoothing::none:
            for (Eigen::Index i = 0; i < x.size(); ++i) out[i] += lam * (x[i] > 0 ? 1.0 : (x[i] < 0 ? -1.0 : 0.0));
            break;
        case L1Smoothing::huber: out += lam * huber_l1(x, eta > 0 ? eta : spec_.huber_eta).grad; break;
        case L1Smoothing::pseudo_huber:
            out += lam * (x.array() / (x.array().square() + spec_.pseudo_eps).sqrt()).matrix();
            break;
        }
    }

    SparseDataset data_;
    LogisticSpec spec_;
    ProblemMeta meta_;
    double smooth_L_ = 0.0;
};

/**
 * Synthetic sparse binary features with a planted sparse model. Labels are
 * +1 with probability sigmoid(u'x_planted).
 */
inline SparseDataset make_sparse_logistic(std::size_t rows, std::size_t n, double density, double support_fraction,
                                          double weight_scale, RngStream& rng) {
    if (rows < 1 || n < 1) throw ConfigError("size", "rows and n must be positive");
    if (!(density > 0 && density <= 1)) throw ConfigError("density", "must lie in (0,1]");
    SampleRng r = rng.next();
    SparseDataset d;
    Vector planted = Vector::Zero(static_cast<Eigen::Index>(n));
    std::size_t support = static_cast<std::size_t>(std::round(support_fraction * static_cast<double>(n)));
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < support; ++i) { // partial Fisher-Yates
        std::size_t j = i + static_cast<std::size_t>(r.below(n - i));
        std::swap(idx[i], idx[j]);
        planted[static_cast<Eigen::Index>(idx[i])] = weight_scale * r.normal();
    }
    std::vector<Eigen::Triplet<double>> trips;
    d.labels.resize(static_cast<Eigen::Index>(rows));
    for (std::size_t i = 0; i < rows; ++i) {
        double margin = 0;
        bool empty = true;
        for (std::size_t j = 0; j < n; ++j) {
            if (r.uniform() < density) {
                trips.emplace_back(static_cast<int>(i), static_cast<int>(j), 1.0);
                margin += planted[static_cast<Eigen::Index>(j)];
                empty = false;
            }
        }
        if (empty) { // every row carries at least one feature
            std::size_t j = static_cast<std::size_t>(r.below(n));
            trips.emplace_back(static_cast<int>(i), static_cast<int>(j), 1.0);
            margin += planted[static_cast<Eigen::Index>(j)];
        }
        double p = 1.0 / (1.0 + std::exp(-margin));
        d.labels[static_cast<Eigen::Index>(i)] = r.uniform() < p ? 1.0 : -1.0;
    }
    d.features.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n));
    d.features.setFromTriplets(trips.begin(), trips.end());
    d.planted = planted;
    return d;
}

/// Reads "label idx:val idx:val ..." lines; indices are 1-based; labels 0/-1 map to -1.
inline SparseDataset load_sparse_dataset(const std::string& path, std::size_t n_hint = 0) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path);
    std::vector<Eigen::Triplet<double>> trips;
    std::vector<double> labels;
    std::size_t n = n_hint;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;
        double label;
        try {
            std::size_t used = 0;
            label = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ParseError(lineno, "bad label '" + tok + "'");
        }
        if (label == 0.0) label = -1.0;
        if (label != 1.0 && label != -1.0) throw ParseError(lineno, "label must map to -1 or +1, got " + tok);
        const auto row = static_cast<int>(labels.size());
        labels.push_back(label);
        long last = 0;
        while (ls >> tok) {
            auto colon = tok.find(':');
            if (colon == std::string::npos || colon == 0) throw ParseError(lineno, "expected idx:val, got '" + tok + "'");
            long idx;
            double val;
            try {
                std::size_t u1 = 0, u2 = 0;
                std::string a = tok.substr(0, colon), b = tok.substr(colon + 1);
                idx = std::stol(a, &u1);
                val = std::stod(b, &u2);
                if (u1 != a.size() || u2 != b.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw ParseError(lineno, "malformed entry '" + tok + "'");
            }
            if (idx < 1) throw ParseError(lineno, "indices are 1-based");
            if (idx <= last) throw ParseError(lineno, "indices must increase within a line");
            if (!std::isfinite(val)) throw ParseError(lineno, "non-finite value");
            last = idx;
            n = std::max<std::size_t>(n, static_cast<std::size_t>(idx));
            trips.emplace_back(row, static_cast<int>(idx - 1), val);
        }
    }
    if (labels.empty()) throw ParseError(lineno, "no samples in " + path);
    SparseDataset d;
    d.features.resize(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(n));
    d.features.setFromTriplets(trips.begin(), trips.end());
    d.labels = Eigen::Map<Vector>(labels.data(), static_cast<Eigen::Index>(labels.size()));
    return d;
}

inline void write_sparse_dataset(const SparseDataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    char buf[64];
    for (Eigen::Index i = 0; i < d.features.rows(); ++i) {
        out << (d.labels[i] > 0 ? "+1" : "-1");
        for (SparseRows::InnerIterator it(d.features, i); it; ++it) {
            std::snprintf(buf, sizeof buf, " %ld:%.17g", static_cast<long>(it.index() + 1), it.value());
            out << buf;
        }
        out << '\n';
    }
}

} // namespace vssqn
