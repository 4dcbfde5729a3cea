#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace vssqn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or parameter; `field()` names the offending key.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// A sampled gradient was not finite. Carries the position inside the batch.
class OracleError : public Error {
public:
    OracleError(std::size_t sample_index, const std::string& what)
        : Error(what + " (sample " + std::to_string(sample_index) + ")"), index_(sample_index) {}
    std::size_t sample_index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Inner prox solver ran out of iterations.
class ProxError : public Error {
public:
    ProxError(double residual, int iterations)
        : Error("inner prox solver did not converge: residual " + std::to_string(residual) + " after " +
                std::to_string(iterations) + " iterations"),
          residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// s'y <= 0 on a curvature pair.
class CurvatureError : public Error {
public:
    CurvatureError(long formed_at, double sy)
        : Error("curvature condition failed at k=" + std::to_string(formed_at) + ": s'y = " + std::to_string(sy)),
          sy_(sy) {}
    double sy() const noexcept { return sy_; }

private:
    double sy_;
};

/// Malformed input text; `line()` is 1-based.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Known constants of a problem instance. Absent values stay empty.
struct ProblemMeta {
    std::size_t n = 0;
    std::optional<double> tau;              // strong convexity modulus
    std::optional<double> lipschitz_L;      // gradient Lipschitz constant of f
    std::optional<double> sample_lipschitz; // bound over realizations of F(., w)
    std::optional<double> f_star;
    std::optional<Vector> x_star;
    std::optional<double> alpha_growth;
    double nu1 = 0.0;
    double nu2 = 0.0;

    std::optional<double> kappa() const {
        if (tau && lipschitz_L) return *lipschitz_L / *tau;
        return std::nullopt;
    }

    void validate() const {
        if (tau && !(*tau > 0)) throw ConfigError("tau", "must be positive");
        if (lipschitz_L && !(*lipschitz_L > 0)) throw ConfigError("lipschitz_L", "must be positive");
        if (tau && lipschitz_L && *lipschitz_L < *tau) throw ConfigError("lipschitz_L", "must be >= tau");
        if (nu1 < 0 || nu2 < 0) throw ConfigError("nu", "noise parameters must be non-negative");
    }
};

inline void require_finite(const Vector& v, const char* what) {
    if (!v.allFinite()) throw Error(std::string(what) + " has non-finite entries");
}

} // namespace vssqn
