#pragma once

#include "vssqn/hessian/lbfgs.hpp"

#include <algorithm>
#include <vector>

namespace vssqn {

/// H_k by the explicit product recursion, oldest pair first.
inline Matrix materialize_dense(const LbfgsMemory& mem, std::size_t n) {
    const auto dim = static_cast<Eigen::Index>(n);
    Matrix H = mem.initial_scaling() * Matrix::Identity(dim, dim);
    for (const auto& p : mem.pairs()) {
        double rho = 1.0 / p.sy();
        Matrix V = Matrix::Identity(dim, dim) - rho * p.y * p.s.transpose();
        H = V.transpose() * H * V + rho * p.s * p.s.transpose();
    }
    return H;
}

/// B_k = H_k^{-1} by the direct BFGS recursion on the Hessian side.
inline Matrix materialize_inverse(const LbfgsMemory& mem, std::size_t n) {
    const auto dim = static_cast<Eigen::Index>(n);
    Matrix B = (1.0 / mem.initial_scaling()) * Matrix::Identity(dim, dim);
    for (const auto& p : mem.pairs()) {
        Vector Bs = B * p.s;
        B += -(Bs * Bs.transpose()) / p.s.dot(Bs) + (p.y * p.y.transpose()) / p.sy();
    }
    return B;
}

struct SecantReport {
    std::vector<double> sy;
    double secant_residual = 0.0; // |H y - s| / |s| on the newest pair
    bool pass = false;
};

inline SecantReport verify_secant(const LbfgsMemory& mem) {
    SecantReport rep;
    if (mem.empty()) return rep;
    bool positive = true;
    for (const auto& p : mem.pairs()) {
        rep.sy.push_back(p.sy());
        positive = positive && p.sy() > 0;
    }
    const auto& last = mem.newest();
    rep.secant_residual = (mem.apply(last.y) - last.s).norm() / last.s.norm();
    rep.pass = positive && rep.secant_residual <= 1e-9;
    return rep;
}

} // namespace vssqn
