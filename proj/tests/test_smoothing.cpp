#include "vssqn/harness/oracles.hpp"
#include "vssqn/smoothing/moreau.hpp"
#include "vssqn/smoothing/smoothers.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace vssqn;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double d : v) out[i++] = d;
    return out;
}

// argmin over a fine grid of u -> w|u| + (u - x)^2 / (2t)
double grid_prox_l1(double x, double w, double t) {
    double best = 0, best_v = std::numeric_limits<double>::infinity();
    for (int i = -400000; i <= 400000; ++i) {
        double u = i * 1e-5;
        double v = w * std::abs(u) + (u - x) * (u - x) / (2 * t);
        if (v < best_v) {
            best_v = v;
            best = u;
        }
    }
    return best;
}

std::vector<Vector> random_points(std::size_t count, Eigen::Index n, unsigned seed, double scale = 3.0) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> d(-scale, scale);
    std::vector<Vector> pts;
    for (std::size_t i = 0; i < count; ++i) {
        Vector x(n);
        for (Eigen::Index j = 0; j < n; ++j) x[j] = d(gen);
        pts.push_back(x);
    }
    return pts;
}

AffineTerms two_coordinates() {
    AffineTerms t;
    t.a = Matrix::Identity(2, 2);
    t.b = Vector::Zero(2);
    return t;
}

Vector nonpositive(const Vector& x) { return x.cwiseMin(0.0); }

} // namespace

TEST(SoftThreshold, Examples) {
    EXPECT_EQ(prox_soft_threshold(vec({3, -0.5}), 1), vec({2, 0}));
    Vector x = vec({1.5, -2, 0.25});
    EXPECT_EQ(prox_soft_threshold(x, 0), x);
    EXPECT_EQ(prox_soft_threshold(vec({-2}), 5), vec({0}));
    EXPECT_THROW(prox_soft_threshold(x, -1), ConfigError);
}

TEST(SoftThreshold, MatchesGridMinimization) {
    for (double x : {3.0, -0.5, 1.7, -2.3}) {
        double expect = grid_prox_l1(x, 1.0, 1.0);
        EXPECT_NEAR(prox_soft_threshold(vec({x}), 1.0)[0], expect, 1e-5);
    }
}

TEST(Moreau, L1AtZero) {
    auto r = moreau_value_grad(l1_function(), vec({0}), 1.0);
    EXPECT_EQ(r.value, 0.0);
    EXPECT_EQ(r.grad[0], 0.0);
}

TEST(Moreau, L1AtTwo) {
    auto r = moreau_value_grad(l1_function(), vec({2}), 1.0);
    EXPECT_DOUBLE_EQ(r.prox[0], 1.0);
    EXPECT_DOUBLE_EQ(r.value, 1.5);
    EXPECT_DOUBLE_EQ(r.grad[0], 1.0);
    EXPECT_NEAR(grid_prox_l1(2.0, 1.0, 1.0), 1.0, 1e-5);
}

TEST(Moreau, IndicatorInsideSet) {
    auto r = moreau_value_grad(indicator_function(nonpositive), vec({-1, -3}), 0.5);
    EXPECT_EQ(r.value, 0.0);
    EXPECT_EQ(r.grad.norm(), 0.0);
}

TEST(Moreau, EnvelopeGradientPassesFd) {
    auto f = l1_function(0.7);
    ValueGradFunction env = [&](const Vector& x) {
        auto r = moreau_value_grad(f, x, 0.3);
        return ValueGrad{r.value, r.grad};
    };
    EXPECT_TRUE(fd_check(env, random_points(50, 4, 3)).passed);
}

TEST(Moreau, CompositeSolverMatchesClosedForm) {
    // g = 0 leaves the l1 prox; g = |u|^2 / 2 scales it by 1/(1 + eta)
    const double eta = 0.4, w = 0.3;
    auto hp = [w](const Vector& v, double t) { return prox_soft_threshold(v, w * t); };
    Vector x = vec({1.2, -0.05, -2.0});
    BatchGradient zero = [](const Vector& u, Vector& out) { out = Vector::Zero(u.size()); };
    auto r0 = moreau_composite(zero, hp, 0.0, x, eta);
    EXPECT_LT((r0.prox - prox_soft_threshold(x, w * eta)).norm(), 1e-9);

    BatchGradient ident = [](const Vector& u, Vector& out) { out = u; };
    auto r1 = moreau_composite(ident, hp, 1.0, x, eta);
    Vector expect = prox_soft_threshold(x / (1 + eta), w * eta / (1 + eta));
    EXPECT_LT((r1.prox - expect).norm(), 1e-9);
    EXPECT_LT((r1.grad - (x - expect) / eta).norm(), 1e-8);
    EXPECT_GT(r1.inner_iterations, 0);
}

TEST(Moreau, CompositeSolverReportsNonConvergence) {
    ProxSpec spec;
    spec.max_inner_iters = 1;
    spec.tolerance = 1e-16;
    BatchGradient ident = [](const Vector& u, Vector& out) { out = u; };
    auto hp = [](const Vector& v, double t) { return prox_soft_threshold(v, t); };
    EXPECT_THROW(moreau_composite(ident, hp, 1.0, vec({5, -5}), 1.0, spec), ProxError);
}

TEST(Lse, SymmetricZeroTerms) {
    AffineTerms t;
    t.a.resize(2, 2);
    t.a << 1, 2, -1, 4;
    t.b = Vector::Zero(2);
    auto r = lse_smooth_max(t, Vector::Zero(2), 1.0);
    EXPECT_NEAR(r.value, 0.0, 1e-15);
    Vector expect = (t.a.row(0) + t.a.row(1)).transpose() / 2;
    EXPECT_LT((r.grad - expect).norm(), 1e-15);
}

TEST(Lse, SeparatedTerms) {
    auto t = two_coordinates();
    auto r = lse_smooth_max(t, vec({10, 0}), 0.01);
    // exp(-1000) underflows, so the exact value is 10 - 0.01 ln 2
    EXPECT_NEAR(r.value, 10.0 - 0.01 * std::log(2.0), 1e-12);
    EXPECT_LT((r.grad - vec({1, 0})).norm(), 1e-12);
}

TEST(Lse, Sandwich) {
    auto t = two_coordinates();
    for (const auto& x : random_points(200, 2, 5)) {
        for (double eta : {0.01, 0.3, 2.0}) {
            double v = lse_smooth_max(t, x, eta).value;
            double mx = x.maxCoeff();
            EXPECT_LE(v, mx + 1e-12);
            EXPECT_GE(v, mx - eta * std::log(2.0) - 1e-12);
        }
    }
}

TEST(Lse, RequiresTwoTerms) {
    AffineTerms t;
    t.a = Matrix::Ones(1, 2);
    t.b = Vector::Zero(1);
    EXPECT_THROW(lse_smooth_max(t, Vector::Zero(2), 1.0), ConfigError);
}

TEST(Huber, ZeroPoint) {
    auto r = huber_l1(Vector::Zero(3), 0.5);
    EXPECT_EQ(r.value, 0.0);
    EXPECT_EQ(r.grad.norm(), 0.0);
}

TEST(Huber, BranchBoundary) {
    const double eta = 0.37;
    auto r = huber_l1(vec({eta}), eta);
    EXPECT_DOUBLE_EQ(r.value, eta / 2);
    EXPECT_DOUBLE_EQ(eta * eta / (2 * eta), std::abs(eta) - eta / 2);
    EXPECT_DOUBLE_EQ(r.grad[0], 1.0);
}

TEST(Huber, AtThree) {
    auto r = huber_l1(vec({3}), 1.0);
    EXPECT_DOUBLE_EQ(r.value, 2.5);
    EXPECT_DOUBLE_EQ(r.grad[0], 1.0);
    ValueGradFunction f = [](const Vector& x) { return huber_l1(x, 1.0); };
    EXPECT_TRUE(fd_check(f, {vec({3})}).passed);
}

TEST(Norm2, ZeroPoint) {
    auto r = norm2_smooth(Vector::Zero(2), 1.0);
    EXPECT_EQ(r.value, 0.0);
    EXPECT_EQ(r.grad.norm(), 0.0);
}

TEST(Norm2, UnitNorm) {
    auto r = norm2_smooth(vec({0.6, 0.8}), 1.0);
    EXPECT_NEAR(r.value, std::sqrt(2.0) - 1.0, 1e-15);
    EXPECT_NEAR(r.grad.norm(), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Norm2, Sandwich) {
    for (const auto& x : random_points(200, 3, 6)) {
        for (double eta : {0.05, 1.0}) {
            double v = norm2_smooth(x, eta).value;
            EXPECT_LE(v, x.norm() + 1e-12);
            EXPECT_GE(v, x.norm() - eta - 1e-12);
        }
    }
}

TEST(Indicator, InsideSet) {
    auto r = indicator_smooth(vec({-2, 0}), nonpositive, 0.1);
    EXPECT_EQ(r.value, 0.0);
    EXPECT_EQ(r.grad.norm(), 0.0);
}

TEST(Indicator, HalfLineAtThree) {
    auto r = indicator_smooth(vec({3}), nonpositive, 1.0);
    EXPECT_DOUBLE_EQ(r.value, 4.5);
    EXPECT_DOUBLE_EQ(r.grad[0], 3.0);
}

TEST(Indicator, GradientPassesFdOffBoundary) {
    ValueGradFunction f = [](const Vector& x) { return indicator_smooth(x, nonpositive, 0.5); };
    std::vector<Vector> pts;
    for (auto x : random_points(50, 3, 7)) {
        for (Eigen::Index i = 0; i < x.size(); ++i)
            if (std::abs(x[i]) < 0.05) x[i] = 0.5;
        pts.push_back(x);
    }
    EXPECT_LE(fd_check(f, pts).max_rel_error, 1e-6);
}

TEST(Smoothers, RejectNonPositiveEta) {
    EXPECT_THROW(huber_l1(Vector::Zero(1), 0.0), ConfigError);
    EXPECT_THROW(norm2_smooth(Vector::Zero(1), -1.0), ConfigError);
    EXPECT_THROW(norm2_view(0.0), ConfigError);
}

TEST(EtaSchedule, FirstValue) { EXPECT_DOUBLE_EQ(eta_schedule_diminishing(1, 2.0, 0), 1.0); }

TEST(EtaSchedule, StrictlyDecreasing) {
    for (long k = 0; k < 200; ++k) EXPECT_LT(eta_schedule_diminishing(5, 0.3, k + 1), eta_schedule_diminishing(5, 0.3, k));
}

TEST(EtaSchedule, AtSix) {
    // 2 (n+1)^2 / (tau^2 (k+2)) = 8 / 32
    EXPECT_NEAR(eta_schedule_diminishing(1, 2.0, 6), std::pow(0.25, 1.0 / 3.0), 1e-15);
}

TEST(SmoothingChain, Norm2) {
    auto f1 = [](const Vector& x) { return norm2_smooth(x, 1.0).value; };
    auto f2 = [](const Vector& x) { return norm2_smooth(x, 0.5).value; };
    auto rep = check_smoothing_chain(f1, f2, 1.0, 0.5, 1.0, random_points(1000, 3, 8));
    EXPECT_TRUE(rep.pass);
    EXPECT_EQ(rep.checked, 1000U);
}

TEST(SmoothingChain, LseWithOrderedCoordinates) {
    auto t = two_coordinates();
    auto f1 = [&](const Vector& x) { return lse_smooth_max(t, x, 1.0).value; };
    auto f2 = [&](const Vector& x) { return lse_smooth_max(t, x, 0.5).value; };
    std::vector<Vector> pts;
    for (auto x : random_points(1000, 2, 9)) {
        if (x[1] >= x[0]) std::swap(x[0], x[1]);
        pts.push_back(x);
    }
    EXPECT_TRUE(check_smoothing_chain(f1, f2, 1.0, 0.5, 1.0, pts).pass);
}

TEST(SmoothingChain, EqualParameters) {
    auto f = [](const Vector& x) { return norm2_smooth(x, 0.3).value; };
    EXPECT_TRUE(check_smoothing_chain(f, f, 0.3, 0.3, 0.0, random_points(50, 2, 10)).pass);
}

TEST(SmoothingChain, RejectsIncreasingEta) {
    auto f = [](const Vector& x) { return x.norm(); };
    EXPECT_THROW(check_smoothing_chain(f, f, 0.3, 0.6, 1.0, {}), ConfigError);
}

TEST(SmoothedView, SandwichAndLipschitz) {
    auto v = huber_view(3, 0.2);
    EXPECT_DOUBLE_EQ(v.lipschitz(), 5.0);
    EXPECT_TRUE(check_sandwich(v, random_points(300, 3, 11)).pass);
    EXPECT_TRUE(check_sandwich(norm2_view(0.7), random_points(300, 3, 12)).pass);
    EXPECT_TRUE(check_sandwich(lse_view(two_coordinates(), 0.4), random_points(300, 2, 13)).pass);
}
