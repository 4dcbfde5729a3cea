#include "vssqn/harness/oracles.hpp"
#include "vssqn/hessian/dense.hpp"
#include "vssqn/problems/lewis_overton.hpp"
#include "vssqn/problems/quadratic.hpp"
#include "vssqn/solvers/baseline.hpp"

#include <gtest/gtest.h>

using namespace vssqn;

namespace {

constexpr std::uint64_t kBuildStream = 0xD1B54A32D192ED03ULL;

QuadraticEnsemble quad(std::size_t n, double kappa, std::uint64_t seed, QuadraticNoise noise = {0.5, 0.0},
                       Convexity c = Convexity::strongly_convex) {
    RngStream rng(seed, kBuildStream);
    return quad_make(n, kappa, c, rng, noise);
}

} // namespace

TEST(VsSqn, IdentityProblemIsGradientDescent) {
    auto q = quad(3, 1.0, 1, {0.0, 0.0});
    SolverConfig cfg;
    cfg.scheme = Scheme::vs_sqn;
    cfg.m = 1;
    cfg.horizon = 12;
    cfg.step = ScalarSchedule::constant(0.3);
    cfg.batch = BatchSchedule::constant(2);
    cfg.x0 = Vector::Constant(3, 2.0);
    int checked = 0;
    cfg.observer = [&](const IterationTrace& t) {
        if (!t.memory->empty()) {
            EXPECT_LT((materialize_dense(*t.memory, 3) - Matrix::Identity(3, 3)).norm(), 1e-12);
            ++checked;
        }
        Vector gd = *t.x - 0.3 * q.mean_gradient(*t.x);
        EXPECT_LT((*t.x_next - gd).norm(), 1e-12);
    };
    auto r = run_solver(q, cfg);
    EXPECT_GT(checked, 0);
    EXPECT_EQ(r.termination, Termination::horizon);
    EXPECT_EQ(r.iterations, 12);
}

TEST(VsSqn, LinearRateOnNoisyQuadratic) {
    auto q = quad(20, 100.0, 2, {0.5, 1.0});
    SolverConfig cfg;
    cfg.scheme = Scheme::vs_sqn;
    cfg.m = 5;
    cfg.sample_budget = 200000;
    cfg.step = ScalarSchedule::constant(0.3);
    cfg.batch = BatchSchedule::geometric(1, 0.95);
    cfg.x0 = Vector::Zero(20);
    cfg.seed = 3;
    auto r = run_solver(q, cfg);
    auto fit = rate_fit(r.records, RateModel::linear_in_k);
    EXPECT_LT(fit.slope, 0.0);
    EXPECT_EQ(r.termination, Termination::budget);
    EXPECT_LT(*r.records.back().gap, 1e-3 * *r.records.front().gap);
}

TEST(VsSqn, TheoryBatchDefaultWithStateNoise) {
    auto q = quad(4, 10.0, 3);
    SolverConfig cfg;
    cfg.scheme = Scheme::vs_sqn;
    cfg.m = 2;
    cfg.horizon = 1;
    cfg.nu1 = 0.5;
    std::uint64_t first = 0;
    cfg.observer = [&](const IterationTrace& t) { first = t.handle.count; };
    auto r = run_solver(q, cfg);
    const double L = 10, tau = 1, mn = 6;
    const double lo = 1 / (L * mn), hi = std::pow(L * mn / tau, 2);
    const double n0 = 2 * 0.25 * hi / (tau * tau * lo);
    EXPECT_NEAR(r.theory.at("n0_theory"), n0, 1e-9 * n0);
    EXPECT_NEAR(r.theory.at("gamma_theory"), 1 / (L * hi), 1e-18);
    EXPECT_EQ(first, static_cast<std::uint64_t>(std::ceil(n0 * (1 - 1e-12))));
}

TEST(SvsSqn, MoreauDefaultStep) {
    RngStream rng(4, kBuildStream);
    L1QuadraticProblem p(quad_make(6, 4.0, Convexity::strongly_convex, rng, {0.0, 0.0}), 0.1);
    SolverConfig cfg;
    cfg.scheme = Scheme::svs_sqn_moreau;
    cfg.m = 1;
    cfg.horizon = 2;
    auto r = run_solver(p, cfg);
    const double eta = r.theory.at("eta");
    EXPECT_DOUBLE_EQ(r.theory.at("gamma_theory"), 1.0 * eta * eta / (4 * 7));
    EXPECT_DOUBLE_EQ(eta, r.theory.at("eta_cap"));
    EXPECT_DOUBLE_EQ(eta, std::min(2.0 / 4.0, std::cbrt(4.0 * 49)));
}

TEST(SvsSqn, MoreauRejectsLargeEta) {
    RngStream rng(4, kBuildStream);
    L1QuadraticProblem p(quad_make(3, 4.0, Convexity::strongly_convex, rng, {0.0, 0.0}), 0.1);
    SolverConfig cfg;
    cfg.scheme = Scheme::svs_sqn_moreau;
    cfg.horizon = 2;
    cfg.eta = ScalarSchedule::constant(1.0);
    try {
        run_solver(p, cfg);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "solver.eta");
    }
}

TEST(SvsSqn, DiminishingBatchDefault) {
    auto q = quad(3, 4.0, 5);
    SolverConfig cfg;
    cfg.scheme = Scheme::svs_sqn_diminishing;
    cfg.horizon = 1;
    cfg.nu1 = 2.0;
    std::uint64_t first = 0;
    cfg.observer = [&](const IterationTrace& t) { first = t.handle.count; };
    auto r = run_solver(q, cfg);
    const double n0 = std::ceil(std::pow(2.0, 4.0 / 3) * 4.0 * std::cbrt(4.0) / std::pow(1.0, 5.0 / 3));
    EXPECT_DOUBLE_EQ(std::ceil(r.theory.at("n0_theory")), n0);
    // N_0 = ceil(n0 * 2^(a + 2/3)) with the offset of 2
    EXPECT_EQ(first, static_cast<std::uint64_t>(std::ceil(n0 * std::pow(2.0, 1.1 + 2.0 / 3) * (1 - 1e-12))));
}

TEST(SvsSqn, MoreauScalarAbsoluteValue) {
    // f = |x - x0|^2 / 2 + 10 |x|_1 with |x0| < 10 has its minimizer at 0
    RngStream rng(6, kBuildStream);
    L1QuadraticProblem p(quad_make(2, 1.0, Convexity::strongly_convex, rng, {0.0, 0.0}), 10.0);
    SolverConfig cfg;
    cfg.scheme = Scheme::svs_sqn_moreau;
    cfg.m = 1;
    cfg.horizon = 60;
    cfg.step = ScalarSchedule::constant(0.5);
    cfg.x0 = Vector::Constant(2, 3.0);
    auto r = run_solver(p, cfg);
    EXPECT_LT(r.x_final.norm(), 1e-6);
}

TEST(RvsSqn, ScheduleExponents) {
    auto q = quad(4, 10.0, 7, {0.5, 0.0}, Convexity::convex);
    SolverConfig cfg;
    cfg.scheme = Scheme::rvs_sqn;
    cfg.epsilon = 0.1;
    cfg.gamma0 = 0.5;
    cfg.mu0 = 2.0;
    cfg.n0 = 3;
    auto plan = detail::plan_rvs(q, cfg);
    for (long k : {1L, 2L, 7L, 40L}) {
        const double kd = static_cast<double>(k);
        EXPECT_EQ(plan.batch(k), static_cast<std::uint64_t>(std::ceil(3 * std::pow(kd, 2.1) * (1 - 1e-12))));
        EXPECT_NEAR(plan.step(k), 0.5 * std::pow(kd, -0.1), 1e-15);
        EXPECT_NEAR((*plan.mu)(k), 2.0 * std::pow(kd, -(1 - 0.2 / 3)), 1e-15);
    }
    EXPECT_EQ(plan.k_start, 1);
    EXPECT_TRUE(plan.alternation);
}

TEST(RvsSqn, MuDecreasesAlongRun) {
    auto q = quad(5, 10.0, 8, {0.5, 0.0}, Convexity::convex);
    SolverConfig cfg;
    cfg.scheme = Scheme::rvs_sqn;
    cfg.m = 2;
    cfg.horizon = 30;
    cfg.gamma0 = 1.0;
    std::vector<double> mus;
    std::vector<long> formed;
    cfg.observer = [&](const IterationTrace& t) {
        mus.push_back(t.mu);
        for (const auto& p : t.memory->pairs()) formed.push_back(p.formed_at);
    };
    run_solver(q, cfg);
    for (std::size_t i = 1; i < mus.size(); ++i) EXPECT_LT(std::log(mus[i]), std::log(mus[i - 1]));
    for (long k : formed) EXPECT_EQ(k % 2, 1);
}

TEST(RsvsSqn, HorizonConstants) {
    auto q = quad(5, 10.0, 9, {0.5, 0.0}, Convexity::convex);
    SolverConfig cfg;
    cfg.scheme = Scheme::rsvs_sqn;
    cfg.horizon = 1000;
    cfg.epsilon = 0.1;
    cfg.c_gamma = 0.7;
    auto plan = detail::plan_rsvs(q, cfg);
    EXPECT_NEAR((*plan.mu)(1), 0.1, 1e-15);
    EXPECT_NEAR((*plan.eta)(1), 0.1, 1e-15);
    EXPECT_NEAR(plan.step(5), 0.7 * std::pow(1000.0, -1.0 / 3 + 1.0 / 6), 1e-15);
    EXPECT_EQ(plan.theory.at("C"), 0.0);
    EXPECT_EQ(plan.weight_c, 0.0);
}

TEST(RsvsSqn, ZeroStateNoiseGivesPlainAverage) {
    auto q = quad(4, 5.0, 10, {0.5, 0.0}, Convexity::convex);
    SolverConfig cfg;
    cfg.scheme = Scheme::rsvs_sqn;
    cfg.m = 2;
    cfg.horizon = 40;
    std::vector<Vector> xs;
    cfg.observer = [&](const IterationTrace& t) { xs.push_back(*t.x); };
    auto r = run_solver(q, cfg);
    Vector mean = Vector::Zero(4);
    for (const auto& x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    ASSERT_TRUE(r.x_averaged.has_value());
    EXPECT_LT((*r.x_averaged - mean).norm(), 1e-12 * (1 + mean.norm()));
}

TEST(RsvsSqn, WeightsPositiveWhenBatchHonorsBound) {
    RngStream rng(11, kBuildStream);
    L1QuadraticProblem p(quad_make(3, 2.0, Convexity::convex, rng), 0.1);
    SolverConfig cfg;
    cfg.scheme = Scheme::rsvs_sqn;
    cfg.m = 1;
    cfg.horizon = 8;
    cfg.epsilon = 0.5;
    cfg.nu1 = 1e-3;
    auto plan = detail::plan_rsvs(p, cfg);
    ASSERT_GT(plan.weight_c, 0.0);
    for (long k = 1; k <= 8; ++k)
        EXPECT_GT(*plan.weight_base - plan.weight_c / static_cast<double>(plan.batch(k)), 0.0);
}

TEST(RsvsSqn, RequiresHorizon) {
    auto q = quad(3, 2.0, 12);
    SolverConfig cfg;
    cfg.scheme = Scheme::rsvs_sqn;
    cfg.sample_budget = 100;
    EXPECT_THROW(run_solver(q, cfg), ConfigError);
}

TEST(Baselines, SgdConstantStepOnDeterministicQuadratic) {
    auto q = quad(5, 10.0, 13, {0.0, 0.0});
    SolverConfig cfg;
    cfg.scheme = Scheme::sgd;
    cfg.horizon = 200;
    cfg.step = ScalarSchedule::constant(0.1);
    cfg.x0 = Vector::Zero(5);
    cfg.full_log = true;
    auto r = run_solver(q, cfg);
    auto fit = rate_fit(r.records, RateModel::linear_in_k);
    // the slowest mode contracts by (1 - 1/kappa) per step, the gap by its square
    EXPECT_NEAR(fit.slope, 2 * std::log(0.9), 0.02);
    EXPECT_GT(fit.r_squared, 0.99);
}

TEST(Baselines, SqnUnitBatchDecaysLikeOneOverK) {
    // ensemble mean of the gap over many seeds, started at the optimum so only noise drives it
    auto q = quad(5, 4.0, 22, {0.3, 1.0});
    const long horizon = 4000;
    std::vector<double> mean_gap(static_cast<std::size_t>(horizon) + 1, 0.0);
    const int seeds = 40;
    for (int seed = 1; seed <= seeds; ++seed) {
        SolverConfig cfg;
        cfg.scheme = Scheme::sqn_unit;
        cfg.m = 2;
        cfg.gamma0 = 1.0;
        cfg.horizon = horizon;
        cfg.seed = static_cast<std::uint64_t>(seed);
        cfg.x0 = *q.meta().x_star;
        auto r = run_solver(q, cfg);
        for (const auto& rec : r.records) mean_gap[static_cast<std::size_t>(rec.k - 1)] += *rec.gap / seeds;
    }
    std::vector<double> k, gap;
    for (long i = 100; i <= horizon; ++i) {
        k.push_back(static_cast<double>(i));
        gap.push_back(mean_gap[static_cast<std::size_t>(i - 1)]);
    }
    EXPECT_NEAR(rate_fit(k, gap, RateModel::power_in_k).slope, -1.0, 0.2);
}

TEST(Baselines, AcceleratedBeatsGradientDescent) {
    auto q = quad(10, 100.0, 14, {0.0, 0.0});
    auto iterations_to = [&](Scheme s) {
        SolverConfig cfg;
        cfg.scheme = s;
        cfg.horizon = 20000;
        cfg.step = ScalarSchedule::constant(0.01);
        cfg.batch = BatchSchedule::constant(1);
        cfg.full_log = true;
        cfg.x0 = Vector::Zero(10);
        auto r = run_solver(q, cfg);
        const double target = 1e-6 * *r.records.front().gap;
        for (const auto& rec : r.records)
            if (*rec.gap <= target) return rec.k;
        return 1000000L;
    };
    long apg = iterations_to(Scheme::apg_baseline), gd = iterations_to(Scheme::sgd);
    EXPECT_LT(apg, gd);
    EXPECT_LT(apg, 20000);
}

TEST(Driver, UpdateReplaysFromRecordedBatch) {
    auto q = quad(6, 20.0, 15, {0.5, 0.3});
    SolverConfig cfg;
    cfg.scheme = Scheme::vs_sqn;
    cfg.m = 3;
    cfg.horizon = 25;
    cfg.step = ScalarSchedule::constant(0.2);
    cfg.x0 = Vector::Ones(6);
    int checked = 0;
    cfg.observer = [&](const IterationTrace& t) {
        Vector g = replay_gradient(q, t.handle, *t.x);
        EXPECT_EQ(g, *t.gradient);
        Vector expect = *t.x - t.gamma * materialize_dense(*t.memory, 6) * g;
        EXPECT_LT((*t.x_next - expect).norm(), 1e-10 * (1 + expect.norm()));
        ++checked;
    };
    run_solver(q, cfg);
    EXPECT_EQ(checked, 25);
}

TEST(Driver, PairsFormedAtOddIterationsOnly) {
    auto q = quad(4, 10.0, 16);
    SolverConfig cfg;
    cfg.scheme = Scheme::vs_sqn;
    cfg.m = 10;
    cfg.horizon = 21;
    cfg.step = ScalarSchedule::constant(0.2);
    cfg.x0 = Vector::Ones(4);
    std::vector<std::size_t> sizes;
    cfg.observer = [&](const IterationTrace& t) { sizes.push_back(t.memory->size()); };
    run_solver(q, cfg);
    // k = 0 none, k = 1 first pair, then one more at each odd k
    for (std::size_t k = 0; k < sizes.size(); ++k) EXPECT_EQ(sizes[k], (k + 1) / 2) << "k=" << k;
}

TEST(Driver, OracleAccounting) {
    auto q = quad(4, 10.0, 17);
    SolverConfig cfg;
    cfg.scheme = Scheme::vs_sqn;
    cfg.m = 2;
    cfg.horizon = 9;
    cfg.step = ScalarSchedule::constant(0.1);
    cfg.batch = BatchSchedule::geometric(2, 0.8);
    cfg.x0 = Vector::Ones(4);
    cfg.full_log = true;
    auto r = run_solver(q, cfg);
    std::uint64_t samples = 0, evals = 0;
    for (long k = 0; k < 9; ++k) {
        samples += cfg.batch->operator()(k);
        evals += cfg.batch->operator()(k);
        if (k % 2 == 1) evals += 2 * cfg.batch->operator()(k - 1);
        EXPECT_EQ(r.records[static_cast<std::size_t>(k + 1)].samples_cum, samples);
        EXPECT_EQ(r.records[static_cast<std::size_t>(k + 1)].grad_evals_cum, evals);
    }
    EXPECT_EQ(r.total_samples, samples);
    EXPECT_EQ(r.total_grad_evals, evals);
}

TEST(Driver, BudgetStopsBeforeOverrun) {
    auto q = quad(4, 10.0, 18);
    SolverConfig cfg;
    cfg.scheme = Scheme::vs_sqn;
    cfg.sample_budget = 100;
    cfg.step = ScalarSchedule::constant(0.1);
    cfg.batch = BatchSchedule::geometric(1, 0.5);
    auto r = run_solver(q, cfg);
    EXPECT_EQ(r.termination, Termination::budget);
    EXPECT_EQ(r.total_samples, 63U); // 1 + 2 + ... + 32
}

TEST(Driver, ZeroStepTerminates) {
    auto q = quad(3, 2.0, 19, {0.5, 0.0});
    SolverConfig cfg;
    cfg.scheme = Scheme::vs_sqn;
    cfg.horizon = 50;
    cfg.step = ScalarSchedule::constant(0.1);
    cfg.x0 = *q.meta().x_star;
    auto r = run_solver(q, cfg);
    EXPECT_EQ(r.termination, Termination::zero_step);
    EXPECT_EQ(r.iterations, 1);
}

TEST(Driver, NeedsStopRule) {
    auto q = quad(3, 2.0, 19);
    SolverConfig cfg;
    cfg.scheme = Scheme::vs_sqn;
    cfg.step = ScalarSchedule::constant(0.1);
    EXPECT_THROW(run_solver(q, cfg), ConfigError);
}

TEST(Driver, SameSeedSameRun) {
    auto q = quad(5, 30.0, 20, {0.5, 0.5});
    SolverConfig cfg;
    cfg.scheme = Scheme::vs_sqn;
    cfg.m = 3;
    cfg.horizon = 40;
    cfg.step = ScalarSchedule::constant(0.2);
    cfg.seed = 8;
    auto a = run_solver(q, cfg), b = run_solver(q, cfg);
    EXPECT_EQ(a.x_final, b.x_final);
    cfg.seed = 9;
    EXPECT_NE(run_solver(q, cfg).x_final, a.x_final);
}

TEST(Driver, LoggingCadence) {
    EXPECT_TRUE(detail::RunLog::cadence(1));
    EXPECT_TRUE(detail::RunLog::cadence(10000));
    EXPECT_TRUE(detail::RunLog::cadence(10010));
    EXPECT_FALSE(detail::RunLog::cadence(10001));
    EXPECT_TRUE(detail::RunLog::cadence(100100));
    EXPECT_FALSE(detail::RunLog::cadence(100010));
}

TEST(Driver, FinalIterateAlwaysLogged) {
    LewisOverton p;
    SolverConfig cfg;
    cfg.scheme = Scheme::svs_sqn_diminishing;
    cfg.horizon = 10003;
    cfg.batch = BatchSchedule::constant(1);
    cfg.x0 = Vector::Constant(2, 2.0);
    auto r = run_solver(p, cfg);
    EXPECT_EQ(r.records.back().k, 10003);
    EXPECT_EQ(r.records.size(), 10002U);
}

TEST(Averaging, Examples) {
    std::vector<Vector> xs = {Vector::Constant(1, 0.0), Vector::Constant(1, 4.0)};
    EXPECT_DOUBLE_EQ(weighted_average(xs, {1, 3})[0], 3.0);
    EXPECT_DOUBLE_EQ(weighted_average(xs, {2, 2})[0], 2.0);
    EXPECT_DOUBLE_EQ(weighted_average({Vector::Constant(1, 7.0)}, {0.3})[0], 7.0);
    EXPECT_THROW(weighted_average(xs, {1, 0}), ConfigError);
    EXPECT_THROW(weighted_average(xs, {1}), ConfigError);
}

TEST(Schemes, DispatchGuards) {
    auto q = quad(3, 2.0, 21);
    SolverConfig cfg;
    cfg.scheme = Scheme::sgd;
    cfg.horizon = 1;
    EXPECT_THROW(run_vs_sqn(q, cfg), ConfigError);
    EXPECT_EQ(parse_scheme("RSVS_SQN"), Scheme::rsvs_sqn);
    EXPECT_THROW(parse_scheme("LBFGS"), ConfigError);
    for (Scheme s : {Scheme::vs_sqn, Scheme::svs_sqn_moreau, Scheme::svs_sqn_diminishing, Scheme::rvs_sqn,
                     Scheme::rsvs_sqn, Scheme::sgd, Scheme::sqn_unit, Scheme::apg_baseline})
        EXPECT_EQ(parse_scheme(to_string(s)), s);
}
