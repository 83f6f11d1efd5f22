#include "oracles.hpp"

#include "sro/benchmarks.hpp"
#include "sro/evaluate.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace sro;

TEST(GenInventory, DimensionsAndParameters) {
    const int n = 10;
    const double K = 20.0;
    const auto inst = gen_inventory(n, K, 123);
    const auto& p = inst.problem;
    EXPECT_EQ(p.n(), n);
    EXPECT_EQ(p.d(), n);
    EXPECT_EQ(p.r(), n * (n - 1));
    EXPECT_EQ(p.c, Eigen::VectorXd::Ones(n));
    EXPECT_EQ(p.support.dim(), n);
    EXPECT_NO_THROW(p.validate());
    // Transfer capacities appear as rows -y >= -b.
    int caps = 0;
    for (int j = 0; j < p.m(); ++j) {
        if (p.W.row(j).sum() == -1.0 && p.W.row(j).cwiseAbs().sum() == 1.0) {
            ++caps;
            EXPECT_GE(-p.h0(j), 0.0);
            EXPECT_LE(-p.h0(j), K / (n - 1));
        }
    }
    EXPECT_EQ(caps, p.r());
    EXPECT_GT(p.q.minCoeff(), 0.0);
    // Support is the box [0, K]^n and the sampling set adds sum <= sqrt(n) K.
    EXPECT_TRUE(p.support.contains(Eigen::VectorXd::Constant(n, K), 0.0));
    EXPECT_FALSE(p.support.contains(Eigen::VectorXd::Constant(n, K + 1e-3), 1e-9));
    EXPECT_FALSE(inst.distribution.truncation.contains(Eigen::VectorXd::Constant(n, K), 1e-9));
    EXPECT_NEAR(inst.distribution.mean(0), K / 2, 1e-12);
    EXPECT_NEAR(inst.distribution.std(0), K / std::sqrt(12.0), 1e-12);
}

TEST(GenInventory, TwoNodesExactStock) {
    const auto inst = gen_inventory(2, 1.0, 5);
    const auto q = second_stage_cost(inst.problem, Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1));
    ASSERT_TRUE(q.feasible());
    EXPECT_NEAR(q.cost, 0.0, 1e-9);
}

TEST(GenInventory, Deterministic) {
    const auto a = gen_inventory(5, 20, 77);
    const auto b = gen_inventory(5, 20, 77);
    const auto c = gen_inventory(5, 20, 78);
    EXPECT_EQ(a.problem, b.problem);
    EXPECT_FALSE(a.problem == c.problem);
}

TEST(GenInventory, RejectsBadArguments) {
    EXPECT_THROW(gen_inventory(1, 20, 1), ContractViolation);
    EXPECT_THROW(gen_inventory(3, 0, 1), ContractViolation);
}

TEST(GenScheduling, SessionLengthWithinImpliedBounds) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto inst = gen_scheduling(8, 2.0, seed);
        const auto& mu = inst.distribution.mean;
        const auto& sigma = inst.distribution.std;
        EXPECT_GE(mu.minCoeff(), 30.0);
        EXPECT_LE(mu.maxCoeff(), 60.0);
        for (int i = 0; i < 8; ++i) EXPECT_LE(sigma(i), 0.3 * mu(i));
        // The session-length row is -sum x >= -T.
        double T = -1;
        for (int j = 0; j < inst.problem.m(); ++j) {
            if (inst.problem.T.row(j).sum() == -8.0) T = -inst.problem.h0(j);
        }
        ASSERT_GT(T, 0);
        EXPECT_NEAR(T, mu.sum() + 0.5 * sigma.norm(), 1e-9);
        EXPECT_GE(T, mu.sum());
        EXPECT_LE(T, mu.sum() + 0.5 * 0.3 * mu.sum());
    }
}

TEST(GenScheduling, PerfectScheduleCostsNothing) {
    const auto inst = gen_scheduling(5, 2.0, 3);
    const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(5, 30, 50);
    const auto q = second_stage_cost(inst.problem, x, x);
    ASSERT_TRUE(q.feasible());
    EXPECT_NEAR(q.cost, 0.0, 1e-8);
}

TEST(GenScheduling, LpEqualsRecursion) {
    const double c = 2.0;
    const auto inst = gen_scheduling(8, c, 9);
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::VectorXd x(8), xi(8);
        for (int i = 0; i < 8; ++i) {
            x(i) = oracle::draw(rng, 0, 30);
            xi(i) = oracle::draw(rng, 0, 90);
        }
        const auto q = second_stage_cost(inst.problem, x, xi);
        ASSERT_TRUE(q.feasible());
        EXPECT_NEAR(q.cost, oracle::waiting_time_cost(x, xi, c), 1e-7);
        EXPECT_NEAR(scheduling_cost(x, xi, c), oracle::waiting_time_cost(x, xi, c), 1e-9);
    }
}

TEST(Example3, ClosedForms) {
    SampleSet s;
    for (double v : {0.3, 0.7, 0.5}) s.points.push_back(Eigen::VectorXd::Constant(1, v));
    EXPECT_DOUBLE_EQ(closed_form_example3(s, 0.4, ClosedFormMethod::SRO), 1.1);
    EXPECT_DOUBLE_EQ(closed_form_example3(s, 0.0, ClosedFormMethod::SRO), 0.7);
    EXPECT_DOUBLE_EQ(closed_form_example3(s, 0.0, ClosedFormMethod::SAA), 0.7);
    EXPECT_DOUBLE_EQ(closed_form_example3(s, 5.0, ClosedFormMethod::SRO), 2.0);
    EXPECT_DOUBLE_EQ(closed_form_example3(s, 0.1, ClosedFormMethod::Feasible), 2.0);
}

TEST(Example2, VertexPinsRecourse) {
    const auto p = gen_example2();
    EXPECT_EQ(p.r(), 1);
    EXPECT_EQ(p.d(), 2);
    EXPECT_EQ(p.m(), 6);
    // At zeta = (1, -1) the rows force y >= 2 and y <= 2.
    const auto q = second_stage_cost(p, Eigen::VectorXd::Constant(1, 0.5), Eigen::Vector2d(1, -1));
    ASSERT_TRUE(q.feasible());
    EXPECT_NEAR(q.cost, 2.0, 1e-7);
}

TEST(Sample, UniformMarginalOnZeroK) {
    const double K = 20.0;
    DistributionSpec spec;
    spec.mean = Eigen::VectorXd::Constant(1, K / 2);
    spec.std = Eigen::VectorXd::Constant(1, K / std::sqrt(12.0));
    spec.truncation = SupportPolyhedron::whole_space(1);
    spec.seed = 4;
    const auto s = sample(spec, 20000, 1);
    double lo = 1e9, hi = -1e9;
    int below_quarter = 0;
    for (const auto& p : s.points) {
        lo = std::min(lo, p(0));
        hi = std::max(hi, p(0));
        below_quarter += p(0) < K / 4;
    }
    EXPECT_GE(lo, 0.0);
    EXPECT_LE(hi, K);
    EXPECT_LT(lo, 0.01);
    EXPECT_GT(hi, K - 0.01);
    EXPECT_NEAR(below_quarter / 20000.0, 0.25, 0.015);
}

TEST(Sample, DeterministicAndThreadIndependent) {
    const auto inst = gen_inventory(4, 20, 1, DistributionKind::Lognormal);
    const auto a = sample(inst.distribution, 50, 3);
    const auto b = sample(inst.distribution, 50, 3);
    const auto prefix = sample(inst.distribution, 10, 3);
    for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(a.points[i], b.points[i]);
    for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(a.points[i], prefix.points[i]);
    EXPECT_EQ(a.seed, inst.distribution.seed);
}

TEST(Sample, TruncatedNormalMeanMatchesIndependentMonteCarlo) {
    const int n = 4;
    const double K = 20.0;
    const auto inst = gen_inventory(n, K, 2, DistributionKind::Normal);
    const auto s = sample(inst.distribution, 10000, 1);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n), sq = Eigen::VectorXd::Zero(n);
    for (const auto& p : s.points) {
        ASSERT_TRUE(inst.problem.support.contains(p, 0.0));
        ASSERT_LE(p.sum(), std::sqrt(double(n)) * K);
        mean += p;
        sq += p.cwiseProduct(p);
    }
    mean /= 10000.0;
    const Eigen::VectorXd se = ((sq / 10000.0 - mean.cwiseProduct(mean)) / 10000.0).cwiseSqrt();

    // Reference with a different generator and rejection written out here.
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> z(K / 2, K / std::sqrt(12.0));
    Eigen::VectorXd ref = Eigen::VectorXd::Zero(n);
    int accepted = 0;
    while (accepted < 1000000) {
        Eigen::VectorXd p(n);
        for (int k = 0; k < n; ++k) p(k) = z(rng);
        if (p.minCoeff() < 0 || p.maxCoeff() > K || p.sum() > std::sqrt(double(n)) * K) continue;
        ref += p;
        ++accepted;
    }
    ref /= accepted;
    for (int k = 0; k < n; ++k) EXPECT_NEAR(mean(k), ref(k), 3 * se(k)) << "component " << k;
}

TEST(Sample, LognormalMomentsBeforeTruncation) {
    DistributionSpec spec;
    spec.kind = DistributionKind::Lognormal;
    spec.mean = Eigen::VectorXd::Constant(1, 10.0);
    spec.std = Eigen::VectorXd::Constant(1, 5.77);
    spec.truncation = SupportPolyhedron::whole_space(1);
    const auto s = sample(spec, 100000, 1);
    double sum = 0, sq = 0;
    for (const auto& p : s.points) {
        sum += p(0);
        sq += p(0) * p(0);
    }
    const double mean = sum / 1e5;
    EXPECT_NEAR(mean, 10.0, 0.1);
    EXPECT_NEAR(std::sqrt(sq / 1e5 - mean * mean), 5.77, 0.15);
}

TEST(Sample, RejectionExhaustion) {
    DistributionSpec spec;
    spec.mean = Eigen::VectorXd::Constant(1, 0.0);
    spec.std = Eigen::VectorXd::Constant(1, 1.0);
    spec.truncation = SupportPolyhedron::box(Eigen::VectorXd::Constant(1, -1e-9), Eigen::VectorXd::Constant(1, 1e-9));
    EXPECT_THROW(sample(spec, 1, 0, 100), std::runtime_error);
    spec.std(0) = 0.0;
    EXPECT_THROW(sample(spec, 1, 0), ContractViolation);
}

TEST(RadiusSchedule, PowersOfTwoAreExact) {
    EXPECT_EQ(radius_schedule(10.0, 0.1, 1024), 5.0);
    EXPECT_EQ(radius_schedule(1.0, 0.125, 256), 0.5);
    for (int N : {1, 7, 1000}) EXPECT_EQ(radius_schedule(0.0, 0.1, N), 0.0);
    EXPECT_THROW(radius_schedule(1.0, 0.1, 0), ContractViolation);
}

TEST(RadiusSchedule, Parse) {
    const auto s = RadiusSchedule::parse("kappa=10,exp=1/10");
    EXPECT_EQ(s.kappa, 10.0);
    EXPECT_EQ(s(1024), 5.0);
    EXPECT_EQ(RadiusSchedule::parse("exp=0.125,kappa=1")(256), 0.5);
    EXPECT_THROW(RadiusSchedule::parse("kappa=1"), ParseError);
    EXPECT_THROW(RadiusSchedule::parse("kappa=x,exp=1"), ParseError);
    EXPECT_THROW(RadiusSchedule::parse("k=1,exp=1"), ParseError);
}
