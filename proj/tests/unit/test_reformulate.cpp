#include "oracles.hpp"

#include "sro/benchmarks.hpp"
#include "sro/evaluate.hpp"
#include "sro/reformulate.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace sro;

namespace {

SampleSet points(std::initializer_list<double> values) {
    SampleSet s;
    for (double v : values) s.points.push_back(Eigen::VectorXd::Constant(1, v));
    return s;
}

double solved(const ReformulationArtifacts& art) {
    const auto res = conic::solve(art.program);
    EXPECT_EQ(res.status, conic::SolveStatus::Optimal);
    return res.objective;
}

conic::SolveStatus status_of(const ReformulationArtifacts& art) { return conic::solve(art.program).status; }

SampleSet example2_vertices() {
    SampleSet s;
    s.points = {Eigen::Vector2d(1, 1), Eigen::Vector2d(1, -1), Eigen::Vector2d(-1, 1), Eigen::Vector2d(-1, -1)};
    return s;
}

// Worst violation of each robust row over U^i for every policy of `sol`.
double worst_row_violation(const TwoStageProblem& p, const PolicySolution& sol) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sol.centers.size(); ++i) {
        const auto& pol = sol.policies[sol.policies.size() == 1 ? 0 : i];
        for (int j = 0; j < p.m(); ++j) {
            const Eigen::VectorXd a = p.H.row(j).transpose() - pol.Y.transpose() * p.W.row(j).transpose();
            const double offset = p.h0(j) - p.T.row(j).dot(sol.x) - p.W.row(j).dot(pol.y0);
            const auto wc = max_affine_over_set(p.support, sol.centers[i], sol.radius, sol.norm, a, offset);
            EXPECT_EQ(wc.status, conic::SolveStatus::Optimal);
            worst = std::max(worst, wc.value);
        }
    }
    return worst;
}

} // namespace

TEST(BuildSaa, Example3) {
    const auto p = gen_example3();
    const auto sol = solve_method(p, points({0.3, 0.7, 0.5}), Method::SAA, {});
    EXPECT_NEAR(sol.objective, 0.7, 1e-6);
    EXPECT_NEAR(sol.x(0), 0.7, 1e-6);
}

TEST(BuildSaa, SinglePointAtZero) {
    const auto sol = solve_method(gen_example3(), points({0.0}), Method::SAA, {});
    EXPECT_NEAR(sol.objective, 0.0, 1e-6);
    EXPECT_NEAR(sol.x(0), 0.0, 1e-6);
}

TEST(BuildSaa, InventoryEqualsAverageOfScenarioLps) {
    const auto inst = gen_inventory(2, 10, 4);
    const auto s = sample(inst.distribution, 3, 1);
    const auto sol = solve_method(inst.problem, s, Method::SAA, {});
    double avg = 0.0;
    for (const auto& xi : s.points) {
        const auto q = second_stage_cost(inst.problem, sol.x, xi);
        ASSERT_TRUE(q.feasible());
        avg += q.cost / 3.0;
    }
    EXPECT_NEAR(sol.objective, inst.problem.c.dot(sol.x) + avg, 1e-6);
}

TEST(BuildMp, Example3ClosedFormEveryNorm) {
    const auto p = gen_example3();
    const auto s = points({0.3, 0.7, 0.5});
    for (Norm norm : {Norm::L1, Norm::L2, Norm::Linf}) {
        for (double eps : {0.0, 0.1, 0.4, 1.3, 2.0, 5.0}) {
            const auto sol = solve_method(p, s, Method::MP, {norm, eps});
            EXPECT_NEAR(sol.objective, std::min(0.7 + eps, 2.0), 1e-6) << to_string(norm) << " eps " << eps;
            EXPECT_NEAR(sol.objective, closed_form_example3(s, eps, ClosedFormMethod::SRO), 1e-6);
        }
    }
}

TEST(BuildMp, ZeroRadiusEqualsSaa) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const auto inst = oracle::random_box_instance(rng, 1 + trial % 3, 1 + trial % 2);
        const auto s = oracle::uniform_box_samples(rng, inst.lo, inst.hi, 2 + trial % 4);
        const double saa = solve_method(inst.problem, s, Method::SAA, {}).objective;
        for (Norm norm : {Norm::L1, Norm::L2, Norm::Linf}) {
            EXPECT_NEAR(solve_method(inst.problem, s, Method::MP, {norm, 0.0}).objective, saa, 1e-6);
        }
    }
}

TEST(BuildMp, MatchesVertexEnumerationOnBoxes) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 15; ++trial) {
        const int d = 1 + trial % 3;
        const auto inst = oracle::random_box_instance(rng, d, 1 + trial % 2);
        const auto s = oracle::uniform_box_samples(rng, inst.lo, inst.hi, 1 + trial % 4);
        const double eps = oracle::draw(rng, 0.05, 0.6);
        const double brute = oracle::brute_force_mp_linf(inst.problem, inst.lo, inst.hi, s, eps);
        ASSERT_TRUE(std::isfinite(brute));
        const auto sol = solve_method(inst.problem, s, Method::MP, {Norm::Linf, eps});
        EXPECT_NEAR(sol.objective, brute, 1e-6) << "trial " << trial;
    }
}

TEST(BuildMp, DualizationSoundness) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 6; ++trial) {
        const auto inst = oracle::random_box_instance(rng, 2, 2);
        const auto s = oracle::uniform_box_samples(rng, inst.lo, inst.hi, 3);
        for (Norm norm : {Norm::L1, Norm::L2, Norm::Linf}) {
            const auto sol = solve_method(inst.problem, s, Method::MP, {norm, 0.3});
            EXPECT_LE(worst_row_violation(inst.problem, sol), 1e-6) << to_string(norm);
        }
    }
}

TEST(BuildMp, ObjectiveCertifiedByWorstCaseCost) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 6; ++trial) {
        const auto inst = oracle::random_box_instance(rng, 2, 2);
        const auto& p = inst.problem;
        const auto s = oracle::uniform_box_samples(rng, inst.lo, inst.hi, 3);
        for (Norm norm : {Norm::L1, Norm::L2, Norm::Linf}) {
            const auto sol = solve_method(p, s, Method::MP, {norm, 0.25});
            double value = p.c.dot(sol.x);
            for (std::size_t i = 0; i < s.size(); ++i) {
                const auto& pol = sol.policies[i];
                const auto wc = max_affine_over_set(p.support, s.points[i], 0.25, norm, pol.Y.transpose() * p.q,
                                                    p.q.dot(pol.y0));
                value += wc.value / static_cast<double>(s.size());
            }
            EXPECT_NEAR(sol.objective, value, 1e-6) << to_string(norm);
        }
    }
}

TEST(BuildSp, Example2FullSupportInfeasible) {
    const auto p = gen_example2();
    const auto s = example2_vertices();
    EXPECT_EQ(status_of(build_sp(p, s, {Norm::L2, 1.5})), conic::SolveStatus::Infeasible);
    EXPECT_EQ(status_of(build_sp(p, s, {Norm::Linf, 3.0})), conic::SolveStatus::Infeasible);
    EXPECT_THROW(solve_method(p, s, Method::SP, {Norm::L2, 1.5}), SolveFailure);
}

TEST(BuildMp, Example2SmallBallsOptimal) {
    const auto p = gen_example2();
    const auto s = example2_vertices();
    EXPECT_EQ(status_of(build_mp(p, s, {Norm::L2, 0.5})), conic::SolveStatus::Optimal);
    EXPECT_EQ(status_of(build_mp(p, s, {Norm::L2, 0.7})), conic::SolveStatus::Optimal);
}

TEST(BuildSp, ZeroRadiusEqualsSaaWhenAnAffineInterpolantExists) {
    // d = 2 with three affinely independent samples: any per-scenario recourse
    // is matched by one affine rule, so tying the policies costs nothing.
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 5; ++trial) {
        const auto inst = oracle::random_box_instance(rng, 2, 2);
        SampleSet s;
        s.points = {inst.lo, Eigen::Vector2d(inst.hi(0), inst.lo(1)), Eigen::Vector2d(inst.lo(0), inst.hi(1))};
        const double saa = solve_method(inst.problem, s, Method::SAA, {}).objective;
        EXPECT_NEAR(solve_method(inst.problem, s, Method::SP, {Norm::L2, 0.0}).objective, saa, 1e-6);
    }
}

TEST(Hierarchy, SaaBelowMpBelowSp) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const auto inst = oracle::random_box_instance(rng, 1 + trial % 3, 2);
        const auto s = oracle::uniform_box_samples(rng, inst.lo, inst.hi, 4);
        const Norm norm = std::array{Norm::L1, Norm::L2, Norm::Linf}[trial % 3];
        const double saa = solve_method(inst.problem, s, Method::SAA, {}).objective;
        double prev = -1e300;
        for (double eps : {0.0, 0.1, 0.3, 0.9}) {
            const double mp = solve_method(inst.problem, s, Method::MP, {norm, eps}).objective;
            const double sp = solve_method(inst.problem, s, Method::SP, {norm, eps}).objective;
            EXPECT_LE(saa, mp + 1e-6);
            EXPECT_LE(mp, sp + 1e-6);
            EXPECT_GE(mp, prev - 1e-6);
            prev = mp;
        }
    }
}

TEST(BuildMpFixedX, Example3Cases) {
    const auto p = gen_example3();
    const auto s = points({0.3, 0.7, 0.5});
    EXPECT_NEAR(solved(build_mp_fixed_x(p, s, {Norm::L2, 0.4}, Eigen::VectorXd::Constant(1, 2.0))), 2.0, 1e-6);
    EXPECT_EQ(status_of(build_mp_fixed_x(p, s, {Norm::L2, 0.1}, Eigen::VectorXd::Constant(1, 0.5))),
              conic::SolveStatus::Infeasible);
    EXPECT_THROW(build_mp_fixed_x(p, s, {Norm::L2, 0.1}, Eigen::VectorXd::Zero(2)), DimensionError);
}

TEST(BuildMpFixedX, InventoryFullStockHasNoRecourse) {
    const auto inst = gen_inventory(3, 20, 2);
    const auto s = sample(inst.distribution, 5, 1);
    const Eigen::VectorXd full = Eigen::VectorXd::Constant(3, 20.0);
    const double v = solved(build_mp_fixed_x(inst.problem, s, {Norm::L2, 3.0}, full));
    EXPECT_NEAR(v, inst.problem.c.dot(full), 1e-5);
    EXPECT_NEAR(v, 60.0, 1e-5);
}

TEST(ExtractSolution, Shapes) {
    const auto p = gen_example3();
    const auto s = points({0.3, 0.7, 0.5});
    const auto mp = solve_method(p, s, Method::MP, {Norm::L2, 0.1});
    EXPECT_EQ(mp.policies.size(), 3u);
    EXPECT_EQ(mp.centers.size(), 3u);
    const auto sp = solve_method(p, s, Method::SP, {Norm::L2, 0.1});
    EXPECT_EQ(sp.policies.size(), 1u);
    const auto inst = gen_inventory(3, 20, 1);
    const auto s3 = sample(inst.distribution, 4, 1);
    const auto saa = solve_method(inst.problem, s3, Method::SAA, {});
    ASSERT_EQ(saa.policies.size(), 4u);
    for (const auto& pol : saa.policies) {
        EXPECT_EQ(pol.Y.rows(), inst.problem.r());
        EXPECT_EQ(pol.Y.cols(), inst.problem.d());
        EXPECT_TRUE(pol.Y.isZero(0.0));
    }
}

TEST(ExtractSolution, NonOptimalIsContractViolation) {
    const auto art = build_sp(gen_example2(), example2_vertices(), {Norm::L2, 1.5});
    const auto res = conic::solve(art.program);
    ASSERT_NE(res.status, conic::SolveStatus::Optimal);
    EXPECT_THROW(extract_solution(art, res), ContractViolation);
}

TEST(Artifacts, GhatIsSupportSlack) {
    const auto p = gen_example3();
    const auto art = build_mp(p, points({0.3, 1.5}), {Norm::L1, 0.2});
    ASSERT_EQ(art.ghat.size(), 2u);
    EXPECT_NEAR(art.ghat[1](0), 1.5, 1e-12);
    EXPECT_NEAR(art.ghat[1](1), 0.5, 1e-12);
    for (const auto& g : art.ghat) EXPECT_GE(g.minCoeff(), -1e-9);
}

TEST(Artifacts, PolyhedralNormsHaveNoCones) {
    const auto inst = gen_inventory(3, 20, 1);
    const auto s = sample(inst.distribution, 3, 1);
    EXPECT_TRUE(build_mp(inst.problem, s, {Norm::L1, 1.0}).program.soc_constraints().empty());
    EXPECT_TRUE(build_mp(inst.problem, s, {Norm::Linf, 1.0}).program.soc_constraints().empty());
    EXPECT_FALSE(build_mp(inst.problem, s, {Norm::L2, 1.0}).program.soc_constraints().empty());
}

TEST(Artifacts, BuildIsReproducible) {
    const auto inst = gen_inventory(3, 20, 1);
    const auto s = sample(inst.distribution, 3, 1);
    const auto a = solve_method(inst.problem, s, Method::MP, {Norm::L2, 2.0});
    const auto b = solve_method(inst.problem, s, Method::MP, {Norm::L2, 2.0});
    EXPECT_EQ(a.objective, b.objective);
    EXPECT_EQ(a.x, b.x);
}
