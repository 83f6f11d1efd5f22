#pragma once

#include "sro/conic.hpp"
#include "sro/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sro {

enum class StageStatus { Feasible, Infeasible, Unbounded, Failed };

std::string to_string(StageStatus status);

struct SecondStageResult {
    StageStatus status = StageStatus::Failed;
    double cost = 0.0; ///< meaningful only when Feasible
    Eigen::VectorXd y;

    bool feasible() const { return status == StageStatus::Feasible; }
};

/// Optimal recourse cost min { q'y : W y >= h(xi) - T x }.
SecondStageResult second_stage_cost(const TwoStageProblem& problem, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& xi,
                                    const conic::SolverParams& params = conic::SolverParams::from_env());

struct WorstCase {
    conic::SolveStatus status = conic::SolveStatus::NumericalFailure;
    double value = 0.0;
    Eigen::VectorXd argmax;
};

/// max { a'zeta + offset : zeta in support, ||zeta - center|| <= radius }.
/// An infinite radius drops the ball.
WorstCase max_affine_over_set(const SupportPolyhedron& support, const Eigen::VectorXd& center,
                              double radius, Norm norm, const Eigen::VectorXd& a, double offset,
                              const conic::SolverParams& params = conic::SolverParams::from_env());

struct PolicyAction {
    StageStatus status = StageStatus::Failed;
    Eigen::VectorXd y;
    double cost = 0.0;
    int policy = -1;       ///< selected policy, -1 on fallback
    bool fallback = false; ///< no uncertainty set contained the realization
};

inline constexpr double kMembershipTol = 1e-9;

/// Routes `xi` to the cheapest policy whose set contains it (smallest index on
/// ties), or solves the second-stage LP when none does.
PolicyAction apply_mp_policy(const TwoStageProblem& problem, const PolicySolution& solution,
                             const Eigen::VectorXd& xi,
                             const conic::SolverParams& params = conic::SolverParams::from_env());

struct EvalReport {
    Method method = Method::MP;
    int N = 0;
    double radius = 0.0;
    Norm norm = Norm::L2;
    double objective = 0.0; ///< in-sample optimal value of the method
    std::size_t test_size = 0;
    std::size_t infeasible = 0; ///< includes `failed`
    std::size_t failed = 0;     ///< second-stage solves that did not terminate cleanly
    double pct_infeasible = 0.0;
    /// c'x plus the mean recourse cost over feasible test points.
    std::optional<double> mean_cost;
    /// (V(x) - v*) / v*; defined only when every test point is feasible.
    std::optional<double> optimality_gap;
    /// (objective - V(x)) / V(x) with V over feasible points.
    std::optional<double> prediction_error;
    std::vector<std::optional<double>> per_realization_costs;

    std::string to_json() const;
    static std::string csv_header();
    std::string csv_row() const;
};

/// Per-point second-stage costs Q(x, xi); nullopt marks infeasibility.
/// `failed` counts solves that ended without a certificate.
std::vector<std::optional<double>> second_stage_costs(const TwoStageProblem& problem,
                                                      const Eigen::VectorXd& x, const SampleSet& test,
                                                      std::size_t* failed = nullptr, int jobs = 1,
                                                      const conic::SolverParams& params = conic::SolverParams::from_env());

/// Metrics from precomputed per-point costs.
EvalReport summarize(const TwoStageProblem& problem, const PolicySolution& solution, int N,
                     const std::vector<std::optional<double>>& costs, std::size_t failed, double v_star);

EvalReport out_of_sample(const TwoStageProblem& problem, const PolicySolution& solution,
                         const SampleSet& test, double v_star, int jobs = 1,
                         const conic::SolverParams& params = conic::SolverParams::from_env());

/// SAA optimum on a large independent sample. Throws SolveFailure.
double estimate_v_star(const TwoStageProblem& problem, const SampleSet& big_sample,
                       const conic::SolverParams& params = conic::SolverParams::from_env());

} // namespace sro
