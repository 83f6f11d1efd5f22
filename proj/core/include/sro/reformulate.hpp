#pragma once

#include "sro/conic.hpp"
#include "sro/model.hpp"

#include <vector>

namespace sro {

/// A program that did not solve to optimality.
class SolveFailure : public std::runtime_error {
public:
    SolveFailure(conic::SolveStatus status, const std::string& what)
        : std::runtime_error(what), status_(status) {}
    conic::SolveStatus status() const { return status_; }

private:
    conic::SolveStatus status_;
};

/// A finite program together with what is needed to map its solution back.
struct ReformulationArtifacts {
    conic::ConicProgram program;
    /// Support slack G xi^i - g0 at each sample.
    std::vector<Eigen::VectorXd> ghat;
    std::vector<Eigen::VectorXd> centers;
    Method method = Method::MP;
    double radius = 0.0;
    Norm norm = Norm::L2;
    int n = 0;
    int r = 0;
    int d = 0;
};

/// Sample average approximation: one recourse vector per sample.
ReformulationArtifacts build_saa(const TwoStageProblem& problem, const SampleSet& samples);

/// One affine policy per sample, each robust over its own ball intersected
/// with the support.
ReformulationArtifacts build_mp(const TwoStageProblem& problem, const SampleSet& samples,
                                const RobustConfig& config);

/// As build_mp with a single affine policy shared by every ball.
ReformulationArtifacts build_sp(const TwoStageProblem& problem, const SampleSet& samples,
                                const RobustConfig& config);

/// build_mp with the first-stage decision fixed to `x`.
ReformulationArtifacts build_mp_fixed_x(const TwoStageProblem& problem, const SampleSet& samples,
                                        const RobustConfig& config, const Eigen::VectorXd& x);

/// Throws ContractViolation unless `result.status` is Optimal.
PolicySolution extract_solution(const ReformulationArtifacts& artifacts,
                                const conic::SolveResult& result);

/// Builds, solves and extracts in one step. Throws SolveFailure when the
/// program does not solve to optimality.
PolicySolution solve_method(const TwoStageProblem& problem, const SampleSet& samples, Method method,
                            const RobustConfig& config,
                            const conic::SolverParams& params = conic::SolverParams::from_env());

} // namespace sro
