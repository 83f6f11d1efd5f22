#pragma once

#include "sro/conic.hpp"
#include "sro/model.hpp"

namespace sro {

enum class A4Verdict { Holds, Unknown };

std::string to_string(A4Verdict verdict);

struct A4Result {
    A4Verdict verdict = A4Verdict::Unknown;
    /// Witness, set when the verdict is Holds.
    Eigen::VectorXd x;
    AffinePolicy policy;
    /// Status of the underlying linear program.
    conic::SolveStatus solver_status = conic::SolveStatus::NumericalFailure;

    bool holds() const { return verdict == A4Verdict::Holds; }
};

/// Sufficient test for the existence of a first-stage decision and a single
/// affine recourse rule feasible for every realization in the support. Each
/// semi-infinite row is replaced by its LP dual over the support. Among
/// witnesses the one with the smallest l1 norm of (y0, Y) is returned.
/// Unknown does not mean the condition fails.
A4Result check_a4_sufficient(const TwoStageProblem& problem,
                             const conic::SolverParams& params = conic::SolverParams::from_env());

} // namespace sro
