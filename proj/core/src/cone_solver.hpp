#pragma once

// Primal-dual interior-point method for
//
//   minimize    c'x
//   subject to  A x = b
//               G x + s = h,   s in K
//
// where K is a product of a nonnegative orthant and second-order cones, laid
// out in that order. The iteration runs on the homogeneous self-dual
// embedding with Nesterov-Todd scaling and a Mehrotra predictor-corrector, so
// infeasibility and unboundedness are detected from certificates rather than
// iteration limits.

#include "sro/conic.hpp"

#include <Eigen/Sparse>

#include <vector>

namespace sro::conic::detail {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

struct StandardForm {
    Eigen::VectorXd c;
    SparseMatrix A;
    Eigen::VectorXd b;
    SparseMatrix G;
    Eigen::VectorXd h;
    int nonneg = 0;
    std::vector<int> soc_dims;

    int num_vars() const { return static_cast<int>(c.size()); }
    int cone_dim() const { return static_cast<int>(h.size()); }
};

struct ConeSolution {
    SolveStatus status = SolveStatus::NumericalFailure;
    Eigen::VectorXd x;
    double primal_objective = 0.0;
    int iterations = 0;
};

ConeSolution solve_standard_form(const StandardForm& problem, const SolverParams& params);

} // namespace sro::conic::detail
