#pragma once

#include "sro/model.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace sro::conic {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Term {
    int var;
    double coef;
};

/// sum_k coef_k * x[var_k] + constant
struct LinearExpr {
    std::vector<Term> terms;
    double constant = 0.0;

    LinearExpr& add(int var, double coef) {
        if (coef != 0.0) terms.push_back({var, coef});
        return *this;
    }
};

enum class Sense { GreaterEqual, LessEqual, Equal };

struct LinearConstraint {
    std::vector<Term> terms;
    Sense sense;
    double rhs;
};

/// || args ||_2 <= x[t]
struct SocConstraint {
    int t;
    std::vector<LinearExpr> args;
};

/// Tags mapping solver variables back to model quantities.
enum class VarKind {
    FirstStage,      ///< x_col
    PolicyIntercept, ///< y0 of `policy`, component `row`
    PolicySlope,     ///< Y of `policy`, entry (`row`, `col`)
    Theta,           ///< theta^{policy, row}
    Rho,             ///< rho^{policy, row}_col
    Recourse,        ///< per-scenario recourse y^{policy}, component `row`
    Auxiliary,       ///< epigraph or modelling helper
};

struct VarLabel {
    VarKind kind = VarKind::Auxiliary;
    int policy = -1;
    int row = -1;
    int col = -1;
};

std::string to_string(const VarLabel& label);

/// Minimization program over linear rows and second-order cones.
class ConicProgram {
public:
    int add_variable(VarLabel label, double lower = -kInf, double upper = kInf);

    void add_objective(int var, double coef);
    void add_objective_offset(double value) { offset_ += value; }

    void add_linear(std::vector<Term> terms, Sense sense, double rhs);
    void add_linear(const LinearExpr& expr, Sense sense, double rhs);
    void add_soc(int t, std::vector<LinearExpr> args);

    void set_bounds(int var, double lower, double upper);

    int num_vars() const { return static_cast<int>(labels_.size()); }
    const std::vector<double>& objective() const { return objective_; }
    double objective_offset() const { return offset_; }
    const std::vector<LinearConstraint>& linear_constraints() const { return linear_; }
    const std::vector<SocConstraint>& soc_constraints() const { return soc_; }
    const std::vector<double>& lower() const { return lower_; }
    const std::vector<double>& upper() const { return upper_; }
    const std::vector<VarLabel>& labels() const { return labels_; }
    const VarLabel& label(int var) const { return labels_.at(static_cast<std::size_t>(var)); }

    /// Index bounds and finiteness of every coefficient. Throws ContractViolation.
    void validate() const;

    double evaluate_objective(const Eigen::VectorXd& primal) const;
    /// Largest violation of any row, cone or bound at `primal`.
    double max_violation(const Eigen::VectorXd& primal) const;

private:
    std::vector<double> objective_;
    double offset_ = 0.0;
    std::vector<LinearConstraint> linear_;
    std::vector<SocConstraint> soc_;
    std::vector<double> lower_;
    std::vector<double> upper_;
    std::vector<VarLabel> labels_;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

std::string to_string(SolveStatus status);

struct SolverParams {
    double feas_tol = 1e-7;
    double gap_tol = 1e-7;
    int max_iter = 150;

    /// Defaults overridden by SRO_FEAS_TOL, SRO_GAP_TOL and SRO_MAX_ITER.
    static SolverParams from_env();
};

struct SolveResult {
    SolveStatus status = SolveStatus::NumericalFailure;
    double objective = 0.0;
    Eigen::VectorXd primal;
    double solve_time = 0.0;
    int iterations = 0;
};

SolveResult solve(const ConicProgram& program, const SolverParams& params = {});

/// Emits || expr ||_{norm} <= x[t]. `norm` is the norm to impose, i.e. the
/// caller has already dualized. L1 introduces one auxiliary per component.
void add_dual_norm_epigraph(ConicProgram& program, const std::vector<LinearExpr>& expr, int t,
                            Norm norm);

/// CPLEX LP text. Cones are written as comments.
void write_lp(const ConicProgram& program, std::ostream& out);

} // namespace sro::conic
