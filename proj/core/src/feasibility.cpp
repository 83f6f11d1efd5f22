#include "sro/feasibility.hpp"

namespace sro {

using conic::LinearExpr;
using conic::Sense;
using conic::VarKind;
using conic::kInf;

std::string to_string(A4Verdict verdict) { return verdict == A4Verdict::Holds ? "Holds" : "Unknown"; }

A4Result check_a4_sufficient(const TwoStageProblem& problem, const conic::SolverParams& params) {
    problem.validate();
    const int n = problem.n();
    const int r = problem.r();
    const int d = problem.d();
    const int mt = problem.support.rows();
    const auto& G = problem.support.G;
    const auto& g0 = problem.support.g0;

    conic::ConicProgram prog;
    std::vector<int> x(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) x[static_cast<std::size_t>(k)] = prog.add_variable({VarKind::FirstStage, -1, -1, k});
    std::vector<int> y0(static_cast<std::size_t>(r));
    std::vector<int> Y(static_cast<std::size_t>(r * d));
    for (int l = 0; l < r; ++l) y0[static_cast<std::size_t>(l)] = prog.add_variable({VarKind::PolicyIntercept, 0, l, -1});
    for (int l = 0; l < r; ++l) {
        for (int k = 0; k < d; ++k) Y[static_cast<std::size_t>(l * d + k)] = prog.add_variable({VarKind::PolicySlope, 0, l, k});
    }
    // |v| <= u for every rule coefficient; minimizing sum(u) picks the
    // sparsest-looking witness instead of an arbitrary interior point.
    auto add_abs_cost = [&](int v) {
        const int u = prog.add_variable({VarKind::Auxiliary}, 0.0, kInf);
        prog.add_objective(u, 1.0);
        prog.add_linear({{v, 1.0}, {u, -1.0}}, Sense::LessEqual, 0.0);
        prog.add_linear({{v, 1.0}, {u, 1.0}}, Sense::GreaterEqual, 0.0);
    };
    for (int v : y0) add_abs_cost(v);
    for (int v : Y) add_abs_cost(v);

    for (int j = 0; j < problem.m(); ++j) {
        LinearExpr lhs;
        for (int k = 0; k < n; ++k) lhs.add(x[static_cast<std::size_t>(k)], problem.T(j, k));
        for (int l = 0; l < r; ++l) lhs.add(y0[static_cast<std::size_t>(l)], problem.W(j, l));
        if (problem.is_first_stage_row(j)) {
            prog.add_linear(lhs, Sense::GreaterEqual, problem.h0(j));
            continue;
        }
        // min over the support of (W_j Y - H_j) zeta equals max g0'rho subject
        // to G'rho = (W_j Y - H_j)', rho >= 0.
        std::vector<int> rho;
        for (int t = 0; t < mt; ++t) {
            rho.push_back(prog.add_variable({VarKind::Rho, 0, j, t}, 0.0, kInf));
            lhs.add(rho.back(), g0(t));
        }
        prog.add_linear(lhs, Sense::GreaterEqual, problem.h0(j));
        for (int k = 0; k < d; ++k) {
            LinearExpr eq;
            for (int t = 0; t < mt; ++t) eq.add(rho[static_cast<std::size_t>(t)], G(t, k));
            for (int l = 0; l < r; ++l) eq.add(Y[static_cast<std::size_t>(l * d + k)], -problem.W(j, l));
            if (eq.terms.empty()) {
                if (problem.H(j, k) != 0.0) {
                    A4Result out;
                    out.solver_status = conic::SolveStatus::Infeasible;
                    return out;
                }
                continue;
            }
            prog.add_linear(eq, Sense::Equal, -problem.H(j, k));
        }
    }

    const auto res = conic::solve(prog, params);
    A4Result out;
    out.solver_status = res.status;
    if (res.status != conic::SolveStatus::Optimal) return out;
    out.verdict = A4Verdict::Holds;
    out.x.resize(n);
    for (int k = 0; k < n; ++k) out.x(k) = res.primal(x[static_cast<std::size_t>(k)]);
    out.policy.y0.resize(r);
    out.policy.Y.resize(r, d);
    for (int l = 0; l < r; ++l) {
        out.policy.y0(l) = res.primal(y0[static_cast<std::size_t>(l)]);
        for (int k = 0; k < d; ++k) out.policy.Y(l, k) = res.primal(Y[static_cast<std::size_t>(l * d + k)]);
    }
    return out;
}

} // namespace sro
