#include "sro/evaluate.hpp"

#include "parallel.hpp"
#include "sro/io.hpp"
#include "sro/reformulate.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace sro {

using conic::LinearExpr;
using conic::Sense;
using conic::SolveStatus;
using conic::VarKind;

namespace {

// Snaps an interior-point answer onto the face of its nearly active rows.
// Any feasible candidate bounds the optimum from above, so the cheapest
// feasible one wins; the original point is kept if nothing qualifies.
Eigen::VectorXd polish_vertex(const Eigen::MatrixXd& W, const Eigen::VectorXd& rhs, const Eigen::VectorXd& q,
                              const Eigen::VectorXd& y) {
    if (W.rows() == 0 || W.cols() == 0) return y;
    const double scale = std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
    const double feas = 1e-11 * scale;
    const Eigen::VectorXd slack = W * y - rhs;
    Eigen::VectorXd best = y;
    double best_cost = q.dot(y);
    bool have_feasible = slack.minCoeff() >= -feas;
    for (double tol : {1e-9, 1e-8, 1e-7, 1e-6, 1e-5}) {
        std::vector<int> active;
        for (int j = 0; j < W.rows(); ++j) {
            if (slack(j) <= tol * scale) active.push_back(j);
        }
        if (active.empty()) continue;
        Eigen::MatrixXd Wa(static_cast<Eigen::Index>(active.size()), W.cols());
        Eigen::VectorXd ba(Wa.rows());
        for (std::size_t k = 0; k < active.size(); ++k) {
            Wa.row(static_cast<Eigen::Index>(k)) = W.row(active[k]);
            ba(static_cast<Eigen::Index>(k)) = rhs(active[k]);
        }
        const Eigen::VectorXd cand = y + Wa.completeOrthogonalDecomposition().solve(ba - Wa * y);
        if (!cand.allFinite() || (W * cand - rhs).minCoeff() < -feas) continue;
        const double cost = q.dot(cand);
        if (!have_feasible || cost < best_cost) {
            best = cand;
            best_cost = cost;
            have_feasible = true;
        }
    }
    return best;
}

} // namespace

std::string to_string(StageStatus status) {
    switch (status) {
    case StageStatus::Feasible: return "Feasible";
    case StageStatus::Infeasible: return "Infeasible";
    case StageStatus::Unbounded: return "Unbounded";
    case StageStatus::Failed: return "Failed";
    }
    return "Failed";
}

SecondStageResult second_stage_cost(const TwoStageProblem& problem, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& xi, const conic::SolverParams& params) {
    if (x.size() != problem.n()) throw DimensionError("first-stage decision has wrong length");
    if (xi.size() != problem.d()) throw DimensionError("realization has wrong length");
    SecondStageResult out;
    const Eigen::VectorXd rhs = problem.h0 + problem.H * xi - problem.T * x;

    conic::ConicProgram prog;
    const int r = problem.r();
    std::vector<int> rows;
    for (int l = 0; l < r; ++l) {
        prog.add_variable({VarKind::Recourse, 0, l, -1});
        prog.add_objective(l, problem.q(l));
    }
    for (int j = 0; j < problem.m(); ++j) {
        LinearExpr row;
        for (int l = 0; l < r; ++l) row.add(l, problem.W(j, l));
        if (row.terms.empty()) {
            const double scale = std::max(1.0, std::abs(problem.h0(j)) + problem.H.row(j).cwiseAbs().dot(xi.cwiseAbs()));
            if (rhs(j) > params.feas_tol * scale) {
                out.status = StageStatus::Infeasible;
                return out;
            }
            continue;
        }
        prog.add_linear(row, Sense::GreaterEqual, rhs(j));
        rows.push_back(j);
    }
    const auto res = conic::solve(prog, params);
    switch (res.status) {
    case SolveStatus::Optimal: {
        out.status = StageStatus::Feasible;
        Eigen::MatrixXd W(static_cast<Eigen::Index>(rows.size()), r);
        Eigen::VectorXd b(W.rows());
        for (std::size_t k = 0; k < rows.size(); ++k) {
            W.row(static_cast<Eigen::Index>(k)) = problem.W.row(rows[k]);
            b(static_cast<Eigen::Index>(k)) = rhs(rows[k]);
        }
        out.y = polish_vertex(W, b, problem.q, res.primal);
        out.cost = problem.q.dot(out.y);
        break;
    }
    case SolveStatus::Infeasible: out.status = StageStatus::Infeasible; break;
    case SolveStatus::Unbounded: out.status = StageStatus::Unbounded; break;
    case SolveStatus::NumericalFailure: out.status = StageStatus::Failed; break;
    }
    return out;
}

WorstCase max_affine_over_set(const SupportPolyhedron& support, const Eigen::VectorXd& center,
                              double radius, Norm norm, const Eigen::VectorXd& a, double offset,
                              const conic::SolverParams& params) {
    const auto d = a.size();
    if (center.size() != d) throw DimensionError("center and direction lengths differ");
    if (support.rows() > 0 && support.dim() != d) throw DimensionError("support dimension mismatch");
    conic::ConicProgram prog;
    for (Eigen::Index k = 0; k < d; ++k) {
        prog.add_variable({VarKind::Auxiliary, -1, static_cast<int>(k), -1});
        prog.add_objective(static_cast<int>(k), -a(k));
    }
    for (int t = 0; t < support.rows(); ++t) {
        LinearExpr row;
        for (Eigen::Index k = 0; k < d; ++k) row.add(static_cast<int>(k), support.G(t, k));
        prog.add_linear(row, Sense::GreaterEqual, support.g0(t));
    }
    if (std::isfinite(radius)) {
        if (norm == Norm::Linf) {
            for (Eigen::Index k = 0; k < d; ++k) {
                prog.set_bounds(static_cast<int>(k), center(k) - radius, center(k) + radius);
            }
        } else {
            const int t = prog.add_variable({VarKind::Auxiliary}, radius, radius);
            std::vector<LinearExpr> diff(static_cast<std::size_t>(d));
            for (Eigen::Index k = 0; k < d; ++k) {
                diff[static_cast<std::size_t>(k)].add(static_cast<int>(k), 1.0);
                diff[static_cast<std::size_t>(k)].constant = -center(k);
            }
            conic::add_dual_norm_epigraph(prog, diff, t, norm);
        }
    }
    const auto res = conic::solve(prog, params);
    WorstCase out;
    out.status = res.status;
    if (res.status == SolveStatus::Optimal) {
        out.argmax = res.primal.head(d);
        out.value = a.dot(out.argmax) + offset;
    } else if (res.status == SolveStatus::Unbounded) {
        out.value = std::numeric_limits<double>::infinity();
    }
    return out;
}

PolicyAction apply_mp_policy(const TwoStageProblem& problem, const PolicySolution& solution,
                             const Eigen::VectorXd& xi, const conic::SolverParams& params) {
    if (solution.method == Method::SAA) {
        throw ContractViolation("SAA solutions carry no decision rules to apply");
    }
    if (solution.policies.empty()) throw ContractViolation("solution has no policies");
    if (solution.method == Method::MP && solution.policies.size() != solution.centers.size()) {
        throw ContractViolation("MP solution needs one policy per center");
    }
    PolicyAction out;
    if (problem.support.contains(xi, kMembershipTol)) {
        double best = 0.0;
        for (std::size_t i = 0; i < solution.centers.size(); ++i) {
            if (norm_value(xi - solution.centers[i], solution.norm) > solution.radius + kMembershipTol) continue;
            const auto& pol = solution.policies[solution.method == Method::SP ? 0 : i];
            const Eigen::VectorXd y = pol(xi);
            const double cost = problem.q.dot(y);
            if (out.policy < 0 || cost < best) {
                best = cost;
                out.policy = static_cast<int>(i);
                out.y = y;
            }
        }
        if (out.policy >= 0) {
            out.status = StageStatus::Feasible;
            out.cost = best;
            return out;
        }
    }
    out.fallback = true;
    const auto lp = second_stage_cost(problem, solution.x, xi, params);
    out.status = lp.status;
    out.y = lp.y;
    out.cost = lp.cost;
    return out;
}

std::vector<std::optional<double>> second_stage_costs(const TwoStageProblem& problem,
                                                      const Eigen::VectorXd& x, const SampleSet& test,
                                                      std::size_t* failed, int jobs,
                                                      const conic::SolverParams& params) {
    std::vector<std::optional<double>> costs(test.size());
    std::vector<char> fail(test.size(), 0);
    detail::parallel_for(test.size(), jobs, [&](std::size_t i) {
        const auto res = second_stage_cost(problem, x, test.points[i], params);
        if (res.feasible()) costs[i] = res.cost;
        else if (res.status != StageStatus::Infeasible) fail[i] = 1;
    });
    if (failed) {
        *failed = 0;
        for (char f : fail) *failed += static_cast<std::size_t>(f);
    }
    return costs;
}

EvalReport summarize(const TwoStageProblem& problem, const PolicySolution& solution, int N,
                     const std::vector<std::optional<double>>& costs, std::size_t failed, double v_star) {
    if (std::abs(v_star) < 1e-12) throw ContractViolation("v* is too close to zero for a relative gap");
    if (costs.empty()) throw DimensionError("test set is empty");
    EvalReport rep;
    rep.method = solution.method;
    rep.N = N;
    rep.radius = solution.radius;
    rep.norm = solution.norm;
    rep.objective = solution.objective;
    rep.test_size = costs.size();
    rep.failed = failed;
    rep.per_realization_costs = costs;

    const double first = problem.c.dot(solution.x);
    double sum = 0.0;
    std::size_t feasible = 0;
    for (const auto& c : costs) {
        if (!c) continue;
        sum += *c;
        ++feasible;
    }
    rep.infeasible = costs.size() - feasible;
    rep.pct_infeasible = static_cast<double>(rep.infeasible) / static_cast<double>(costs.size());
    if (feasible > 0) {
        const double value = first + sum / static_cast<double>(feasible);
        rep.mean_cost = value;
        if (std::abs(value) >= 1e-12) rep.prediction_error = (solution.objective - value) / value;
        if (rep.infeasible == 0) rep.optimality_gap = (value - v_star) / v_star;
    }
    return rep;
}

EvalReport out_of_sample(const TwoStageProblem& problem, const PolicySolution& solution,
                         const SampleSet& test, double v_star, int jobs, const conic::SolverParams& params) {
    if (std::abs(v_star) < 1e-12) throw ContractViolation("v* is too close to zero for a relative gap");
    std::size_t failed = 0;
    const auto costs = second_stage_costs(problem, solution.x, test, &failed, jobs, params);
    return summarize(problem, solution, static_cast<int>(solution.centers.size()), costs, failed, v_star);
}

double estimate_v_star(const TwoStageProblem& problem, const SampleSet& big_sample,
                       const conic::SolverParams& params) {
    return solve_method(problem, big_sample, Method::SAA, RobustConfig{}, params).objective;
}

namespace {

nlohmann::json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string optional_csv(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

} // namespace

std::string EvalReport::to_json() const {
    nlohmann::json doc;
    doc["method"] = sro::to_string(method);
    doc["N"] = N;
    doc["radius"] = radius;
    doc["norm"] = sro::to_string(norm);
    doc["objective"] = objective;
    doc["test_size"] = test_size;
    doc["infeasible"] = infeasible;
    doc["failed"] = failed;
    doc["pct_infeasible"] = pct_infeasible;
    doc["optimality_gap"] = optional_json(optimality_gap);
    doc["prediction_error"] = optional_json(prediction_error);
    doc["mean_cost"] = optional_json(mean_cost);
    doc["mean_cost_conditioning"] = "feasible_only";
    return doc.dump(1);
}

std::string EvalReport::csv_header() {
    return "method,N,radius,norm,pct_infeasible,optimality_gap,prediction_error,mean_cost";
}

std::string EvalReport::csv_row() const {
    std::ostringstream out;
    out << sro::to_string(method) << ',' << N << ',' << format_double(radius) << ',' << sro::to_string(norm)
        << ',' << format_double(pct_infeasible) << ',' << optional_csv(optimality_gap) << ','
        << optional_csv(prediction_error) << ',' << optional_csv(mean_cost);
    return out.str();
}

} // namespace sro
