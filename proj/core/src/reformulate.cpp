#include "sro/reformulate.hpp"

#include <optional>

namespace sro {

using conic::LinearExpr;
using conic::Sense;
using conic::VarKind;
using conic::kInf;

namespace {

void check_inputs(const TwoStageProblem& problem, const SampleSet& samples) {
    problem.validate();
    if (samples.points.empty()) throw DimensionError("sample set is empty");
    for (std::size_t i = 0; i < samples.points.size(); ++i) {
        if (samples.points[i].size() != problem.d()) {
            throw DimensionError("sample " + std::to_string(i) + " has length " +
                                 std::to_string(samples.points[i].size()) + ", expected d = " +
                                 std::to_string(problem.d()));
        }
    }
}

ReformulationArtifacts start(const TwoStageProblem& problem, const SampleSet& samples, Method method,
                             const RobustConfig& config) {
    ReformulationArtifacts art;
    art.method = method;
    art.radius = config.radius;
    art.norm = config.norm;
    art.n = problem.n();
    art.r = problem.r();
    art.d = problem.d();
    art.centers = samples.points;
    for (const auto& xi : samples.points) {
        art.ghat.push_back(problem.support.G * xi - problem.support.g0);
    }
    return art;
}

std::vector<int> add_first_stage(ReformulationArtifacts& art, const TwoStageProblem& problem,
                                 const std::optional<Eigen::VectorXd>& fixed) {
    std::vector<int> x(static_cast<std::size_t>(problem.n()));
    for (int k = 0; k < problem.n(); ++k) {
        const double lo = fixed ? (*fixed)(k) : -kInf;
        const double up = fixed ? (*fixed)(k) : kInf;
        x[static_cast<std::size_t>(k)] = art.program.add_variable({VarKind::FirstStage, -1, -1, k}, lo, up);
        art.program.add_objective(x[static_cast<std::size_t>(k)], problem.c(k));
    }
    // Rows that involve neither recourse nor uncertainty are deterministic
    // first-stage constraints; they are emitted once.
    for (int j = 0; j < problem.m(); ++j) {
        if (!problem.is_first_stage_row(j)) continue;
        LinearExpr row;
        for (int k = 0; k < problem.n(); ++k) row.add(x[static_cast<std::size_t>(k)], problem.T(j, k));
        art.program.add_linear(row, Sense::GreaterEqual, problem.h0(j));
    }
    return x;
}

struct PolicyVars {
    std::vector<int> y0;              // r
    std::vector<std::vector<int>> Y;  // r x d
};

PolicyVars add_policy(conic::ConicProgram& prog, int policy, int r, int d) {
    PolicyVars pv;
    for (int l = 0; l < r; ++l) pv.y0.push_back(prog.add_variable({VarKind::PolicyIntercept, policy, l, -1}));
    pv.Y.resize(static_cast<std::size_t>(r));
    for (int l = 0; l < r; ++l) {
        for (int k = 0; k < d; ++k) {
            pv.Y[static_cast<std::size_t>(l)].push_back(prog.add_variable({VarKind::PolicySlope, policy, l, k}));
        }
    }
    return pv;
}

// Robust counterpart of the MP / SP program. `shared` ties every ball to one
// policy.
ReformulationArtifacts build_robust(const TwoStageProblem& problem, const SampleSet& samples,
                                    const RobustConfig& config, Method method, bool shared,
                                    const std::optional<Eigen::VectorXd>& fixed_x) {
    check_inputs(problem, samples);
    config.validate();
    auto art = start(problem, samples, method, config);
    auto& prog = art.program;
    const auto x = add_first_stage(art, problem, fixed_x);

    const int N = static_cast<int>(samples.size());
    const int r = problem.r();
    const int d = problem.d();
    const int mt = problem.support.rows();
    const double eps = config.radius;
    const double weight = 1.0 / N;
    const Norm dual = dual_norm(config.norm);
    // A zero radius collapses each ball to its center; no dual variables are
    // needed then.
    const bool robust = eps > 0.0;
    const auto& G = problem.support.G;

    std::vector<PolicyVars> policies;
    for (int p = 0; p < (shared ? 1 : N); ++p) policies.push_back(add_policy(prog, p, r, d));

    // Emits theta >= 0, rho >= 0 and the epigraph || base + G' rho ||_* <= theta,
    // where base_k is given as a linear expression per component.
    auto add_dual_block = [&](int i, int row, std::vector<LinearExpr> base, int& theta,
                              std::vector<int>& rho) {
        theta = prog.add_variable({VarKind::Theta, i, row, -1}, 0.0, kInf);
        rho.clear();
        for (int t = 0; t < mt; ++t) rho.push_back(prog.add_variable({VarKind::Rho, i, row, t}, 0.0, kInf));
        for (int k = 0; k < d; ++k) {
            for (int t = 0; t < mt; ++t) base[static_cast<std::size_t>(k)].add(rho[static_cast<std::size_t>(t)], G(t, k));
        }
        conic::add_dual_norm_epigraph(prog, base, theta, dual);
    };

    for (int i = 0; i < N; ++i) {
        const auto& xi = samples.points[static_cast<std::size_t>(i)];
        const auto& ghat = art.ghat[static_cast<std::size_t>(i)];
        const auto& pv = policies[static_cast<std::size_t>(shared ? 0 : i)];

        // Worst-case second-stage cost over the ball.
        for (int l = 0; l < r; ++l) {
            const double ql = problem.q(l) * weight;
            if (ql == 0.0) continue;
            prog.add_objective(pv.y0[static_cast<std::size_t>(l)], ql);
            for (int k = 0; k < d; ++k) prog.add_objective(pv.Y[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)], ql * xi(k));
        }
        int theta = -1;
        std::vector<int> rho;
        if (robust) {
            std::vector<LinearExpr> base(static_cast<std::size_t>(d));
            for (int k = 0; k < d; ++k) {
                for (int l = 0; l < r; ++l) base[static_cast<std::size_t>(k)].add(pv.Y[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)], problem.q(l));
            }
            add_dual_block(i, 0, std::move(base), theta, rho);
            prog.add_objective(theta, weight * eps);
            for (int t = 0; t < mt; ++t) prog.add_objective(rho[static_cast<std::size_t>(t)], weight * ghat(t));
        }

        // Each constraint row must hold over the whole ball.
        for (int j = 0; j < problem.m(); ++j) {
            if (problem.is_first_stage_row(j)) continue;
            LinearExpr lhs;
            for (int k = 0; k < problem.n(); ++k) lhs.add(x[static_cast<std::size_t>(k)], problem.T(j, k));
            for (int l = 0; l < r; ++l) {
                const double w = problem.W(j, l);
                if (w == 0.0) continue;
                lhs.add(pv.y0[static_cast<std::size_t>(l)], w);
                for (int k = 0; k < d; ++k) lhs.add(pv.Y[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)], w * xi(k));
            }
            const double rhs = problem.h0(j) + problem.H.row(j).dot(xi);
            if (robust) {
                std::vector<LinearExpr> base(static_cast<std::size_t>(d));
                for (int k = 0; k < d; ++k) {
                    auto& b = base[static_cast<std::size_t>(k)];
                    b.constant = problem.H(j, k);
                    for (int l = 0; l < r; ++l) b.add(pv.Y[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)], -problem.W(j, l));
                }
                add_dual_block(i, j + 1, std::move(base), theta, rho);
                lhs.add(theta, -eps);
                for (int t = 0; t < mt; ++t) lhs.add(rho[static_cast<std::size_t>(t)], -ghat(t));
            }
            prog.add_linear(lhs, Sense::GreaterEqual, rhs);
        }
    }
    return art;
}

} // namespace

ReformulationArtifacts build_saa(const TwoStageProblem& problem, const SampleSet& samples) {
    check_inputs(problem, samples);
    auto art = start(problem, samples, Method::SAA, RobustConfig{Norm::L2, 0.0});
    auto& prog = art.program;
    const auto x = add_first_stage(art, problem, std::nullopt);
    const int N = static_cast<int>(samples.size());
    const double weight = 1.0 / N;
    for (int i = 0; i < N; ++i) {
        const auto& xi = samples.points[static_cast<std::size_t>(i)];
        std::vector<int> y;
        for (int l = 0; l < problem.r(); ++l) {
            y.push_back(prog.add_variable({VarKind::Recourse, i, l, -1}));
            prog.add_objective(y.back(), weight * problem.q(l));
        }
        for (int j = 0; j < problem.m(); ++j) {
            if (problem.is_first_stage_row(j)) continue;
            LinearExpr lhs;
            for (int k = 0; k < problem.n(); ++k) lhs.add(x[static_cast<std::size_t>(k)], problem.T(j, k));
            for (int l = 0; l < problem.r(); ++l) lhs.add(y[static_cast<std::size_t>(l)], problem.W(j, l));
            prog.add_linear(lhs, Sense::GreaterEqual, problem.h0(j) + problem.H.row(j).dot(xi));
        }
    }
    return art;
}

ReformulationArtifacts build_mp(const TwoStageProblem& problem, const SampleSet& samples,
                                const RobustConfig& config) {
    return build_robust(problem, samples, config, Method::MP, false, std::nullopt);
}

ReformulationArtifacts build_sp(const TwoStageProblem& problem, const SampleSet& samples,
                                const RobustConfig& config) {
    return build_robust(problem, samples, config, Method::SP, true, std::nullopt);
}

ReformulationArtifacts build_mp_fixed_x(const TwoStageProblem& problem, const SampleSet& samples,
                                        const RobustConfig& config, const Eigen::VectorXd& x) {
    if (x.size() != problem.n()) {
        throw DimensionError("first-stage decision has length " + std::to_string(x.size()) +
                             ", expected n = " + std::to_string(problem.n()));
    }
    return build_robust(problem, samples, config, Method::MP, false, x);
}

PolicySolution extract_solution(const ReformulationArtifacts& art, const conic::SolveResult& result) {
    if (result.status != conic::SolveStatus::Optimal) {
        throw ContractViolation("cannot extract a solution from a " + conic::to_string(result.status) +
                                " result");
    }
    if (result.primal.size() != art.program.num_vars()) {
        throw ContractViolation("result does not match the program's variable count");
    }
    PolicySolution sol;
    sol.method = art.method;
    sol.radius = art.radius;
    sol.norm = art.norm;
    sol.objective = result.objective;
    sol.centers = art.centers;
    sol.x = Eigen::VectorXd::Zero(art.n);

    const std::size_t count = art.method == Method::SP ? 1 : art.centers.size();
    sol.policies.assign(count, AffinePolicy{Eigen::VectorXd::Zero(art.r), Eigen::MatrixXd::Zero(art.r, art.d)});
    const auto& labels = art.program.labels();
    for (int v = 0; v < art.program.num_vars(); ++v) {
        const auto& lab = labels[static_cast<std::size_t>(v)];
        const double value = result.primal(v);
        switch (lab.kind) {
        case VarKind::FirstStage: sol.x(lab.col) = value; break;
        case VarKind::PolicyIntercept:
        case VarKind::Recourse:
            sol.policies[static_cast<std::size_t>(lab.policy)].y0(lab.row) = value;
            break;
        case VarKind::PolicySlope:
            sol.policies[static_cast<std::size_t>(lab.policy)].Y(lab.row, lab.col) = value;
            break;
        default: break;
        }
    }
    return sol;
}

PolicySolution solve_method(const TwoStageProblem& problem, const SampleSet& samples, Method method,
                            const RobustConfig& config, const conic::SolverParams& params) {
    ReformulationArtifacts art;
    switch (method) {
    case Method::SAA: art = build_saa(problem, samples); break;
    case Method::SP: art = build_sp(problem, samples, config); break;
    case Method::MP: art = build_mp(problem, samples, config); break;
    }
    const auto result = conic::solve(art.program, params);
    if (result.status != conic::SolveStatus::Optimal) {
        throw SolveFailure(result.status, to_string(method) + " program ended " + conic::to_string(result.status));
    }
    auto sol = extract_solution(art, result);
    if (method == Method::SAA) sol.radius = 0.0;
    return sol;
}

} // namespace sro
