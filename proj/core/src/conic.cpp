#include "sro/conic.hpp"

#include "cone_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <sstream>

namespace sro::conic {

namespace {

void check_var(int var, int count, const char* where) {
    if (var < 0 || var >= count) {
        throw ContractViolation(std::string(where) + ": variable index " + std::to_string(var) +
                                " out of range [0, " + std::to_string(count) + ")");
    }
}

double expr_value(const LinearExpr& e, const Eigen::VectorXd& x) {
    double v = e.constant;
    for (const auto& t : e.terms) v += t.coef * x(t.var);
    return v;
}

double terms_value(const std::vector<Term>& terms, const Eigen::VectorXd& x) {
    double v = 0.0;
    for (const auto& t : terms) v += t.coef * x(t.var);
    return v;
}

const char* kind_name(VarKind kind) {
    switch (kind) {
    case VarKind::FirstStage: return "x";
    case VarKind::PolicyIntercept: return "y0";
    case VarKind::PolicySlope: return "Y";
    case VarKind::Theta: return "theta";
    case VarKind::Rho: return "rho";
    case VarKind::Recourse: return "y";
    case VarKind::Auxiliary: return "aux";
    }
    return "aux";
}

} // namespace

std::string to_string(const VarLabel& label) {
    std::ostringstream out;
    out << kind_name(label.kind);
    bool open = false;
    for (int idx : {label.policy, label.row, label.col}) {
        if (idx < 0) continue;
        out << (open ? "," : "[") << idx;
        open = true;
    }
    if (open) out << "]";
    return out.str();
}

std::string to_string(SolveStatus status) {
    switch (status) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
    }
    return "NumericalFailure";
}

SolverParams SolverParams::from_env() {
    SolverParams p;
    if (const char* v = std::getenv("SRO_FEAS_TOL")) p.feas_tol = std::strtod(v, nullptr);
    if (const char* v = std::getenv("SRO_GAP_TOL")) p.gap_tol = std::strtod(v, nullptr);
    if (const char* v = std::getenv("SRO_MAX_ITER")) p.max_iter = std::atoi(v);
    if (!(p.feas_tol > 0.0) || !(p.gap_tol > 0.0) || p.max_iter < 1) {
        throw ContractViolation("solver tolerances must be positive and max_iter >= 1");
    }
    return p;
}

int ConicProgram::add_variable(VarLabel label, double lower, double upper) {
    if (std::isnan(lower) || std::isnan(upper) || lower > upper) {
        throw ContractViolation("invalid bounds for variable " + to_string(label));
    }
    labels_.push_back(label);
    lower_.push_back(lower);
    upper_.push_back(upper);
    objective_.push_back(0.0);
    return num_vars() - 1;
}

void ConicProgram::add_objective(int var, double coef) {
    check_var(var, num_vars(), "add_objective");
    if (!std::isfinite(coef)) throw ContractViolation("add_objective: non-finite coefficient");
    objective_[static_cast<std::size_t>(var)] += coef;
}

void ConicProgram::add_linear(std::vector<Term> terms, Sense sense, double rhs) {
    for (const auto& t : terms) {
        check_var(t.var, num_vars(), "add_linear");
        if (!std::isfinite(t.coef)) throw ContractViolation("add_linear: non-finite coefficient");
    }
    if (!std::isfinite(rhs)) throw ContractViolation("add_linear: non-finite right-hand side");
    linear_.push_back({std::move(terms), sense, rhs});
}

void ConicProgram::add_linear(const LinearExpr& expr, Sense sense, double rhs) {
    add_linear(expr.terms, sense, rhs - expr.constant);
}

void ConicProgram::add_soc(int t, std::vector<LinearExpr> args) {
    check_var(t, num_vars(), "add_soc");
    for (const auto& a : args) {
        for (const auto& term : a.terms) check_var(term.var, num_vars(), "add_soc");
    }
    soc_.push_back({t, std::move(args)});
}

void ConicProgram::set_bounds(int var, double lower, double upper) {
    check_var(var, num_vars(), "set_bounds");
    if (std::isnan(lower) || std::isnan(upper) || lower > upper) {
        throw ContractViolation("invalid bounds for variable " + to_string(label(var)));
    }
    lower_[static_cast<std::size_t>(var)] = lower;
    upper_[static_cast<std::size_t>(var)] = upper;
}

void ConicProgram::validate() const {
    const int n = num_vars();
    for (int j = 0; j < n; ++j) {
        const auto k = static_cast<std::size_t>(j);
        if (!std::isfinite(objective_[k])) throw ContractViolation("non-finite objective coefficient");
        if (lower_[k] > upper_[k]) throw ContractViolation("crossed bounds on " + to_string(labels_[k]));
    }
    for (const auto& row : linear_) {
        if (!std::isfinite(row.rhs)) throw ContractViolation("non-finite right-hand side");
        for (const auto& t : row.terms) {
            check_var(t.var, n, "linear row");
            if (!std::isfinite(t.coef)) throw ContractViolation("non-finite row coefficient");
        }
    }
    for (const auto& cone : soc_) {
        check_var(cone.t, n, "cone");
        for (const auto& a : cone.args) {
            if (!std::isfinite(a.constant)) throw ContractViolation("non-finite cone constant");
            for (const auto& t : a.terms) {
                check_var(t.var, n, "cone");
                if (!std::isfinite(t.coef)) throw ContractViolation("non-finite cone coefficient");
            }
        }
    }
}

double ConicProgram::evaluate_objective(const Eigen::VectorXd& primal) const {
    double v = offset_;
    for (int j = 0; j < num_vars(); ++j) v += objective_[static_cast<std::size_t>(j)] * primal(j);
    return v;
}

double ConicProgram::max_violation(const Eigen::VectorXd& primal) const {
    double worst = 0.0;
    for (int j = 0; j < num_vars(); ++j) {
        const auto k = static_cast<std::size_t>(j);
        worst = std::max({worst, lower_[k] - primal(j), primal(j) - upper_[k]});
    }
    for (const auto& row : linear_) {
        const double lhs = terms_value(row.terms, primal);
        switch (row.sense) {
        case Sense::GreaterEqual: worst = std::max(worst, row.rhs - lhs); break;
        case Sense::LessEqual: worst = std::max(worst, lhs - row.rhs); break;
        case Sense::Equal: worst = std::max(worst, std::abs(lhs - row.rhs)); break;
        }
    }
    for (const auto& cone : soc_) {
        double sq = 0.0;
        for (const auto& a : cone.args) {
            const double v = expr_value(a, primal);
            sq += v * v;
        }
        worst = std::max(worst, std::sqrt(sq) - primal(cone.t));
    }
    return worst;
}

namespace {

// Reduction of a ConicProgram to the solver's standard form. Fixed variables
// are substituted, bounds become rows, and columns that appear nowhere with
// zero cost are pinned to a feasible value.
struct Reduction {
    detail::StandardForm form;
    std::vector<int> column;     // model variable -> standard-form column or -1
    Eigen::VectorXd fixed_value; // value for variables without a column
    bool trivially_infeasible = false;
    bool trivially_unbounded = false;
};

Reduction reduce(const ConicProgram& prog, double feas_tol) {
    Reduction red;
    const int nv = prog.num_vars();
    const auto& lo = prog.lower();
    const auto& up = prog.upper();
    const auto& obj = prog.objective();

    std::vector<char> used(static_cast<std::size_t>(nv), 0);
    for (const auto& row : prog.linear_constraints()) {
        for (const auto& t : row.terms) used[static_cast<std::size_t>(t.var)] = 1;
    }
    for (const auto& cone : prog.soc_constraints()) {
        used[static_cast<std::size_t>(cone.t)] = 1;
        for (const auto& a : cone.args) {
            for (const auto& t : a.terms) used[static_cast<std::size_t>(t.var)] = 1;
        }
    }

    red.column.assign(static_cast<std::size_t>(nv), -1);
    red.fixed_value = Eigen::VectorXd::Zero(nv);
    int ncols = 0;
    for (int j = 0; j < nv; ++j) {
        const auto k = static_cast<std::size_t>(j);
        if (lo[k] == up[k]) {
            red.fixed_value(j) = lo[k];
            continue;
        }
        if (!used[k]) {
            const double cost = obj[k];
            if (cost > 0.0) {
                if (!std::isfinite(lo[k])) red.trivially_unbounded = true;
                else red.fixed_value(j) = lo[k];
            } else if (cost < 0.0) {
                if (!std::isfinite(up[k])) red.trivially_unbounded = true;
                else red.fixed_value(j) = up[k];
            } else {
                red.fixed_value(j) = std::clamp(0.0, lo[k], up[k]);
            }
            continue;
        }
        red.column[k] = ncols++;
    }

    auto& f = red.form;
    f.c = Eigen::VectorXd::Zero(ncols);
    for (int j = 0; j < nv; ++j) {
        const int col = red.column[static_cast<std::size_t>(j)];
        if (col >= 0) f.c(col) = obj[static_cast<std::size_t>(j)];
    }

    using Trip = Eigen::Triplet<double>;
    std::vector<Trip> a_trip;
    std::vector<Trip> g_trip;
    std::vector<double> b;
    std::vector<double> h;

    // Appends row `coef'x (sense) rhs` after substitution; rows with no
    // remaining columns are checked directly.
    std::vector<Term> scratch;
    auto substitute = [&](const std::vector<Term>& terms, double& rhs_shift) {
        scratch.clear();
        for (const auto& t : terms) {
            const int col = red.column[static_cast<std::size_t>(t.var)];
            if (col < 0) rhs_shift += t.coef * red.fixed_value(t.var);
            else scratch.push_back({col, t.coef});
        }
    };
    auto add_leq = [&](double sign, double rhs) {
        const int row = static_cast<int>(h.size());
        for (const auto& t : scratch) g_trip.emplace_back(row, t.var, sign * t.coef);
        h.push_back(sign * rhs);
    };
    // Cone entry s = value + coef'x, i.e. G row = -coef and h = value.
    auto add_cone_entry = [&](double value) {
        const int row = static_cast<int>(h.size());
        for (const auto& t : scratch) g_trip.emplace_back(row, t.var, -t.coef);
        h.push_back(value);
    };

    for (const auto& row : prog.linear_constraints()) {
        double shift = 0.0;
        substitute(row.terms, shift);
        const double rhs = row.rhs - shift;
        if (scratch.empty()) {
            const double tol = feas_tol * std::max(1.0, std::abs(row.rhs));
            const bool ok = (row.sense == Sense::GreaterEqual && rhs <= tol) ||
                            (row.sense == Sense::LessEqual && rhs >= -tol) ||
                            (row.sense == Sense::Equal && std::abs(rhs) <= tol);
            if (!ok) red.trivially_infeasible = true;
            continue;
        }
        switch (row.sense) {
        case Sense::GreaterEqual: add_leq(-1.0, rhs); break;
        case Sense::LessEqual: add_leq(1.0, rhs); break;
        case Sense::Equal: {
            const int r = static_cast<int>(b.size());
            for (const auto& t : scratch) a_trip.emplace_back(r, t.var, t.coef);
            b.push_back(rhs);
            break;
        }
        }
    }
    for (int j = 0; j < nv; ++j) {
        const auto k = static_cast<std::size_t>(j);
        const int col = red.column[k];
        if (col < 0) continue;
        scratch.assign(1, Term{col, 1.0});
        if (std::isfinite(lo[k])) add_leq(-1.0, lo[k]);
        if (std::isfinite(up[k])) add_leq(1.0, up[k]);
    }
    f.nonneg = static_cast<int>(h.size());

    for (const auto& cone : prog.soc_constraints()) {
        // s = h - G x with s_0 = x_t and s_k = arg_k.
        double shift = 0.0;
        substitute({Term{cone.t, 1.0}}, shift);
        add_cone_entry(shift);
        for (const auto& a : cone.args) {
            double s = a.constant;
            substitute(a.terms, s);
            add_cone_entry(s);
        }
        f.soc_dims.push_back(1 + static_cast<int>(cone.args.size()));
    }

    f.A.resize(static_cast<Eigen::Index>(b.size()), ncols);
    f.A.setFromTriplets(a_trip.begin(), a_trip.end());
    f.A.makeCompressed();
    f.b = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    f.G.resize(static_cast<Eigen::Index>(h.size()), ncols);
    f.G.setFromTriplets(g_trip.begin(), g_trip.end());
    f.G.makeCompressed();
    f.h = Eigen::Map<const Eigen::VectorXd>(h.data(), static_cast<Eigen::Index>(h.size()));
    return red;
}

} // namespace

SolveResult solve(const ConicProgram& program, const SolverParams& params) {
    const auto start = std::chrono::steady_clock::now();
    SolveResult result;
    const auto red = reduce(program, params.feas_tol);
    auto finish = [&] {
        result.solve_time =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return result;
    };
    if (red.trivially_infeasible) {
        result.status = SolveStatus::Infeasible;
        return finish();
    }
    const auto sol = detail::solve_standard_form(red.form, params);
    result.iterations = sol.iterations;
    result.status = sol.status;
    if (sol.status == SolveStatus::Optimal && red.trivially_unbounded) {
        result.status = SolveStatus::Unbounded;
    }
    if (result.status != SolveStatus::Optimal) return finish();

    result.primal = red.fixed_value;
    for (int j = 0; j < program.num_vars(); ++j) {
        const int col = red.column[static_cast<std::size_t>(j)];
        if (col >= 0) result.primal(j) = sol.x(col);
    }
    result.objective = program.evaluate_objective(result.primal);
    return finish();
}

void add_dual_norm_epigraph(ConicProgram& program, const std::vector<LinearExpr>& expr, int t,
                            Norm norm) {
    switch (norm) {
    case Norm::L2:
        program.add_soc(t, expr);
        return;
    case Norm::Linf:
        for (const auto& e : expr) {
            LinearExpr upper = e;
            upper.add(t, -1.0);
            program.add_linear(upper, Sense::LessEqual, 0.0);
            LinearExpr lower = e;
            lower.add(t, 1.0);
            program.add_linear(lower, Sense::GreaterEqual, 0.0);
        }
        return;
    case Norm::L1: {
        std::vector<Term> total;
        for (const auto& e : expr) {
            const int u = program.add_variable({VarKind::Auxiliary}, 0.0, kInf);
            LinearExpr upper = e;
            upper.add(u, -1.0);
            program.add_linear(upper, Sense::LessEqual, 0.0);
            LinearExpr lower = e;
            lower.add(u, 1.0);
            program.add_linear(lower, Sense::GreaterEqual, 0.0);
            total.push_back({u, 1.0});
        }
        total.push_back({t, -1.0});
        program.add_linear(std::move(total), Sense::LessEqual, 0.0);
        return;
    }
    }
}

void write_lp(const ConicProgram& program, std::ostream& out) {
    auto write_terms = [&](const std::vector<Term>& terms) {
        if (terms.empty()) {
            out << " 0 v0";
            return;
        }
        for (const auto& t : terms) {
            out << (t.coef < 0 ? " - " : " + ") << std::abs(t.coef) << " v" << t.var;
        }
    };
    out.precision(17);
    out << "\\ variables: v<k> = model variable k\n";
    for (int j = 0; j < program.num_vars(); ++j) {
        out << "\\ v" << j << " = " << to_string(program.label(j)) << "\n";
    }
    out << "Minimize\n obj:";
    std::vector<Term> obj;
    for (int j = 0; j < program.num_vars(); ++j) {
        const double c = program.objective()[static_cast<std::size_t>(j)];
        if (c != 0.0) obj.push_back({j, c});
    }
    write_terms(obj);
    if (program.objective_offset() != 0.0) out << " + " << program.objective_offset() << " constant";
    out << "\nSubject To\n";
    int idx = 0;
    for (const auto& row : program.linear_constraints()) {
        out << " r" << idx++ << ":";
        write_terms(row.terms);
        switch (row.sense) {
        case Sense::GreaterEqual: out << " >= "; break;
        case Sense::LessEqual: out << " <= "; break;
        case Sense::Equal: out << " = "; break;
        }
        out << row.rhs << "\n";
    }
    idx = 0;
    for (const auto& cone : program.soc_constraints()) {
        out << "\\ cone" << idx++ << ": || (";
        for (std::size_t k = 0; k < cone.args.size(); ++k) {
            out << (k ? ", " : "");
            write_terms(cone.args[k].terms);
            if (cone.args[k].constant != 0.0) out << " + " << cone.args[k].constant;
        }
        out << ") ||_2 <= v" << cone.t << "\n";
    }
    out << "Bounds\n";
    for (int j = 0; j < program.num_vars(); ++j) {
        const double lo = program.lower()[static_cast<std::size_t>(j)];
        const double up = program.upper()[static_cast<std::size_t>(j)];
        out << " ";
        if (std::isinf(lo)) out << "-inf";
        else out << lo;
        out << " <= v" << j << " <= ";
        if (std::isinf(up)) out << "+inf";
        else out << up;
        out << "\n";
    }
    out << "End\n";
}

} // namespace sro::conic
