#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include "sro/conic.hpp"
#include "sro/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace sro::oracle {

struct BoxInstance {
    TwoStageProblem problem;
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;
};

inline double draw(std::mt19937_64& rng, double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(rng);
}

/// One first-stage variable, r recourse variables, m = 4 rows and a box
/// support in R^d. Recourse entries in the random rows are positive and y is
/// kept nonnegative, so every x >= 0 admits a feasible and bounded recourse.
inline BoxInstance random_box_instance(std::mt19937_64& rng, int d, int r) {
    const int n = 1;
    const int m = 4;
    BoxInstance out;
    auto& p = out.problem;
    p.c = Eigen::VectorXd::Constant(n, draw(rng, 0.1, 1.0));
    p.q.resize(r);
    for (int l = 0; l < r; ++l) p.q(l) = draw(rng, 0.1, 1.0);
    p.T = Eigen::MatrixXd::Zero(m, n);
    p.W = Eigen::MatrixXd::Zero(m, r);
    p.h0 = Eigen::VectorXd::Zero(m);
    p.H = Eigen::MatrixXd::Zero(m, d);
    int row = 0;
    for (int l = 0; l < r; ++l, ++row) p.W(row, l) = 1.0;
    p.T(row++, 0) = 1.0;
    for (; row < m; ++row) {
        p.T(row, 0) = draw(rng, -1.0, 1.0);
        for (int l = 0; l < r; ++l) p.W(row, l) = draw(rng, 0.2, 1.0);
        p.h0(row) = draw(rng, -1.0, 1.0);
        for (int k = 0; k < d; ++k) p.H(row, k) = draw(rng, -1.0, 1.0);
    }
    out.lo.resize(d);
    out.hi.resize(d);
    for (int k = 0; k < d; ++k) {
        out.lo(k) = draw(rng, -1.0, 0.0);
        out.hi(k) = out.lo(k) + draw(rng, 0.5, 2.0);
    }
    p.support = SupportPolyhedron::box(out.lo, out.hi);
    p.validate();
    return out;
}

inline SampleSet uniform_box_samples(std::mt19937_64& rng, const Eigen::VectorXd& lo,
                                     const Eigen::VectorXd& hi, int N) {
    SampleSet s;
    for (int i = 0; i < N; ++i) {
        Eigen::VectorXd v(lo.size());
        for (Eigen::Index k = 0; k < lo.size(); ++k) v(k) = draw(rng, lo(k), hi(k));
        s.points.push_back(v);
    }
    s.source = "test";
    return s;
}

/// All 2^d corners of [lo, hi].
inline std::vector<Eigen::VectorXd> box_vertices(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    const auto d = lo.size();
    std::vector<Eigen::VectorXd> out;
    for (long mask = 0; mask < (1L << d); ++mask) {
        Eigen::VectorXd v(d);
        for (Eigen::Index k = 0; k < d; ++k) v(k) = (mask >> k) & 1 ? hi(k) : lo(k);
        out.push_back(v);
    }
    return out;
}

/// Multi-policy program written directly over the vertices of each
/// infinity-ball intersected with the box support: an affine policy is
/// feasible on a polytope iff it is feasible at its vertices, and the worst
/// affine cost is attained at a vertex. Returns NaN unless solved.
inline double brute_force_mp_linf(const TwoStageProblem& p, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                  const SampleSet& samples, double radius) {
    using conic::LinearExpr;
    using conic::Sense;
    conic::ConicProgram prog;
    const int n = p.n(), r = p.r(), d = p.d(), m = p.m();
    const int N = static_cast<int>(samples.size());
    for (int k = 0; k < n; ++k) {
        prog.add_variable({conic::VarKind::Auxiliary});
        prog.add_objective(k, p.c(k));
    }
    for (int i = 0; i < N; ++i) {
        const int y0 = prog.num_vars();
        for (int l = 0; l < r; ++l) prog.add_variable({conic::VarKind::Auxiliary});
        const int Y = prog.num_vars();
        for (int e = 0; e < r * d; ++e) prog.add_variable({conic::VarKind::Auxiliary});
        const int t = prog.add_variable({conic::VarKind::Auxiliary});
        prog.add_objective(t, 1.0 / N);
        const Eigen::VectorXd& xi = samples.points[static_cast<std::size_t>(i)];
        const Eigen::VectorXd blo = lo.cwiseMax((xi.array() - radius).matrix());
        const Eigen::VectorXd bhi = hi.cwiseMin((xi.array() + radius).matrix());
        for (const auto& v : box_vertices(blo, bhi)) {
            // y(v) = y0 + Y v, Y stored row-major
            auto policy_row = [&](const Eigen::RowVectorXd& weights, LinearExpr& e) {
                for (int l = 0; l < r; ++l) {
                    if (weights(l) == 0.0) continue;
                    e.add(y0 + l, weights(l));
                    for (int k = 0; k < d; ++k) e.add(Y + l * d + k, weights(l) * v(k));
                }
            };
            LinearExpr cost;
            cost.add(t, 1.0);
            policy_row(-p.q.transpose(), cost);
            prog.add_linear(cost, Sense::GreaterEqual, 0.0);
            for (int j = 0; j < m; ++j) {
                LinearExpr row;
                for (int k = 0; k < n; ++k) row.add(k, p.T(j, k));
                policy_row(p.W.row(j), row);
                const double rhs = p.h0(j) + p.H.row(j).dot(v);
                if (row.terms.empty()) {
                    if (rhs > 1e-12) return std::numeric_limits<double>::quiet_NaN();
                    continue;
                }
                prog.add_linear(row, Sense::GreaterEqual, rhs);
            }
        }
    }
    const auto res = conic::solve(prog);
    if (res.status != conic::SolveStatus::Optimal) return std::numeric_limits<double>::quiet_NaN();
    return res.objective;
}

/// Waiting times w_1 = 0, w_{i+1} = max(w_i + xi_i - x_i, 0); cost is the sum
/// of w_2..w_n plus c times the overtime w_{n+1}.
inline double waiting_time_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& xi, double c) {
    const auto n = x.size();
    std::vector<double> w(static_cast<std::size_t>(n + 1), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        w[static_cast<std::size_t>(i + 1)] = std::max(w[static_cast<std::size_t>(i)] + xi(i) - x(i), 0.0);
    }
    double total = 0.0;
    for (Eigen::Index i = 1; i < n; ++i) total += w[static_cast<std::size_t>(i)];
    return total + c * w[static_cast<std::size_t>(n)];
}

} // namespace sro::oracle
