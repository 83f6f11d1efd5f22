#include "cone_solver.hpp"

#include "ldl.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace sro::conic::detail {

namespace {

constexpr double kInfStep = std::numeric_limits<double>::infinity();
constexpr double kRegularization = 7e-8;
constexpr double kMaxRegularization = 1e-4;
constexpr double kPivotThreshold = 1e-13;
constexpr double kPivotReplacement = 1e-7;
constexpr double kStepFraction = 0.99;
constexpr int kMaxRefinement = 12;
constexpr int kDenseKktLimit = 400;

using Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Cone geometry
// ---------------------------------------------------------------------------

class Cone {
public:
    Cone(int nonneg, const std::vector<int>& soc_dims) : nonneg_(nonneg), soc_dims_(soc_dims) {
        int offset = nonneg;
        for (int dim : soc_dims_) {
            soc_offsets_.push_back(offset);
            offset += dim;
        }
        dim_ = offset;
    }

    int dim() const { return dim_; }
    int nonneg() const { return nonneg_; }
    int degree() const { return nonneg_ + static_cast<int>(soc_dims_.size()); }
    std::size_t num_soc() const { return soc_dims_.size(); }
    int soc_offset(std::size_t k) const { return soc_offsets_[k]; }
    int soc_dim(std::size_t k) const { return soc_dims_[k]; }

    double min_eig(const VectorXd& u) const {
        double out = kInfStep;
        if (nonneg_ > 0) out = u.head(nonneg_).minCoeff();
        for (std::size_t k = 0; k < num_soc(); ++k) {
            const auto seg = u.segment(soc_offsets_[k], soc_dims_[k]);
            out = std::min(out, seg(0) - seg.tail(soc_dims_[k] - 1).norm());
        }
        return out;
    }

    void add_identity(VectorXd& u, double alpha) const {
        u.head(nonneg_).array() += alpha;
        for (std::size_t k = 0; k < num_soc(); ++k) u(soc_offsets_[k]) += alpha;
    }

    VectorXd identity() const {
        VectorXd e = VectorXd::Zero(dim_);
        add_identity(e, 1.0);
        return e;
    }

    VectorXd jordan(const VectorXd& u, const VectorXd& v) const {
        VectorXd out(dim_);
        out.head(nonneg_) = u.head(nonneg_).cwiseProduct(v.head(nonneg_));
        for (std::size_t k = 0; k < num_soc(); ++k) {
            const int o = soc_offsets_[k];
            const int p = soc_dims_[k];
            const auto us = u.segment(o, p);
            const auto vs = v.segment(o, p);
            out(o) = us.dot(vs);
            out.segment(o + 1, p - 1) = us(0) * vs.tail(p - 1) + vs(0) * us.tail(p - 1);
        }
        return out;
    }

    /// Solves lambda o w = d for w.
    VectorXd jordan_div(const VectorXd& lambda, const VectorXd& d) const {
        VectorXd out(dim_);
        out.head(nonneg_) = d.head(nonneg_).cwiseQuotient(lambda.head(nonneg_));
        for (std::size_t k = 0; k < num_soc(); ++k) {
            const int o = soc_offsets_[k];
            const int p = soc_dims_[k];
            const auto l = lambda.segment(o, p);
            const auto ds = d.segment(o, p);
            const double l0 = l(0);
            const auto l1 = l.tail(p - 1);
            const double det = l0 * l0 - l1.squaredNorm();
            const double w0 = (l0 * ds(0) - l1.dot(ds.tail(p - 1))) / det;
            out(o) = w0;
            out.segment(o + 1, p - 1) = (ds.tail(p - 1) - w0 * l1) / l0;
        }
        return out;
    }

    /// Largest alpha with u + alpha du in the cone (u interior).
    double max_step(const VectorXd& u, const VectorXd& du) const {
        double alpha = kInfStep;
        for (int i = 0; i < nonneg_; ++i) {
            if (du(i) < 0.0) alpha = std::min(alpha, -u(i) / du(i));
        }
        for (std::size_t k = 0; k < num_soc(); ++k) {
            const int o = soc_offsets_[k];
            const int p = soc_dims_[k];
            alpha = std::min(alpha, soc_step(u.segment(o, p), du.segment(o, p)));
        }
        return alpha;
    }

private:
    template <typename Seg>
    static double soc_step(const Seg& u, const Seg& du) {
        const int p = static_cast<int>(u.size());
        const double a = du(0) * du(0) - du.tail(p - 1).squaredNorm();
        const double b = u(0) * du(0) - u.tail(p - 1).dot(du.tail(p - 1));
        const double c = std::max(u(0) * u(0) - u.tail(p - 1).squaredNorm(), 0.0);
        // f(alpha) = a alpha^2 + 2 b alpha + c; exit at its smallest positive root.
        const double scale = std::max({std::abs(a), std::abs(b), c, 1e-300});
        if (std::abs(a) <= 1e-14 * scale) {
            if (b < 0.0) return -c / (2.0 * b);
            return kInfStep;
        }
        const double disc = b * b - a * c;
        if (disc < 0.0) return kInfStep;
        const double sq = std::sqrt(disc);
        const double qv = -(b + (b >= 0.0 ? sq : -sq));
        double best = kInfStep;
        const double r1 = qv / a;
        if (r1 > 0.0) best = std::min(best, r1);
        if (qv != 0.0) {
            const double r2 = c / qv;
            if (r2 > 0.0) best = std::min(best, r2);
        }
        if (best == kInfStep && c == 0.0) return 0.0;
        return best;
    }

    int nonneg_;
    std::vector<int> soc_dims_;
    std::vector<int> soc_offsets_;
    int dim_ = 0;
};

// ---------------------------------------------------------------------------
// Nesterov-Todd scaling: W z = W^{-1} s = lambda, W symmetric.
// ---------------------------------------------------------------------------

struct SocScaling {
    Eigen::MatrixXd W;
    Eigen::MatrixXd Winv;
    Eigen::MatrixXd W2;
};

class NtScaling {
public:
    explicit NtScaling(const Cone& cone) : cone_(cone) {
        lp_w_ = VectorXd::Ones(cone.nonneg());
        soc_.resize(cone.num_soc());
        for (std::size_t k = 0; k < cone.num_soc(); ++k) {
            const int p = cone.soc_dim(k);
            soc_[k].W = Eigen::MatrixXd::Identity(p, p);
            soc_[k].Winv = soc_[k].W;
            soc_[k].W2 = soc_[k].W;
        }
        lambda_ = VectorXd::Zero(cone.dim());
    }

    bool update(const VectorXd& s, const VectorXd& z) {
        const int l = cone_.nonneg();
        for (int i = 0; i < l; ++i) {
            if (!(s(i) > 0.0) || !(z(i) > 0.0)) return false;
            lp_w_(i) = std::sqrt(s(i) / z(i));
            lambda_(i) = std::sqrt(s(i) * z(i));
        }
        for (std::size_t k = 0; k < cone_.num_soc(); ++k) {
            const int o = cone_.soc_offset(k);
            const int p = cone_.soc_dim(k);
            const VectorXd sk = s.segment(o, p);
            const VectorXd zk = z.segment(o, p);
            const double sres = sk(0) * sk(0) - sk.tail(p - 1).squaredNorm();
            const double zres = zk(0) * zk(0) - zk.tail(p - 1).squaredNorm();
            if (!(sres > 0.0) || !(zres > 0.0) || sk(0) <= 0.0 || zk(0) <= 0.0) return false;
            const double snorm = std::sqrt(sres);
            const double znorm = std::sqrt(zres);
            const VectorXd sb = sk / snorm;
            const VectorXd zb = zk / znorm;
            const double gamma = std::sqrt((1.0 + sb.dot(zb)) / 2.0);
            VectorXd wb(p);
            wb(0) = (sb(0) + zb(0)) / (2.0 * gamma);
            wb.tail(p - 1) = (sb.tail(p - 1) - zb.tail(p - 1)) / (2.0 * gamma);
            const double eta = std::sqrt(snorm / znorm);
            const VectorXd w1 = wb.tail(p - 1);
            Eigen::MatrixXd inner = Eigen::MatrixXd::Identity(p - 1, p - 1) + w1 * w1.transpose() / (1.0 + wb(0));
            auto& sc = soc_[k];
            sc.W.resize(p, p);
            sc.W(0, 0) = wb(0);
            sc.W.block(0, 1, 1, p - 1) = w1.transpose();
            sc.W.block(1, 0, p - 1, 1) = w1;
            sc.W.block(1, 1, p - 1, p - 1) = inner;
            sc.Winv = sc.W;
            sc.Winv.block(0, 1, 1, p - 1) *= -1.0;
            sc.Winv.block(1, 0, p - 1, 1) *= -1.0;
            sc.W *= eta;
            sc.Winv /= eta;
            sc.W2 = sc.W * sc.W;
            lambda_.segment(o, p) = sc.W * zk;
        }
        return true;
    }

    VectorXd apply(const VectorXd& u) const {
        VectorXd out(u.size());
        const int l = cone_.nonneg();
        out.head(l) = lp_w_.cwiseProduct(u.head(l));
        for (std::size_t k = 0; k < soc_.size(); ++k) {
            const int o = cone_.soc_offset(k);
            const int p = cone_.soc_dim(k);
            out.segment(o, p) = soc_[k].W * u.segment(o, p);
        }
        return out;
    }

    VectorXd apply_inv(const VectorXd& u) const {
        VectorXd out(u.size());
        const int l = cone_.nonneg();
        out.head(l) = u.head(l).cwiseQuotient(lp_w_);
        for (std::size_t k = 0; k < soc_.size(); ++k) {
            const int o = cone_.soc_offset(k);
            const int p = cone_.soc_dim(k);
            out.segment(o, p) = soc_[k].Winv * u.segment(o, p);
        }
        return out;
    }

    VectorXd apply_sq(const VectorXd& u) const {
        VectorXd out(u.size());
        const int l = cone_.nonneg();
        out.head(l) = lp_w_.cwiseAbs2().cwiseProduct(u.head(l));
        for (std::size_t k = 0; k < soc_.size(); ++k) {
            const int o = cone_.soc_offset(k);
            const int p = cone_.soc_dim(k);
            out.segment(o, p) = soc_[k].W2 * u.segment(o, p);
        }
        return out;
    }

    const VectorXd& lambda() const { return lambda_; }
    const VectorXd& lp_w() const { return lp_w_; }
    const SocScaling& soc(std::size_t k) const { return soc_[k]; }

private:
    const Cone& cone_;
    VectorXd lp_w_;
    std::vector<SocScaling> soc_;
    VectorXd lambda_;
};

// ---------------------------------------------------------------------------
// Quasi-definite KKT system
//
//   [ 0   A'   G'  ]
//   [ A   0    0   ]
//   [ G   0  -W'W  ]
//
// factored with static regularization and solved with iterative refinement
// against the unregularized matrix.
// ---------------------------------------------------------------------------

class KktSystem {
public:
    KktSystem(const StandardForm& problem, const Cone& cone)
        : problem_(problem), cone_(cone), n_(problem.num_vars()),
          p_(static_cast<int>(problem.b.size())), m_(problem.cone_dim()) {
        At_ = problem.A.transpose();
        Gt_ = problem.G.transpose();
        const int dim = n_ + p_ + m_;
        dense_ = dim <= kDenseKktLimit;
        if (dense_) {
            base_ = Eigen::MatrixXd::Zero(dim, dim);
            const Eigen::MatrixXd Ad = problem.A;
            const Eigen::MatrixXd Gd = problem.G;
            base_.block(n_, 0, p_, n_) = Ad;
            base_.block(0, n_, n_, p_) = Ad.transpose();
            base_.block(n_ + p_, 0, m_, n_) = Gd;
            base_.block(0, n_ + p_, n_, m_) = Gd.transpose();
        } else {
            build_sparse_pattern();
        }
    }

    bool factor(const NtScaling& scaling) {
        const int zo = n_ + p_;
        if (dense_) {
            Eigen::MatrixXd K = base_;
            K.diagonal().head(n_).setConstant(reg_);
            K.diagonal().segment(n_, p_).setConstant(-reg_);
            for (int i = 0; i < cone_.nonneg(); ++i) {
                const double w = scaling.lp_w()(i);
                K(zo + i, zo + i) = -(w * w) - reg_;
            }
            for (std::size_t k = 0; k < cone_.num_soc(); ++k) {
                const int o = zo + cone_.soc_offset(k);
                const int p = cone_.soc_dim(k);
                K.block(o, o, p, p) = -scaling.soc(k).W2;
                K.block(o, o, p, p).diagonal().array() -= reg_;
            }
            lu_.compute(K);
            return true;
        }
        double* values = K_.valuePtr();
        for (int j = 0; j < n_ + p_; ++j) values[diag_pos_[static_cast<std::size_t>(j)]] = j < n_ ? reg_ : -reg_;
        for (int i = 0; i < cone_.nonneg(); ++i) {
            const double w = scaling.lp_w()(i);
            values[lp_pos_[static_cast<std::size_t>(i)]] = -(w * w) - reg_;
        }
        for (std::size_t k = 0; k < cone_.num_soc(); ++k) {
            const int p = cone_.soc_dim(k);
            const auto& W2 = scaling.soc(k).W2;
            std::size_t idx = 0;
            for (int b = 0; b < p; ++b) {
                for (int a = 0; a <= b; ++a) {
                    double v = -W2(a, b);
                    if (a == b) v -= reg_;
                    values[soc_pos_[k][idx++]] = v;
                }
            }
        }
        ldl_.factorize(K_, kPivotThreshold, kPivotReplacement);
        return true;
    }

    /// Raises the static regularization after a breakdown; false once at the cap.
    bool escalate() {
        if (reg_ >= kMaxRegularization) return false;
        reg_ = std::min(reg_ * 100.0, kMaxRegularization);
        return true;
    }

    /// Solves the unregularized system; returns false if refinement diverged
    /// to non-finite values.
    bool solve(const VectorXd& rhs, VectorXd& sol, const NtScaling& scaling) const {
        sol = solve_regularized(rhs);
        const double target = 1e-14 * std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
        double prev = kInfStep;
        for (int it = 0; it < kMaxRefinement; ++it) {
            const VectorXd err = rhs - multiply(sol, scaling);
            const double e = err.lpNorm<Eigen::Infinity>();
            if (!std::isfinite(e)) return false;
            if (e <= target || e >= 0.5 * prev) break;
            prev = e;
            sol += solve_regularized(err);
        }
        return sol.allFinite();
    }

private:
    VectorXd solve_regularized(const VectorXd& rhs) const {
        if (dense_) return lu_.solve(rhs);
        return ldl_.solve(rhs);
    }

    VectorXd multiply(const VectorXd& u, const NtScaling& scaling) const {
        VectorXd out(u.size());
        const auto ux = u.head(n_);
        const auto uy = u.segment(n_, p_);
        const VectorXd uz = u.tail(m_);
        out.head(n_) = At_ * uy + Gt_ * uz;
        out.segment(n_, p_) = problem_.A * ux;
        out.tail(m_) = problem_.G * ux - scaling.apply_sq(uz);
        return out;
    }

    void build_sparse_pattern() {
        const int dim = n_ + p_ + m_;
        const int zo = n_ + p_;
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(dim + problem_.A.nonZeros() + problem_.G.nonZeros()) +
                     static_cast<std::size_t>(m_) * 4);
        for (int j = 0; j < n_; ++j) trip.emplace_back(j, j, kRegularization);
        for (int col = 0; col < problem_.A.outerSize(); ++col) {
            for (SparseMatrix::InnerIterator it(problem_.A, col); it; ++it) {
                trip.emplace_back(col, n_ + it.row(), it.value());
            }
        }
        for (int i = 0; i < p_; ++i) trip.emplace_back(n_ + i, n_ + i, -kRegularization);
        for (int col = 0; col < problem_.G.outerSize(); ++col) {
            for (SparseMatrix::InnerIterator it(problem_.G, col); it; ++it) {
                trip.emplace_back(col, zo + it.row(), it.value());
            }
        }
        for (int i = 0; i < cone_.nonneg(); ++i) trip.emplace_back(zo + i, zo + i, -1.0);
        for (std::size_t k = 0; k < cone_.num_soc(); ++k) {
            const int o = zo + cone_.soc_offset(k);
            const int p = cone_.soc_dim(k);
            for (int b = 0; b < p; ++b) {
                for (int a = 0; a <= b; ++a) trip.emplace_back(o + a, o + b, a == b ? -1.0 : 0.0);
            }
        }
        K_.resize(dim, dim);
        K_.setFromTriplets(trip.begin(), trip.end());
        K_.makeCompressed();

        diag_pos_.resize(static_cast<std::size_t>(zo));
        for (int j = 0; j < zo; ++j) diag_pos_[static_cast<std::size_t>(j)] = position(j, j);
        lp_pos_.resize(static_cast<std::size_t>(cone_.nonneg()));
        for (int i = 0; i < cone_.nonneg(); ++i) {
            lp_pos_[static_cast<std::size_t>(i)] = position(zo + i, zo + i);
        }
        soc_pos_.resize(cone_.num_soc());
        for (std::size_t k = 0; k < cone_.num_soc(); ++k) {
            const int o = zo + cone_.soc_offset(k);
            const int p = cone_.soc_dim(k);
            for (int b = 0; b < p; ++b) {
                for (int a = 0; a <= b; ++a) soc_pos_[k].push_back(position(o + a, o + b));
            }
        }
        std::vector<int> signs(static_cast<std::size_t>(dim), -1);
        std::fill(signs.begin(), signs.begin() + n_, 1);
        ldl_.analyze(K_, signs);
    }

    Eigen::Index position(int row, int col) const {
        const int* outer = K_.outerIndexPtr();
        const int* inner = K_.innerIndexPtr();
        const int* first = inner + outer[col];
        const int* last = inner + outer[col + 1];
        const int* it = std::lower_bound(first, last, row);
        return it - inner;
    }

    const StandardForm& problem_;
    const Cone& cone_;
    double reg_ = kRegularization;
    int n_;
    int p_;
    int m_;
    SparseMatrix At_;
    SparseMatrix Gt_;
    bool dense_ = false;

    Eigen::MatrixXd base_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;

    SparseMatrix K_;
    std::vector<Eigen::Index> diag_pos_;
    std::vector<Eigen::Index> lp_pos_;
    std::vector<std::vector<Eigen::Index>> soc_pos_;
    detail::QuasiDefiniteLdl ldl_;
};

struct Direction {
    VectorXd x, y, z, s;
    double tau = 0.0;
    double kappa = 0.0;
};

double safe_norm(const VectorXd& v) { return v.size() ? v.norm() : 0.0; }

ConeSolution solve_without_variables(const StandardForm& P, const Cone& cone, const SolverParams& params) {
    ConeSolution out;
    out.x = VectorXd(0);
    const bool eq_ok = P.b.size() == 0 || P.b.lpNorm<Eigen::Infinity>() <= params.feas_tol;
    const bool cone_ok = P.h.size() == 0 || cone.min_eig(P.h) >= -params.feas_tol;
    out.status = eq_ok && cone_ok ? SolveStatus::Optimal : SolveStatus::Infeasible;
    return out;
}

} // namespace

ConeSolution solve_standard_form(const StandardForm& P, const SolverParams& params) {
    const Cone cone(P.nonneg, P.soc_dims);
    const int n = P.num_vars();
    const int p = static_cast<int>(P.b.size());
    const int m = P.cone_dim();
    if (n == 0) return solve_without_variables(P, cone, params);

    KktSystem kkt(P, cone);
    NtScaling scaling(cone);
    ConeSolution out;
    out.status = SolveStatus::NumericalFailure;
    if (!kkt.factor(scaling)) return out;

    const double nu = static_cast<double>(cone.degree());
    const double norm_b = std::max(1.0, safe_norm(P.b));
    const double norm_h = std::max(1.0, safe_norm(P.h));
    const double norm_c = std::max(1.0, safe_norm(P.c));

    // Starting point from two least-squares-like solves with W = I.
    VectorXd x, y, z, s;
    {
        VectorXd rhs = VectorXd::Zero(n + p + m);
        rhs.segment(n, p) = P.b;
        rhs.tail(m) = P.h;
        VectorXd sol;
        if (!kkt.solve(rhs, sol, scaling)) return out;
        x = sol.head(n);
        s = -sol.tail(m);

        rhs.setZero();
        rhs.head(n) = -P.c;
        if (!kkt.solve(rhs, sol, scaling)) return out;
        y = sol.segment(n, p);
        z = sol.tail(m);

        for (VectorXd* u : {&s, &z}) {
            if (m == 0) break;
            const double shift = -cone.min_eig(*u);
            if (shift >= -1e-8 * std::max(1.0, safe_norm(*u))) cone.add_identity(*u, 1.0 + shift);
        }
    }
    double tau = 1.0;
    double kappa = 1.0;

    // K u1 = (-c, b, h) is shared by both directions of an iteration.
    VectorXd rhs_const(n + p + m);
    rhs_const << -P.c, P.b, P.h;
    VectorXd u1;

    const VectorXd e = cone.identity();

    auto solve_direction = [&](const VectorXd& dx, const VectorXd& dy, const VectorXd& dz, double dtau,
                               const VectorXd& ds, double dk, Direction& dir) -> bool {
        const VectorXd t = cone.jordan_div(scaling.lambda(), ds);
        VectorXd rhs(n + p + m);
        rhs << dx, dy, dz - scaling.apply(t);
        VectorXd u2;
        if (!kkt.solve(rhs, u2, scaling)) return false;
        const double num = dtau - dk / tau -
                           (P.c.dot(u2.head(n)) + P.b.dot(u2.segment(n, p)) + P.h.dot(u2.tail(m)));
        const double den = P.c.dot(u1.head(n)) + P.b.dot(u1.segment(n, p)) + P.h.dot(u1.tail(m)) - kappa / tau;
        dir.tau = num / den;
        const VectorXd full = u2 + dir.tau * u1;
        dir.x = full.head(n);
        dir.y = full.segment(n, p);
        dir.z = full.tail(m);
        dir.s = scaling.apply(t - scaling.apply(dir.z));
        dir.kappa = (dk - kappa * dir.tau) / tau;
        return dir.x.allFinite() && std::isfinite(dir.tau);
    };

    auto step_length = [&](const Direction& dir) {
        double alpha = kInfStep;
        if (m > 0) {
            alpha = std::min(alpha, cone.max_step(s, dir.s));
            alpha = std::min(alpha, cone.max_step(z, dir.z));
        }
        if (dir.tau < 0.0) alpha = std::min(alpha, -tau / dir.tau);
        if (dir.kappa < 0.0) alpha = std::min(alpha, -kappa / dir.kappa);
        return alpha;
    };

    static const bool trace = std::getenv("SRO_SOLVER_TRACE") != nullptr;
    const char* why = "";
    for (int iter = 0; iter <= params.max_iter; ++iter) {
        out.iterations = iter;
        const VectorXd rx = P.A.transpose() * y + P.G.transpose() * z + tau * P.c;
        const VectorXd ry = P.A * x - tau * P.b;
        const VectorXd rz = s + P.G * x - tau * P.h;
        const double cx = P.c.dot(x);
        const double by_hz = P.b.dot(y) + P.h.dot(z);
        const double rt = kappa + cx + by_hz;
        const double sz = m ? s.dot(z) : 0.0;
        const double mu = (sz + tau * kappa) / (nu + 1.0);

        const double pcost = cx / tau;
        const double dcost = -by_hz / tau;
        const double pres = std::max(safe_norm(ry) / norm_b, safe_norm(rz) / norm_h) / tau;
        const double dres = safe_norm(rx) / norm_c / tau;
        const double gap = sz / (tau * tau);
        double relgap = kInfStep;
        if (pcost < 0.0) relgap = gap / -pcost;
        else if (dcost > 0.0) relgap = gap / dcost;

        if (pres < params.feas_tol && dres < params.feas_tol &&
            (gap < params.gap_tol || relgap < params.gap_tol)) {
            out.status = SolveStatus::Optimal;
            out.x = x / tau;
            out.primal_objective = pcost;
            return out;
        }
        if (by_hz < 0.0) {
            const double pinf = safe_norm(P.A.transpose() * y + P.G.transpose() * z) / -by_hz;
            if (pinf < params.feas_tol) {
                out.status = SolveStatus::Infeasible;
                return out;
            }
        }
        if (cx < 0.0) {
            const double dinf = std::max(safe_norm(P.A * x), safe_norm(P.G * x + s)) / -cx;
            if (dinf < params.feas_tol) {
                out.status = SolveStatus::Unbounded;
                out.x = x;
                return out;
            }
        }
        if (trace) {
            std::fprintf(stderr, "%3d pcost %+.6e dcost %+.6e pres %.2e dres %.2e gap %.2e tau %.2e kappa %.2e\n",
                         iter, pcost, dcost, pres, dres, gap, tau, kappa);
        }
        if (iter == params.max_iter) { why = "iteration limit"; break; }

        if (m > 0 && !scaling.update(s, z)) { why = "scaling"; break; }
        bool factored = false;
        do {
            factored = kkt.factor(scaling) && kkt.solve(rhs_const, u1, scaling);
        } while (!factored && kkt.escalate());
        if (!factored) { why = "kkt solve"; break; }

        const VectorXd& lambda = scaling.lambda();
        const VectorXd ll = cone.jordan(lambda, lambda);

        Direction affine;
        if (!solve_direction(-rx, -ry, -rz, -rt, -ll, -tau * kappa, affine)) { why = "affine direction"; break; }
        const double alpha_aff = std::min(1.0, step_length(affine));
        const double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3), 0.0, 1.0);

        VectorXd ds = -ll + sigma * mu * e;
        if (m > 0) ds -= cone.jordan(scaling.apply_inv(affine.s), scaling.apply(affine.z));
        const double dk = -tau * kappa - affine.tau * affine.kappa + sigma * mu;
        const double keep = 1.0 - sigma;
        Direction dir;
        if (!solve_direction(-keep * rx, -keep * ry, -keep * rz, -keep * rt, ds, dk, dir)) { why = "combined direction"; break; }
        const double alpha = std::min(1.0, kStepFraction * step_length(dir));
        if (trace) std::fprintf(stderr, "    alpha_aff %.3e sigma %.3e alpha %.3e\n", alpha_aff, sigma, alpha);
        if (!(alpha > 1e-12)) { why = "step length"; break; }

        x += alpha * dir.x;
        y += alpha * dir.y;
        z += alpha * dir.z;
        s += alpha * dir.s;
        tau += alpha * dir.tau;
        kappa += alpha * dir.kappa;
    }
    if (trace) std::fprintf(stderr, "stopped: %s\n", why);
    out.status = SolveStatus::NumericalFailure;
    return out;
}

} // namespace sro::conic::detail
