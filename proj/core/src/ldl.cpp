#include "ldl.hpp"

#include <Eigen/OrderingMethods>

#include <algorithm>
#include <stdexcept>

namespace sro::conic::detail {

void QuasiDefiniteLdl::analyze(const Matrix& upper, const std::vector<int>& signs) {
    n_ = static_cast<int>(upper.rows());
    const Matrix full = upper.selfadjointView<Eigen::Upper>();
    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> pinv;
    Eigen::AMDOrdering<int> amd;
    amd(full, pinv);
    const Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> p = pinv.inverse();

    perm_.assign(static_cast<std::size_t>(n_), 0);
    inv_perm_.assign(static_cast<std::size_t>(n_), 0);
    for (int old = 0; old < n_; ++old) {
        const int fresh = p.indices()(old);
        inv_perm_[static_cast<std::size_t>(old)] = fresh;
        perm_[static_cast<std::size_t>(fresh)] = old;
    }
    signs_.resize(static_cast<std::size_t>(n_));
    for (int k = 0; k < n_; ++k) signs_[static_cast<std::size_t>(k)] = signs[static_cast<std::size_t>(perm_[static_cast<std::size_t>(k)])];

    std::vector<Eigen::Triplet<double, int>> trip;
    trip.reserve(static_cast<std::size_t>(upper.nonZeros()));
    for (int col = 0; col < upper.outerSize(); ++col) {
        for (Matrix::InnerIterator it(upper, col); it; ++it) {
            const int a = inv_perm_[static_cast<std::size_t>(it.row())];
            const int b = inv_perm_[static_cast<std::size_t>(col)];
            trip.emplace_back(std::min(a, b), std::max(a, b), 0.0);
        }
    }
    permuted_.resize(n_, n_);
    permuted_.setFromTriplets(trip.begin(), trip.end());
    permuted_.makeCompressed();

    value_map_.resize(static_cast<std::size_t>(upper.nonZeros()));
    const int* outer = permuted_.outerIndexPtr();
    const int* inner = permuted_.innerIndexPtr();
    std::size_t k = 0;
    for (int col = 0; col < upper.outerSize(); ++col) {
        for (Matrix::InnerIterator it(upper, col); it; ++it, ++k) {
            const int a = inv_perm_[static_cast<std::size_t>(it.row())];
            const int b = inv_perm_[static_cast<std::size_t>(col)];
            const int r = std::min(a, b);
            const int c = std::max(a, b);
            const int* pos = std::lower_bound(inner + outer[c], inner + outer[c + 1], r);
            value_map_[k] = static_cast<int>(pos - inner);
        }
    }

    // Elimination tree and column counts of L.
    const auto n = static_cast<std::size_t>(n_);
    etree_.assign(n, -1);
    std::vector<int> work(n, -1);
    std::vector<int> counts(n, 0);
    for (int j = 0; j < n_; ++j) {
        work[static_cast<std::size_t>(j)] = j;
        for (int q = outer[j]; q < outer[j + 1]; ++q) {
            int i = inner[q];
            while (work[static_cast<std::size_t>(i)] != j) {
                if (etree_[static_cast<std::size_t>(i)] == -1) etree_[static_cast<std::size_t>(i)] = j;
                ++counts[static_cast<std::size_t>(i)];
                work[static_cast<std::size_t>(i)] = j;
                i = etree_[static_cast<std::size_t>(i)];
            }
        }
    }
    Lp_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) Lp_[i + 1] = Lp_[i] + counts[i];
    Li_.assign(static_cast<std::size_t>(Lp_[n]), 0);
    Lx_.assign(static_cast<std::size_t>(Lp_[n]), 0.0);
    D_.assign(n, 0.0);
    Dinv_.assign(n, 0.0);
    y_vals_.assign(n, 0.0);
    y_idx_.assign(n, 0);
    elim_buffer_.assign(n, 0);
    next_space_.assign(n, 0);
    y_markers_.assign(n, 0);
}

int QuasiDefiniteLdl::factorize(const Matrix& upper, double eps, double delta) {
    if (upper.nonZeros() != static_cast<Eigen::Index>(value_map_.size())) {
        throw std::logic_error("LDL factorize: pattern differs from analyze()");
    }
    double* pv = permuted_.valuePtr();
    const double* uv = upper.valuePtr();
    for (std::size_t k = 0; k < value_map_.size(); ++k) pv[value_map_[k]] = uv[k];

    const int* Ap = permuted_.outerIndexPtr();
    const int* Ai = permuted_.innerIndexPtr();
    const double* Ax = permuted_.valuePtr();
    for (int i = 0; i < n_; ++i) next_space_[static_cast<std::size_t>(i)] = Lp_[static_cast<std::size_t>(i)];

    int regularized = 0;
    for (int k = 0; k < n_; ++k) {
        // Pattern of row k of L: etree paths from each nonzero of column k.
        int nnz_y = 0;
        double dk = 0.0;
        for (int q = Ap[k]; q < Ap[k + 1]; ++q) {
            const int b = Ai[q];
            if (b == k) {
                dk = Ax[q];
                continue;
            }
            y_vals_[static_cast<std::size_t>(b)] = Ax[q];
            if (y_markers_[static_cast<std::size_t>(b)]) continue;
            y_markers_[static_cast<std::size_t>(b)] = 1;
            elim_buffer_[0] = b;
            int nnz_e = 1;
            int next = etree_[static_cast<std::size_t>(b)];
            while (next != -1 && next < k) {
                if (y_markers_[static_cast<std::size_t>(next)]) break;
                y_markers_[static_cast<std::size_t>(next)] = 1;
                elim_buffer_[static_cast<std::size_t>(nnz_e++)] = next;
                next = etree_[static_cast<std::size_t>(next)];
            }
            while (nnz_e) y_idx_[static_cast<std::size_t>(nnz_y++)] = elim_buffer_[static_cast<std::size_t>(--nnz_e)];
        }
        for (int t = nnz_y - 1; t >= 0; --t) {
            const auto c = static_cast<std::size_t>(y_idx_[static_cast<std::size_t>(t)]);
            const int end = next_space_[c];
            const double yc = y_vals_[c];
            for (int q = Lp_[c]; q < end; ++q) y_vals_[static_cast<std::size_t>(Li_[static_cast<std::size_t>(q)])] -= Lx_[static_cast<std::size_t>(q)] * yc;
            Li_[static_cast<std::size_t>(end)] = k;
            const double l = yc * Dinv_[c];
            Lx_[static_cast<std::size_t>(end)] = l;
            dk -= yc * l;
            ++next_space_[c];
            y_vals_[c] = 0.0;
            y_markers_[c] = 0;
        }
        const int sign = signs_[static_cast<std::size_t>(k)];
        if (sign * dk <= eps) {
            dk = sign * delta;
            ++regularized;
        }
        D_[static_cast<std::size_t>(k)] = dk;
        Dinv_[static_cast<std::size_t>(k)] = 1.0 / dk;
    }
    return regularized;
}

Eigen::VectorXd QuasiDefiniteLdl::solve(const Eigen::VectorXd& rhs) const {
    const auto n = static_cast<std::size_t>(n_);
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = rhs(perm_[k]);
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = x[i];
        for (int q = Lp_[i]; q < Lp_[i + 1]; ++q) x[static_cast<std::size_t>(Li_[static_cast<std::size_t>(q)])] -= Lx_[static_cast<std::size_t>(q)] * xi;
    }
    for (std::size_t i = 0; i < n; ++i) x[i] *= Dinv_[i];
    for (std::size_t i = n; i-- > 0;) {
        double acc = x[i];
        for (int q = Lp_[i]; q < Lp_[i + 1]; ++q) acc -= Lx_[static_cast<std::size_t>(q)] * x[static_cast<std::size_t>(Li_[static_cast<std::size_t>(q)])];
        x[i] = acc;
    }
    Eigen::VectorXd out(n_);
    for (std::size_t k = 0; k < n; ++k) out(perm_[k]) = x[k];
    return out;
}

} // namespace sro::conic::detail
