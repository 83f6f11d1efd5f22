#pragma once

// Sparse LDL' for symmetric quasi-definite matrices. The pivot signs are
// known in advance; a pivot that comes out with the wrong sign or too close
// to zero is replaced by sign * delta.

#include <Eigen/Sparse>

#include <vector>

namespace sro::conic::detail {

class QuasiDefiniteLdl {
public:
    using Matrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

    /// `upper` holds the upper triangle (diagonal included) of the matrix.
    /// `signs` is +1 or -1 per row. Computes a fill-reducing order and the
    /// symbolic factor.
    void analyze(const Matrix& upper, const std::vector<int>& signs);

    /// Numeric factorization with values taken from `upper`, which must
    /// have the sparsity pattern passed to analyze(). Returns the number of
    /// pivots that were regularized.
    int factorize(const Matrix& upper, double eps, double delta);

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

private:
    int n_ = 0;
    std::vector<int> perm_;     // new -> old
    std::vector<int> inv_perm_; // old -> new
    std::vector<int> signs_;    // in new order
    Matrix permuted_;           // upper triangle in new order
    std::vector<int> value_map_; // value index of `upper` -> value index of permuted_

    std::vector<int> etree_;
    std::vector<int> Lp_;
    std::vector<int> Li_;
    std::vector<double> Lx_;
    std::vector<double> D_;
    std::vector<double> Dinv_;

    std::vector<double> y_vals_;
    std::vector<int> y_idx_;
    std::vector<int> elim_buffer_;
    std::vector<int> next_space_;
    std::vector<char> y_markers_;
};

} // namespace sro::conic::detail
