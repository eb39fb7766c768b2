#pragma once

// Sparse LDL^T for symmetric quasi-definite matrices, with pivots pushed to
// their expected sign when they come out too small.

#include <Eigen/Sparse>

#include <vector>

namespace dso {

class QuasiDefiniteLdl {
public:
    using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

    /// Fill-reducing ordering and elimination tree for the upper triangle of
    /// `upper` (compressed, diagonal present). Values are read by factorize().
    void analyze(const SparseMatrix& upper);

    /// `sign[j]` is +1 or -1. A pivot d with sign[j] * d <= eps is replaced by
    /// sign[j] * delta. Returns false on a non-finite pivot.
    bool factorize(const SparseMatrix& upper, const std::vector<int>& sign, double eps, double delta);

    /// Solves with the factor in place; `x` has the matrix dimension.
    void solve(Eigen::VectorXd& x) const;

    int regularized_pivots() const { return n_regularized_; }
    int size() const { return n_; }
    long factor_nonzeros() const { return static_cast<long>(li_.size()); }

private:
    int n_ = 0;
    std::vector<int> perm_;      // perm_[new] = old
    std::vector<int> iperm_;     // iperm_[old] = new
    std::vector<int> cp_, ci_;   // permuted upper triangle, CSC
    std::vector<int> value_map_; // permuted position of each input nonzero
    std::vector<double> cx_;
    std::vector<int> parent_;
    std::vector<int> lp_, li_;
    std::vector<double> lx_, d_;
    int n_regularized_ = 0;

    // workspaces for factorize
    std::vector<double> y_;
    std::vector<int> mark_, stack_, fill_;
};

}  // namespace dso
