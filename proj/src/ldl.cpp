#include "dso/ldl.hpp"

#include <Eigen/OrderingMethods>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dso {

void QuasiDefiniteLdl::analyze(const SparseMatrix& upper) {
    if (upper.rows() != upper.cols()) throw std::invalid_argument("LDL: matrix not square");
    if (!upper.isCompressed()) throw std::invalid_argument("LDL: matrix not compressed");
    n_ = static_cast<int>(upper.rows());
    const int nnz = static_cast<int>(upper.nonZeros());

    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> order;
    Eigen::AMDOrdering<int> amd;
    const SparseMatrix full = upper.selfadjointView<Eigen::Upper>();
    amd(full, order);
    // Eigen's orderings map new positions to old indices
    perm_.resize(n_);
    iperm_.resize(n_);
    for (int i = 0; i < n_; ++i) perm_[i] = order.indices()[i];
    for (int i = 0; i < n_; ++i) iperm_[perm_[i]] = i;

    // permuted upper triangle
    const int* op = upper.outerIndexPtr();
    const int* oi = upper.innerIndexPtr();
    cp_.assign(n_ + 1, 0);
    for (int j = 0; j < n_; ++j) {
        for (int p = op[j]; p < op[j + 1]; ++p) {
            const int i = oi[p];
            if (i > j) throw std::invalid_argument("LDL: entry below the diagonal");
            const int a = iperm_[i], b = iperm_[j];
            ++cp_[std::max(a, b) + 1];
        }
    }
    for (int j = 0; j < n_; ++j) cp_[j + 1] += cp_[j];
    std::vector<int> next(cp_.begin(), cp_.end() - 1);
    ci_.assign(nnz, 0);
    value_map_.assign(nnz, 0);
    for (int j = 0; j < n_; ++j) {
        for (int p = op[j]; p < op[j + 1]; ++p) {
            const int a = iperm_[oi[p]], b = iperm_[j];
            const int col = std::max(a, b);
            const int q = next[col]++;
            ci_[q] = std::min(a, b);
            value_map_[p] = q;
        }
    }
    cx_.assign(nnz, 0.0);

    // elimination tree and column counts of L
    parent_.assign(n_, -1);
    std::vector<int> count(n_, 0), visited(n_, -1);
    for (int k = 0; k < n_; ++k) {
        visited[k] = k;
        for (int p = cp_[k]; p < cp_[k + 1]; ++p) {
            int i = ci_[p];
            while (i < k && visited[i] != k) {
                if (parent_[i] == -1) parent_[i] = k;
                ++count[i];
                visited[i] = k;
                i = parent_[i];
            }
        }
    }
    lp_.assign(n_ + 1, 0);
    for (int j = 0; j < n_; ++j) lp_[j + 1] = lp_[j] + count[j];
    li_.assign(lp_[n_], 0);
    lx_.assign(lp_[n_], 0.0);
    d_.assign(n_, 0.0);
    y_.assign(n_, 0.0);
    mark_.assign(n_, -1);
    stack_.assign(n_, 0);
    fill_.assign(n_, 0);
}

bool QuasiDefiniteLdl::factorize(const SparseMatrix& upper, const std::vector<int>& sign, double eps,
                                 double delta) {
    if (static_cast<int>(upper.rows()) != n_ || static_cast<int>(sign.size()) != n_) {
        throw std::invalid_argument("LDL: dimension mismatch with analyze()");
    }
    const double* v = upper.valuePtr();
    const int nnz = static_cast<int>(upper.nonZeros());
    for (int p = 0; p < nnz; ++p) cx_[value_map_[p]] = v[p];

    n_regularized_ = 0;
    std::fill(mark_.begin(), mark_.end(), -1);
    for (int j = 0; j < n_; ++j) fill_[j] = lp_[j];

    for (int k = 0; k < n_; ++k) {
        // scatter column k and find the pattern of row k of L
        double diag = 0.0;
        int top = n_;
        mark_[k] = k;
        for (int p = cp_[k]; p < cp_[k + 1]; ++p) {
            int i = ci_[p];
            if (i == k) {
                diag += cx_[p];
                continue;
            }
            y_[i] += cx_[p];
            int len = 0;
            for (; mark_[i] != k; i = parent_[i]) {
                stack_[len++] = i;
                mark_[i] = k;
            }
            while (len > 0) stack_[--top] = stack_[--len];
        }
        for (int s = top; s < n_; ++s) {
            const int i = stack_[s];
            const double yi = y_[i];
            y_[i] = 0.0;
            for (int p = lp_[i]; p < fill_[i]; ++p) y_[li_[p]] -= lx_[p] * yi;
            const double l = yi / d_[i];
            diag -= l * yi;
            li_[fill_[i]] = k;
            lx_[fill_[i]] = l;
            ++fill_[i];
        }
        if (!std::isfinite(diag)) return false;
        if (sign[perm_[k]] * diag <= eps) {
            diag = sign[perm_[k]] * delta;
            ++n_regularized_;
        }
        d_[k] = diag;
    }
    return true;
}

void QuasiDefiniteLdl::solve(Eigen::VectorXd& x) const {
    Eigen::VectorXd y(n_);
    for (int i = 0; i < n_; ++i) y[i] = x[perm_[i]];
    for (int j = 0; j < n_; ++j) {
        const double yj = y[j];
        for (int p = lp_[j]; p < lp_[j + 1]; ++p) y[li_[p]] -= lx_[p] * yj;
    }
    for (int j = 0; j < n_; ++j) y[j] /= d_[j];
    for (int j = n_ - 1; j >= 0; --j) {
        double acc = y[j];
        for (int p = lp_[j]; p < lp_[j + 1]; ++p) acc -= lx_[p] * y[li_[p]];
        y[j] = acc;
    }
    for (int i = 0; i < n_; ++i) x[perm_[i]] = y[i];
}

}  // namespace dso
