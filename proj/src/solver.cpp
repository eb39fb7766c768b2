#include "dso/solver.hpp"

#include "dso/cones.hpp"
#include "dso/kernels.hpp"
#include "dso/ldl.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dso {

std::string_view status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "Optimal";
        case SolveStatus::Infeasible: return "Infeasible";
        case SolveStatus::Unbounded: return "Unbounded";
        case SolveStatus::NumericalFailure: return "NumericalFailure";
    }
    return "?";
}

namespace {

using Eigen::VectorXd;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxConeDim = 16;

std::span<double> seg(VectorXd& v, int off, int len) { return {v.data() + off, static_cast<std::size_t>(len)}; }
std::span<const double> seg(const VectorXd& v, int off, int len) {
    return {v.data() + off, static_cast<std::size_t>(len)};
}

double inf_norm(const VectorXd& v) { return kernels::norm_inf({v.data(), static_cast<std::size_t>(v.size())}); }

double vdot(const VectorXd& a, const VectorXd& b) {
    return kernels::dot({a.data(), static_cast<std::size_t>(a.size())}, {b.data(), static_cast<std::size_t>(b.size())});
}

int find_entry(const SparseMatrix& K, int row, int col) {
    const int* inner = K.innerIndexPtr();
    const int begin = K.outerIndexPtr()[col];
    const int end = K.outerIndexPtr()[col + 1];
    const int* it = std::lower_bound(inner + begin, inner + end, row);
    if (it == inner + end || *it != row) throw std::logic_error("KKT pattern entry missing");
    return static_cast<int>(it - inner);
}

struct Direction {
    VectorXd x, z, s;
    double tau = 0.0;
    double kappa = 0.0;
};

class InteriorPoint {
public:
    InteriorPoint(const ConicProgram& prog, const SolveOptions& opts) : prog_(prog), opt_(opts) {
        n_ = prog.n;
        m_ = prog.m();
        m0_ = prog.n_zero;
        m1_ = prog.n_nonneg;
        for (int d : prog.soc_dims) {
            if (d < 1 || d > kMaxConeDim) throw std::invalid_argument("unsupported second-order cone dimension");
        }
        nu_ = prog.degree();
    }

    SolveReport run();

private:
    void scale_data();
    void build_kkt_pattern();
    void set_identity_scaling();
    void update_scaling();
    bool factor_kkt();
    void kkt_multiply(const VectorXd& y, VectorXd& out) const;
    void apply_h(const VectorXd& v, VectorXd& out) const;
    void kkt_solve(const VectorXd& rhs, VectorXd& sol) const;
    void initialize();
    void solve_direction(const VectorXd& dx, const VectorXd& dz, double dtau, const VectorXd& ds,
                         double dkappa, Direction& out);
    double max_step(const Direction& d) const;
    void shift_into_cones(VectorXd& v) const;

    const ConicProgram& prog_;
    SolveOptions opt_;
    int n_ = 0, m_ = 0, m0_ = 0, m1_ = 0, nu_ = 0;

    SparseMatrix P_, A_, At_;
    VectorXd q_, b_, D_, Er_;
    double cost_scale_ = 1.0;

    VectorXd x_, z_, s_;
    double tau_ = 1.0, kappa_ = 1.0;

    VectorXd w_, lambda_;
    std::vector<double> eta_;
    std::vector<double> hsoc_;
    std::vector<int> hsoc_off_;

    SparseMatrix K_;
    std::vector<double> k_base_;
    std::vector<int> diag_pos_;
    std::vector<int> soc_pos_;
    std::vector<int> soc_pos_off_;
    QuasiDefiniteLdl ldlt_;
    std::vector<int> pivot_sign_;
    double reg_ = 1e-8;

    VectorXd x2_, z2_;
    VectorXd pxi_;
    double xi_p_xi_ = 0.0;
};

void InteriorPoint::scale_data() {
    P_ = prog_.P;
    A_ = prog_.A;
    q_ = prog_.q;
    b_ = prog_.b;
    D_ = VectorXd::Ones(n_);
    Er_ = VectorXd::Ones(m_);
    cost_scale_ = 1.0;
    if (!opt_.equilibrate) {
        At_ = A_.transpose();
        return;
    }
    auto limit = [](double v) {
        if (v < 1e-8) return 1.0;
        return 1.0 / std::sqrt(std::clamp(v, 1e-4, 1e4));
    };
    VectorXd colnorm(n_), rownorm(m_), dcol(n_), drow(m_);
    for (int iter = 0; iter < 15; ++iter) {
        colnorm.setZero();
        rownorm.setZero();
        for (int j = 0; j < P_.outerSize(); ++j) {
            for (SparseMatrix::InnerIterator it(P_, j); it; ++it) {
                const double v = std::abs(it.value());
                colnorm[j] = std::max(colnorm[j], v);
                colnorm[it.row()] = std::max(colnorm[it.row()], v);
            }
        }
        for (int j = 0; j < A_.outerSize(); ++j) {
            for (SparseMatrix::InnerIterator it(A_, j); it; ++it) {
                const double v = std::abs(it.value());
                colnorm[j] = std::max(colnorm[j], v);
                rownorm[it.row()] = std::max(rownorm[it.row()], v);
            }
        }
        for (std::size_t k = 0; k < prog_.soc_dims.size(); ++k) {
            const int off = prog_.soc_offsets[k];
            const int d = prog_.soc_dims[k];
            const double mx = rownorm.segment(off, d).maxCoeff();
            rownorm.segment(off, d).setConstant(mx);
        }
        for (int j = 0; j < n_; ++j) dcol[j] = limit(colnorm[j]);
        for (int r = 0; r < m_; ++r) drow[r] = limit(rownorm[r]);
        for (int j = 0; j < P_.outerSize(); ++j) {
            for (SparseMatrix::InnerIterator it(P_, j); it; ++it) it.valueRef() *= dcol[it.row()] * dcol[j];
        }
        for (int j = 0; j < A_.outerSize(); ++j) {
            for (SparseMatrix::InnerIterator it(A_, j); it; ++it) it.valueRef() *= drow[it.row()] * dcol[j];
        }
        D_.array() *= dcol.array();
        Er_.array() *= drow.array();
    }
    q_.array() *= D_.array();
    b_.array() *= Er_.array();

    double pnorm_mean = 0.0;
    if (n_ > 0) {
        colnorm.setZero();
        for (int j = 0; j < P_.outerSize(); ++j) {
            for (SparseMatrix::InnerIterator it(P_, j); it; ++it) {
                const double v = std::abs(it.value());
                colnorm[j] = std::max(colnorm[j], v);
                colnorm[it.row()] = std::max(colnorm[it.row()], v);
            }
        }
        pnorm_mean = colnorm.mean();
    }
    const double scale = std::max(pnorm_mean, inf_norm(q_));
    cost_scale_ = scale > 1e-8 ? 1.0 / std::clamp(scale, 1e-4, 1e4) : 1.0;
    P_ *= cost_scale_;
    q_ *= cost_scale_;
    At_ = A_.transpose();
}

void InteriorPoint::build_kkt_pattern() {
    const int N = n_ + m_;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(P_.nonZeros() + A_.nonZeros() + N + 16 * prog_.soc_dims.size());
    for (int j = 0; j < n_; ++j) {
        for (SparseMatrix::InnerIterator it(P_, j); it; ++it) {
            if (it.row() <= j) trip.emplace_back(it.row(), j, it.value());
        }
        trip.emplace_back(j, j, 0.0);
    }
    for (int r = 0; r < m_; ++r) {
        for (SparseMatrix::InnerIterator it(At_, r); it; ++it) trip.emplace_back(it.row(), n_ + r, it.value());
        trip.emplace_back(n_ + r, n_ + r, 0.0);
    }
    for (std::size_t k = 0; k < prog_.soc_dims.size(); ++k) {
        const int off = n_ + prog_.soc_offsets[k];
        const int d = prog_.soc_dims[k];
        for (int a = 0; a < d; ++a) {
            for (int b = a + 1; b < d; ++b) trip.emplace_back(off + a, off + b, 0.0);
        }
    }
    K_.resize(N, N);
    K_.setFromTriplets(trip.begin(), trip.end());
    K_.makeCompressed();
    k_base_.assign(K_.valuePtr(), K_.valuePtr() + K_.nonZeros());

    diag_pos_.resize(N);
    for (int j = 0; j < N; ++j) diag_pos_[j] = find_entry(K_, j, j);
    soc_pos_off_.clear();
    soc_pos_.clear();
    for (std::size_t k = 0; k < prog_.soc_dims.size(); ++k) {
        const int off = n_ + prog_.soc_offsets[k];
        const int d = prog_.soc_dims[k];
        soc_pos_off_.push_back(static_cast<int>(soc_pos_.size()));
        for (int a = 0; a < d; ++a) {
            for (int b = a; b < d; ++b) soc_pos_.push_back(find_entry(K_, off + a, off + b));
        }
    }

    hsoc_off_.clear();
    int total = 0;
    for (int d : prog_.soc_dims) {
        hsoc_off_.push_back(total);
        total += d * d;
    }
    hsoc_.assign(total, 0.0);
    eta_.assign(prog_.soc_dims.size(), 1.0);
    w_ = VectorXd::Zero(m_);
    lambda_ = VectorXd::Zero(m_);

    double max_diag = 0.0;
    for (int j = 0; j < n_; ++j) max_diag = std::max(max_diag, std::abs(k_base_[diag_pos_[j]]));
    reg_ = opt_.static_reg + 1e-13 * max_diag;

    pivot_sign_.assign(N, -1);
    std::fill(pivot_sign_.begin(), pivot_sign_.begin() + n_, 1);
    ldlt_.analyze(K_);
}

void InteriorPoint::set_identity_scaling() {
    for (int r = m0_; r < m0_ + m1_; ++r) w_[r] = 1.0;
    for (std::size_t k = 0; k < prog_.soc_dims.size(); ++k) {
        const int d = prog_.soc_dims[k];
        double* H = hsoc_.data() + hsoc_off_[k];
        for (int a = 0; a < d; ++a) {
            for (int b = 0; b < d; ++b) H[a * d + b] = a == b ? 1.0 : 0.0;
        }
    }
}

void InteriorPoint::update_scaling() {
    kernels::nonneg_scaling(seg(s_, m0_, m1_), seg(z_, m0_, m1_), seg(w_, m0_, m1_), seg(lambda_, m0_, m1_));
    for (std::size_t k = 0; k < prog_.soc_dims.size(); ++k) {
        const int off = prog_.soc_offsets[k];
        const int d = prog_.soc_dims[k];
        cones::SocScaling sc{1.0, seg(w_, off, d)};
        cones::soc_nt_scaling(seg(s_, off, d), seg(z_, off, d), sc);
        eta_[k] = sc.eta;
        cones::soc_apply_w(sc, seg(z_, off, d), seg(lambda_, off, d));
        cones::soc_hessian(sc, d, {hsoc_.data() + hsoc_off_[k], static_cast<std::size_t>(d * d)});
    }
}

bool InteriorPoint::factor_kkt() {
    double* val = K_.valuePtr();
    std::copy(k_base_.begin(), k_base_.end(), val);
    for (int j = 0; j < n_; ++j) val[diag_pos_[j]] += reg_;
    for (int r = 0; r < m0_; ++r) val[diag_pos_[n_ + r]] = -reg_;
    for (int r = m0_; r < m0_ + m1_; ++r) val[diag_pos_[n_ + r]] = -(w_[r] * w_[r] + reg_);
    for (std::size_t k = 0; k < prog_.soc_dims.size(); ++k) {
        const int d = prog_.soc_dims[k];
        const double* H = hsoc_.data() + hsoc_off_[k];
        int p = soc_pos_off_[k];
        for (int a = 0; a < d; ++a) {
            for (int b = a; b < d; ++b) {
                val[soc_pos_[p++]] = -(H[a * d + b] + (a == b ? reg_ : 0.0));
            }
        }
    }
    return ldlt_.factorize(K_, pivot_sign_, opt_.dynamic_reg_eps, opt_.dynamic_reg_delta);
}

void InteriorPoint::apply_h(const VectorXd& v, VectorXd& out) const {
    out.resize(m_);
    out.head(m0_).setZero();
    for (int r = m0_; r < m0_ + m1_; ++r) out[r] = w_[r] * w_[r] * v[r];
    for (std::size_t k = 0; k < prog_.soc_dims.size(); ++k) {
        const int off = prog_.soc_offsets[k];
        const int d = prog_.soc_dims[k];
        const double* H = hsoc_.data() + hsoc_off_[k];
        for (int a = 0; a < d; ++a) {
            double acc = 0.0;
            for (int b = 0; b < d; ++b) acc += H[a * d + b] * v[off + b];
            out[off + a] = acc;
        }
    }
}

void InteriorPoint::kkt_multiply(const VectorXd& y, VectorXd& out) const {
    const VectorXd yx = y.head(n_);
    const VectorXd yz = y.tail(m_);
    out.resize(n_ + m_);
    out.head(n_) = P_.selfadjointView<Eigen::Upper>() * yx + At_ * yz;
    VectorXd hz;
    apply_h(yz, hz);
    out.tail(m_) = A_ * yx - hz;
}

void InteriorPoint::kkt_solve(const VectorXd& rhs, VectorXd& sol) const {
    sol = rhs;
    ldlt_.solve(sol);
    const double target = 1e-13 * (1.0 + inf_norm(rhs));
    VectorXd r(rhs.size()), ksol;
    double prev = kInf;
    for (int k = 0; k < opt_.max_refine; ++k) {
        kkt_multiply(sol, ksol);
        r = rhs - ksol;
        const double err = inf_norm(r);
        if (err <= target || err >= 0.5 * prev) break;
        prev = err;
        ldlt_.solve(r);
        sol += r;
    }
}

void InteriorPoint::shift_into_cones(VectorXd& v) const {
    double margin = kInf;
    if (m1_ > 0) margin = kernels::min_element(seg(v, m0_, m1_));
    for (std::size_t k = 0; k < prog_.soc_dims.size(); ++k) {
        margin = std::min(margin, cones::soc_margin(seg(v, prog_.soc_offsets[k], prog_.soc_dims[k])));
    }
    if (!std::isfinite(margin)) return;
    const double scale = std::max(1.0, inf_norm(v.tail(m_ - m0_)));
    if (margin >= 1e-8 * scale) return;
    const double shift = 1.0 - margin;
    for (int r = m0_; r < m0_ + m1_; ++r) v[r] += shift;
    for (int off : prog_.soc_offsets) v[off] += shift;
}

void InteriorPoint::initialize() {
    set_identity_scaling();
    if (!factor_kkt()) throw std::runtime_error("initial KKT factorization failed");
    VectorXd rhs(n_ + m_), sol;
    rhs.head(n_) = -q_;
    rhs.tail(m_) = b_;
    kkt_solve(rhs, sol);
    x_ = sol.head(n_);
    z_ = sol.tail(m_);
    s_ = -z_;
    s_.head(m0_).setZero();
    shift_into_cones(s_);
    shift_into_cones(z_);
    tau_ = 1.0;
    kappa_ = 1.0;
}

void InteriorPoint::solve_direction(const VectorXd& dx, const VectorXd& dz, double dtau, const VectorXd& ds,
                                    double dkappa, Direction& out) {
    // ws = W (lambda \ ds) on the non-zero cones
    VectorXd ws = VectorXd::Zero(m_);
    for (int r = m0_; r < m0_ + m1_; ++r) ws[r] = w_[r] * (ds[r] / lambda_[r]);
    double tmp[kMaxConeDim];
    for (std::size_t k = 0; k < prog_.soc_dims.size(); ++k) {
        const int off = prog_.soc_offsets[k];
        const int d = prog_.soc_dims[k];
        cones::jordan_divide(seg(lambda_, off, d), seg(ds, off, d), {tmp, static_cast<std::size_t>(d)});
        cones::SocScaling sc{eta_[k], seg(w_, off, d)};
        cones::soc_apply_w(sc, {tmp, static_cast<std::size_t>(d)}, seg(ws, off, d));
    }

    VectorXd rhs(n_ + m_), sol;
    rhs.head(n_) = -dx;
    rhs.tail(m_) = -dz + ws;
    kkt_solve(rhs, sol);

    const VectorXd g = q_ + 2.0 * pxi_;
    const double num = -dtau + dkappa / tau_ - g.dot(sol.head(n_)) - b_.dot(sol.tail(m_));
    const double den = -kappa_ / tau_ + g.dot(x2_) + b_.dot(z2_) - xi_p_xi_;
    out.tau = num / den;
    out.x = sol.head(n_) + out.tau * x2_;
    out.z = sol.tail(m_) + out.tau * z2_;
    VectorXd hdz;
    apply_h(out.z, hdz);
    out.s = -ws - hdz;
    out.s.head(m0_).setZero();
    out.kappa = -(dkappa + kappa_ * out.tau) / tau_;
}

double InteriorPoint::max_step(const Direction& d) const {
    double alpha = kInf;
    if (m1_ > 0) {
        alpha = std::min(alpha, kernels::nonneg_step(seg(s_, m0_, m1_), seg(d.s, m0_, m1_)));
        alpha = std::min(alpha, kernels::nonneg_step(seg(z_, m0_, m1_), seg(d.z, m0_, m1_)));
    }
    for (std::size_t k = 0; k < prog_.soc_dims.size(); ++k) {
        const int off = prog_.soc_offsets[k];
        const int dim = prog_.soc_dims[k];
        alpha = std::min(alpha, cones::soc_step(seg(s_, off, dim), seg(d.s, off, dim)));
        alpha = std::min(alpha, cones::soc_step(seg(z_, off, dim), seg(d.z, off, dim)));
    }
    if (d.tau < 0.0) alpha = std::min(alpha, -tau_ / d.tau);
    if (d.kappa < 0.0) alpha = std::min(alpha, -kappa_ / d.kappa);
    return alpha;
}

SolveReport InteriorPoint::run() {
    const auto t0 = std::chrono::steady_clock::now();
    SolveReport rep;

    scale_data();
    build_kkt_pattern();
    initialize();

    const double bnorm = inf_norm(prog_.b);
    const double qnorm = inf_norm(prog_.q);

    VectorXd Px, Ax, Atz, rx, rz, ds(m_), tmpv(m_);
    Direction aff, cmb;
    int stalls = 0;
    SolveStatus status = SolveStatus::NumericalFailure;
    int iter = 0;
    double pres = 0.0, dres = 0.0, gap = 0.0;

    for (;; ++iter) {
        Px = P_.selfadjointView<Eigen::Upper>() * x_;
        Ax = A_ * x_;
        Atz = At_ * z_;
        rx = Px + Atz + q_ * tau_;
        rz = Ax + s_ - b_ * tau_;
        const double xpx = vdot(x_, Px);
        const double rtau = vdot(q_, x_) + vdot(b_, z_) + kappa_ + xpx / tau_;

        // convergence in the original space
        pres = (rz.array() / Er_.array()).abs().maxCoeff() / tau_;
        const double ax_norm = (Ax.array() / Er_.array()).abs().maxCoeff() / tau_;
        const double s_norm = (s_.array() / Er_.array()).abs().maxCoeff() / tau_;
        const VectorXd cd = cost_scale_ * D_;
        dres = n_ > 0 ? (rx.array() / cd.array()).abs().maxCoeff() / tau_ : 0.0;
        const double px_norm = n_ > 0 ? (Px.array() / cd.array()).abs().maxCoeff() / tau_ : 0.0;
        const double atz_norm = n_ > 0 ? (Atz.array() / cd.array()).abs().maxCoeff() / tau_ : 0.0;
        const double pobj = (0.5 * xpx / (tau_ * tau_) + vdot(q_, x_) / tau_) / cost_scale_;
        const double dobj = (-0.5 * xpx / (tau_ * tau_) - vdot(b_, z_) / tau_) / cost_scale_;
        gap = std::abs(pobj - dobj);
        if (m_ == 0) pres = 0.0;

        const bool p_ok = pres <= opt_.feas_tol * (1.0 + std::max({bnorm, ax_norm, s_norm}));
        const bool d_ok = dres <= opt_.feas_tol * (1.0 + std::max({qnorm, px_norm, atz_norm}));
        const bool g_ok = gap <= opt_.opt_tol * (1.0 + std::min(std::abs(pobj), std::abs(dobj)));
        spdlog::trace("ipm {:3d} pobj {:+.8e} dobj {:+.8e} pres {:.2e} dres {:.2e} gap {:.2e} tau {:.2e} kappa {:.2e}",
                      iter, pobj, dobj, pres, dres, gap, tau_, kappa_);
        if (p_ok && d_ok && g_ok) {
            status = SolveStatus::Optimal;
            break;
        }

        // infeasibility certificates (unnormalized iterates)
        if (tau_ < kappa_) {
            const double bz = vdot(b_, z_) / cost_scale_;
            const double zn = (z_.array() * Er_.array()).abs().maxCoeff() / cost_scale_;
            const double atz_cert = n_ > 0 ? (Atz.array() / D_.array()).abs().maxCoeff() / cost_scale_ : 0.0;
            if (bz < 0.0 && zn > 0.0 && -bz / zn > opt_.infeas_tol && atz_cert <= opt_.infeas_tol * -bz) {
                status = SolveStatus::Infeasible;
                break;
            }
            const double qx = vdot(q_, x_) / cost_scale_;
            const double xn = (x_.array() * D_.array()).abs().maxCoeff();
            const double px_cert = n_ > 0 ? (Px.array() / D_.array()).abs().maxCoeff() / cost_scale_ : 0.0;
            const double axs_cert = m_ > 0 ? ((Ax + s_).array() / Er_.array()).abs().maxCoeff() : 0.0;
            if (qx < 0.0 && xn > 0.0 && -qx / xn > opt_.infeas_tol && px_cert <= opt_.infeas_tol * -qx &&
                axs_cert <= opt_.infeas_tol * -qx) {
                status = SolveStatus::Unbounded;
                break;
            }
        }

        if (iter >= opt_.max_iter) break;

        update_scaling();
        if (!factor_kkt()) {
            const double saved = reg_;
            bool ok = false;
            for (int k = 0; k < 4 && !ok; ++k) {
                reg_ *= 10.0;
                ok = factor_kkt();
            }
            spdlog::debug("ipm {}: KKT refactored with regularization {:.1e} ({})", iter, reg_, ok ? "ok" : "failed");
            if (!ok) break;
            reg_ = saved;
        }
        {
            VectorXd rhs(n_ + m_), sol;
            rhs.head(n_) = -q_;
            rhs.tail(m_) = b_;
            kkt_solve(rhs, sol);
            x2_ = sol.head(n_);
            z2_ = sol.tail(m_);
        }
        const VectorXd xi = x_ / tau_;
        pxi_ = Px / tau_;
        xi_p_xi_ = xpx / (tau_ * tau_);

        const double sz = m_ > m0_ ? vdot(s_.tail(m_ - m0_), z_.tail(m_ - m0_)) : 0.0;
        const double mu = (sz + tau_ * kappa_) / (nu_ + 1);

        // affine (predictor) direction: ds = lambda o lambda
        ds.setZero();
        kernels::hadamard(seg(lambda_, m0_, m1_), seg(lambda_, m0_, m1_), seg(ds, m0_, m1_));
        for (std::size_t k = 0; k < prog_.soc_dims.size(); ++k) {
            const int off = prog_.soc_offsets[k];
            const int d = prog_.soc_dims[k];
            cones::jordan_product(seg(lambda_, off, d), seg(lambda_, off, d), seg(ds, off, d));
        }
        solve_direction(rx, rz, rtau, ds, tau_ * kappa_, aff);
        const double alpha_aff = std::min(1.0, max_step(aff));
        const double sigma = std::pow(1.0 - alpha_aff, 3);

        // combined direction with Mehrotra second-order correction
        for (int r = m0_; r < m0_ + m1_; ++r) ds[r] += aff.s[r] * aff.z[r] - sigma * mu;
        double a[kMaxConeDim], bb[kMaxConeDim], c[kMaxConeDim];
        for (std::size_t k = 0; k < prog_.soc_dims.size(); ++k) {
            const int off = prog_.soc_offsets[k];
            const int d = prog_.soc_dims[k];
            const std::size_t ud = static_cast<std::size_t>(d);
            cones::SocScaling sc{eta_[k], seg(w_, off, d)};
            cones::soc_apply_winv(sc, seg(aff.s, off, d), {a, ud});
            cones::soc_apply_w(sc, seg(aff.z, off, d), {bb, ud});
            cones::jordan_product({a, ud}, {bb, ud}, {c, ud});
            for (int j = 0; j < d; ++j) ds[off + j] += c[j];
            ds[off] -= sigma * mu;
        }
        const double dkappa = tau_ * kappa_ + aff.tau * aff.kappa - sigma * mu;
        solve_direction((1.0 - sigma) * rx, (1.0 - sigma) * rz, (1.0 - sigma) * rtau, ds, dkappa, cmb);
        const double alpha = std::min(1.0, opt_.step_fraction * max_step(cmb));

        if (alpha < 1e-10) {
            if (++stalls >= 3) break;
        } else {
            stalls = 0;
        }
        x_ += alpha * cmb.x;
        z_ += alpha * cmb.z;
        s_ += alpha * cmb.s;
        tau_ += alpha * cmb.tau;
        kappa_ += alpha * cmb.kappa;
    }

    rep.status = status;
    rep.iterations = iter;
    rep.primal_residual = pres;
    rep.dual_residual = dres;
    rep.gap = gap;
    const double denom = status == SolveStatus::Optimal || status == SolveStatus::NumericalFailure ? tau_ : 1.0;
    rep.primal = (D_.array() * x_.array()).matrix() / denom;
    rep.slack = (s_.array() / Er_.array()).matrix() / denom;
    rep.duals = (Er_.array() * z_.array()).matrix() / (cost_scale_ * denom);
    rep.has_duals = status == SolveStatus::Optimal;
    rep.objective = status == SolveStatus::Optimal ? prog_.objective(rep.primal)
                                                    : std::numeric_limits<double>::quiet_NaN();
    rep.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace

SolveReport solve(const ConicProgram& prog, const SolveOptions& opts) {
    InteriorPoint ipm(prog, opts);
    return ipm.run();
}

KktAudit audit_kkt(const ConicProgram& prog, const Eigen::VectorXd& x, const Eigen::VectorXd& z) {
    KktAudit a;
    const VectorXd px = prog.hessian_times(x);
    const VectorXd atz = prog.A.transpose() * z;
    const VectorXd grad = px + prog.q + atz;
    const double scale = 1.0 + std::max({inf_norm(px), inf_norm(prog.q), inf_norm(atz)});
    a.stationarity = prog.n > 0 ? inf_norm(grad) / scale : 0.0;
    const VectorXd s = prog.b - prog.A * x;
    for (int r = 0; r < prog.n_zero; ++r) a.primal_residual = std::max(a.primal_residual, std::abs(s[r]));
    for (int r = prog.n_zero; r < prog.n_zero + prog.n_nonneg; ++r) {
        a.max_complementarity = std::max(a.max_complementarity, std::abs(s[r] * z[r]));
        a.dual_cone_violation = std::max(a.dual_cone_violation, -z[r]);
        a.slack_cone_violation = std::max(a.slack_cone_violation, -s[r]);
    }
    for (std::size_t k = 0; k < prog.soc_dims.size(); ++k) {
        const int off = prog.soc_offsets[k];
        const int d = prog.soc_dims[k];
        a.max_complementarity = std::max(a.max_complementarity, std::abs(s.segment(off, d).dot(z.segment(off, d))));
        a.dual_cone_violation = std::max(a.dual_cone_violation, -cones::soc_margin(seg(z, off, d)));
        a.slack_cone_violation = std::max(a.slack_cone_violation, -cones::soc_margin(seg(s, off, d)));
    }
    return a;
}

FeasibilityCheck check_feasibility(const ConicProgram& prog, const Eigen::VectorXd& x) {
    FeasibilityCheck f;
    const VectorXd s = prog.b - prog.A * x;
    for (int r = 0; r < prog.n_zero; ++r) f.equality = std::max(f.equality, std::abs(s[r]));
    for (int r = prog.n_zero; r < prog.n_zero + prog.n_nonneg; ++r) f.inequality = std::max(f.inequality, -s[r]);
    for (std::size_t k = 0; k < prog.soc_dims.size(); ++k) {
        f.cone = std::max(f.cone, -cones::soc_margin(seg(s, prog.soc_offsets[k], prog.soc_dims[k])));
    }
    return f;
}

}  // namespace dso
