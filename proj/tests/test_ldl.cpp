#include "doctest.h"

#include "dso/ldl.hpp"

#include <Eigen/Dense>

#include <random>

using namespace dso;

namespace {

using Sparse = QuasiDefiniteLdl::SparseMatrix;

struct System {
    Eigen::MatrixXd dense;
    Sparse upper;
    std::vector<int> sign;
};

// [H + reg I, A'; A, -reg I] with sparse random H (PSD) and A
System random_quasidefinite(std::mt19937_64& rng, int n, int m, double density, double reg) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::bernoulli_distribution keep(density);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (keep(rng)) B(i, j) = u(rng);
        }
    }
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, n);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            if (keep(rng)) A(i, j) = u(rng);
        }
    }
    System s;
    s.dense = Eigen::MatrixXd::Zero(n + m, n + m);
    s.dense.topLeftCorner(n, n) = B.transpose() * B + reg * Eigen::MatrixXd::Identity(n, n);
    s.dense.topRightCorner(n, m) = A.transpose();
    s.dense.bottomLeftCorner(m, n) = A;
    s.dense.bottomRightCorner(m, m) = -reg * Eigen::MatrixXd::Identity(m, m);
    std::vector<Eigen::Triplet<double>> trip;
    for (int j = 0; j < n + m; ++j) {
        for (int i = 0; i <= j; ++i) {
            if (s.dense(i, j) != 0.0 || i == j) trip.emplace_back(i, j, s.dense(i, j));
        }
    }
    s.upper.resize(n + m, n + m);
    s.upper.setFromTriplets(trip.begin(), trip.end());
    s.upper.makeCompressed();
    s.sign.assign(n + m, -1);
    std::fill(s.sign.begin(), s.sign.begin() + n, 1);
    return s;
}

}  // namespace

TEST_CASE("quasi-definite factorization matches a dense solve") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 5 + trial % 17, m = 2 + trial % 11;
        System s = random_quasidefinite(rng, n, m, 0.3, 1e-3);
        QuasiDefiniteLdl ldl;
        ldl.analyze(s.upper);
        REQUIRE(ldl.factorize(s.upper, s.sign, 1e-13, 2e-7));
        CHECK(ldl.regularized_pivots() == 0);
        CHECK(ldl.size() == n + m);
        Eigen::VectorXd rhs(n + m);
        for (int k = 0; k < n + m; ++k) rhs[k] = g(rng);
        Eigen::VectorXd x = rhs;
        ldl.solve(x);
        const Eigen::VectorXd ref = s.dense.partialPivLu().solve(rhs);
        CHECK((x - ref).norm() <= 1e-9 * (1.0 + ref.norm()));
        CHECK((s.dense * x - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
    }
}

TEST_CASE("refactoring with new values reuses the symbolic analysis") {
    std::mt19937_64 rng(5);
    System s = random_quasidefinite(rng, 12, 6, 0.4, 1e-2);
    QuasiDefiniteLdl ldl;
    ldl.analyze(s.upper);
    const long nnz = [&] {
        REQUIRE(ldl.factorize(s.upper, s.sign, 1e-13, 2e-7));
        return ldl.factor_nonzeros();
    }();
    Sparse scaled = s.upper * 3.0;
    REQUIRE(ldl.factorize(scaled, s.sign, 1e-13, 2e-7));
    CHECK(ldl.factor_nonzeros() == nnz);
    Eigen::VectorXd rhs = Eigen::VectorXd::LinSpaced(18, -1.0, 1.0);
    Eigen::VectorXd x = rhs;
    ldl.solve(x);
    const Eigen::MatrixXd dense = 3.0 * s.dense;
    CHECK((dense * x - rhs).norm() <= 1e-10);
}

TEST_CASE("vanishing pivots are pushed to their expected sign") {
    // [0 1; 1 0] with signs (+, -): the first pivot is zero and gets +delta
    std::vector<Eigen::Triplet<double>> trip{{0, 0, 0.0}, {0, 1, 1.0}, {1, 1, 0.0}};
    Sparse upper(2, 2);
    upper.setFromTriplets(trip.begin(), trip.end());
    upper.makeCompressed();
    QuasiDefiniteLdl ldl;
    ldl.analyze(upper);
    REQUIRE(ldl.factorize(upper, {1, -1}, 1e-13, 1e-6));
    CHECK(ldl.regularized_pivots() >= 1);
    Eigen::VectorXd x(2);
    x << 1.0, 2.0;
    ldl.solve(x);
    CHECK(x.allFinite());
    // the factor is of a nearby matrix: residual of order delta
    Eigen::Matrix2d K;
    K << 0.0, 1.0, 1.0, 0.0;
    Eigen::Vector2d rhs(1.0, 2.0);
    CHECK((K * x - rhs).norm() <= 1e-3);
}

TEST_CASE("non-finite entries make the factorization fail") {
    std::vector<Eigen::Triplet<double>> trip{{0, 0, std::nan("")}, {1, 1, -1.0}};
    Sparse upper(2, 2);
    upper.setFromTriplets(trip.begin(), trip.end());
    upper.makeCompressed();
    QuasiDefiniteLdl ldl;
    ldl.analyze(upper);
    CHECK_FALSE(ldl.factorize(upper, {1, -1}, 1e-13, 2e-7));
}
