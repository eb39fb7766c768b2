#pragma once

#include "dso/program.hpp"

#include <Eigen/Dense>

#include <string_view>

namespace dso {

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

std::string_view status_name(SolveStatus s);

struct SolveOptions {
    double feas_tol = 1e-8;
    double opt_tol = 1e-8;
    double infeas_tol = 1e-8;
    int max_iter = 200;
    bool equilibrate = true;
    double static_reg = 1e-8;
    double dynamic_reg_eps = 1e-13;   // pivots below this (with the expected sign) are replaced
    double dynamic_reg_delta = 2e-7;  // by this magnitude
    int max_refine = 10;
    double step_fraction = 0.99;
};

/// Result of one interior-point solve. primal/slack/duals are in the original
/// (unscaled) problem space; duals[r] is the multiplier of row r of A.
struct SolveReport {
    SolveStatus status = SolveStatus::NumericalFailure;
    double objective = 0.0;
    Eigen::VectorXd primal;
    Eigen::VectorXd slack;
    Eigen::VectorXd duals;
    bool has_duals = false;
    int iterations = 0;
    double runtime_s = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;
};

/// Primal-dual interior-point method on the homogeneous self-dual embedding of
/// the conic QP, with Nesterov-Todd scaling and Mehrotra correction. The
/// reduced KKT system is factored with a sparse LDL' (AMD ordering, static and
/// dynamic regularization, iterative refinement). Deterministic for identical inputs.
SolveReport solve(const ConicProgram& prog, const SolveOptions& opts = {});

/// Optimality audit of a primal-dual pair in the original problem space.
struct KktAudit {
    double stationarity = 0.0;        // ||Px + q + A'z||_inf / (1 + max(||Px||, ||q||, ||A'z||))
    double primal_residual = 0.0;     // ||Ax + s - b||_inf
    double max_complementarity = 0.0; // max over nonneg rows of |s_r z_r| and over cones of |s'z|
    double dual_cone_violation = 0.0; // max(-z_r, ||z1|| - z0) over cone rows
    double slack_cone_violation = 0.0;
};

KktAudit audit_kkt(const ConicProgram& prog, const Eigen::VectorXd& x, const Eigen::VectorXd& z);

/// Constraint violations of a candidate primal point (slack recomputed as b - Ax).
struct FeasibilityCheck {
    double equality = 0.0;    // max |b - Ax| over zero-cone rows
    double inequality = 0.0;  // max (Ax - b)+ over nonneg rows
    double cone = 0.0;        // max (||s1|| - s0)+ over SOC blocks
    double worst() const { return std::max({equality, inequality, cone}); }
};

FeasibilityCheck check_feasibility(const ConicProgram& prog, const Eigen::VectorXd& x);

}  // namespace dso
