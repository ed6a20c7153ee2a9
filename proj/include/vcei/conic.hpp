#pragma once

#include "vcei/common.hpp"

#include <optional>
#include <string>
#include <vector>

namespace vcei {

/// <coefficients, A> <= bound
struct LinearInequality {
    Matrix coefficients;
    double bound = 0.0;
};

/// Lifted program over symmetric M x M matrices:
///
///   maximize   <objective, A>
///   subject to A is PSD, A >= 0 entrywise, 1^T A 1 = 1,
///              A 1 <= row_cap (when set), <G_k, A> <= h_k.
///
/// With 1^T A 1 = 1 the bordered block [[A, A1], [1^T A, 1]] equals
/// [I; 1^T] A [I, 1], so it is PSD exactly when A is. The solvers work with
/// A directly because the bordered block is always singular.
struct DnnProgram {
    Matrix objective;
    std::optional<double> row_cap;
    std::vector<LinearInequality> inequalities;

    Eigen::Index size() const { return objective.rows(); }
    void validate() const;
};

enum class SolveStatus { Optimal, Inaccurate, Infeasible };

std::string_view to_string(SolveStatus s);

struct ConicResult {
    Matrix a;
    double primal_objective = 0.0;  // <objective, a>
    double dual_objective = 0.0;    // upper bound when the dual iterate is feasible
    SolveStatus status = SolveStatus::Inaccurate;
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    std::string backend;
};

/// Constraint violations of a candidate lifted matrix (all >= 0, zero when feasible).
struct DnnViolation {
    double psd = 0.0;            // -min eigenvalue of A
    double bordered_psd = 0.0;   // -min eigenvalue of [[A, A1], [1^T A, 1]]
    double nonnegativity = 0.0;  // -min entry
    double normalization = 0.0;  // |1^T A 1 - 1|
    double symmetry = 0.0;       // max |A - A^T|
    double row_cap = 0.0;
    double inequalities = 0.0;

    double max() const;
};

DnnViolation check_feasibility(const DnnProgram& program, const Matrix& a);

struct InteriorPointOptions {
    int max_iterations = 80;
    double feasibility_tol = 1e-9;
    double absolute_gap_tol = 1e-10;
    double relative_gap_tol = 1e-9;
    /// Accept as Inaccurate (rather than fail) when the solver stalls within these.
    double fallback_feasibility_tol = 1e-6;
    double fallback_gap_tol = 1e-6;
};

/// Primal-dual path following with Nesterov-Todd scaling and Mehrotra
/// correction. Dense Newton system with M(M+1)/2 unknowns; meant for small M.
ConicResult solve_dnn_interior_point(const DnnProgram& program, const InteriorPointOptions& options = {});

struct AdmmOptions {
    int max_iterations = 20000;
    double eps_abs = 1e-8;
    double eps_rel = 1e-7;
    double rho = 1.0;
    double sigma = 1e-6;
    double relaxation = 1.6;
    bool adaptive_rho = true;
    int adapt_interval = 25;
    int check_interval = 10;
};

/// Iterates of the operator splitting method; pass back in to warm start a
/// related program of the same size.
struct AdmmState {
    Matrix x;
    Matrix s_psd;
    Matrix s_nn;
    Vector s_lin;
    Matrix y_psd;
    Matrix y_nn;
    Vector y_lin;
    double rho = 0.0;
};

/// Operator splitting (ADMM) on the conic form with one eigendecomposition per
/// iteration; used for larger M.
ConicResult solve_dnn_admm(const DnnProgram& program, const AdmmOptions& options = {},
                           AdmmState* state = nullptr);

}  // namespace vcei
