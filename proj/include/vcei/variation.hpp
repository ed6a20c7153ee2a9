#pragma once

#include "vcei/common.hpp"
#include "vcei/conic.hpp"
#include "vcei/mmd.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vcei {

/// Weighted subset (M points) against the full set (N points). Maximizes
///   alpha^T K_mm alpha - (2/N) alpha^T K_mn 1 + (1/N^2) 1^T K_nn 1
/// over the simplex through its lifted relaxation A ~ alpha alpha^T.
struct SdrProblem {
    Matrix gram_mm;
    Vector cross_row_sums;  // K_mn 1
    double gram_nn_sum = 0.0;
    Eigen::Index n_full = 0;
    std::optional<double> b_alpha;
    std::optional<double> b_d;

    Matrix objective_matrix;  // K_mm - (1/N)(r 1^T + 1 r^T)
    double constant_term = 0.0;
    DnnProgram program;

    Eigen::Index size() const { return gram_mm.rows(); }
    /// Entries of the lifted matrix variable.
    Eigen::Index variable_count() const { return size() * size(); }
    /// psd, nonnegativity, normalization, symmetry, then row-sum and mmd-slack when present.
    std::vector<std::string> constraint_blocks() const;

    /// Objective at given subset weights (the weighted-vs-full MMD^2, unclamped).
    double objective(const Vector& alpha) const;
    /// Lifted objective <C, A> + constant.
    double lifted_objective(const Matrix& a) const;

    /// Conic standard form for reproduction with other solvers.
    nlohmann::json to_json() const;
};

SdrProblem build_problem(const Matrix& gram_mm, const Matrix& gram_mn, double gram_nn_sum,
                         std::optional<double> b_alpha = std::nullopt, std::optional<double> b_d = std::nullopt);

enum class SolverBackend { Auto, InteriorPoint, Admm };

std::string_view to_string(SolverBackend b);
SolverBackend parse_backend(std::string_view name);

struct SolverOptions {
    SolverBackend backend = SolverBackend::Auto;
    /// Auto uses the interior point method up to this subset size.
    Eigen::Index interior_point_max_size = 40;
    InteriorPointOptions interior_point;
    AdmmOptions admm;
    /// Recovered weights below this are treated as solver noise and zeroed.
    double weight_floor = 1e-6;
    double rank_one_warning = 0.1;
    /// Move to a lower rank optimal lift before recovery when the gap is large.
    bool reduce_rank = true;
    Eigen::Index reduce_rank_max = 20;
    int reduce_rank_steps = 50;
    double feasibility_tol = 1e-6;
    double sandwich_tol = 1e-6;
};

struct SdrSolution {
    Matrix lifted;
    WeightVector weights;
    double sdr_objective = 0.0;
    double recovered_objective = 0.0;
    double dual_bound = 0.0;
    double rank_one_gap = 0.0;
    bool rank_one_warning = false;
    SolveStatus status = SolveStatus::Inaccurate;
    std::string backend;
    int iterations = 0;
    double max_violation = 0.0;
    std::vector<std::string> diagnostics;

    nlohmann::json to_json() const;
};

/// Solves the relaxation and recovers alpha = A 1 (projected onto the simplex).
/// Never throws on solver trouble; inspect `status`.
SdrSolution solve(const SdrProblem& problem, const SolverOptions& options = {});

/// Same, reusing first-order iterates between calls of equal size.
SdrSolution solve(const SdrProblem& problem, const SolverOptions& options, AdmmState* warm);

struct SweepPoint {
    double b_alpha = 0.0;
    SdrSolution solution;
};

/// One solution per grid value (ascending, each in [1/M, 1]).
std::vector<SweepPoint> sweep_b_alpha(const Matrix& gram_mm, const Matrix& gram_mn, double gram_nn_sum,
                                      const std::vector<double>& grid, const SolverOptions& options = {},
                                      std::optional<double> b_d = std::nullopt);

/// 1 - lambda_max(A) / trace(A).
double rank_one_gap(const Matrix& a);

}  // namespace vcei
