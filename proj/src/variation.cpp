#include "vcei/variation.hpp"
#include "vcei/log.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

namespace vcei {

namespace {

constexpr double kBoundSlack = 1e-12;
// beyond this the iterate is not a usable answer at all
constexpr double kFailureViolation = 1e-3;

nlohmann::json matrix_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::vector<std::string> SdrProblem::constraint_blocks() const {
    std::vector<std::string> blocks{"psd", "nonnegative", "normalization", "symmetry"};
    if (b_alpha) blocks.emplace_back("row_sum");
    if (b_d) blocks.emplace_back("mmd_slack");
    return blocks;
}

double SdrProblem::objective(const Vector& alpha) const {
    if (alpha.size() != size()) throw ShapeError("weight vector does not match the subset size");
    const double n = static_cast<double>(n_full);
    return alpha.dot(gram_mm * alpha) - (2.0 / n) * alpha.dot(cross_row_sums) + gram_nn_sum / (n * n);
}

double SdrProblem::lifted_objective(const Matrix& a) const {
    return objective_matrix.cwiseProduct(a).sum() + constant_term;
}

nlohmann::json SdrProblem::to_json() const {
    nlohmann::json j;
    j["schema"] = "vcei.sdr/1";
    j["sense"] = "maximize";
    j["variable"] = {{"name", "A"}, {"rows", size()}, {"cols", size()}, {"symmetric", true}};
    j["objective"] = {{"matrix", matrix_json(objective_matrix)}, {"constant", constant_term}};
    // [[A, A1], [1^T A, 1]] is PSD exactly when A is, given the normalization
    j["cones"] = {{"psd", {{"size", size()}, {"applies_to", "A"}}},
                  {"nonnegative", {{"size", variable_count()}, {"applies_to", "A entrywise"}}}};
    nlohmann::json eq = nlohmann::json::array();
    eq.push_back({{"name", "normalization"}, {"matrix", "ones"}, {"rhs", 1.0}});
    j["equalities"] = eq;
    nlohmann::json ineq = nlohmann::json::array();
    if (program.row_cap) {
        ineq.push_back({{"name", "row_sum"}, {"form", "A 1 <= rhs (each row)"}, {"rhs", *program.row_cap}});
    }
    for (const auto& g : program.inequalities) {
        ineq.push_back({{"name", "mmd_slack"}, {"form", "<matrix, A> <= rhs"}, {"matrix", matrix_json(g.coefficients)},
                        {"rhs", g.bound}});
    }
    j["inequalities"] = ineq;
    j["n_full"] = n_full;
    j["b_alpha"] = b_alpha ? nlohmann::json(*b_alpha) : nlohmann::json(nullptr);
    j["b_d"] = b_d ? nlohmann::json(*b_d) : nlohmann::json(nullptr);
    return j;
}

SdrProblem build_problem(const Matrix& gram_mm, const Matrix& gram_mn, double gram_nn_sum,
                         std::optional<double> b_alpha, std::optional<double> b_d) {
    const Eigen::Index m = gram_mm.rows();
    if (gram_mm.cols() != m) throw ShapeError("subset Gram matrix must be square");
    if (m < 2) throw InsufficientDataError("the weighted subset needs at least 2 points");
    if (gram_mn.rows() != m) {
        throw ShapeError("cross Gram matrix has " + std::to_string(gram_mn.rows()) + " rows, expected " +
                         std::to_string(m));
    }
    if (gram_mn.cols() < 1) throw ShapeError("cross Gram matrix has no columns");
    if (!gram_mm.allFinite() || !gram_mn.allFinite() || !std::isfinite(gram_nn_sum)) {
        throw UsageError("Gram data has non-finite entries");
    }
    const double md = static_cast<double>(m);
    if (b_alpha) {
        if (!std::isfinite(*b_alpha) || *b_alpha * md < 1.0 - kBoundSlack) {
            throw InfeasibleBoundError("b_alpha = " + std::to_string(*b_alpha) + " is below 1/M = " +
                                       std::to_string(1.0 / md));
        }
        if (*b_alpha > 1.0 + kBoundSlack) throw UsageError("b_alpha must not exceed 1");
    }

    SdrProblem p;
    p.gram_mm = 0.5 * (gram_mm + gram_mm.transpose());
    p.cross_row_sums = gram_mn.rowwise().sum();
    p.gram_nn_sum = gram_nn_sum;
    p.n_full = gram_mn.cols();
    p.b_alpha = b_alpha;
    p.b_d = b_d;

    const double n = static_cast<double>(p.n_full);
    const Vector ones = Vector::Ones(m);
    p.objective_matrix =
        p.gram_mm - (1.0 / n) * (p.cross_row_sums * ones.transpose() + ones * p.cross_row_sums.transpose());
    p.constant_term = gram_nn_sum / (n * n);
    p.program.objective = p.objective_matrix;
    if (b_alpha) p.program.row_cap = std::max(*b_alpha, 1.0 / md);

    if (b_d) {
        if (!std::isfinite(*b_d)) throw UsageError("b_d must be finite");
        // MMD^2(weighted subset, uniform subset) <= MMD^2(uniform subset, full) + b_d
        const Vector k1 = p.gram_mm.rowwise().sum();
        const double kk = k1.sum();
        const double reference = kk / (md * md) - 2.0 * p.cross_row_sums.sum() / (md * n) + p.constant_term;
        const double rhs = reference + *b_d;
        if (rhs < -kBoundSlack) {
            throw InfeasibleBoundError("b_d = " + std::to_string(*b_d) + " makes the MMD bound negative");
        }
        LinearInequality g;
        g.coefficients = p.gram_mm - (1.0 / md) * (k1 * ones.transpose() + ones * k1.transpose());
        g.bound = std::max(rhs, 0.0) - kk / (md * md);
        p.program.inequalities.push_back(std::move(g));
    }
    return p;
}

std::string_view to_string(SolverBackend b) {
    switch (b) {
        case SolverBackend::Auto: return "auto";
        case SolverBackend::InteriorPoint: return "interior-point";
        case SolverBackend::Admm: return "admm";
    }
    return "unknown";
}

SolverBackend parse_backend(std::string_view name) {
    if (name == "auto") return SolverBackend::Auto;
    if (name == "interior-point" || name == "ipm") return SolverBackend::InteriorPoint;
    if (name == "admm") return SolverBackend::Admm;
    throw UsageError("unknown solver backend '" + std::string(name) + "' (expected auto, interior-point or admm)");
}

double rank_one_gap(const Matrix& a) {
    const double trace = a.trace();
    if (!(trace > 0.0)) return 1.0;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
    return std::clamp(1.0 - eig.eigenvalues().maxCoeff() / trace, 0.0, 1.0);
}

nlohmann::json SdrSolution::to_json() const {
    nlohmann::json j;
    j["status"] = std::string(to_string(status));
    j["backend"] = backend;
    j["iterations"] = iterations;
    j["sdr_objective"] = sdr_objective;
    j["recovered_objective"] = recovered_objective;
    j["dual_bound"] = dual_bound;
    j["rank_one_gap"] = rank_one_gap;
    j["rank_one_warning"] = rank_one_warning;
    j["max_violation"] = max_violation;
    j["support_size"] = weights.size() > 0 ? weights.support_size() : 0;
    j["diagnostics"] = diagnostics;
    return j;
}

namespace {

/// Coefficients of Delta -> <B, Delta> over the upper triangle of a symmetric r x r Delta.
Vector svec_functional(const Matrix& b) {
    const Eigen::Index r = b.rows();
    Vector out(r * (r + 1) / 2);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = i; j < r; ++j) out(k++) = i == j ? b(i, i) : b(i, j) + b(j, i);
    }
    return out;
}

Matrix smat(const Vector& x, Eigen::Index r) {
    Matrix out(r, r);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = i; j < r; ++j, ++k) {
            out(i, j) = x(k);
            out(j, i) = x(k);
        }
    }
    return out;
}

/// The relaxation's optimal set is a face that can contain matrices of
/// several ranks (symmetric ties give a diagonal optimum as well as the
/// Dirac lifts). Starting from A = V V^T, move along V (I - t D) V^T with D
/// chosen to keep the objective, the normalization and every active
/// constraint fixed, until the rank drops or an inactive constraint becomes
/// active. Returns the number of steps taken.
int reduce_rank(const SdrProblem& problem, Matrix& a, Eigen::Index max_rank, int max_steps) {
    const Eigen::Index m = a.rows();
    const Vector ones = Vector::Ones(m);
    int steps = 0;
    for (; steps < max_steps; ++steps) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
        const Vector& lam = eig.eigenvalues();
        const double top = lam(m - 1);
        if (!(top > 0.0)) break;
        Eigen::Index r = 0;
        while (r < m && lam(m - 1 - r) > 1e-9 * top) ++r;
        if (r <= 1 || r > max_rank) break;
        const Matrix v = eig.eigenvectors().rightCols(r) * lam.tail(r).cwiseSqrt().asDiagonal();
        const Vector w = v.transpose() * ones;
        const Vector rows = a * ones;
        const double entry_tol = 1e-8 * a.maxCoeff();

        std::vector<Vector> constraints;
        constraints.push_back(svec_functional(w * w.transpose()));
        constraints.push_back(svec_functional(v.transpose() * problem.objective_matrix * v));
        std::vector<Eigen::Index> support;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (a(i, i) > entry_tol) support.push_back(i);
        }
        for (std::size_t p = 0; p < support.size(); ++p) {
            for (std::size_t q = p + 1; q < support.size(); ++q) {
                const Eigen::Index i = support[p];
                const Eigen::Index j = support[q];
                if (a(i, j) <= entry_tol) {
                    const Matrix b = v.row(i).transpose() * v.row(j);
                    constraints.push_back(svec_functional(0.5 * (b + b.transpose())));
                }
            }
        }
        if (problem.program.row_cap) {
            for (Eigen::Index i = 0; i < m; ++i) {
                if (rows(i) >= *problem.program.row_cap - 1e-8) {
                    const Matrix b = v.row(i).transpose() * w.transpose();
                    constraints.push_back(svec_functional(0.5 * (b + b.transpose())));
                }
            }
        }
        for (const auto& g : problem.program.inequalities) {
            if (g.coefficients.cwiseProduct(a).sum() >= g.bound - 1e-8) {
                constraints.push_back(svec_functional(v.transpose() * g.coefficients * v));
            }
        }

        const Eigen::Index params = r * (r + 1) / 2;
        Matrix q(static_cast<Eigen::Index>(constraints.size()), params);
        for (std::size_t k = 0; k < constraints.size(); ++k) {
            const double norm = constraints[k].norm();
            q.row(static_cast<Eigen::Index>(k)) = constraints[k].transpose() / std::max(norm, 1e-300);
        }
        Eigen::BDCSVD<Matrix> svd(q, Eigen::ComputeFullV);
        const Vector& sv = svd.singularValues();
        const Eigen::Index nonzero = (sv.array() > 1e-10).count();
        if (nonzero >= params) break;
        Matrix d = smat(svd.matrixV().col(params - 1), r);
        Eigen::SelfAdjointEigenSolver<Matrix> d_eig(d, Eigen::EigenvaluesOnly);
        if (d_eig.eigenvalues().maxCoeff() <= 0.0) d = -d;
        double t = 1.0 / std::max(d_eig.eigenvalues().maxCoeff(), -d_eig.eigenvalues().minCoeff());

        const Matrix da = -v * d * v.transpose();
        for (std::size_t p = 0; p < support.size(); ++p) {
            for (std::size_t qq = p; qq < support.size(); ++qq) {
                const Eigen::Index i = support[p];
                const Eigen::Index j = support[qq];
                if (a(i, j) > entry_tol && da(i, j) < 0.0) t = std::min(t, a(i, j) / -da(i, j));
            }
        }
        if (problem.program.row_cap) {
            const Vector drows = da * ones;
            for (Eigen::Index i = 0; i < m; ++i) {
                const double slack = *problem.program.row_cap - rows(i);
                if (slack > 1e-8 && drows(i) > 0.0) t = std::min(t, slack / drows(i));
            }
        }
        for (const auto& g : problem.program.inequalities) {
            const double slack = g.bound - g.coefficients.cwiseProduct(a).sum();
            const double dg = g.coefficients.cwiseProduct(da).sum();
            if (slack > 1e-8 && dg > 0.0) t = std::min(t, slack / dg);
        }
        if (!(t > 0.0) || !std::isfinite(t)) break;
        Matrix next = a + t * da;
        next = (0.5 * (next + next.transpose())).cwiseMax(0.0);
        a = next / next.sum();
    }
    return steps;
}

ConicResult run_backend(const SdrProblem& problem, SolverBackend backend, const SolverOptions& options,
                        AdmmState* warm) {
    if (backend == SolverBackend::InteriorPoint) return solve_dnn_interior_point(problem.program, options.interior_point);
    return solve_dnn_admm(problem.program, options.admm, warm);
}

}  // namespace

SdrSolution solve(const SdrProblem& problem, const SolverOptions& options) {
    return solve(problem, options, nullptr);
}

SdrSolution solve(const SdrProblem& problem, const SolverOptions& options, AdmmState* warm) {
    const Eigen::Index m = problem.size();
    SolverBackend backend = options.backend;
    if (backend == SolverBackend::Auto) {
        backend = m <= options.interior_point_max_size ? SolverBackend::InteriorPoint : SolverBackend::Admm;
    }

    SdrSolution out;
    ConicResult r;
    bool have_result = false;
    try {
        r = run_backend(problem, backend, options, warm);
        have_result = true;
    } catch (const Error& e) {
        out.diagnostics.push_back(std::string(to_string(backend)) + ": " + e.what());
    }
    if (options.backend == SolverBackend::Auto && backend == SolverBackend::InteriorPoint &&
        (!have_result || r.status != SolveStatus::Optimal)) {
        out.diagnostics.push_back("interior point did not converge; solved again with admm");
        log::info("interior point did not converge at M={}, retrying with admm", m);
        try {
            r = run_backend(problem, SolverBackend::Admm, options, warm);
            have_result = true;
        } catch (const Error& e) {
            out.diagnostics.push_back(std::string("admm: ") + e.what());
        }
    }
    if (!have_result || !r.a.allFinite()) {
        out.status = SolveStatus::Infeasible;
        out.backend = std::string(to_string(backend));
        out.lifted = Matrix::Constant(m, m, 1.0 / static_cast<double>(m * m));
        out.weights = WeightVector::uniform(m);
        out.diagnostics.push_back("no usable solver iterate");
        return out;
    }

    out.backend = r.backend;
    out.iterations = r.iterations;
    out.dual_bound = r.dual_objective + problem.constant_term;

    Matrix a = 0.5 * (r.a + r.a.transpose());
    a = a.cwiseMax(0.0);
    const double total = a.sum();
    if (total > 0.0) a /= total;
    out.lifted = a;
    out.max_violation = check_feasibility(problem.program, a).max();

    if (options.reduce_rank && rank_one_gap(a) > options.rank_one_warning) {
        Matrix reduced = a;
        const int steps = reduce_rank(problem, reduced, options.reduce_rank_max, options.reduce_rank_steps);
        if (steps > 0) {
            const double before = problem.lifted_objective(a);
            const double after = problem.lifted_objective(reduced);
            const double violation = check_feasibility(problem.program, reduced).max();
            if (std::abs(after - before) <= 1e-9 * (1.0 + std::abs(before)) &&
                violation <= std::max(options.feasibility_tol, out.max_violation)) {
                a = reduced;
                out.lifted = a;
                out.max_violation = violation;
                out.diagnostics.push_back("rank reduced within the optimal face in " + std::to_string(steps) +
                                          " steps");
            }
        }
    }

    Vector alpha = project_to_simplex(a.rowwise().sum());
    const double top = alpha.maxCoeff();
    for (Eigen::Index i = 0; i < m; ++i) {
        if (alpha(i) < options.weight_floor && alpha(i) < top) alpha(i) = 0.0;
    }
    alpha /= alpha.sum();
    out.weights = WeightVector(alpha);

    out.sdr_objective = problem.lifted_objective(a);
    out.recovered_objective = problem.objective(alpha);
    out.rank_one_gap = rank_one_gap(a);
    out.rank_one_warning = out.rank_one_gap > options.rank_one_warning;
    if (out.rank_one_warning) {
        out.diagnostics.push_back("lifted solution is far from rank one (gap " + std::to_string(out.rank_one_gap) +
                                  "); recovered weights are a heuristic");
    }

    out.status = r.status;
    if (out.max_violation > kFailureViolation) {
        out.status = SolveStatus::Infeasible;
        out.diagnostics.push_back("constraint violation " + std::to_string(out.max_violation));
    } else if (out.max_violation > options.feasibility_tol && out.status == SolveStatus::Optimal) {
        out.status = SolveStatus::Inaccurate;
        out.diagnostics.push_back("constraint violation " + std::to_string(out.max_violation) + " above tolerance");
    }
    if (out.recovered_objective > out.sdr_objective + options.sandwich_tol) {
        if (out.status == SolveStatus::Optimal) out.status = SolveStatus::Inaccurate;
        out.diagnostics.push_back("recovered objective exceeds the relaxation value");
    }
    if (r.status != SolveStatus::Optimal) {
        out.diagnostics.push_back(std::string(r.backend) + " stopped after " + std::to_string(r.iterations) +
                                  " iterations (primal residual " + std::to_string(r.primal_residual) +
                                  ", dual residual " + std::to_string(r.dual_residual) + ")");
    }
    return out;
}

std::vector<SweepPoint> sweep_b_alpha(const Matrix& gram_mm, const Matrix& gram_mn, double gram_nn_sum,
                                      const std::vector<double>& grid, const SolverOptions& options,
                                      std::optional<double> b_d) {
    if (grid.empty()) throw UsageError("b_alpha grid is empty");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) throw UsageError("b_alpha grid must be strictly ascending");
    }
    std::vector<SweepPoint> out;
    out.reserve(grid.size());
    AdmmState warm;
    for (double b : grid) {
        const SdrProblem problem = build_problem(gram_mm, gram_mn, gram_nn_sum, b, b_d);
        SdrSolution s = solve(problem, options, &warm);
        if (s.status == SolveStatus::Infeasible) {
            std::string detail = s.diagnostics.empty() ? std::string("solver failure") : s.diagnostics.back();
            throw SolverError("b_alpha = " + std::to_string(b) + ": " + detail);
        }
        out.push_back(SweepPoint{b, std::move(s)});
    }
    return out;
}

}  // namespace vcei
