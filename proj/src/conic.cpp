#include "vcei/conic.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace vcei {

void DnnProgram::validate() const {
    const Eigen::Index m = objective.rows();
    if (m < 1 || objective.cols() != m) throw ShapeError("objective must be a nonempty square matrix");
    if (!objective.allFinite()) throw UsageError("objective has non-finite entries");
    if (row_cap) {
        if (!std::isfinite(*row_cap)) throw UsageError("row cap must be finite");
        if (*row_cap * static_cast<double>(m) < 1.0 - 1e-12) {
            throw InfeasibleBoundError("row cap " + std::to_string(*row_cap) + " is below 1/" + std::to_string(m));
        }
    }
    for (const auto& ineq : inequalities) {
        if (ineq.coefficients.rows() != m || ineq.coefficients.cols() != m) {
            throw ShapeError("inequality coefficients must match the objective size");
        }
        if (!ineq.coefficients.allFinite() || !std::isfinite(ineq.bound)) {
            throw UsageError("inequality has non-finite entries");
        }
    }
}

std::string_view to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Inaccurate: return "inaccurate";
        case SolveStatus::Infeasible: return "infeasible";
    }
    return "unknown";
}

double DnnViolation::max() const {
    return std::max({psd, bordered_psd, nonnegativity, normalization, symmetry, row_cap, inequalities});
}

namespace {

double negative_part_of_min_eigenvalue(const Matrix& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s, Eigen::EigenvaluesOnly);
    return std::max(0.0, -eig.eigenvalues()(0));
}

}  // namespace

DnnViolation check_feasibility(const DnnProgram& program, const Matrix& a) {
    const Eigen::Index m = program.size();
    if (a.rows() != m || a.cols() != m) throw ShapeError("candidate does not match the program size");
    DnnViolation v;
    v.symmetry = (a - a.transpose()).cwiseAbs().maxCoeff();
    const Matrix sym = 0.5 * (a + a.transpose());
    v.psd = negative_part_of_min_eigenvalue(sym);
    Matrix bordered(m + 1, m + 1);
    const Vector rows = sym.rowwise().sum();
    bordered.topLeftCorner(m, m) = sym;
    bordered.topRightCorner(m, 1) = rows;
    bordered.bottomLeftCorner(1, m) = rows.transpose();
    bordered(m, m) = 1.0;
    v.bordered_psd = negative_part_of_min_eigenvalue(bordered);
    v.nonnegativity = std::max(0.0, -sym.minCoeff());
    v.normalization = std::abs(sym.sum() - 1.0);
    if (program.row_cap) v.row_cap = std::max(0.0, rows.maxCoeff() - *program.row_cap);
    for (const auto& ineq : program.inequalities) {
        v.inequalities = std::max(v.inequalities, ineq.coefficients.cwiseProduct(sym).sum() - ineq.bound);
    }
    return v;
}

}  // namespace vcei
