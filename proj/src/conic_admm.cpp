#include "vcei/conic.hpp"
#include "vcei/log.hpp"

#include <Eigen/Cholesky>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

// Conic form (minimization over symmetric X):
//   minimize <q, X>  s.t.  -X + S_psd = 0, -X + S_nn = 0, L X + s_lin = h,
//   S_psd in S+, S_nn >= 0, s_lin in {0} x R+.
// The first linear row is the normalization 1^T X 1 = 1.

namespace vcei {
namespace {

constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
constexpr double kEqualityRhoScale = 1e3;

/// Projection onto the PSD cone. Only the positive part of the spectrum is
/// needed, which LAPACK's dsyevr can compute by value range.
Matrix project_psd(const Matrix& a) {
    const Eigen::Index n = a.rows();
    Matrix work = 0.5 * (a + a.transpose());
    const double upper = work.norm() + 1.0;
    Vector lam(n);
    Matrix vec(n, n);
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
    lapack_int found = 0;
    const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'V', 'L', static_cast<lapack_int>(n), work.data(),
                                           static_cast<lapack_int>(n), 0.0, upper, 0, 0, 0.0, &found, lam.data(),
                                           vec.data(), static_cast<lapack_int>(n), support.data());
    if (info != 0) throw SolverError("admm: eigendecomposition failed (dsyevr info " + std::to_string(info) + ")");
    if (found == 0) return Matrix::Zero(n, n);
    const auto vk = vec.leftCols(found);
    Matrix out = vk * lam.head(found).asDiagonal() * vk.transpose();
    return 0.5 * (out + out.transpose());
}

double inf_norm(const Matrix& a) {
    return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

double inf_norm(const Vector& a) {
    return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

/// Normalized linear rows: the total sum, optional row sums, then the dense
/// inequalities. Applied in O(M^2) without forming the row sum operators.
class LinearRows {
public:
    LinearRows(const DnnProgram& program) : m_(program.size()), caps_(program.row_cap.has_value()) {
        const double md = static_cast<double>(m_);
        const Eigen::Index ncap = caps_ ? m_ : 0;
        const Eigen::Index rows = 1 + ncap + static_cast<Eigen::Index>(program.inequalities.size());
        h_.resize(rows);
        total_norm_ = md;
        h_(0) = 1.0 / total_norm_;
        // row i: 0.5 (e_i 1^T + 1 e_i^T) with squared norm (M + 1) / 2
        cap_norm_ = std::sqrt((md + 1.0) / 2.0);
        for (Eigen::Index i = 0; i < ncap; ++i) h_(1 + i) = *program.row_cap / cap_norm_;
        Eigen::Index r = 1 + ncap;
        for (const auto& ineq : program.inequalities) {
            Matrix g = 0.5 * (ineq.coefficients + ineq.coefficients.transpose());
            const double norm = g.norm();
            if (norm == 0.0) throw UsageError("inequality has an all-zero coefficient matrix");
            dense_.push_back(g / norm);
            h_(r++) = ineq.bound / norm;
        }
        // Gram matrix of the rows (all symmetric, so Frobenius inner products)
        gram_ = Matrix::Zero(rows, rows);
        for (Eigen::Index a = 0; a < rows; ++a) {
            Vector e = Vector::Zero(rows);
            e(a) = 1.0;
            gram_.col(a) = apply(apply_transpose(e));
        }
        gram_ = 0.5 * (gram_ + gram_.transpose());
    }

    Eigen::Index count() const { return h_.size(); }
    const Vector& h() const { return h_; }
    const Matrix& gram() const { return gram_; }

    Vector apply(const Matrix& x) const {
        Vector out(count());
        out(0) = x.sum() / total_norm_;
        Eigen::Index r = 1;
        if (caps_) {
            out.segment(1, m_) = 0.5 * (x.rowwise().sum() + x.colwise().sum().transpose()) / cap_norm_;
            r += m_;
        }
        for (const auto& g : dense_) out(r++) = g.cwiseProduct(x).sum();
        return out;
    }

    Matrix apply_transpose(const Vector& y) const {
        Matrix out = Matrix::Constant(m_, m_, y(0) / total_norm_);
        Eigen::Index r = 1;
        if (caps_) {
            const Vector u = 0.5 * y.segment(1, m_) / cap_norm_;
            out.colwise() += u;
            out.rowwise() += u.transpose();
            r += m_;
        }
        for (const auto& g : dense_) out += y(r++) * g;
        return out;
    }

private:
    Eigen::Index m_;
    bool caps_;
    double total_norm_ = 1.0;
    double cap_norm_ = 1.0;
    std::vector<Matrix> dense_;
    Vector h_;
    Matrix gram_;
};

/// (c I + L^T D L)^{-1} through the Woodbury identity.
class KktSolver {
public:
    KktSolver(const LinearRows& rows, double sigma, double rho) : rows_(rows) { update(sigma, rho); }

    void update(double sigma, double rho) {
        c_ = sigma + 2.0 * rho;
        rho_lin_ = Vector::Constant(rows_.count(), rho);
        rho_lin_(0) = kEqualityRhoScale * rho;
        Matrix small = rows_.gram();
        small.diagonal() += c_ * rho_lin_.cwiseInverse();
        ldlt_.compute(small);
        if (ldlt_.info() != Eigen::Success) throw SolverError("admm: cannot factor the reduced system");
    }

    Matrix solve(const Matrix& v) const {
        const Vector lv = rows_.apply(v);
        const Vector u = ldlt_.solve(lv);
        return (v - rows_.apply_transpose(u)) / c_;
    }

    const Vector& rho_lin() const { return rho_lin_; }

private:
    const LinearRows& rows_;
    double c_ = 1.0;
    Vector rho_lin_;
    Eigen::LDLT<Matrix> ldlt_;
};

bool state_matches(const AdmmState& s, Eigen::Index m, Eigen::Index rows) {
    return s.x.rows() == m && s.x.cols() == m && s.s_lin.size() == rows && s.y_lin.size() == rows &&
           s.s_psd.rows() == m && s.s_nn.rows() == m && s.y_psd.rows() == m && s.y_nn.rows() == m && s.rho > 0.0;
}

}  // namespace

ConicResult solve_dnn_admm(const DnnProgram& program, const AdmmOptions& options, AdmmState* state) {
    program.validate();
    const Eigen::Index m = program.size();
    const LinearRows rows(program);
    const Eigen::Index nl = rows.count();
    const Vector& h = rows.h();

    const double c_norm = inf_norm(program.objective);
    const double cost_scale = c_norm > 0.0 ? 1.0 / c_norm : 1.0;
    const Matrix q = -cost_scale * 0.5 * (program.objective + program.objective.transpose());

    AdmmState st;
    if (state != nullptr && state_matches(*state, m, nl)) {
        st = *state;
    } else {
        st.x = Matrix::Constant(m, m, 1.0 / static_cast<double>(m * m));
        st.s_psd = st.x;
        st.s_nn = st.x;
        st.s_lin = (h - rows.apply(st.x)).cwiseMax(0.0);
        st.s_lin(0) = 0.0;
        st.y_psd = Matrix::Zero(m, m);
        st.y_nn = Matrix::Zero(m, m);
        st.y_lin = Vector::Zero(nl);
        st.rho = options.rho;
    }
    double rho = st.rho;
    KktSolver kkt(rows, options.sigma, rho);
    const double alpha = options.relaxation;

    ConicResult result;
    result.backend = "admm";
    bool converged = false;
    double r_prim = 0.0;
    double r_dual = 0.0;
    int it = 0;
    for (; it < options.max_iterations; ++it) {
        const Vector& rho_lin = kkt.rho_lin();
        // x step
        Matrix rhs = options.sigma * st.x - q;
        rhs += -(rho * (-st.s_psd) - st.y_psd);
        rhs += -(rho * (-st.s_nn) - st.y_nn);
        const Vector lin_u = rho_lin.cwiseProduct(h - st.s_lin) - st.y_lin;
        rhs += rows.apply_transpose(lin_u);
        Matrix xt = kkt.solve(rhs);
        xt = 0.5 * (xt + xt.transpose());

        // relaxed slack prediction s~ = b - A x~
        const Matrix hat_psd = alpha * xt + (1.0 - alpha) * st.s_psd;
        const Matrix hat_nn = alpha * xt + (1.0 - alpha) * st.s_nn;
        const Vector hat_lin = alpha * (h - rows.apply(xt)) + (1.0 - alpha) * st.s_lin;
        st.x = alpha * xt + (1.0 - alpha) * st.x;

        // projections and dual update
        st.s_psd = project_psd(hat_psd - st.y_psd / rho);
        st.s_nn = (hat_nn - st.y_nn / rho).cwiseMax(0.0);
        Vector s_lin = hat_lin - st.y_lin.cwiseQuotient(rho_lin);
        s_lin(0) = 0.0;
        s_lin.tail(nl - 1) = s_lin.tail(nl - 1).cwiseMax(0.0);
        st.s_lin = s_lin;
        st.y_psd += rho * (st.s_psd - hat_psd);
        st.y_nn += rho * (st.s_nn - hat_nn);
        st.y_lin += rho_lin.cwiseProduct(st.s_lin - hat_lin);

        const bool check = (it + 1) % options.check_interval == 0;
        const bool adapt = options.adaptive_rho && (it + 1) % options.adapt_interval == 0;
        if (!check && !adapt) continue;

        const Vector lx = rows.apply(st.x);
        const double rp = std::max({inf_norm(Matrix(st.s_psd - st.x)), inf_norm(Matrix(st.s_nn - st.x)),
                                    inf_norm(Vector(lx + st.s_lin - h))});
        const Matrix aty = -st.y_psd - st.y_nn + rows.apply_transpose(st.y_lin);
        const double rd = inf_norm(Matrix(q + aty));
        const double prim_scale = std::max({inf_norm(st.x), inf_norm(lx), inf_norm(st.s_psd), inf_norm(st.s_nn),
                                            inf_norm(st.s_lin), inf_norm(h)});
        const double dual_scale = std::max({inf_norm(q), inf_norm(st.y_psd), inf_norm(st.y_nn),
                                            inf_norm(rows.apply_transpose(st.y_lin))});
        r_prim = rp;
        r_dual = rd / cost_scale;

        if (check) {
            const double pcost = q.cwiseProduct(st.x).sum();
            const double dcost = -h.dot(st.y_lin);
            const double gap = std::abs(pcost - dcost);
            const bool ok = rp <= options.eps_abs + options.eps_rel * prim_scale &&
                            rd <= options.eps_abs + options.eps_rel * dual_scale &&
                            gap <= options.eps_abs + options.eps_rel * std::max(std::abs(pcost), std::abs(dcost));
            if ((it + 1) % 500 == 0 || ok) {
                log::debug("admm it {:5d} pcost {:.10e} dcost {:.10e} rp {:.2e} rd {:.2e} rho {:.2e}", it + 1,
                           -pcost / cost_scale, -dcost / cost_scale, rp, rd, rho);
            }
            if (ok) {
                converged = true;
                ++it;
                break;
            }
        }
        if (adapt) {
            const double ratio = std::sqrt((rp / std::max(prim_scale, 1e-300)) / std::max(rd / std::max(dual_scale, 1e-300), 1e-300));
            const double proposed = std::clamp(rho * ratio, kRhoMin, kRhoMax);
            if (proposed > 5.0 * rho || proposed < 0.2 * rho) {
                rho = proposed;
                kkt.update(options.sigma, rho);
            }
        }
    }
    st.rho = rho;
    if (state != nullptr) *state = st;

    Matrix a = 0.5 * (st.x + st.x.transpose());
    a = a.cwiseMax(0.0);
    const double total = a.sum();
    if (total > 0.0) a /= total;
    result.a = a;
    result.primal_objective = program.objective.cwiseProduct(a).sum();
    result.dual_objective = h.dot(st.y_lin) / cost_scale;
    result.iterations = it;
    result.primal_residual = r_prim;
    result.dual_residual = r_dual;
    result.status = converged ? SolveStatus::Optimal : SolveStatus::Inaccurate;
    return result;
}

}  // namespace vcei
