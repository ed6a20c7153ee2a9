#include "vcei/conic.hpp"
#include "vcei/log.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

// Conic form used here (minimization, x = upper triangle of A):
//   minimize c^T x  s.t.  e^T x = 1,  G x + s = h,  s in R+^p x R+^nd x S+^m
// where G x = (-x, Gd x, -mat(x)). Follows the usual coneqp recipe.

namespace vcei {
namespace {

struct Layout {
    explicit Layout(Eigen::Index m) : m(m), p(m * (m + 1) / 2), row(p), col(p), weight(p) {
        Eigen::Index k = 0;
        for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index j = i; j < m; ++j, ++k) {
                row[k] = i;
                col[k] = j;
                weight(k) = i == j ? 1.0 : 2.0;
            }
        }
    }

    Matrix to_matrix(const Vector& x) const {
        Matrix a(m, m);
        for (Eigen::Index k = 0; k < p; ++k) {
            a(row[k], col[k]) = x(k);
            a(col[k], row[k]) = x(k);
        }
        return a;
    }

    /// Coefficients of <U, mat(x)> for symmetric U.
    Vector adjoint(const Matrix& u) const {
        Vector out(p);
        for (Eigen::Index k = 0; k < p; ++k) {
            out(k) = row[k] == col[k] ? u(row[k], row[k]) : u(row[k], col[k]) + u(col[k], row[k]);
        }
        return out;
    }

    Eigen::Index m;
    Eigen::Index p;
    std::vector<Eigen::Index> row;
    std::vector<Eigen::Index> col;
    Vector weight;
};

struct Cone {
    Vector nn;
    Vector d;
    Matrix psd;

    double dot(const Cone& o) const { return nn.dot(o.nn) + d.dot(o.d) + psd.cwiseProduct(o.psd).sum(); }
    double norm() const { return std::sqrt(dot(*this)); }
};

Matrix symmetrize(const Matrix& a) {
    return 0.5 * (a + a.transpose());
}

struct Scaling {
    Vector d_nn, d_d;      // sqrt(s / z)
    Vector lam_nn, lam_d;  // sqrt(s * z)
    Matrix r, rinv, p, w;  // W(Z) = R^T Z R, p = (R R^T)^{-1}, w = R R^T
    Vector lam_psd;
};

bool compute_scaling(const Cone& s, const Cone& z, Scaling& out) {
    if ((s.nn.array() <= 0.0).any() || (z.nn.array() <= 0.0).any()) return false;
    if ((s.d.array() <= 0.0).any() || (z.d.array() <= 0.0).any()) return false;
    out.d_nn = (s.nn.array() / z.nn.array()).sqrt();
    out.lam_nn = (s.nn.array() * z.nn.array()).sqrt();
    out.d_d = (s.d.array() / z.d.array()).sqrt();
    out.lam_d = (s.d.array() * z.d.array()).sqrt();

    Eigen::LLT<Matrix> ls(s.psd);
    Eigen::LLT<Matrix> lz(z.psd);
    if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
    const Matrix l_s = ls.matrixL();
    const Matrix l_z = lz.matrixL();
    Eigen::JacobiSVD<Matrix> svd(l_z.transpose() * l_s, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector lam = svd.singularValues();
    if ((lam.array() <= 0.0).any() || !lam.allFinite()) return false;
    const Matrix& v = svd.matrixV();
    out.lam_psd = lam;
    out.r = l_s * v * lam.cwiseSqrt().cwiseInverse().asDiagonal();
    const Matrix t = l_s.transpose().triangularView<Eigen::Upper>().solve(v * lam.cwiseSqrt().asDiagonal());
    out.rinv = t.transpose();
    out.p = out.rinv.transpose() * out.rinv;
    out.w = out.r * out.r.transpose();
    return true;
}

/// Largest alpha with lam + alpha * v in the cone (infinity when unbounded).
double max_step(const Scaling& w, const Cone& v) {
    double alpha = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < v.nn.size(); ++i) {
        if (v.nn(i) < 0.0) alpha = std::min(alpha, -w.lam_nn(i) / v.nn(i));
    }
    for (Eigen::Index i = 0; i < v.d.size(); ++i) {
        if (v.d(i) < 0.0) alpha = std::min(alpha, -w.lam_d(i) / v.d(i));
    }
    const Vector inv_sqrt = w.lam_psd.cwiseSqrt().cwiseInverse();
    const Matrix scaled = inv_sqrt.asDiagonal() * symmetrize(v.psd) * inv_sqrt.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(scaled, Eigen::EigenvaluesOnly);
    const double mu = eig.eigenvalues()(0);
    if (mu < 0.0) alpha = std::min(alpha, -1.0 / mu);
    return alpha;
}

/// Jordan product u o v.
Cone jordan(const Cone& u, const Cone& v) {
    Cone out;
    out.nn = u.nn.cwiseProduct(v.nn);
    out.d = u.d.cwiseProduct(v.d);
    out.psd = 0.5 * (u.psd * v.psd + v.psd * u.psd);
    return out;
}

/// lam \ v for the scaled point lam.
Cone jordan_divide(const Scaling& w, const Cone& v) {
    Cone out;
    out.nn = v.nn.cwiseQuotient(w.lam_nn);
    out.d = v.d.cwiseQuotient(w.lam_d);
    const Eigen::Index m = v.psd.rows();
    out.psd.resize(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) out.psd(i, j) = 2.0 * v.psd(i, j) / (w.lam_psd(i) + w.lam_psd(j));
    }
    return out;
}

Cone lambda_cone(const Scaling& w) {
    return Cone{w.lam_nn, w.lam_d, Matrix(w.lam_psd.asDiagonal())};
}

struct NewtonDirection {
    Vector x;
    double y = 0.0;
    Cone z;
    Cone s;
};

class Problem {
public:
    Problem(const DnnProgram& program) : layout_(program.size()) {
        const Eigen::Index m = program.size();
        const Eigen::Index nd = (program.row_cap ? m : 0) + static_cast<Eigen::Index>(program.inequalities.size());
        gd_ = Matrix::Zero(nd, layout_.p);
        hd_ = Vector::Zero(nd);
        Eigen::Index r = 0;
        if (program.row_cap) {
            for (; r < m; ++r) {
                for (Eigen::Index k = 0; k < layout_.p; ++k) {
                    if (layout_.row[k] == r || layout_.col[k] == r) gd_(r, k) = 1.0;
                }
                hd_(r) = *program.row_cap;
            }
        }
        for (const auto& ineq : program.inequalities) {
            gd_.row(r) = layout_.adjoint(symmetrize(ineq.coefficients)).transpose();
            hd_(r) = ineq.bound;
            ++r;
        }
        c_ = -layout_.adjoint(symmetrize(program.objective));
    }

    const Layout& layout() const { return layout_; }
    const Vector& c() const { return c_; }
    const Vector& e() const { return layout_.weight; }
    Eigen::Index nd() const { return gd_.rows(); }

    Cone apply_g(const Vector& x) const { return Cone{-x, gd_ * x, -layout_.to_matrix(x)}; }

    Vector apply_gt(const Cone& z) const {
        return -z.nn + gd_.transpose() * z.d - layout_.adjoint(z.psd);
    }

    Cone h() const {
        const Eigen::Index m = layout_.m;
        return Cone{Vector::Zero(layout_.p), hd_, Matrix::Zero(m, m)};
    }

    const Vector& hd() const { return hd_; }

    /// G^T (W^T W)^{-1} G with the PSD block P B_b P projected back.
    Matrix reduced_matrix(const Scaling& w) const {
        const Eigen::Index p = layout_.p;
        Matrix h(p, p);
        const Matrix& pm = w.p;
        const double root2 = std::sqrt(2.0);
        for (Eigen::Index a = 0; a < p; ++a) {
            const Eigen::Index i = layout_.row[a];
            const Eigen::Index j = layout_.col[a];
            const double wa = i == j ? 1.0 / root2 : root2;
            for (Eigen::Index b = a; b < p; ++b) {
                const Eigen::Index k = layout_.row[b];
                const Eigen::Index l = layout_.col[b];
                const double wb = k == l ? 1.0 / root2 : root2;
                const double v = wa * wb * (pm(i, k) * pm(j, l) + pm(i, l) * pm(j, k));
                h(a, b) = v;
                h(b, a) = v;
            }
        }
        h.diagonal().array() += w.d_nn.array().square().inverse();
        if (nd() > 0) {
            const Vector zs = w.d_d.array().square().inverse();
            h.noalias() += gd_.transpose() * zs.asDiagonal() * gd_;
        }
        return h;
    }

private:
    Layout layout_;
    Matrix gd_;
    Vector hd_;
    Vector c_;
};

class NewtonSolver {
public:
    NewtonSolver(const Problem& problem, const Scaling& w, const Matrix& h, const Eigen::LLT<Matrix>& llt)
        : problem_(problem), w_(w), h_(h), llt_(llt) {
        hinv_e_ = llt_.solve(problem_.e());
        schur_ = problem_.e().dot(hinv_e_);
    }

    NewtonDirection solve(const Vector& bx, double by, const Cone& bz, const Cone& bs) const {
        Cone t;
        t.nn = w_.d_nn.cwiseProduct(bs.nn) - bz.nn;
        t.d = w_.d_d.cwiseProduct(bs.d) - bz.d;
        t.psd = symmetrize(w_.r * bs.psd * w_.r.transpose()) - bz.psd;

        Cone u;
        u.nn = t.nn.cwiseQuotient(w_.d_nn.cwiseAbs2());
        u.d = t.d.cwiseQuotient(w_.d_d.cwiseAbs2());
        u.psd = symmetrize(w_.p * t.psd * w_.p);
        const Vector rhs = bx - problem_.apply_gt(u);

        Vector dx;
        double dy = 0.0;
        reduced_solve(rhs, by, dx, dy);
        // one step of iterative refinement on the reduced system
        const Vector r1 = rhs - h_ * dx - problem_.e() * dy;
        const double r2 = by - problem_.e().dot(dx);
        Vector cx;
        double cy = 0.0;
        reduced_solve(r1, r2, cx, cy);
        dx += cx;
        dy += cy;

        NewtonDirection out;
        out.x = dx;
        out.y = dy;
        const Cone gdx = problem_.apply_g(dx);
        out.z.nn = (gdx.nn + t.nn).cwiseQuotient(w_.d_nn.cwiseAbs2());
        out.z.d = (gdx.d + t.d).cwiseQuotient(w_.d_d.cwiseAbs2());
        out.z.psd = symmetrize(w_.p * (gdx.psd + t.psd) * w_.p);
        out.s.nn = w_.d_nn.cwiseProduct(bs.nn) - w_.d_nn.cwiseAbs2().cwiseProduct(out.z.nn);
        out.s.d = w_.d_d.cwiseProduct(bs.d) - w_.d_d.cwiseAbs2().cwiseProduct(out.z.d);
        out.s.psd = symmetrize(w_.r * bs.psd * w_.r.transpose() - w_.w * out.z.psd * w_.w);
        return out;
    }

    /// W^{-T} ds and W dz.
    Cone scaled_s(const Cone& ds) const {
        return Cone{ds.nn.cwiseQuotient(w_.d_nn), ds.d.cwiseQuotient(w_.d_d),
                    symmetrize(w_.rinv * ds.psd * w_.rinv.transpose())};
    }

    Cone scaled_z(const Cone& dz) const {
        return Cone{dz.nn.cwiseProduct(w_.d_nn), dz.d.cwiseProduct(w_.d_d),
                    symmetrize(w_.r.transpose() * dz.psd * w_.r)};
    }

private:
    void reduced_solve(const Vector& rhs, double by, Vector& dx, double& dy) const {
        const Vector x1 = llt_.solve(rhs);
        dy = (problem_.e().dot(x1) - by) / schur_;
        dx = x1 - hinv_e_ * dy;
    }

    const Problem& problem_;
    const Scaling& w_;
    const Matrix& h_;
    const Eigen::LLT<Matrix>& llt_;
    Vector hinv_e_;
    double schur_ = 1.0;
};

Cone add(const Cone& a, double alpha, const Cone& b) {
    return Cone{a.nn + alpha * b.nn, a.d + alpha * b.d, symmetrize(a.psd + alpha * b.psd)};
}

Cone negate(const Cone& a) {
    return Cone{-a.nn, -a.d, -a.psd};
}

/// Largest t with the cone point shifted by -t*e still in the cone, negated:
/// i.e. the negative of the smallest "eigenvalue" over all blocks.
double min_eigen(const Cone& s) {
    double v = std::numeric_limits<double>::infinity();
    if (s.nn.size() > 0) v = std::min(v, s.nn.minCoeff());
    if (s.d.size() > 0) v = std::min(v, s.d.minCoeff());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(s.psd), Eigen::EigenvaluesOnly);
    return std::min(v, eig.eigenvalues()(0));
}

void shift_into_cone(Cone& s) {
    const double t = -min_eigen(s);
    if (t >= -1e-8 * std::max(s.norm(), 1.0)) {
        s.nn.array() += 1.0 + t;
        s.d.array() += 1.0 + t;
        s.psd.diagonal().array() += 1.0 + t;
    }
}

bool factorize(const Matrix& h, Eigen::LLT<Matrix>& llt, Matrix& used) {
    used = h;
    llt.compute(used);
    if (llt.info() == Eigen::Success) return true;
    const double scale = std::max(h.diagonal().cwiseAbs().maxCoeff(), 1.0);
    for (double jitter : {1e-14, 1e-12, 1e-10}) {
        used = h;
        used.diagonal().array() += jitter * scale;
        llt.compute(used);
        if (llt.info() == Eigen::Success) return true;
    }
    return false;
}

}  // namespace

ConicResult solve_dnn_interior_point(const DnnProgram& program, const InteriorPointOptions& options) {
    program.validate();
    const Problem problem(program);
    const Layout& lay = problem.layout();
    const Eigen::Index m = lay.m;
    const Eigen::Index p = lay.p;
    const Eigen::Index nd = problem.nd();
    const double degree = static_cast<double>(p + nd + m);
    const Cone h = problem.h();
    const double norm_c = std::max(1.0, problem.c().norm());
    const double norm_h = std::max(1.0, h.norm());

    // Starting point from the identity-scaled least-squares problems.
    Scaling identity;
    identity.d_nn = Vector::Ones(p);
    identity.lam_nn = Vector::Ones(p);
    identity.d_d = Vector::Ones(nd);
    identity.lam_d = Vector::Ones(nd);
    identity.r = Matrix::Identity(m, m);
    identity.rinv = identity.r;
    identity.p = identity.r;
    identity.w = identity.r;
    identity.lam_psd = Vector::Ones(m);
    Matrix h0 = problem.reduced_matrix(identity);
    Eigen::LLT<Matrix> llt0;
    Matrix h0_used;
    if (!factorize(h0, llt0, h0_used)) throw SolverError("interior point: cannot factor the initial system");

    Vector x;
    double y = 0.0;
    Cone s;
    Cone z;
    {
        NewtonSolver init(problem, identity, h0_used, llt0);
        // primal: minimize ||h - Gx|| s.t. e^T x = 1  (bx = G^T h, by = 1, bz = bs = 0)
        const Cone zero{Vector::Zero(p), Vector::Zero(nd), Matrix::Zero(m, m)};
        NewtonDirection d = init.solve(problem.apply_gt(h), 1.0, zero, zero);
        x = d.x;
        const Cone gx = problem.apply_g(x);
        s = add(h, -1.0, gx);
        // dual: minimize ||z|| s.t. G^T z + e y + c = 0
        NewtonDirection dd = init.solve(problem.c(), 0.0, zero, zero);
        y = -dd.y;
        z = negate(problem.apply_g(dd.x));
    }
    shift_into_cone(s);
    shift_into_cone(z);

    ConicResult result;
    result.backend = "interior-point";
    bool converged = false;
    double pres = 0.0;
    double dres = 0.0;
    double gap = 0.0;
    double pcost = 0.0;
    double dcost = 0.0;

    int it = 0;
    for (; it <= options.max_iterations; ++it) {
        const Vector rx = problem.c() + problem.e() * y + problem.apply_gt(z);
        const double ry = problem.e().dot(x) - 1.0;
        const Cone rz = add(add(problem.apply_g(x), 1.0, s), -1.0, h);
        gap = s.dot(z);
        pcost = problem.c().dot(x);
        dcost = -y - problem.hd().dot(z.d);
        pres = std::max(std::abs(ry), rz.norm() / norm_h);
        dres = rx.norm() / norm_c;
        double relgap = std::numeric_limits<double>::infinity();
        if (pcost < 0.0) relgap = gap / -pcost;
        else if (dcost > 0.0) relgap = gap / dcost;
        log::debug("ipm it {:3d} pcost {:.10e} dcost {:.10e} gap {:.2e} pres {:.2e} dres {:.2e}", it, pcost, dcost,
                   gap, pres, dres);

        if (pres <= options.feasibility_tol && dres <= options.feasibility_tol &&
            (gap <= options.absolute_gap_tol || relgap <= options.relative_gap_tol)) {
            converged = true;
            break;
        }
        if (it == options.max_iterations) break;

        Scaling w;
        if (!compute_scaling(s, z, w)) break;
        const Matrix hmat = problem.reduced_matrix(w);
        Eigen::LLT<Matrix> llt;
        Matrix used;
        if (!factorize(hmat, llt, used)) break;
        const NewtonSolver newton(problem, w, used, llt);
        const Cone lam = lambda_cone(w);
        const double mu = gap / degree;

        // predictor
        const NewtonDirection aff = newton.solve(-rx, -ry, negate(rz), negate(lam));
        const Cone ds_aff = newton.scaled_s(aff.s);
        const Cone dz_aff = newton.scaled_z(aff.z);
        const double alpha_aff = std::min(1.0, std::min(max_step(w, ds_aff), max_step(w, dz_aff)));
        const double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3.0), 0.0, 1.0);

        // corrector
        Cone target = jordan(lam, lam);
        const Cone cross = jordan(ds_aff, dz_aff);
        target.nn = sigma * mu - target.nn.array() - cross.nn.array();
        target.d = sigma * mu - target.d.array() - cross.d.array();
        target.psd = sigma * mu * Matrix::Identity(m, m) - target.psd - cross.psd;
        const NewtonDirection dir = newton.solve(-rx, -ry, negate(rz), jordan_divide(w, target));
        const Cone ds = newton.scaled_s(dir.s);
        const Cone dz = newton.scaled_z(dir.z);
        const double alpha_max = std::min(max_step(w, ds), max_step(w, dz));
        const double alpha = std::min(1.0, 0.99 * alpha_max);
        if (!(alpha > 1e-12)) break;

        x += alpha * dir.x;
        y += alpha * dir.y;
        s = add(s, alpha, dir.s);
        z = add(z, alpha, dir.z);
    }

    result.a = lay.to_matrix(x);
    result.primal_objective = -pcost;
    result.dual_objective = -dcost;
    result.iterations = it;
    result.primal_residual = pres;
    result.dual_residual = dres;
    if (converged) {
        result.status = SolveStatus::Optimal;
    } else {
        // the program is always feasible when validate() passes, so a stall is
        // reported as inaccurate and the caller checks the residuals
        result.status = SolveStatus::Inaccurate;
        const bool close = pres <= options.fallback_feasibility_tol && dres <= options.fallback_feasibility_tol &&
                           gap <= options.fallback_gap_tol;
        log::debug("ipm stopped after {} iterations (close to optimal: {})", it, close);
    }
    return result;
}

}  // namespace vcei
