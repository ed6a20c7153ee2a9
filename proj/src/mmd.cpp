#include "vcei/mmd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vcei {

WeightVector::WeightVector(Vector values) : values_(std::move(values)) {
    if (values_.size() == 0) throw ShapeError("weight vector is empty");
    if (!values_.allFinite()) throw UsageError("weight vector has non-finite entries");
    for (Eigen::Index i = 0; i < values_.size(); ++i) {
        if (values_(i) < -kNegativeTolerance) {
            throw UsageError("weight " + std::to_string(i) + " is negative (" + std::to_string(values_(i)) + ")");
        }
        if (values_(i) < 0.0) values_(i) = 0.0;
    }
    const double total = values_.sum();
    if (std::abs(total - 1.0) > kSumTolerance) {
        throw UsageError("weights sum to " + std::to_string(total) + ", expected 1");
    }
}

WeightVector WeightVector::uniform(Eigen::Index n) {
    if (n < 1) throw ShapeError("uniform weights need at least one entry");
    return WeightVector(Vector::Constant(n, 1.0 / static_cast<double>(n)));
}

Eigen::Index WeightVector::support_size() const {
    return (values_.array() > 0.0).count();
}

bool WeightVector::is_uniform(double tol) const {
    const double u = 1.0 / static_cast<double>(values_.size());
    return ((values_.array() - u).abs() <= tol).all();
}

Vector project_to_simplex(const Vector& v) {
    const Eigen::Index n = v.size();
    if (n == 0) throw ShapeError("cannot project an empty vector");
    std::vector<double> sorted(v.data(), v.data() + n);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double tau = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        cumulative += sorted[static_cast<std::size_t>(k)];
        const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
        if (sorted[static_cast<std::size_t>(k)] - t > 0.0) tau = t;
    }
    return (v.array() - tau).max(0.0);
}

namespace {

MmdEstimate finish(double raw) {
    return MmdEstimate{std::max(raw, 0.0), raw};
}

}  // namespace

MmdEstimate mmd2_biased(const Kernel& kernel, const SampleSet& a, const SampleSet& b) {
    if (a.rows() == 0 || b.rows() == 0) throw UsageError("MMD needs two nonempty sample sets");
    if (a.cols() != b.cols()) throw ShapeError("MMD sample sets have different dimensionality");
    const double n = static_cast<double>(a.rows());
    const double m = static_cast<double>(b.rows());
    const double saa = gram_sum(kernel, a);
    // identical inputs must give exactly zero, so reuse the symmetric sum
    const bool same = a.rows() == b.rows() && a == b;
    const double sbb = same ? saa : gram_sum(kernel, b);
    const double sab = same ? saa : gram_sum(kernel, a, b);
    const double raw = saa / (n * n) - 2.0 * sab / (n * m) + sbb / (m * m);
    return finish(raw);
}

MmdEstimate mmd2_weighted_vs_uniform(const GramMatrix& gram, const WeightVector& w) {
    if (gram.rows() != gram.cols()) throw ShapeError("weighted MMD needs a square Gram matrix");
    if (gram.rows() != w.size()) {
        throw ShapeError("Gram matrix is " + std::to_string(gram.rows()) + "x" + std::to_string(gram.cols()) +
                         " but the weight vector has " + std::to_string(w.size()) + " entries");
    }
    const Matrix& k = gram.values;
    const Vector& a = w.values();
    const double n = static_cast<double>(k.rows());
    const Vector k1 = k.rowwise().sum();
    const double raw = a.dot(k * a) - (2.0 / n) * a.dot(k1) + k1.sum() / (n * n);
    return finish(raw);
}

MmdEstimate mmd2_weighted_subset_vs_full(const Matrix& gram_mm, const Matrix& gram_mn, double gram_nn_sum,
                                         const WeightVector& w, Eigen::Index n_full) {
    if (gram_mm.rows() != gram_mm.cols()) throw ShapeError("subset Gram matrix must be square");
    if (gram_mm.rows() != w.size() || gram_mn.rows() != w.size()) {
        throw ShapeError("subset Gram matrices do not match the weight vector length");
    }
    if (gram_mn.cols() != n_full) throw ShapeError("cross Gram matrix columns do not match the full set size");
    const Vector& a = w.values();
    const double n = static_cast<double>(n_full);
    const double raw = a.dot(gram_mm * a) - (2.0 / n) * a.dot(gram_mn.rowwise().sum()) + gram_nn_sum / (n * n);
    return finish(raw);
}

}  // namespace vcei
