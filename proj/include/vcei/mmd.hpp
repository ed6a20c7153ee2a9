#pragma once

#include "vcei/common.hpp"
#include "vcei/kernel.hpp"

namespace vcei {

/// Mixture weights on the simplex. Construction clamps entries in
/// [-1e-10, 0) to zero and rejects anything further off.
class WeightVector {
public:
    static constexpr double kSumTolerance = 1e-8;
    static constexpr double kNegativeTolerance = 1e-10;

    WeightVector() = default;
    explicit WeightVector(Vector values);

    static WeightVector uniform(Eigen::Index n);

    const Vector& values() const { return values_; }
    Eigen::Index size() const { return values_.size(); }
    double operator[](Eigen::Index i) const { return values_(i); }
    /// Number of strictly positive entries.
    Eigen::Index support_size() const;
    bool is_uniform(double tol = 1e-12) const;

private:
    Vector values_;
};

/// Euclidean projection onto the probability simplex.
Vector project_to_simplex(const Vector& v);

/// Biased V-statistic; `raw` keeps the unclamped value.
struct MmdEstimate {
    double value = 0.0;
    double raw = 0.0;
    bool clamped() const { return raw < 0.0; }
};

/// (1/N^2) sum K_aa - (2/NM) sum K_ab + (1/M^2) sum K_bb, clamped at zero.
MmdEstimate mmd2_biased(const Kernel& kernel, const SampleSet& a, const SampleSet& b);

/// w^T K w - (2/N) w^T K 1 + (1/N^2) 1^T K 1 for a weighted copy of a sample
/// set against its uniform empirical distribution.
MmdEstimate mmd2_weighted_vs_uniform(const GramMatrix& gram, const WeightVector& w);

/// Weighted subset (M points) against the full uniform set (N points):
/// w^T K_mm w - (2/N) w^T K_mn 1 + (1/N^2) 1^T K_nn 1.
MmdEstimate mmd2_weighted_subset_vs_full(const Matrix& gram_mm, const Matrix& gram_mn,
                                         double gram_nn_sum, const WeightVector& w,
                                         Eigen::Index n_full);

}  // namespace vcei
