#pragma once

#include "vcei/common.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace vcei {

/// Squared-exponential kernel k(u, v) = s * exp(-|u - v|^2 / (2 l^2)).
struct Kernel {
    double lengthscale = 1.0;
    double output_scale = 1.0;

    static Kernel squared_exponential(double lengthscale, double output_scale = 1.0);

    double operator()(const Eigen::Ref<const Eigen::RowVectorXd>& u,
                      const Eigen::Ref<const Eigen::RowVectorXd>& v) const;
    double from_squared_distance(double d2) const;
};

/// Kernel evaluations between two sample sets. `symmetric` is set when the
/// rows and columns index the same set, in which case `values` is exactly
/// symmetric.
struct GramMatrix {
    Matrix values;
    bool symmetric = false;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
    double sum() const { return values.sum(); }
};

GramMatrix gram(const Kernel& kernel, const SampleSet& a, const SampleSet& b);
GramMatrix gram(const Kernel& kernel, const SampleSet& a);

/// 1^T K(a, b) 1 without materializing the matrix.
double gram_sum(const Kernel& kernel, const SampleSet& a, const SampleSet& b);
double gram_sum(const Kernel& kernel, const SampleSet& a);

/// Row sums K(a, b) 1 without materializing the matrix.
Vector gram_row_sums(const Kernel& kernel, const SampleSet& a, const SampleSet& b);

enum class LengthscaleMethod { KdeCv5, MedianHeuristic };

std::string_view to_string(LengthscaleMethod m);
LengthscaleMethod parse_lengthscale_method(std::string_view text);

struct LengthscaleOptions {
    int grid_size = 25;
    double grid_low = 1e-2;   // relative to the median heuristic
    double grid_high = 1e2;
    int folds = 5;
    std::uint64_t fold_seed = 0;
    /// Larger sample sets are subsampled (seeded by fold_seed) before selection.
    Eigen::Index max_samples = 2000;
};

/// Median of the nonzero pairwise Euclidean distances.
double median_pairwise_distance(const SampleSet& samples);

/// Candidate bandwidths used by KdeCv5, ascending.
Vector kde_bandwidth_grid(const SampleSet& samples, const LengthscaleOptions& options);

/// Mean held-out log density of a Gaussian KDE with the given bandwidth,
/// averaged over all held-out points of the fold partition.
double kde_cv_log_likelihood(const SampleSet& samples, double bandwidth,
                             const std::vector<std::vector<Eigen::Index>>& folds);

std::vector<std::vector<Eigen::Index>> make_folds(Eigen::Index n, int folds, std::uint64_t seed);

double select_lengthscale(const SampleSet& samples, LengthscaleMethod method,
                          const LengthscaleOptions& options = {});

}  // namespace vcei
