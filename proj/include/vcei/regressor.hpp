#pragma once

#include "vcei/common.hpp"
#include "vcei/kernel.hpp"
#include "vcei/mmd.hpp"

#include <Eigen/Cholesky>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string_view>

namespace vcei {

enum class WeightingScheme {
    /// per-sample noise sigma^2 / (n_eff * w_i)
    Precision,
    /// seeded multinomial draw of n_eff samples, then an unweighted fit
    Resampling,
};

std::string_view to_string(WeightingScheme s);
WeightingScheme parse_weighting(std::string_view text);

struct GpOptions {
    double noise_variance = 1e-2;
    WeightingScheme scheme = WeightingScheme::Precision;
    std::uint64_t resample_seed = 0;
};

/// Exact GP regression with zero prior mean. Each target column is an
/// independent output sharing the kernel and noise model.
class WeightedGp {
public:
    static WeightedGp fit(const SampleSet& inputs, const Matrix& targets, const std::optional<WeightVector>& weights,
                          const Kernel& kernel, const GpOptions& options = {});

    /// Posterior mean, one row per query and one column per output.
    Matrix predict_mean(const SampleSet& query) const;

    const Kernel& kernel() const { return kernel_; }
    double noise_variance() const { return noise_variance_; }
    Eigen::Index training_size() const { return train_x_.rows(); }
    /// Number of strictly positive weights in the input.
    Eigen::Index effective_count() const { return n_eff_; }
    double jitter() const { return jitter_; }
    const Vector& noise_diagonal() const { return noise_; }

    nlohmann::json summary() const;

private:
    Kernel kernel_;
    double noise_variance_ = 0.0;
    WeightingScheme scheme_ = WeightingScheme::Precision;
    SampleSet train_x_;
    Vector noise_;
    Matrix coefficients_;  // (K + diag(noise))^{-1} targets
    Eigen::Index n_eff_ = 0;
    double jitter_ = 0.0;
};

}  // namespace vcei
