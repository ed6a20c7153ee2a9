#include "vcei/regressor.hpp"
#include "vcei/log.hpp"

#include <random>
#include <string>
#include <vector>

namespace vcei {

std::string_view to_string(WeightingScheme s) {
    return s == WeightingScheme::Precision ? "precision" : "resampling";
}

WeightingScheme parse_weighting(std::string_view text) {
    if (text == "precision") return WeightingScheme::Precision;
    if (text == "resampling" || text == "resample") return WeightingScheme::Resampling;
    throw UsageError("unknown weighting scheme '" + std::string(text) + "' (expected precision or resampling)");
}

WeightedGp WeightedGp::fit(const SampleSet& inputs, const Matrix& targets, const std::optional<WeightVector>& weights,
                           const Kernel& kernel, const GpOptions& options) {
    const Eigen::Index n = inputs.rows();
    if (targets.rows() != n) {
        throw ShapeError("GP has " + std::to_string(n) + " inputs but " + std::to_string(targets.rows()) + " targets");
    }
    if (weights && weights->size() != n) {
        throw ShapeError("GP has " + std::to_string(n) + " inputs but " + std::to_string(weights->size()) + " weights");
    }
    if (!(options.noise_variance > 0.0) || !std::isfinite(options.noise_variance)) {
        throw UsageError("noise variance must be positive");
    }
    if (!inputs.allFinite() || !targets.allFinite()) throw UsageError("GP training data has non-finite entries");

    const WeightVector w = weights ? *weights : WeightVector::uniform(std::max<Eigen::Index>(n, 1));
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (w[i] > 0.0) keep.push_back(i);
    }
    const auto n_eff = static_cast<Eigen::Index>(keep.size());
    if (n_eff < 2) {
        throw InsufficientSupportError("GP needs at least 2 samples with positive weight, got " +
                                       std::to_string(n_eff));
    }

    WeightedGp gp;
    gp.kernel_ = kernel;
    gp.noise_variance_ = options.noise_variance;
    gp.scheme_ = options.scheme;
    gp.n_eff_ = n_eff;

    Matrix y;
    if (options.scheme == WeightingScheme::Precision) {
        gp.train_x_.resize(n_eff, inputs.cols());
        y.resize(n_eff, targets.cols());
        gp.noise_.resize(n_eff);
        for (Eigen::Index k = 0; k < n_eff; ++k) {
            const Eigen::Index i = keep[static_cast<std::size_t>(k)];
            gp.train_x_.row(k) = inputs.row(i);
            y.row(k) = targets.row(i);
            gp.noise_(k) = options.noise_variance / (static_cast<double>(n_eff) * w[i]);
        }
    } else {
        std::vector<double> probs(w.values().data(), w.values().data() + n);
        std::discrete_distribution<Eigen::Index> draw(probs.begin(), probs.end());
        std::mt19937_64 rng(options.resample_seed);
        gp.train_x_.resize(n_eff, inputs.cols());
        y.resize(n_eff, targets.cols());
        for (Eigen::Index k = 0; k < n_eff; ++k) {
            const Eigen::Index i = draw(rng);
            gp.train_x_.row(k) = inputs.row(i);
            y.row(k) = targets.row(i);
        }
        gp.noise_ = Vector::Constant(n_eff, options.noise_variance);
    }

    Matrix k = gram(kernel, gp.train_x_).values;
    k.diagonal() += gp.noise_;
    Eigen::LLT<Matrix> llt(k);
    if (llt.info() != Eigen::Success) {
        bool ok = false;
        for (double jitter : {1e-8, 1e-6, 1e-4}) {
            Matrix kj = k;
            kj.diagonal().array() += jitter;
            llt.compute(kj);
            if (llt.info() == Eigen::Success) {
                gp.jitter_ = jitter;
                log::debug("GP factorization needed jitter {}", jitter);
                ok = true;
                break;
            }
        }
        if (!ok) throw FactorizationError("GP covariance is not positive definite even with jitter 1e-4");
    }
    gp.coefficients_ = llt.solve(y);
    return gp;
}

Matrix WeightedGp::predict_mean(const SampleSet& query) const {
    if (coefficients_.size() == 0) throw UsageError("GP is not fitted");
    if (query.cols() != train_x_.cols()) {
        throw ShapeError("query has " + std::to_string(query.cols()) + " columns, model expects " +
                         std::to_string(train_x_.cols()));
    }
    return gram(kernel_, query, train_x_).values * coefficients_;
}

nlohmann::json WeightedGp::summary() const {
    return {{"lengthscale", kernel_.lengthscale},
            {"noise_variance", noise_variance_},
            {"weighting", std::string(to_string(scheme_))},
            {"training_size", training_size()},
            {"effective_count", n_eff_},
            {"jitter", jitter_}};
}

}  // namespace vcei
