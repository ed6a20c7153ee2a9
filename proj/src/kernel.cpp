#include "vcei/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

namespace vcei {

namespace {

double squared_distance(const SampleSet& a, Eigen::Index i, const SampleSet& b, Eigen::Index j) {
    double d2 = 0.0;
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
        const double diff = a(i, k) - b(j, k);
        d2 += diff * diff;
    }
    return d2;
}

void require_same_dim(const SampleSet& a, const SampleSet& b) {
    if (a.cols() != b.cols()) {
        throw ShapeError("sample sets have different dimensionality (" + std::to_string(a.cols()) +
                         " vs " + std::to_string(b.cols()) + ")");
    }
}

SampleSet subsample_rows(const SampleSet& samples, Eigen::Index cap, std::uint64_t seed) {
    if (cap <= 0 || samples.rows() <= cap) return samples;
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(samples.rows()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::mt19937_64 rng(seed ^ 0x5eedf01dULL);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(static_cast<std::size_t>(cap));
    std::sort(idx.begin(), idx.end());
    SampleSet out(cap, samples.cols());
    for (Eigen::Index r = 0; r < cap; ++r) out.row(r) = samples.row(idx[static_cast<std::size_t>(r)]);
    return out;
}

}  // namespace

Kernel Kernel::squared_exponential(double lengthscale, double output_scale) {
    if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
        throw UsageError("kernel lengthscale must be positive and finite");
    }
    if (!(output_scale > 0.0) || !std::isfinite(output_scale)) {
        throw UsageError("kernel output scale must be positive and finite");
    }
    return Kernel{lengthscale, output_scale};
}

double Kernel::from_squared_distance(double d2) const {
    return output_scale * std::exp(-d2 / (2.0 * lengthscale * lengthscale));
}

double Kernel::operator()(const Eigen::Ref<const Eigen::RowVectorXd>& u,
                          const Eigen::Ref<const Eigen::RowVectorXd>& v) const {
    if (u.size() != v.size()) throw ShapeError("kernel arguments have different dimensionality");
    return from_squared_distance((u - v).squaredNorm());
}

GramMatrix gram(const Kernel& kernel, const SampleSet& a, const SampleSet& b) {
    require_same_dim(a, b);
    GramMatrix g;
    g.values.resize(a.rows(), b.rows());
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            g.values(i, j) = kernel.from_squared_distance(squared_distance(a, i, b, j));
        }
    }
    return g;
}

GramMatrix gram(const Kernel& kernel, const SampleSet& a) {
    GramMatrix g;
    g.symmetric = true;
    const Eigen::Index n = a.rows();
    g.values.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        g.values(j, j) = kernel.output_scale;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double v = kernel.from_squared_distance(squared_distance(a, i, a, j));
            g.values(i, j) = v;
            g.values(j, i) = v;
        }
    }
    return g;
}

double gram_sum(const Kernel& kernel, const SampleSet& a, const SampleSet& b) {
    require_same_dim(a, b);
    double total = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        double row = 0.0;
        for (Eigen::Index j = 0; j < b.rows(); ++j) {
            row += kernel.from_squared_distance(squared_distance(a, i, b, j));
        }
        total += row;
    }
    return total;
}

double gram_sum(const Kernel& kernel, const SampleSet& a) {
    // Off-diagonal terms counted twice; the diagonal is output_scale.
    double off = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        double row = 0.0;
        for (Eigen::Index j = i + 1; j < a.rows(); ++j) {
            row += kernel.from_squared_distance(squared_distance(a, i, a, j));
        }
        off += row;
    }
    return 2.0 * off + static_cast<double>(a.rows()) * kernel.output_scale;
}

Vector gram_row_sums(const Kernel& kernel, const SampleSet& a, const SampleSet& b) {
    require_same_dim(a, b);
    Vector out(a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        double row = 0.0;
        for (Eigen::Index j = 0; j < b.rows(); ++j) {
            row += kernel.from_squared_distance(squared_distance(a, i, b, j));
        }
        out(i) = row;
    }
    return out;
}

std::string_view to_string(LengthscaleMethod m) {
    return m == LengthscaleMethod::KdeCv5 ? "kdecv5" : "median";
}

LengthscaleMethod parse_lengthscale_method(std::string_view text) {
    if (text == "kdecv5" || text == "KdeCv5") return LengthscaleMethod::KdeCv5;
    if (text == "median" || text == "MedianHeuristic") return LengthscaleMethod::MedianHeuristic;
    throw UsageError("unknown lengthscale method '" + std::string(text) + "' (expected kdecv5 or median)");
}

double median_pairwise_distance(const SampleSet& samples) {
    const Eigen::Index n = samples.rows();
    if (n < 2) throw InsufficientDataError("median heuristic needs at least 2 samples");
    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = std::sqrt(squared_distance(samples, i, samples, j));
            if (d > 0.0) dists.push_back(d);
        }
    }
    if (dists.empty()) throw DegenerateSampleError("all pairwise distances are zero");
    const std::size_t mid = dists.size() / 2;
    std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid), dists.end());
    const double upper = dists[mid];
    if (dists.size() % 2 == 1) return upper;
    const double lower = *std::max_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

Vector kde_bandwidth_grid(const SampleSet& samples, const LengthscaleOptions& options) {
    if (options.grid_size < 1) throw UsageError("lengthscale grid needs at least one candidate");
    const double anchor = median_pairwise_distance(samples);
    Vector grid(options.grid_size);
    const double lo = std::log10(options.grid_low);
    const double hi = std::log10(options.grid_high);
    for (int k = 0; k < options.grid_size; ++k) {
        const double t = options.grid_size == 1 ? 0.0 : static_cast<double>(k) / (options.grid_size - 1);
        grid(k) = anchor * std::pow(10.0, lo + t * (hi - lo));
    }
    return grid;
}

std::vector<std::vector<Eigen::Index>> make_folds(Eigen::Index n, int folds, std::uint64_t seed) {
    if (folds < 2 || n < folds) {
        throw InsufficientDataError("cross validation needs at least " + std::to_string(folds) +
                                    " samples");
    }
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<Eigen::Index>> out(static_cast<std::size_t>(folds));
    // Contiguous chunks; the first n % folds chunks get one extra element.
    const Eigen::Index base = n / folds;
    const Eigen::Index extra = n % folds;
    Eigen::Index pos = 0;
    for (int f = 0; f < folds; ++f) {
        const Eigen::Index len = base + (f < extra ? 1 : 0);
        out[static_cast<std::size_t>(f)].assign(perm.begin() + pos, perm.begin() + pos + len);
        pos += len;
    }
    return out;
}

double kde_cv_log_likelihood(const SampleSet& samples, double bandwidth,
                             const std::vector<std::vector<Eigen::Index>>& folds) {
    const Eigen::Index n = samples.rows();
    const double d = static_cast<double>(samples.cols());
    const double h2 = bandwidth * bandwidth;
    std::vector<char> held(static_cast<std::size_t>(n));
    double total = 0.0;
    Eigen::Index count = 0;
    std::vector<double> expo;
    for (const auto& fold : folds) {
        std::fill(held.begin(), held.end(), 0);
        for (auto i : fold) held[static_cast<std::size_t>(i)] = 1;
        const double n_train = static_cast<double>(n - static_cast<Eigen::Index>(fold.size()));
        const double log_norm = -std::log(n_train) - 0.5 * d * std::log(2.0 * std::numbers::pi * h2);
        for (auto i : fold) {
            expo.clear();
            double peak = -std::numeric_limits<double>::infinity();
            for (Eigen::Index j = 0; j < n; ++j) {
                if (held[static_cast<std::size_t>(j)]) continue;
                const double e = -squared_distance(samples, i, samples, j) / (2.0 * h2);
                expo.push_back(e);
                peak = std::max(peak, e);
            }
            double acc = 0.0;
            for (double e : expo) acc += std::exp(e - peak);
            total += peak + std::log(acc) + log_norm;
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

double select_lengthscale(const SampleSet& samples, LengthscaleMethod method,
                          const LengthscaleOptions& options) {
    if (method == LengthscaleMethod::MedianHeuristic) {
        if (samples.rows() < 2) throw InsufficientDataError("median heuristic needs at least 2 samples");
        return median_pairwise_distance(subsample_rows(samples, options.max_samples, options.fold_seed));
    }
    if (samples.rows() < options.folds) {
        throw InsufficientDataError("KDE cross validation needs at least " +
                                    std::to_string(options.folds) + " samples");
    }
    const SampleSet work = subsample_rows(samples, options.max_samples, options.fold_seed);
    const Vector grid = kde_bandwidth_grid(work, options);
    const auto folds = make_folds(work.rows(), options.folds, options.fold_seed);
    double best = -std::numeric_limits<double>::infinity();
    double best_h = grid(0);
    for (Eigen::Index k = 0; k < grid.size(); ++k) {
        const double ll = kde_cv_log_likelihood(work, grid(k), folds);
        if (ll > best) {
            best = ll;
            best_h = grid(k);
        }
    }
    return best_h;
}

}  // namespace vcei
