#pragma once

#include "vcei/common.hpp"
#include "vcei/kernel.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vcei {

/// N paired observations. Row n of `xs` is paired with row n of `ys`.
struct DataPair {
    SampleSet xs;
    SampleSet ys;
    std::optional<Direction> label;
    std::string name;

    Eigen::Index size() const { return xs.rows(); }
    /// Throws InsufficientDataError / ShapeError / MalformedFileError on a broken pair.
    void validate() const;
    /// Roles of x and y exchanged; the label follows.
    DataPair swapped() const;
};

/// Per-dimension robust location and scale (median, interquartile range).
struct ScalingParams {
    Vector center;
    Vector spread;

    static constexpr double kSpreadFloor = 1e-12;

    static ScalingParams fit(const SampleSet& samples);
    SampleSet transform(const SampleSet& samples) const;
    SampleSet inverse_transform(const SampleSet& samples) const;
};

struct StandardizedPair {
    DataPair pair;
    ScalingParams x_params;
    ScalingParams y_params;
};

/// Linear-interpolation quantile (numpy's default), q in [0, 1].
double quantile(std::vector<double> values, double q);

StandardizedPair robust_standardize(const DataPair& pair);

// ---------------------------------------------------------------------------
// Pair files

struct ColumnSpec {
    std::vector<int> x_cols{0};
    std::vector<int> y_cols{1};
};

DataPair load_pair(const std::filesystem::path& path, const ColumnSpec& columns = {});

/// Sidecar metadata lives next to the pair file as `<stem>.meta`.
std::filesystem::path metadata_path_for(const std::filesystem::path& pair_path);
std::optional<Direction> load_direction_metadata(const std::filesystem::path& meta_path);

void write_pair(const std::filesystem::path& path, const DataPair& pair);
void write_direction_metadata(const std::filesystem::path& meta_path, Direction direction);

/// One entry of a cause-effect-pairs `pairmeta.txt` index (1-based columns).
struct PairMetaEntry {
    std::string id;
    int cause_first = 0;
    int cause_last = 0;
    int effect_first = 0;
    int effect_last = 0;
    double weight = 1.0;

    bool univariate() const {
        return cause_first == cause_last && effect_first == effect_last;
    }
};

std::vector<PairMetaEntry> load_pairmeta(const std::filesystem::path& path);

/// Loads every univariate pair listed in `<dir>/pairmeta.txt` (files `pairNNNN.txt`).
std::vector<DataPair> load_tuebingen(const std::filesystem::path& dir);

/// Loads a benchmark directory: the cause-effect-pairs layout when a
/// pairmeta.txt is present, otherwise every `*.txt` file with a `.meta`
/// sidecar. Sorted by name.
std::vector<DataPair> load_pair_directory(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Coresets

struct CoresetOptions {
    /// Samples whose marginal KDE density is below this level are "rare".
    double rare_level = 0.05;
    /// false: the level is a quantile of the density values; true: an absolute density.
    bool absolute_threshold = false;
    int repeats = 10;
};

struct Coreset {
    std::vector<Eigen::Index> indices;  // 0-based, ascending
    Eigen::Index rare_count = 0;
    std::uint64_t seed = 0;
    double mmd2_to_full = 0.0;
    bool rare_overflow = false;
};

/// Gaussian KDE (Scott's rule bandwidth) evaluated at each sample of the set.
Vector kde_density_at_samples(const SampleSet& samples);

/// Coreset of size m: rare samples on either marginal, filled at random; the
/// fill with the smallest MMD^2 to the full joint sample is kept.
Coreset extract_coreset(const DataPair& pair, Eigen::Index m, const Kernel& kernel,
                        std::uint64_t seed, const CoresetOptions& options = {});

/// Uniformly random subset of size min(m, n), ascending.
std::vector<Eigen::Index> random_subset(Eigen::Index n, Eigen::Index m, std::uint64_t seed);

SampleSet take_rows(const SampleSet& samples, const std::vector<Eigen::Index>& indices);

// ---------------------------------------------------------------------------
// Synthetic generators

enum class SyntheticFamily { Fig1, AN, ANs, LS, LSs, MNU };

std::string_view to_string(SyntheticFamily f);
SyntheticFamily parse_family(std::string_view text);
std::vector<std::string_view> family_names();

/// Labelled x->y pair; a pure function of (family, n, seed).
DataPair generate_synthetic(SyntheticFamily family, Eigen::Index n, std::uint64_t seed);

struct SyntheticSample {
    DataPair pair;
    /// E[y | x] of the generating mechanism.
    std::function<double(double)> mean;
};

SyntheticSample generate_synthetic_detailed(SyntheticFamily family, Eigen::Index n, std::uint64_t seed);

/// Natural cubic spline through (knots_x, knots_y), linear beyond the ends.
class NaturalCubicSpline {
public:
    NaturalCubicSpline(std::vector<double> knots_x, std::vector<double> knots_y);
    double operator()(double x) const;

private:
    std::vector<double> xs_, ys_, second_;
};

}  // namespace vcei
