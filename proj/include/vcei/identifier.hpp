#pragma once

#include "vcei/common.hpp"
#include "vcei/dataset.hpp"
#include "vcei/kernel.hpp"
#include "vcei/regressor.hpp"
#include "vcei/variation.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vcei {

inline constexpr int kReportSchemaVersion = 1;

enum class ScoreMode { SingleScore, TrendSlope };
enum class SubsetMethod { Random, Coreset };

std::string_view to_string(ScoreMode m);
ScoreMode parse_mode(std::string_view text);
std::string_view to_string(SubsetMethod m);
SubsetMethod parse_subset_method(std::string_view text);

struct PipelineConfig {
    /// Subset size; min(m, n) points are used.
    Eigen::Index m = 100;
    double b_alpha = 0.2;
    /// b_alpha values for trend mode, ascending.
    std::vector<double> grid;
    ScoreMode mode = ScoreMode::SingleScore;
    LengthscaleMethod kernel_method = LengthscaleMethod::KdeCv5;
    LengthscaleOptions lengthscale;
    /// Overrides the selection for both marginals.
    std::optional<double> fixed_lengthscale;
    double noise_variance = 1e-2;
    WeightingScheme weighting = WeightingScheme::Precision;
    SubsetMethod subset = SubsetMethod::Random;
    CoresetOptions coreset;
    /// Evaluate the disagreement on a random subset of this many cause samples.
    std::optional<Eigen::Index> eval_subset;
    std::optional<double> b_d;
    bool standardize = true;
    std::uint64_t seed = 0;
    SolverOptions solver;

    void validate() const;
    nlohmann::json to_json() const;
};

/// Seeds used for one direction, derived from PipelineConfig::seed.
struct DirectionSeeds {
    std::uint64_t subset = 0;
    std::uint64_t folds = 0;
    std::uint64_t resample = 0;
    std::uint64_t baseline = 0;
    std::uint64_t eval = 0;
};

DirectionSeeds seeds_for(std::uint64_t base, Direction direction);

struct DirectionScore {
    Direction direction = Direction::XtoY;
    double score = 0.0;
    /// Disagreement of two uniform fits with different seeds (bias diagnostic).
    double baseline = 0.0;
    double cause_lengthscale = 0.0;
    double effect_lengthscale = 0.0;
    std::vector<Eigen::Index> subset;
    SdrSolution solution;
    nlohmann::json model_diagnostics;

    nlohmann::json to_json() const;
};

struct TrendCurve {
    Direction direction = Direction::XtoY;
    std::vector<double> b_alpha;
    std::vector<double> scores;
    std::vector<double> dropped;
    /// Solver summaries of the surviving grid points.
    std::vector<nlohmann::json> solutions;
    double slope = 0.0;
    double intercept = 0.0;
    double mean_score = 0.0;

    nlohmann::json to_json() const;
};

struct DirectionReport {
    std::string pair_name;
    std::optional<Direction> truth;
    Direction decision = Direction::XtoY;
    ScoreMode mode = ScoreMode::SingleScore;
    bool tie = false;
    /// One direction failed and the decision rests on the other.
    bool degraded = false;
    std::optional<DirectionScore> xy;
    std::optional<DirectionScore> yx;
    std::optional<TrendCurve> trend_xy;
    std::optional<TrendCurve> trend_yx;
    std::vector<std::string> errors;
    PipelineConfig config;

    nlohmann::json to_json() const;
};

struct Decision {
    Direction direction = Direction::XtoY;
    bool tie = false;
    bool degraded = false;
};

/// Smaller score wins; equal scores go to x->y with the tie flag. A missing
/// side means that direction failed.
Decision decide_by_score(std::optional<double> s_xy, std::optional<double> s_yx);

/// Smaller slope wins; equal slopes fall back to the smaller mean score, then x->y.
Decision decide_by_trend(const std::optional<TrendCurve>& xy, const std::optional<TrendCurve>& yx);

/// Ordinary least squares fit y = slope * x + intercept.
std::pair<double, double> ols_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Disagreement score for one causal hypothesis. The pair is used as given
/// (identify() standardizes first).
DirectionScore score_direction(const DataPair& pair, Direction direction, const PipelineConfig& config);

DirectionReport identify(const DataPair& pair, const PipelineConfig& config);

DirectionReport identify_by_trend(const DataPair& pair, const std::vector<double>& grid, const PipelineConfig& config);

/// The relaxation solved for one direction at config.b_alpha (after the same
/// standardization and subset selection as identify()).
SdrProblem direction_problem(const DataPair& pair, Direction direction, const PipelineConfig& config);

/// Dispatches on config.mode.
DirectionReport run_pipeline(const DataPair& pair, const PipelineConfig& config);

}  // namespace vcei
