#include "vcei/identifier.hpp"
#include "vcei/log.hpp"
#include "vcei/mmd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace vcei {

std::string_view to_string(ScoreMode m) {
    return m == ScoreMode::SingleScore ? "score" : "trend";
}

ScoreMode parse_mode(std::string_view text) {
    if (text == "score" || text == "single") return ScoreMode::SingleScore;
    if (text == "trend") return ScoreMode::TrendSlope;
    throw UsageError("unknown mode '" + std::string(text) + "' (expected score or trend)");
}

std::string_view to_string(SubsetMethod m) {
    return m == SubsetMethod::Random ? "random" : "coreset";
}

SubsetMethod parse_subset_method(std::string_view text) {
    if (text == "random") return SubsetMethod::Random;
    if (text == "coreset") return SubsetMethod::Coreset;
    throw UsageError("unknown subset method '" + std::string(text) + "' (expected random or coreset)");
}

void PipelineConfig::validate() const {
    if (m < 2) throw UsageError("m must be at least 2");
    if (!(noise_variance > 0.0)) throw UsageError("noise variance must be positive");
    if (fixed_lengthscale && !(*fixed_lengthscale > 0.0)) throw UsageError("lengthscale must be positive");
    if (eval_subset && *eval_subset < 2) throw UsageError("evaluation subset needs at least 2 points");
    if (mode == ScoreMode::SingleScore) {
        if (!(b_alpha <= 1.0) || !(b_alpha > 0.0)) throw UsageError("b_alpha must lie in [1/m, 1]");
    } else {
        if (grid.size() < 3) throw UsageError("trend mode needs a grid of at least 3 b_alpha values");
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (!(grid[i] > 0.0) || grid[i] > 1.0) throw UsageError("grid values must lie in [1/m, 1]");
            if (i > 0 && !(grid[i] > grid[i - 1])) throw UsageError("grid must be strictly ascending");
        }
    }
}

nlohmann::json PipelineConfig::to_json() const {
    nlohmann::json j;
    j["m"] = m;
    j["mode"] = std::string(to_string(mode));
    if (mode == ScoreMode::SingleScore) j["b_alpha"] = b_alpha;
    else j["grid"] = grid;
    j["kernel_method"] = std::string(to_string(kernel_method));
    j["fixed_lengthscale"] = fixed_lengthscale ? nlohmann::json(*fixed_lengthscale) : nlohmann::json(nullptr);
    j["noise_variance"] = noise_variance;
    j["weighting"] = std::string(to_string(weighting));
    j["subset"] = std::string(to_string(subset));
    j["eval_subset"] = eval_subset ? nlohmann::json(*eval_subset) : nlohmann::json(nullptr);
    j["b_d"] = b_d ? nlohmann::json(*b_d) : nlohmann::json(nullptr);
    j["standardize"] = standardize;
    j["seed"] = seed;
    j["solver_backend"] = std::string(to_string(solver.backend));
    return j;
}

DirectionSeeds seeds_for(std::uint64_t base, Direction direction) {
    const std::uint64_t root = derive_seed(base, direction == Direction::XtoY ? 1 : 2);
    return DirectionSeeds{derive_seed(root, 10), derive_seed(root, 11), derive_seed(root, 12), derive_seed(root, 13),
                          derive_seed(root, 14)};
}

nlohmann::json DirectionScore::to_json() const {
    return {{"direction", std::string(to_string(direction))},
            {"score", score},
            {"baseline", baseline},
            {"cause_lengthscale", cause_lengthscale},
            {"effect_lengthscale", effect_lengthscale},
            {"subset_size", subset.size()},
            {"solution", solution.to_json()},
            {"models", model_diagnostics}};
}

nlohmann::json TrendCurve::to_json() const {
    return {{"direction", std::string(to_string(direction))},
            {"b_alpha", b_alpha},
            {"score", scores},
            {"dropped", dropped},
            {"solutions", solutions},
            {"slope", slope},
            {"intercept", intercept},
            {"mean_score", mean_score}};
}

nlohmann::json DirectionReport::to_json() const {
    nlohmann::json j;
    j["schema_version"] = kReportSchemaVersion;
    j["pair"] = pair_name;
    j["truth"] = truth ? nlohmann::json(std::string(to_string(*truth))) : nlohmann::json(nullptr);
    j["mode"] = std::string(to_string(mode));
    j["decision"] = std::string(to_string(decision));
    j["tie"] = tie;
    j["degraded"] = degraded;
    if (mode == ScoreMode::SingleScore) {
        j["scores"] = {{"x->y", xy ? xy->to_json() : nlohmann::json(nullptr)},
                       {"y->x", yx ? yx->to_json() : nlohmann::json(nullptr)}};
    } else {
        j["trend"] = {{"x->y", trend_xy ? trend_xy->to_json() : nlohmann::json(nullptr)},
                      {"y->x", trend_yx ? trend_yx->to_json() : nlohmann::json(nullptr)}};
    }
    j["errors"] = errors;
    j["config"] = config.to_json();
    return j;
}

Decision decide_by_score(std::optional<double> s_xy, std::optional<double> s_yx) {
    if (!s_xy && !s_yx) throw PipelineError("both directions failed");
    if (!s_xy) return Decision{Direction::YtoX, false, true};
    if (!s_yx) return Decision{Direction::XtoY, false, true};
    if (*s_xy == *s_yx) return Decision{Direction::XtoY, true, false};
    return Decision{*s_xy < *s_yx ? Direction::XtoY : Direction::YtoX, false, false};
}

Decision decide_by_trend(const std::optional<TrendCurve>& xy, const std::optional<TrendCurve>& yx) {
    if (!xy && !yx) throw PipelineError("both directions failed");
    if (!xy) return Decision{Direction::YtoX, false, true};
    if (!yx) return Decision{Direction::XtoY, false, true};
    if (xy->slope != yx->slope) {
        return Decision{xy->slope < yx->slope ? Direction::XtoY : Direction::YtoX, false, false};
    }
    if (xy->mean_score != yx->mean_score) {
        return Decision{xy->mean_score < yx->mean_score ? Direction::XtoY : Direction::YtoX, true, false};
    }
    return Decision{Direction::XtoY, true, false};
}

std::pair<double, double> ols_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw UsageError("least squares needs at least 2 paired points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw UsageError("least squares needs at least 2 distinct x values");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

namespace {

[[noreturn]] void rethrow_annotated(const Error& e, const std::string& prefix) {
    const std::string msg = prefix + e.what();
    if (dynamic_cast<const SolverError*>(&e)) throw SolverError(msg);
    if (dynamic_cast<const InfeasibleBoundError*>(&e)) throw InfeasibleBoundError(msg);
    if (dynamic_cast<const UsageError*>(&e)) throw UsageError(msg);
    if (dynamic_cast<const InsufficientSupportError*>(&e)) throw InsufficientSupportError(msg);
    if (dynamic_cast<const FactorizationError*>(&e)) throw FactorizationError(msg);
    if (dynamic_cast<const DegenerateSampleError*>(&e)) throw DegenerateSampleError(msg);
    if (dynamic_cast<const InsufficientDataError*>(&e)) throw InsufficientDataError(msg);
    if (dynamic_cast<const ShapeError*>(&e)) throw ShapeError(msg);
    throw PipelineError(msg);
}

std::string direction_prefix(Direction d) {
    return std::string(to_string(d)) + ": ";
}

/// Data shared by every solve of one direction.
struct Prepared {
    Direction direction = Direction::XtoY;
    DirectionSeeds seeds;
    SampleSet cause;
    SampleSet effect;
    Kernel cause_kernel;
    Kernel effect_kernel;
    std::vector<Eigen::Index> subset;
    SampleSet sub_cause;
    SampleSet sub_effect;
    Matrix gram_mm;
    Matrix gram_mn;
    double gram_nn_sum = 0.0;
    SampleSet eval;
};

double pick_lengthscale(const SampleSet& samples, const PipelineConfig& config, std::uint64_t fold_seed) {
    if (config.fixed_lengthscale) return *config.fixed_lengthscale;
    LengthscaleOptions opts = config.lengthscale;
    opts.fold_seed = fold_seed;
    return select_lengthscale(samples, config.kernel_method, opts);
}

Prepared prepare(const DataPair& pair, Direction direction, const PipelineConfig& config) {
    pair.validate();
    Prepared p;
    p.direction = direction;
    p.seeds = seeds_for(config.seed, direction);
    p.cause = direction == Direction::XtoY ? pair.xs : pair.ys;
    p.effect = direction == Direction::XtoY ? pair.ys : pair.xs;
    const Eigen::Index n = pair.size();
    const Eigen::Index m = std::min(config.m, n);
    if (m < 2) throw InsufficientDataError("need at least 2 samples");

    p.cause_kernel = Kernel::squared_exponential(pick_lengthscale(p.cause, config, p.seeds.folds));
    p.effect_kernel = Kernel::squared_exponential(pick_lengthscale(p.effect, config, derive_seed(p.seeds.folds, 1)));

    if (config.subset == SubsetMethod::Coreset) {
        SampleSet joint(n, pair.xs.cols() + pair.ys.cols());
        joint << pair.xs, pair.ys;
        const Kernel joint_kernel = Kernel::squared_exponential(median_pairwise_distance(joint));
        p.subset = extract_coreset(pair, m, joint_kernel, p.seeds.subset, config.coreset).indices;
    } else {
        p.subset = random_subset(n, m, p.seeds.subset);
    }
    p.sub_cause = take_rows(p.cause, p.subset);
    p.sub_effect = take_rows(p.effect, p.subset);
    p.gram_mm = gram(p.cause_kernel, p.sub_cause).values;
    p.gram_mn = gram(p.cause_kernel, p.sub_cause, p.cause).values;
    p.gram_nn_sum = gram_sum(p.cause_kernel, p.cause);
    if (config.eval_subset && *config.eval_subset < n) {
        p.eval = take_rows(p.cause, random_subset(n, *config.eval_subset, p.seeds.eval));
    } else {
        p.eval = p.cause;
    }
    return p;
}

struct Disagreement {
    double score = 0.0;
    nlohmann::json models;
};

Disagreement disagreement(const Prepared& p, const WeightVector& weights, const PipelineConfig& config) {
    GpOptions gp;
    gp.noise_variance = config.noise_variance;
    gp.scheme = config.weighting;
    gp.resample_seed = p.seeds.resample;
    const WeightedGp uniform = WeightedGp::fit(p.sub_cause, p.sub_effect, std::nullopt, p.cause_kernel, gp);
    const WeightedGp weighted = WeightedGp::fit(p.sub_cause, p.sub_effect, weights, p.cause_kernel, gp);
    const Matrix pu = uniform.predict_mean(p.eval);
    const Matrix pw = weighted.predict_mean(p.eval);
    Disagreement d;
    d.score = mmd2_biased(p.effect_kernel, pu, pw).value;
    d.models = {{"uniform", uniform.summary()}, {"weighted", weighted.summary()}};
    return d;
}

double baseline_disagreement(const Prepared& p, const PipelineConfig& config) {
    GpOptions gp;
    gp.noise_variance = config.noise_variance;
    gp.scheme = config.weighting;
    const WeightVector uniform = WeightVector::uniform(static_cast<Eigen::Index>(p.subset.size()));
    gp.resample_seed = p.seeds.baseline;
    const WeightedGp first = WeightedGp::fit(p.sub_cause, p.sub_effect, uniform, p.cause_kernel, gp);
    gp.resample_seed = derive_seed(p.seeds.baseline, 1);
    const WeightedGp second = WeightedGp::fit(p.sub_cause, p.sub_effect, uniform, p.cause_kernel, gp);
    return mmd2_biased(p.effect_kernel, first.predict_mean(p.eval), second.predict_mean(p.eval)).value;
}

void check_solution(const SdrSolution& s, double b_alpha) {
    if (s.status == SolveStatus::Infeasible) {
        std::string detail = s.diagnostics.empty() ? std::string("solver failure") : s.diagnostics.back();
        throw SolverError("b_alpha = " + std::to_string(b_alpha) + ": " + detail);
    }
    if (s.status == SolveStatus::Inaccurate) {
        log::warn("solver result at b_alpha = {} is inaccurate (violation {:.2e})", b_alpha, s.max_violation);
    }
}

DataPair prepared_input(const DataPair& pair, const PipelineConfig& config) {
    pair.validate();
    const double m = static_cast<double>(std::min(config.m, pair.size()));
    const auto below = [m](double b) { return b * m < 1.0 - 1e-12; };
    if (config.mode == ScoreMode::SingleScore ? below(config.b_alpha)
                                              : std::any_of(config.grid.begin(), config.grid.end(), below)) {
        throw InfeasibleBoundError("b_alpha below 1/m = " + std::to_string(1.0 / m));
    }
    if (!config.standardize) return pair;
    return robust_standardize(pair).pair;
}

}  // namespace

DirectionScore score_direction(const DataPair& pair, Direction direction, const PipelineConfig& config) {
    try {
        const Prepared p = prepare(pair, direction, config);
        const SdrProblem problem = build_problem(p.gram_mm, p.gram_mn, p.gram_nn_sum, config.b_alpha, config.b_d);
        DirectionScore out;
        out.direction = direction;
        out.solution = solve(problem, config.solver);
        check_solution(out.solution, config.b_alpha);
        const Disagreement d = disagreement(p, out.solution.weights, config);
        out.score = d.score;
        out.model_diagnostics = d.models;
        out.baseline = baseline_disagreement(p, config);
        out.cause_lengthscale = p.cause_kernel.lengthscale;
        out.effect_lengthscale = p.effect_kernel.lengthscale;
        out.subset = p.subset;
        return out;
    } catch (const Error& e) {
        rethrow_annotated(e, direction_prefix(direction));
    }
}

DirectionReport identify(const DataPair& pair, const PipelineConfig& config) {
    if (config.mode != ScoreMode::SingleScore) throw UsageError("identify() runs the single score mode");
    config.validate();
    const DataPair input = prepared_input(pair, config);
    DirectionReport report;
    report.pair_name = pair.name;
    report.truth = pair.label;
    report.mode = ScoreMode::SingleScore;
    report.config = config;
    for (Direction d : {Direction::XtoY, Direction::YtoX}) {
        try {
            DirectionScore s = score_direction(input, d, config);
            (d == Direction::XtoY ? report.xy : report.yx) = std::move(s);
        } catch (const UsageError&) {
            throw;
        } catch (const Error& e) {
            log::warn("{}", e.what());
            report.errors.emplace_back(e.what());
        }
    }
    const Decision decision = decide_by_score(report.xy ? std::optional<double>(report.xy->score) : std::nullopt,
                                              report.yx ? std::optional<double>(report.yx->score) : std::nullopt);
    report.decision = decision.direction;
    report.tie = decision.tie;
    report.degraded = decision.degraded;
    return report;
}

namespace {

TrendCurve trend_for(const DataPair& input, Direction direction, const std::vector<double>& grid,
                     const PipelineConfig& config, std::vector<std::string>& errors) {
    try {
        const Prepared p = prepare(input, direction, config);
        TrendCurve curve;
        curve.direction = direction;
        AdmmState warm;
        for (double b : grid) {
            try {
                const SdrProblem problem = build_problem(p.gram_mm, p.gram_mn, p.gram_nn_sum, b, config.b_d);
                const SdrSolution s = solve(problem, config.solver, &warm);
                check_solution(s, b);
                const double score = disagreement(p, s.weights, config).score;
                curve.b_alpha.push_back(b);
                curve.scores.push_back(score);
                curve.solutions.push_back(s.to_json());
            } catch (const UsageError&) {
                throw;
            } catch (const Error& e) {
                const std::string msg = direction_prefix(direction) + e.what();
                log::warn("dropping grid point: {}", msg);
                errors.push_back(msg);
                curve.dropped.push_back(b);
            }
        }
        if (curve.scores.size() < 3) {
            throw PipelineError("only " + std::to_string(curve.scores.size()) +
                                " grid points survived, at least 3 are needed");
        }
        const auto [slope, intercept] = ols_fit(curve.b_alpha, curve.scores);
        curve.slope = slope;
        curve.intercept = intercept;
        curve.mean_score = std::accumulate(curve.scores.begin(), curve.scores.end(), 0.0) /
                           static_cast<double>(curve.scores.size());
        return curve;
    } catch (const Error& e) {
        const std::string what = e.what();
        if (what.rfind(direction_prefix(direction), 0) == 0) throw;
        rethrow_annotated(e, direction_prefix(direction));
    }
}

}  // namespace

DirectionReport identify_by_trend(const DataPair& pair, const std::vector<double>& grid, const PipelineConfig& config) {
    PipelineConfig cfg = config;
    cfg.mode = ScoreMode::TrendSlope;
    cfg.grid = grid;
    cfg.validate();
    const DataPair input = prepared_input(pair, cfg);
    DirectionReport report;
    report.pair_name = pair.name;
    report.truth = pair.label;
    report.mode = ScoreMode::TrendSlope;
    report.config = cfg;
    for (Direction d : {Direction::XtoY, Direction::YtoX}) {
        try {
            TrendCurve c = trend_for(input, d, grid, cfg, report.errors);
            (d == Direction::XtoY ? report.trend_xy : report.trend_yx) = std::move(c);
        } catch (const UsageError&) {
            throw;
        } catch (const Error& e) {
            log::warn("{}", e.what());
            report.errors.emplace_back(e.what());
        }
    }
    const Decision decision = decide_by_trend(report.trend_xy, report.trend_yx);
    report.decision = decision.direction;
    report.tie = decision.tie;
    report.degraded = decision.degraded;
    return report;
}

SdrProblem direction_problem(const DataPair& pair, Direction direction, const PipelineConfig& config) {
    config.validate();
    const DataPair input = prepared_input(pair, config);
    const Prepared p = prepare(input, direction, config);
    return build_problem(p.gram_mm, p.gram_mn, p.gram_nn_sum, config.b_alpha, config.b_d);
}

DirectionReport run_pipeline(const DataPair& pair, const PipelineConfig& config) {
    if (config.mode == ScoreMode::TrendSlope) return identify_by_trend(pair, config.grid, config);
    return identify(pair, config);
}

}  // namespace vcei
