#include "cli.hpp"

#include "vcei/log.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

namespace fs = std::filesystem;

namespace vcei::cli {

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const InfeasibleBoundError*>(&e)) return kUsage;
    if (dynamic_cast<const MalformedFileError*>(&e) || dynamic_cast<const InsufficientDataError*>(&e) ||
        dynamic_cast<const ShapeError*>(&e) || dynamic_cast<const DegenerateSampleError*>(&e)) {
        return kBadInput;
    }
    if (dynamic_cast<const SolverError*>(&e) || dynamic_cast<const FactorizationError*>(&e) ||
        dynamic_cast<const InsufficientSupportError*>(&e) || dynamic_cast<const PipelineError*>(&e)) {
        return kSolverFailure;
    }
    return kInternal;
}

namespace {

double parse_number(std::string_view text, std::string_view what) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw UsageError(fmt::format("bad {} '{}' in grid", what, text));
    }
    return v;
}

std::string csv_number(const std::optional<double>& v) { return v ? fmt::format("{:.17g}", *v) : std::string(); }

std::string csv_direction(const std::optional<Direction>& d) { return d ? std::string(to_string(*d)) : std::string(); }

nlohmann::json json_or_null(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

nlohmann::json json_or_null(const std::optional<Direction>& d) {
    return d ? nlohmann::json(std::string(to_string(*d))) : nlohmann::json();
}

BenchmarkRow row_from(const DataPair& pair, const PipelineConfig& config) {
    BenchmarkRow row;
    row.name = pair.name;
    row.truth = pair.label;
    try {
        const DirectionReport r = run_pipeline(pair, config);
        row.decision = r.decision;
        row.tie = r.tie;
        row.degraded = r.degraded;
        row.errors = r.errors;
        if (r.xy) {
            row.s_xy = r.xy->score;
            row.rank_one_gap_x = r.xy->solution.rank_one_gap;
        }
        if (r.yx) {
            row.s_yx = r.yx->score;
            row.rank_one_gap_y = r.yx->solution.rank_one_gap;
        }
        if (r.trend_xy) {
            row.slope_xy = r.trend_xy->slope;
            row.s_xy = r.trend_xy->mean_score;
        }
        if (r.trend_yx) {
            row.slope_yx = r.trend_yx->slope;
            row.s_yx = r.trend_yx->mean_score;
        }
    } catch (const UsageError&) {
        throw;
    } catch (const InfeasibleBoundError&) {
        throw;
    } catch (const Error& e) {
        log::warn("{}: {}", pair.name, e.what());
        row.failed = true;
        row.errors.emplace_back(e.what());
    }
    row.correct = row.decision && row.truth && *row.decision == *row.truth;
    return row;
}

}  // namespace

std::vector<double> parse_grid(std::string_view text) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t colon = text.find(':', start);
        parts.push_back(text.substr(start, colon == std::string_view::npos ? std::string_view::npos : colon - start));
        if (colon == std::string_view::npos) break;
        start = colon + 1;
    }
    if (parts.size() != 3) throw UsageError(fmt::format("grid '{}' is not lo:hi:steps", text));
    const double lo = parse_number(parts[0], "lower end");
    const double hi = parse_number(parts[1], "upper end");
    const double steps = parse_number(parts[2], "step count");
    if (steps < 3 || steps != static_cast<double>(static_cast<int>(steps))) {
        throw UsageError("grid needs an integer step count of at least 3");
    }
    if (!(lo < hi)) throw UsageError("grid needs lo < hi");
    const int k = static_cast<int>(steps);
    std::vector<double> grid(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (k - 1);
    grid.back() = hi;
    return grid;
}

std::uint64_t pair_seed(std::uint64_t base, std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return derive_seed(base, h);
}

nlohmann::json BenchmarkResult::to_json(bool timing) const {
    nlohmann::json rows = nlohmann::json::array();
    for (const BenchmarkRow& r : per_pair) {
        nlohmann::json j = {
            {"name", r.name},
            {"truth", json_or_null(r.truth)},
            {"decision", json_or_null(r.decision)},
            {"correct", r.correct},
            {"tie", r.tie},
            {"degraded", r.degraded},
            {"failed", r.failed},
            {"s_xy", json_or_null(r.s_xy)},
            {"s_yx", json_or_null(r.s_yx)},
            {"slope_xy", json_or_null(r.slope_xy)},
            {"slope_yx", json_or_null(r.slope_yx)},
            {"rank_one_gap_x", json_or_null(r.rank_one_gap_x)},
            {"rank_one_gap_y", json_or_null(r.rank_one_gap_y)},
            {"errors", r.errors},
        };
        if (timing) j["runtime_ms"] = r.runtime_ms;
        rows.push_back(std::move(j));
    }
    return {
        {"schema_version", kReportSchemaVersion},
        {"accuracy", accuracy},
        {"correct", correct},
        {"total", total},
        {"per_pair", std::move(rows)},
        {"config", config},
    };
}

void BenchmarkResult::write_csv(std::ostream& out, bool timing) const {
    out << "name,truth,decision,s_xy,s_yx,slope_xy,slope_yx,rank_one_gap_x,rank_one_gap_y,runtime_ms\n";
    for (const BenchmarkRow& r : per_pair) {
        out << r.name << ',' << csv_direction(r.truth) << ',' << csv_direction(r.decision) << ','
            << csv_number(r.s_xy) << ',' << csv_number(r.s_yx) << ',' << csv_number(r.slope_xy) << ','
            << csv_number(r.slope_yx) << ',' << csv_number(r.rank_one_gap_x) << ','
            << csv_number(r.rank_one_gap_y) << ',' << (timing ? fmt::format("{:.3f}", r.runtime_ms) : std::string())
            << '\n';
    }
}

BenchmarkResult run_benchmark(const std::vector<DataPair>& pairs, const PipelineConfig& config, int workers) {
    if (pairs.empty()) throw UsageError("no pairs to benchmark");
    config.validate();
    std::vector<const DataPair*> order;
    for (const DataPair& p : pairs) order.push_back(&p);
    std::stable_sort(order.begin(), order.end(), [](const DataPair* a, const DataPair* b) { return a->name < b->name; });

    BenchmarkResult result;
    result.per_pair.resize(order.size());
    result.config = config.to_json();

    std::atomic<std::size_t> next{0};
    std::exception_ptr fatal;
    std::mutex fatal_mutex;
    auto work = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= order.size()) return;
            PipelineConfig cfg = config;
            cfg.seed = pair_seed(config.seed, order[i]->name);
            const auto t0 = std::chrono::steady_clock::now();
            try {
                result.per_pair[i] = row_from(*order[i], cfg);
            } catch (...) {
                std::lock_guard lock(fatal_mutex);
                if (!fatal) fatal = std::current_exception();
                next = order.size();
                return;
            }
            result.per_pair[i].runtime_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            log::info("{}: {}", order[i]->name, csv_direction(result.per_pair[i].decision));
        }
    };
    const int n_threads = std::clamp(workers, 1, static_cast<int>(order.size()));
    if (n_threads == 1) {
        work();
    } else {
        std::vector<std::thread> threads;
        for (int t = 0; t < n_threads; ++t) threads.emplace_back(work);
        for (std::thread& t : threads) t.join();
    }
    if (fatal) std::rethrow_exception(fatal);

    result.total = result.per_pair.size();
    result.correct = static_cast<std::size_t>(
        std::count_if(result.per_pair.begin(), result.per_pair.end(), [](const BenchmarkRow& r) { return r.correct; }));
    result.accuracy = static_cast<double>(result.correct) / static_cast<double>(result.total);
    return result;
}

// ---------------------------------------------------------------------------
// Command line

namespace {

struct PipelineFlags {
    int m = 100;
    double b_alpha = 0.2;
    std::string grid;
    std::string mode = "score";
    std::uint64_t seed = 0;
    std::optional<double> lengthscale;
    std::string lengthscale_method = "kdecv5";
    double noise = 1e-2;
    std::string subset = "random";
    std::string weighting = "precision";
    std::string backend = "auto";
    std::optional<int> eval_subset;
    std::optional<double> b_d;
    bool no_standardize = false;
};

void add_pipeline_flags(CLI::App* cmd, PipelineFlags& f) {
    cmd->add_option("--m", f.m, "subset size")->check(CLI::PositiveNumber);
    cmd->add_option("--b-alpha", f.b_alpha, "bound on every weight");
    cmd->add_option("--grid", f.grid, "trend grid lo:hi:steps");
    cmd->add_option("--mode", f.mode, "score or trend");
    cmd->add_option("--seed", f.seed, "base seed");
    cmd->add_option("--lengthscale", f.lengthscale, "fixed lengthscale for both marginals");
    cmd->add_option("--lengthscale-method", f.lengthscale_method, "kdecv5 or median");
    cmd->add_option("--noise", f.noise, "GP noise variance");
    cmd->add_option("--subset", f.subset, "random or coreset");
    cmd->add_option("--weighting", f.weighting, "precision or resampling");
    cmd->add_option("--backend", f.backend, "auto, interior-point or admm");
    cmd->add_option("--eval-subset", f.eval_subset, "score on this many cause samples");
    cmd->add_option("--b-d", f.b_d, "slack on the subset MMD");
    cmd->add_flag("--no-standardize", f.no_standardize, "skip robust standardization");
}

PipelineConfig to_config(const PipelineFlags& f, bool force_trend = false) {
    PipelineConfig c;
    c.m = f.m;
    c.b_alpha = f.b_alpha;
    c.mode = force_trend ? ScoreMode::TrendSlope : parse_mode(f.mode);
    if (c.mode == ScoreMode::TrendSlope) {
        if (f.grid.empty()) throw UsageError("trend mode needs --grid lo:hi:steps");
        c.grid = parse_grid(f.grid);
    } else if (!f.grid.empty()) {
        throw UsageError("--grid is only used with --mode trend");
    }
    c.seed = f.seed;
    c.fixed_lengthscale = f.lengthscale;
    c.kernel_method = parse_lengthscale_method(f.lengthscale_method);
    c.noise_variance = f.noise;
    c.subset = parse_subset_method(f.subset);
    c.weighting = parse_weighting(f.weighting);
    c.solver.backend = parse_backend(f.backend);
    if (f.eval_subset) c.eval_subset = *f.eval_subset;
    c.b_d = f.b_d;
    c.standardize = !f.no_standardize;
    c.validate();
    return c;
}

void emit_json(const nlohmann::json& j, const std::string& path, std::ostream& out) {
    const std::string text = j.dump(2) + "\n";
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw MalformedFileError("cannot write '" + path + "'", 0);
    file << text;
}

DataPair load_labelled(const std::string& path) {
    DataPair pair = load_pair(path);
    if (!pair.label) {
        const fs::path meta = metadata_path_for(path);
        if (fs::exists(meta)) pair.label = load_direction_metadata(meta);
    }
    return pair;
}

int cmd_identify(const std::string& path, const PipelineFlags& flags, const std::string& dump,
                 const std::string& out_path, std::ostream& out) {
    const PipelineConfig config = to_config(flags);
    const DataPair pair = load_labelled(path);
    if (!dump.empty()) {
        nlohmann::json j = {
            {"x->y", direction_problem(pair, Direction::XtoY, config).to_json()},
            {"y->x", direction_problem(pair, Direction::YtoX, config).to_json()},
        };
        std::ofstream file(dump, std::ios::binary);
        if (!file) throw MalformedFileError("cannot write '" + dump + "'", 0);
        file << j.dump(2) << '\n';
    }
    emit_json(run_pipeline(pair, config).to_json(), out_path, out);
    return kOk;
}

int cmd_sweep(const std::string& path, const PipelineFlags& flags, const std::string& out_path, std::ostream& out) {
    const PipelineConfig config = to_config(flags, true);
    const DataPair pair = load_labelled(path);
    emit_json(identify_by_trend(pair, config.grid, config).to_json(), out_path, out);
    return kOk;
}

int cmd_benchmark(const std::string& dir, const PipelineFlags& flags, int workers, bool timing,
                  const std::string& out_dir, std::ostream& out) {
    const PipelineConfig config = to_config(flags);
    const std::vector<DataPair> pairs = load_pair_directory(dir);
    const BenchmarkResult result = run_benchmark(pairs, config, workers);
    const nlohmann::json j = result.to_json(timing);
    if (out_dir.empty()) {
        out << j.dump(2) << '\n';
        result.write_csv(out, timing);
        return kOk;
    }
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    std::ofstream json_file(fs::path(out_dir) / "results.json", std::ios::binary);
    std::ofstream csv_file(fs::path(out_dir) / "results.csv", std::ios::binary);
    if (!json_file || !csv_file) throw MalformedFileError("cannot write results to '" + out_dir + "'", 0);
    json_file << j.dump(2) << '\n';
    result.write_csv(csv_file, timing);
    out << fmt::format("accuracy {}/{} = {:.4f}\n", result.correct, result.total, result.accuracy);
    return kOk;
}

int cmd_generate(const std::string& family_name, int n, int count, std::uint64_t seed, bool swap_half,
                 const std::string& out_dir, std::ostream& out) {
    const SyntheticFamily family = parse_family(family_name);
    if (n < 2) throw UsageError("--n must be at least 2");
    if (count < 1) throw UsageError("--count must be at least 1");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (!fs::is_directory(out_dir)) throw MalformedFileError("cannot create directory '" + out_dir + "'", 0);
    const int width = std::max(3, static_cast<int>(std::to_string(count).size()));
    for (int i = 0; i < count; ++i) {
        DataPair pair = generate_synthetic(family, n, derive_seed(seed, static_cast<std::uint64_t>(i)));
        if (swap_half && i % 2 == 1) pair = pair.swapped();
        const fs::path file = fs::path(out_dir) / fmt::format("{}_{:0{}}.txt", to_string(family), i, width);
        write_pair(file, pair);
        write_direction_metadata(metadata_path_for(file), *pair.label);
    }
    out << fmt::format("wrote {} pairs to {}\n", count, out_dir);
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cause-effect identification by maximal variation of the cause marginal", "vcei"};
    app.require_subcommand(1);

    PipelineFlags id_flags;
    std::string id_path, id_out, id_dump;
    CLI::App* identify_cmd = app.add_subcommand("identify", "identify the direction of one pair");
    identify_cmd->add_option("path", id_path, "pair file")->required();
    add_pipeline_flags(identify_cmd, id_flags);
    identify_cmd->add_option("--out", id_out, "write the JSON report here");
    identify_cmd->add_option("--dump-problem", id_dump, "write both relaxations as JSON");

    PipelineFlags sw_flags;
    std::string sw_path, sw_out;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "score both directions over a b_alpha grid");
    sweep_cmd->add_option("path", sw_path, "pair file")->required();
    add_pipeline_flags(sweep_cmd, sw_flags);
    sweep_cmd->add_option("--out", sw_out, "write the JSON report here");

    PipelineFlags bm_flags;
    std::string bm_dir, bm_out;
    int workers = 1;
    bool timing = false;
    CLI::App* bench_cmd = app.add_subcommand("benchmark", "run every labelled pair in a directory");
    bench_cmd->add_option("dir", bm_dir, "pair directory")->required();
    add_pipeline_flags(bench_cmd, bm_flags);
    bench_cmd->add_option("--workers", workers, "parallel pairs")->check(CLI::PositiveNumber);
    bench_cmd->add_flag("--timing", timing, "record per-pair runtimes");
    bench_cmd->add_option("--out", bm_out, "directory for results.json and results.csv");

    std::string family, gen_out;
    int gen_n = 500, gen_count = 1;
    std::uint64_t gen_seed = 0;
    bool swap_half = false;
    CLI::App* gen_cmd = app.add_subcommand("generate", "write synthetic pairs with metadata");
    gen_cmd->add_option("--family", family, "fig1, an, an-s, ls, ls-s or mn-u")->required();
    gen_cmd->add_option("--n", gen_n, "samples per pair");
    gen_cmd->add_option("--count", gen_count, "number of pairs");
    gen_cmd->add_option("--seed", gen_seed, "base seed");
    gen_cmd->add_flag("--swap-half", swap_half, "exchange x and y in every second pair");
    gen_cmd->add_option("--out", gen_out, "output directory")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (identify_cmd->parsed()) return cmd_identify(id_path, id_flags, id_dump, id_out, out);
        if (sweep_cmd->parsed()) return cmd_sweep(sw_path, sw_flags, sw_out, out);
        if (bench_cmd->parsed()) return cmd_benchmark(bm_dir, bm_flags, workers, timing, bm_out, out);
        if (gen_cmd->parsed()) return cmd_generate(family, gen_n, gen_count, gen_seed, swap_half, gen_out, out);
    } catch (const std::exception& e) {
        err << "vcei: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return kUsage;
}

}  // namespace vcei::cli
