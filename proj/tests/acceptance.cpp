// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
//
// VCEI_TUEBINGEN_DIR points at an unpacked cause-effect-pairs directory
// (pairmeta.txt + pairNNNN.txt); criterion 9 is skipped without it.

#include "cli.hpp"
#include "oracles.hpp"
#include "vcei/identifier.hpp"
#include "vcei/mmd.hpp"
#include "vcei/regressor.hpp"
#include "vcei/variation.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <unistd.h>

using namespace vcei;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
    bool skipped = false;
};

int failures = 0;

void run_criterion(int id, const std::string& title, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* tag = o.skipped ? "SKIP" : (o.pass ? "PASS" : "FAIL");
    if (!o.pass && !o.skipped) ++failures;
    std::cout << fmt::format("criterion {} {} {}: {} ({:.1f} s)", id, tag, title, o.detail, secs) << std::endl;
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path scratch_dir() {
    const fs::path p = fs::temp_directory_path() / ("vcei_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

int cli_call(const std::vector<std::string>& args, std::string* out = nullptr) {
    std::ostringstream o, e;
    const int code = cli::run(args, o, e);
    if (out) *out = o.str();
    if (code != 0) std::cerr << e.str();
    return code;
}

// P(X >= k) for X ~ Binomial(n, 1/2).
double binomial_upper_tail(int k, int n) {
    double total = 0.0;
    for (int i = k; i <= n; ++i) total += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0));
    return total * std::pow(0.5, n);
}

// ---------------------------------------------------------------------------

Outcome mmd_oracle() {
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<int> size(1, 50), dim(1, 3);
    std::uniform_real_distribution<double> unit(0.0, 1.0), scale(0.3, 2.0);
    double worst = 0.0;
    const auto t0 = std::chrono::steady_clock::now();
    for (int t = 0; t < 100; ++t) {
        const int d = dim(rng);
        const Matrix a = oracle::gaussian(size(rng), d, rng);
        const Matrix b = oracle::gaussian(size(rng), d, rng) * 1.3;
        const double l = scale(rng);
        const Kernel k = Kernel::squared_exponential(l);
        const double got = mmd2_biased(k, a, b).raw;
        worst = std::max(worst, std::abs(got - oracle::mmd2(a, oracle::uniform(a.rows()), b, oracle::uniform(b.rows()), l)));

        Vector w(a.rows());
        for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = unit(rng);
        w /= w.sum();
        const double wgot = mmd2_weighted_vs_uniform(gram(k, a), WeightVector(w)).raw;
        worst = std::max(worst, std::abs(wgot - oracle::mmd2(a, w, a, oracle::uniform(a.rows()), l)));
    }
    const double secs = elapsed_since(t0);
    return {worst <= 1e-10 && secs < 5.0,
            fmt::format("max |error| {:.2e} (tol 1e-10) over 100 instances, {:.2f} s (limit 5 s)", worst, secs)};
}

Outcome sdr_brute_force() {
    std::mt19937_64 rng(202);
    std::uniform_int_distribution<int> size(2, 8);
    double worst_sdr = 1e300, worst_rec = 1e300;
    int bad = 0;
    const auto t0 = std::chrono::steady_clock::now();
    for (int t = 0; t < 50; ++t) {
        const int n = size(rng);
        const Matrix pts = oracle::gaussian(n, 1 + t % 2, rng);
        const Matrix k = gram(Kernel::squared_exponential(1.0), pts).values;
        const SdrSolution s = solve(build_problem(k, k, k.sum()));
        const double grid = oracle::simplex_grid_max(pts, 1.0, 20);
        worst_sdr = std::min(worst_sdr, s.sdr_objective - grid);
        worst_rec = std::min(worst_rec, s.recovered_objective - grid);
        if (s.sdr_objective < grid - 1e-6 || s.recovered_objective < grid - 1e-3) ++bad;
    }
    const double secs = elapsed_since(t0);
    return {bad == 0 && secs < 120.0,
            fmt::format("min(sdr - grid) {:.2e} (>= -1e-6), min(recovered - grid) {:.2e} (>= -1e-3), {} of 50 "
                        "violate, {:.1f} s (limit 120 s)",
                        worst_sdr, worst_rec, bad, secs)};
}

Outcome two_point() {
    Matrix pts(2, 1);
    pts << 0.0, 1.0;
    const Matrix k = gram(Kernel::squared_exponential(1.0), pts).values;
    const SdrSolution s = solve(build_problem(k, k, k.sum()));
    const double expected = (1.0 - std::exp(-0.5)) / 2.0;
    const double err = std::abs(s.recovered_objective - expected);
    return {err <= 1e-6, fmt::format("recovered {:.10f}, closed form {:.10f}, |error| {:.2e} (tol 1e-6), alpha = ({:.6f}, "
                                     "{:.6f})",
                                     s.recovered_objective, expected, err, s.weights[0], s.weights[1])};
}

Outcome regularizer() {
    std::mt19937_64 rng(303);
    double max_dev = 0.0, max_score = 0.0, worst_drop_sdr = 0.0, worst_drop_rec = 0.0;
    const std::vector<double> grid{0.1, 0.2, 0.4, 0.7, 1.0};
    for (int t = 0; t < 20; ++t) {
        // Uniform bound through the full pipeline.
        const DataPair p = generate_synthetic(t % 2 ? SyntheticFamily::AN : SyntheticFamily::Fig1, 150,
                                              3000 + static_cast<std::uint64_t>(t));
        PipelineConfig c;
        c.m = 10;
        c.b_alpha = 0.1;
        c.seed = static_cast<std::uint64_t>(t);
        const DirectionReport r = identify(p, c);
        for (const auto* d : {&r.xy, &r.yx}) {
            if (!*d) throw PipelineError("a direction failed");
            max_dev = std::max(max_dev, ((*d)->solution.weights.values().array() - 0.1).abs().maxCoeff());
            max_score = std::max(max_score, (*d)->score);
        }

        // Sweep on a random instance.
        const Matrix pts = oracle::gaussian(10, 1 + t % 3, rng);
        const Matrix k = gram(Kernel::squared_exponential(1.0), pts).values;
        const auto sweep = sweep_b_alpha(k, k, k.sum(), grid);
        for (std::size_t i = 1; i < sweep.size(); ++i) {
            worst_drop_sdr = std::max(worst_drop_sdr, sweep[i - 1].solution.sdr_objective - sweep[i].solution.sdr_objective);
            worst_drop_rec = std::max(worst_drop_rec,
                                      sweep[i - 1].solution.recovered_objective - sweep[i].solution.recovered_objective);
        }
    }
    const bool ok = max_dev < 1e-4 && max_score <= 1e-8 && worst_drop_sdr <= 1e-5 && worst_drop_rec <= 1e-5;
    return {ok, fmt::format("b=1/M: max|alpha - 1/M| {:.2e} (< 1e-4), max score {:.2e} (<= 1e-8); 5-point sweeps: "
                            "largest decrease sdr {:.2e}, recovered {:.2e} (<= 1e-5), 20 instances",
                            max_dev, max_score, worst_drop_sdr, worst_drop_rec)};
}

Outcome duplication() {
    std::mt19937_64 rng(404);
    std::uniform_int_distribution<int> count(0, 4);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const int n = 8 + t % 8;
        const Matrix x = oracle::gaussian(n, 1, rng);
        const Matrix y = (2.0 * x.array()).sin().matrix() + 0.1 * oracle::gaussian(n, 1, rng);
        Vector c(n);
        for (int i = 0; i < n; ++i) c(i) = count(rng);
        c(0) = std::max(c(0), 1.0);
        c(n - 1) = std::max(c(n - 1), 1.0);
        const double total = c.sum();
        const double n_eff = static_cast<double>((c.array() > 0).count());
        Matrix xd(static_cast<Eigen::Index>(total), 1), yd(static_cast<Eigen::Index>(total), 1);
        Eigen::Index r = 0;
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < static_cast<int>(c(i)); ++k, ++r) {
                xd(r, 0) = x(i, 0);
                yd(r, 0) = y(i, 0);
            }
        const double sigma2 = 1e-2;
        const Matrix q = Vector::LinSpaced(20, -2.5, 2.5);
        const double l = 0.5 + 0.05 * t;
        const Matrix ref = oracle::gp_mean(xd, yd, Vector::Constant(xd.rows(), sigma2 * total / n_eff), q, l);
        GpOptions opts;
        opts.noise_variance = sigma2;
        const Matrix got =
            WeightedGp::fit(x, y, WeightVector(c / total), Kernel::squared_exponential(l), opts).predict_mean(q);
        worst = std::max(worst, (got - ref).cwiseAbs().maxCoeff());
    }
    return {worst <= 1e-6, fmt::format("max |prediction difference| {:.2e} (tol 1e-6), 20 instances x 20 grid points", worst)};
}

Outcome end_to_end(const fs::path& dir) {
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path data = dir / "fig1";
    if (cli_call({"generate", "--family", "fig1", "--n", "500", "--count", "40", "--seed", "2024", "--swap-half",
                  "--out", data.string()}) != 0) {
        return {false, "generate failed"};
    }
    if (cli_call({"benchmark", data.string(), "--m", "100", "--b-alpha", "0.2", "--seed", "1", "--out",
                  (dir / "fig1_results").string()}) != 0) {
        return {false, "benchmark failed"};
    }
    const auto j = nlohmann::json::parse(slurp(dir / "fig1_results" / "results.json"));
    const int correct = j["correct"].get<int>();
    const int total = j["total"].get<int>();
    int failed = 0;
    for (const auto& row : j["per_pair"]) failed += row["failed"].get<bool>();
    const double p = binomial_upper_tail(correct, total);
    const double secs = elapsed_since(t0);
    return {total == 40 && correct >= 26 && p < 0.05 && secs < 1200.0,
            fmt::format("{}/{} correct (accuracy {:.3f}, need >= 26), one-sided binomial p = {:.2e}, {} double "
                        "failures, {:.0f} s (limit 1200 s)",
                        correct, total, j["accuracy"].get<double>(), p, failed, secs)};
}

Outcome trend() {
    // FIG1 pair with the roles exchanged, so the cause is y.
    const std::vector<double> grid = cli::parse_grid("0.05:0.5:6");
    int wins = 0;
    std::string slopes;
    for (int run = 0; run < 10; ++run) {
        const DataPair p = generate_synthetic(SyntheticFamily::Fig1, 500, 7000 + static_cast<std::uint64_t>(run)).swapped();
        PipelineConfig c;
        c.m = 40;
        c.seed = static_cast<std::uint64_t>(run);
        const DirectionReport r = identify_by_trend(p, grid, c);
        if (!r.trend_xy || !r.trend_yx) throw PipelineError("a trend curve is missing");
        const bool win = r.trend_xy->slope > r.trend_yx->slope;
        wins += win;
        slopes += fmt::format("{}{:.2f}/{:.2f}", run ? " " : "", r.trend_yx->slope, r.trend_xy->slope);
    }
    return {wins >= 7, fmt::format("acausal slope above causal slope in {}/10 runs (need >= 7); causal/acausal: {}",
                                   wins, slopes)};
}

Outcome determinism(const fs::path& dir) {
    const fs::path data = dir / "det";
    std::vector<std::string> mismatched;
    auto same = [&](const std::string& what, const std::string& a, const std::string& b) {
        if (a != b || a.empty()) mismatched.push_back(what);
    };
    if (cli_call({"generate", "--family", "ls", "--n", "200", "--count", "4", "--seed", "9", "--swap-half", "--out",
                  data.string()}) != 0 ||
        cli_call({"generate", "--family", "ls", "--n", "200", "--count", "4", "--seed", "9", "--swap-half", "--out",
                  (dir / "det2").string()}) != 0) {
        return {false, "generate failed"};
    }
    for (const auto& e : fs::directory_iterator(data)) {
        same("generate " + e.path().filename().string(), slurp(e.path()), slurp(dir / "det2" / e.path().filename()));
    }

    const std::string pair = (data / "ls_000.txt").string();
    std::string a, b;
    cli_call({"identify", pair, "--m", "60", "--seed", "3"}, &a);
    cli_call({"identify", pair, "--m", "60", "--seed", "3"}, &b);
    same("identify json", a, b);
    cli_call({"identify", pair, "--m", "30", "--mode", "trend", "--grid", "0.05:0.4:4", "--seed", "3"}, &a);
    cli_call({"identify", pair, "--m", "30", "--mode", "trend", "--grid", "0.05:0.4:4", "--seed", "3"}, &b);
    same("trend json", a, b);
    cli_call({"sweep", pair, "--m", "30", "--grid", "0.05:0.4:4"}, &a);
    cli_call({"sweep", pair, "--m", "30", "--grid", "0.05:0.4:4"}, &b);
    same("sweep json", a, b);

    cli_call({"benchmark", data.string(), "--m", "60", "--seed", "4", "--out", (dir / "b1").string()});
    cli_call({"benchmark", data.string(), "--m", "60", "--seed", "4", "--workers", "3", "--out", (dir / "b2").string()});
    same("benchmark csv", slurp(dir / "b1" / "results.csv"), slurp(dir / "b2" / "results.csv"));
    same("benchmark json", slurp(dir / "b1" / "results.json"), slurp(dir / "b2" / "results.json"));

    if (!mismatched.empty()) {
        std::string list;
        for (const auto& m : mismatched) list += (list.empty() ? "" : ", ") + m;
        return {false, "outputs differ: " + list};
    }
    return {true, "generate, identify (score and trend), sweep and benchmark (1 vs 3 workers) reruns are byte-identical"};
}

Outcome tuebingen(const fs::path& dir) {
    const char* env = std::getenv("VCEI_TUEBINGEN_DIR");
    if (!env || !fs::exists(fs::path(env) / "pairmeta.txt")) {
        return {false, "VCEI_TUEBINGEN_DIR not set or has no pairmeta.txt; benchmark files not available", true};
    }
    const std::vector<DataPair> pairs = load_tuebingen(env);
    PipelineConfig c;
    c.m = 100;
    const cli::BenchmarkResult r = cli::run_benchmark(pairs, c, 1);
    std::size_t failed = 0, with_errors = 0;
    for (const auto& row : r.per_pair) {
        failed += row.failed;
        with_errors += !row.errors.empty();
    }
    return {pairs.size() == 103 && failed == 0 && with_errors == 0,
            fmt::format("{} univariate pairs, {} double failures, {} with direction errors, accuracy {:.3f} "
                        "(reported only)",
                        pairs.size(), failed, with_errors, r.accuracy)};
}

}  // namespace

int main() {
    const fs::path dir = scratch_dir();
    run_criterion(1, "MMD oracle equivalence", mmd_oracle);
    run_criterion(2, "relaxation vs simplex-grid brute force", sdr_brute_force);
    run_criterion(3, "two-point closed form", two_point);
    run_criterion(4, "weight cap: uniform limit and monotone sweep", regularizer);
    run_criterion(5, "weighted GP duplication oracle", duplication);
    run_criterion(6, "end-to-end FIG1 benchmark above chance", [&] { return end_to_end(dir); });
    run_criterion(7, "trend slopes on a nonlinear pair", trend);
    run_criterion(8, "determinism", [&] { return determinism(dir); });
    run_criterion(9, "cause-effect pairs benchmark", [&] { return tuebingen(dir); });
    fs::remove_all(dir);
    std::cout << (failures == 0 ? "all criteria passed or skipped" : fmt::format("{} criteria failed", failures))
              << std::endl;
    return failures == 0 ? 0 : 1;
}
