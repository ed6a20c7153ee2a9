#pragma once

#include "vcei/dataset.hpp"
#include "vcei/identifier.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <exception>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace vcei::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kBadInput = 2,
    kSolverFailure = 3,
    kInternal = 4,
};

int exit_code_for(const std::exception& e);

/// "lo:hi:steps", inclusive of both ends.
std::vector<double> parse_grid(std::string_view text);

/// Per-pair seed from the run seed and the pair name (FNV-1a), so results do
/// not depend on which worker handles a pair.
std::uint64_t pair_seed(std::uint64_t base, std::string_view name);

struct BenchmarkRow {
    std::string name;
    std::optional<Direction> truth;
    std::optional<Direction> decision;
    bool correct = false;
    bool tie = false;
    bool degraded = false;
    /// Both directions failed; counted as incorrect.
    bool failed = false;
    std::optional<double> s_xy;
    std::optional<double> s_yx;
    std::optional<double> slope_xy;
    std::optional<double> slope_yx;
    std::optional<double> rank_one_gap_x;
    std::optional<double> rank_one_gap_y;
    double runtime_ms = 0.0;
    std::vector<std::string> errors;
};

struct BenchmarkResult {
    std::vector<BenchmarkRow> per_pair;
    std::size_t correct = 0;
    std::size_t total = 0;
    double accuracy = 0.0;
    nlohmann::json config;

    /// Runtimes are left out unless `timing` is set, so reruns compare equal.
    nlohmann::json to_json(bool timing = false) const;
    void write_csv(std::ostream& out, bool timing = false) const;
};

/// Runs the pipeline on every pair with up to `workers` threads. Rows are
/// ordered by pair name.
BenchmarkResult run_benchmark(const std::vector<DataPair>& pairs, const PipelineConfig& config, int workers = 1);

/// Full command line without the program name. Reports go to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vcei::cli
