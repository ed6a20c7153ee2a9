#include "vcei/dataset.hpp"

#include "vcei/log.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace vcei {

namespace fs = std::filesystem;

void DataPair::validate() const {
    if (xs.rows() != ys.rows()) {
        throw ShapeError("x and y have different sample counts (" + std::to_string(xs.rows()) +
                         " vs " + std::to_string(ys.rows()) + ")");
    }
    if (xs.cols() < 1 || ys.cols() < 1) throw ShapeError("x and y need at least one dimension");
    if (xs.rows() < 2) throw InsufficientDataError("a pair needs at least 2 observations");
    if (!xs.allFinite() || !ys.allFinite()) {
        throw MalformedFileError("pair '" + name + "' contains non-finite values", 0);
    }
}

DataPair DataPair::swapped() const {
    DataPair out;
    out.xs = ys;
    out.ys = xs;
    out.name = name;
    if (label) out.label = opposite(*label);
    return out;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw InsufficientDataError("quantile of an empty set");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

ScalingParams ScalingParams::fit(const SampleSet& samples) {
    if (samples.rows() < 2) throw InsufficientDataError("standardization needs at least 2 samples");
    ScalingParams p;
    p.center.resize(samples.cols());
    p.spread.resize(samples.cols());
    for (Eigen::Index k = 0; k < samples.cols(); ++k) {
        std::vector<double> col(samples.col(k).data(), samples.col(k).data() + samples.rows());
        p.center(k) = quantile(col, 0.5);
        const double iqr = quantile(col, 0.75) - quantile(col, 0.25);
        p.spread(k) = std::max(iqr, kSpreadFloor);
    }
    return p;
}

SampleSet ScalingParams::transform(const SampleSet& samples) const {
    if (samples.cols() != center.size()) throw ShapeError("scaling parameters do not match the sample dimension");
    return (samples.rowwise() - center.transpose()).array().rowwise() / spread.transpose().array();
}

SampleSet ScalingParams::inverse_transform(const SampleSet& samples) const {
    if (samples.cols() != center.size()) throw ShapeError("scaling parameters do not match the sample dimension");
    SampleSet out = samples.array().rowwise() * spread.transpose().array();
    out.rowwise() += center.transpose();
    return out;
}

StandardizedPair robust_standardize(const DataPair& pair) {
    pair.validate();
    StandardizedPair out;
    out.x_params = ScalingParams::fit(pair.xs);
    out.y_params = ScalingParams::fit(pair.ys);
    out.pair.xs = out.x_params.transform(pair.xs);
    out.pair.ys = out.y_params.transform(pair.ys);
    out.pair.label = pair.label;
    out.pair.name = pair.name;
    return out;
}

// ---------------------------------------------------------------------------
// Pair files

namespace {

std::vector<std::string_view> split_whitespace(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; };
    while (i < line.size()) {
        while (i < line.size() && is_space(line[i])) ++i;
        std::size_t j = i;
        while (j < line.size() && !is_space(line[j])) ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

bool parse_double(std::string_view tok, double& out) {
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    const auto* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, out);
    return ec == std::errc() && ptr == end;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

DataPair load_pair(const fs::path& path, const ColumnSpec& columns) {
    std::ifstream in(path);
    if (!in) throw MalformedFileError("cannot open pair file '" + path.string() + "'", 0);
    if (columns.x_cols.empty() || columns.y_cols.empty()) throw UsageError("column spec needs x and y columns");
    int max_col = 0;
    for (int c : columns.x_cols) max_col = std::max(max_col, c);
    for (int c : columns.y_cols) max_col = std::max(max_col, c);

    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto toks = split_whitespace(line);
        if (toks.empty() || toks.front().front() == '#') continue;
        if (width == 0) width = toks.size();
        if (toks.size() != width) {
            throw MalformedFileError(path.string() + ": row " + std::to_string(line_no) + " has " +
                                         std::to_string(toks.size()) + " fields, expected " +
                                         std::to_string(width),
                                     line_no);
        }
        if (static_cast<int>(toks.size()) <= max_col) {
            throw MalformedFileError(path.string() + ": row " + std::to_string(line_no) +
                                         " has too few columns for the column spec",
                                     line_no);
        }
        std::vector<double> values(toks.size());
        for (std::size_t k = 0; k < toks.size(); ++k) {
            if (!parse_double(toks[k], values[k]) || !std::isfinite(values[k])) {
                throw MalformedFileError(path.string() + ": row " + std::to_string(line_no) +
                                             ": non-numeric or non-finite field '" + std::string(toks[k]) + "'",
                                         line_no);
            }
        }
        rows.push_back(std::move(values));
    }
    if (rows.size() < 2) {
        throw InsufficientDataError(path.string() + ": need at least 2 observations, found " +
                                    std::to_string(rows.size()));
    }

    DataPair pair;
    const auto n = static_cast<Eigen::Index>(rows.size());
    pair.xs.resize(n, static_cast<Eigen::Index>(columns.x_cols.size()));
    pair.ys.resize(n, static_cast<Eigen::Index>(columns.y_cols.size()));
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& row = rows[static_cast<std::size_t>(r)];
        for (std::size_t k = 0; k < columns.x_cols.size(); ++k) {
            pair.xs(r, static_cast<Eigen::Index>(k)) = row[static_cast<std::size_t>(columns.x_cols[k])];
        }
        for (std::size_t k = 0; k < columns.y_cols.size(); ++k) {
            pair.ys(r, static_cast<Eigen::Index>(k)) = row[static_cast<std::size_t>(columns.y_cols[k])];
        }
    }
    pair.name = path.stem().string();
    const auto meta = metadata_path_for(path);
    if (fs::exists(meta)) pair.label = load_direction_metadata(meta);
    return pair;
}

fs::path metadata_path_for(const fs::path& pair_path) {
    fs::path meta = pair_path;
    meta.replace_extension(".meta");
    return meta;
}

std::optional<Direction> load_direction_metadata(const fs::path& meta_path) {
    std::ifstream in(meta_path);
    if (!in) throw MalformedFileError("cannot open metadata file '" + meta_path.string() + "'", 0);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        // Either "direction: x->y" or a bare "x->y".
        const auto colon = t.find(':');
        if (colon != std::string::npos && trim(std::string_view(t).substr(0, colon)) != "direction") continue;
        const std::string value = colon == std::string::npos ? t : trim(std::string_view(t).substr(colon + 1));
        if (value == "x->y") return Direction::XtoY;
        if (value == "y->x") return Direction::YtoX;
        throw MalformedFileError(meta_path.string() + ": row " + std::to_string(line_no) +
                                     ": direction must be x->y or y->x",
                                 line_no);
    }
    return std::nullopt;
}

void write_pair(const fs::path& path, const DataPair& pair) {
    pair.validate();
    std::ofstream out(path);
    if (!out) throw MalformedFileError("cannot write pair file '" + path.string() + "'", 0);
    out.precision(17);
    for (Eigen::Index r = 0; r < pair.size(); ++r) {
        bool first = true;
        auto emit = [&](double v) {
            if (!first) out << ' ';
            out << v;
            first = false;
        };
        for (Eigen::Index k = 0; k < pair.xs.cols(); ++k) emit(pair.xs(r, k));
        for (Eigen::Index k = 0; k < pair.ys.cols(); ++k) emit(pair.ys(r, k));
        out << '\n';
    }
    if (!out) throw MalformedFileError("failed writing pair file '" + path.string() + "'", 0);
}

void write_direction_metadata(const fs::path& meta_path, Direction direction) {
    std::ofstream out(meta_path);
    if (!out) throw MalformedFileError("cannot write metadata file '" + meta_path.string() + "'", 0);
    out << "direction: " << to_string(direction) << '\n';
}

std::vector<PairMetaEntry> load_pairmeta(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw MalformedFileError("cannot open '" + path.string() + "'", 0);
    std::vector<PairMetaEntry> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto toks = split_whitespace(line);
        if (toks.empty() || toks.front().front() == '#') continue;
        if (toks.size() < 5) {
            throw MalformedFileError(path.string() + ": row " + std::to_string(line_no) + " has fewer than 5 fields",
                                     line_no);
        }
        PairMetaEntry e;
        e.id = std::string(toks[0]);
        double v[5] = {0, 0, 0, 0, 1.0};
        for (std::size_t k = 1; k < std::min<std::size_t>(toks.size(), 6); ++k) {
            if (!parse_double(toks[k], v[k - 1])) {
                throw MalformedFileError(path.string() + ": row " + std::to_string(line_no) + ": bad field",
                                         line_no);
            }
        }
        e.cause_first = static_cast<int>(v[0]);
        e.cause_last = static_cast<int>(v[1]);
        e.effect_first = static_cast<int>(v[2]);
        e.effect_last = static_cast<int>(v[3]);
        e.weight = v[4];
        out.push_back(e);
    }
    return out;
}

std::vector<DataPair> load_tuebingen(const fs::path& dir) {
    std::vector<DataPair> pairs;
    for (const auto& e : load_pairmeta(dir / "pairmeta.txt")) {
        if (!e.univariate()) continue;
        // Univariate pairs are two-column files; the index says which column is the cause.
        const fs::path file = dir / ("pair" + e.id + ".txt");
        DataPair p = load_pair(file);
        if (e.cause_first == 1 && e.effect_first == 2) {
            p.label = Direction::XtoY;
        } else if (e.cause_first == 2 && e.effect_first == 1) {
            p.label = Direction::YtoX;
        } else {
            throw MalformedFileError(file.string() + ": unexpected column layout in pairmeta.txt", 0);
        }
        pairs.push_back(std::move(p));
    }
    return pairs;
}

std::vector<DataPair> load_pair_directory(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw UsageError("'" + dir.string() + "' is not a directory");
    std::vector<DataPair> pairs;
    if (fs::exists(dir / "pairmeta.txt")) {
        pairs = load_tuebingen(dir);
    } else {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
            if (!fs::exists(metadata_path_for(entry.path()))) continue;
            files.push_back(entry.path());
        }
        for (const auto& f : files) pairs.push_back(load_pair(f));
    }
    std::sort(pairs.begin(), pairs.end(), [](const DataPair& a, const DataPair& b) { return a.name < b.name; });
    if (pairs.empty()) throw UsageError("no labelled pair files found in '" + dir.string() + "'");
    return pairs;
}

// ---------------------------------------------------------------------------
// Coresets

SampleSet take_rows(const SampleSet& samples, const std::vector<Eigen::Index>& indices) {
    SampleSet out(static_cast<Eigen::Index>(indices.size()), samples.cols());
    for (std::size_t r = 0; r < indices.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = samples.row(indices[r]);
    return out;
}

std::vector<Eigen::Index> random_subset(Eigen::Index n, Eigen::Index m, std::uint64_t seed) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    if (m >= n) return idx;
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(static_cast<std::size_t>(m));
    std::sort(idx.begin(), idx.end());
    return idx;
}

Vector kde_density_at_samples(const SampleSet& samples) {
    const Eigen::Index n = samples.rows();
    const double d = static_cast<double>(samples.cols());
    if (n < 2) throw InsufficientDataError("KDE needs at least 2 samples");
    // Scott's rule with the average per-dimension standard deviation.
    const Eigen::RowVectorXd mean = samples.colwise().mean();
    const double var = (samples.rowwise() - mean).array().square().sum() / (static_cast<double>(n - 1) * d);
    double h = std::sqrt(var) * std::pow(static_cast<double>(n), -1.0 / (d + 4.0));
    if (!(h > 0.0)) h = 1.0;
    const double norm = 1.0 / (static_cast<double>(n) * std::pow(2.0 * std::numbers::pi * h * h, 0.5 * d));
    const Kernel k{h, 1.0};
    return gram_row_sums(k, samples, samples) * norm;
}

Coreset extract_coreset(const DataPair& pair, Eigen::Index m, const Kernel& kernel, std::uint64_t seed,
                        const CoresetOptions& options) {
    pair.validate();
    if (m < 1) throw UsageError("coreset size must be positive");
    if (options.repeats < 1) throw UsageError("coreset repeats must be at least 1");
    const Eigen::Index n = pair.size();
    Coreset out;
    out.seed = seed;
    if (m >= n) {
        out.indices.resize(static_cast<std::size_t>(n));
        std::iota(out.indices.begin(), out.indices.end(), Eigen::Index{0});
        return out;
    }

    const Vector dens_x = kde_density_at_samples(pair.xs);
    const Vector dens_y = kde_density_at_samples(pair.ys);
    auto threshold = [&](const Vector& dens) {
        if (options.absolute_threshold) return options.rare_level;
        return quantile(std::vector<double>(dens.data(), dens.data() + dens.size()), options.rare_level);
    };
    const double tx = threshold(dens_x);
    const double ty = threshold(dens_y);

    // Rarity score: how far below its marginal threshold a sample sits.
    std::vector<std::pair<double, Eigen::Index>> rare;
    for (Eigen::Index i = 0; i < n; ++i) {
        const bool rx = dens_x(i) < tx;
        const bool ry = dens_y(i) < ty;
        if (!rx && !ry) continue;
        const double score = std::min(rx ? dens_x(i) / tx : 1.0, ry ? dens_y(i) / ty : 1.0);
        rare.emplace_back(score, i);
    }
    std::sort(rare.begin(), rare.end());
    if (static_cast<Eigen::Index>(rare.size()) > m) {
        log::warn("coreset: {} rare samples exceed the coreset size {}; keeping the lowest-density ones",
                  rare.size(), m);
        rare.resize(static_cast<std::size_t>(m));
        out.rare_overflow = true;
    }
    std::vector<Eigen::Index> base;
    base.reserve(rare.size());
    for (const auto& r : rare) base.push_back(r.second);
    std::sort(base.begin(), base.end());
    out.rare_count = static_cast<Eigen::Index>(base.size());

    std::vector<Eigen::Index> pool;
    {
        std::vector<char> taken(static_cast<std::size_t>(n), 0);
        for (auto i : base) taken[static_cast<std::size_t>(i)] = 1;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!taken[static_cast<std::size_t>(i)]) pool.push_back(i);
        }
    }

    SampleSet joint(n, pair.xs.cols() + pair.ys.cols());
    joint << pair.xs, pair.ys;
    const double full_sum = gram_sum(kernel, joint);
    const double nn = static_cast<double>(n);
    const double mm = static_cast<double>(m);

    std::mt19937_64 rng(seed);
    const Eigen::Index fill = m - out.rare_count;
    double best = std::numeric_limits<double>::infinity();
    const int repeats = fill > 0 ? options.repeats : 1;
    for (int r = 0; r < repeats; ++r) {
        std::vector<Eigen::Index> cand = base;
        std::vector<Eigen::Index> shuffled = pool;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        cand.insert(cand.end(), shuffled.begin(), shuffled.begin() + fill);
        std::sort(cand.begin(), cand.end());
        const SampleSet sub = take_rows(joint, cand);
        const double mmd2 = gram_sum(kernel, sub) / (mm * mm) - 2.0 * gram_sum(kernel, sub, joint) / (mm * nn) +
                            full_sum / (nn * nn);
        if (mmd2 < best) {
            best = mmd2;
            out.indices = std::move(cand);
        }
    }
    out.mmd2_to_full = std::max(best, 0.0);
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic generators

std::string_view to_string(SyntheticFamily f) {
    switch (f) {
        case SyntheticFamily::Fig1: return "fig1";
        case SyntheticFamily::AN: return "an";
        case SyntheticFamily::ANs: return "an-s";
        case SyntheticFamily::LS: return "ls";
        case SyntheticFamily::LSs: return "ls-s";
        case SyntheticFamily::MNU: return "mn-u";
    }
    return "?";
}

std::vector<std::string_view> family_names() { return {"fig1", "an", "an-s", "ls", "ls-s", "mn-u"}; }

SyntheticFamily parse_family(std::string_view text) {
    std::string t(text);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (t == "fig1") return SyntheticFamily::Fig1;
    if (t == "an") return SyntheticFamily::AN;
    if (t == "an-s" || t == "ans") return SyntheticFamily::ANs;
    if (t == "ls") return SyntheticFamily::LS;
    if (t == "ls-s" || t == "lss") return SyntheticFamily::LSs;
    if (t == "mn-u" || t == "mnu") return SyntheticFamily::MNU;
    std::string names;
    for (auto n : family_names()) names += (names.empty() ? "" : ", ") + std::string(n);
    throw UsageError("unknown synthetic family '" + std::string(text) + "' (available: " + names + ")");
}

NaturalCubicSpline::NaturalCubicSpline(std::vector<double> knots_x, std::vector<double> knots_y)
    : xs_(std::move(knots_x)), ys_(std::move(knots_y)) {
    const std::size_t k = xs_.size();
    if (k < 2 || ys_.size() != k) throw UsageError("spline needs at least two knots");
    second_.assign(k, 0.0);
    if (k == 2) return;
    // Tridiagonal solve for the interior second derivatives (natural ends).
    std::vector<double> diag(k, 0.0), rhs(k, 0.0), upper(k, 0.0);
    for (std::size_t i = 1; i + 1 < k; ++i) {
        const double h0 = xs_[i] - xs_[i - 1];
        const double h1 = xs_[i + 1] - xs_[i];
        diag[i] = 2.0 * (h0 + h1);
        upper[i] = h1;
        rhs[i] = 6.0 * ((ys_[i + 1] - ys_[i]) / h1 - (ys_[i] - ys_[i - 1]) / h0);
    }
    for (std::size_t i = 2; i + 1 < k; ++i) {
        const double lower = xs_[i] - xs_[i - 1];
        const double w = lower / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    for (std::size_t i = k - 2; i >= 1; --i) {
        second_[i] = (rhs[i] - upper[i] * second_[i + 1]) / diag[i];
        if (i == 1) break;
    }
}

double NaturalCubicSpline::operator()(double x) const {
    const std::size_t k = xs_.size();
    const double h_lo = xs_[1] - xs_[0];
    const double h_hi = xs_[k - 1] - xs_[k - 2];
    const double slope_lo = (ys_[1] - ys_[0]) / h_lo - h_lo * (2.0 * second_[0] + second_[1]) / 6.0;
    const double slope_hi = (ys_[k - 1] - ys_[k - 2]) / h_hi + h_hi * (second_[k - 2] + 2.0 * second_[k - 1]) / 6.0;
    if (x <= xs_.front()) return ys_.front() + slope_lo * (x - xs_.front());
    if (x >= xs_.back()) return ys_.back() + slope_hi * (x - xs_.back());
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
    const double h = xs_[i + 1] - xs_[i];
    const double a = (xs_[i + 1] - x) / h;
    const double b = (x - xs_[i]) / h;
    return a * ys_[i] + b * ys_[i + 1] +
           ((a * a * a - a) * second_[i] + (b * b * b - b) * second_[i + 1]) * h * h / 6.0;
}

namespace {

constexpr int kSplineKnots = 5;
constexpr double kKnotScale = 3.0;
constexpr double kStrongNoise = 5.0;

NaturalCubicSpline random_spline(double lo, double hi, double scale, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> kx(kSplineKnots), ky(kSplineKnots);
    if (!(hi > lo)) hi = lo + 1.0;
    for (int k = 0; k < kSplineKnots; ++k) {
        kx[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (kSplineKnots - 1);
        ky[static_cast<std::size_t>(k)] = scale * normal(rng);
    }
    return NaturalCubicSpline(std::move(kx), std::move(ky));
}

double softplus(double v) { return v > 30.0 ? v : std::log1p(std::exp(v)); }

}  // namespace

DataPair generate_synthetic(SyntheticFamily family, Eigen::Index n, std::uint64_t seed) {
    return generate_synthetic_detailed(family, n, seed).pair;
}

SyntheticSample generate_synthetic_detailed(SyntheticFamily family, Eigen::Index n, std::uint64_t seed) {
    if (n < 2) throw InsufficientDataError("synthetic pairs need n >= 2");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    SyntheticSample out;
    DataPair& pair = out.pair;
    pair.xs.resize(n, 1);
    pair.ys.resize(n, 1);
    pair.label = Direction::XtoY;
    pair.name = std::string(to_string(family)) + "_" + std::to_string(seed);

    if (family == SyntheticFamily::Fig1) {
        std::uniform_real_distribution<double> unif(-2.5, 2.5);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double x = unif(rng);
            const double eps = normal(rng);
            pair.xs(i, 0) = x;
            pair.ys(i, 0) = -0.5 * x * x * eps;
        }
        out.mean = [](double) { return 0.0; };
        return out;
    }

    for (Eigen::Index i = 0; i < n; ++i) pair.xs(i, 0) = normal(rng);
    const double lo = pair.xs.minCoeff();
    const double hi = pair.xs.maxCoeff();
    const NaturalCubicSpline f = random_spline(lo, hi, kKnotScale, rng);
    const NaturalCubicSpline g_raw = random_spline(lo, hi, 1.0, rng);
    const double noise = (family == SyntheticFamily::ANs || family == SyntheticFamily::LSs) ? kStrongNoise : 1.0;
    std::uniform_real_distribution<double> unif(0.5, 1.5);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = pair.xs(i, 0);
        switch (family) {
            case SyntheticFamily::AN:
            case SyntheticFamily::ANs:
                pair.ys(i, 0) = f(x) + noise * normal(rng);
                break;
            case SyntheticFamily::LS:
            case SyntheticFamily::LSs:
                pair.ys(i, 0) = f(x) + noise * softplus(g_raw(x)) * normal(rng);
                break;
            case SyntheticFamily::MNU:
                pair.ys(i, 0) = f(x) * unif(rng);
                break;
            case SyntheticFamily::Fig1:
                break;
        }
    }
    out.mean = family == SyntheticFamily::MNU ? std::function<double(double)>([f](double x) { return f(x); })
                                              : std::function<double(double)>(f);
    return out;
}

}  // namespace vcei
