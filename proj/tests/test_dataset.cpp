#include "oracles.hpp"
#include "vcei/dataset.hpp"
#include "vcei/mmd.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <unistd.h>

using namespace vcei;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() /
                ("vcei_dataset_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    static inline int counter_ = 0;
    fs::path path_;
};

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

SampleSet column(std::initializer_list<double> v) {
    SampleSet s(static_cast<Eigen::Index>(v.size()), 1);
    Eigen::Index i = 0;
    for (double x : v) s(i++, 0) = x;
    return s;
}

}  // namespace

TEST(LoadPair, TwoRows) {
    TempDir dir;
    write_text(dir.path() / "p.txt", "0 0\n1 1\n");
    const DataPair p = load_pair(dir.path() / "p.txt");
    ASSERT_EQ(p.size(), 2);
    EXPECT_EQ(p.xs(0, 0), 0.0);
    EXPECT_EQ(p.xs(1, 0), 1.0);
    EXPECT_EQ(p.ys(1, 0), 1.0);
    EXPECT_FALSE(p.label.has_value());
    EXPECT_EQ(p.name, "p");
}

TEST(LoadPair, NonNumericTokenNamesRow) {
    TempDir dir;
    write_text(dir.path() / "p.txt", "0 0\n1 abc\n2 2\n");
    try {
        load_pair(dir.path() / "p.txt");
        FAIL() << "expected a malformed-file error";
    } catch (const MalformedFileError& e) {
        EXPECT_EQ(e.row(), 2u);
        EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
    }
}

TEST(LoadPair, RaggedRowsAndTooFewRows) {
    TempDir dir;
    write_text(dir.path() / "a.txt", "0 0\n1\n");
    EXPECT_THROW(load_pair(dir.path() / "a.txt"), MalformedFileError);
    write_text(dir.path() / "b.txt", "0 0\n");
    EXPECT_THROW(load_pair(dir.path() / "b.txt"), InsufficientDataError);
    EXPECT_THROW(load_pair(dir.path() / "missing.txt"), MalformedFileError);
}

TEST(LoadPair, SidecarLabel) {
    TempDir dir;
    write_text(dir.path() / "p.txt", "0 1\n1 2\n2 0\n");
    write_text(dir.path() / "p.meta", "y->x\n");
    const DataPair p = load_pair(dir.path() / "p.txt");
    ASSERT_TRUE(p.label.has_value());
    EXPECT_EQ(*p.label, Direction::YtoX);
}

TEST(LoadPair, WriteReadRoundTrip) {
    TempDir dir;
    const DataPair g = generate_synthetic(SyntheticFamily::LS, 50, 4);
    write_pair(dir.path() / "g.txt", g);
    write_direction_metadata(dir.path() / "g.meta", *g.label);
    const DataPair back = load_pair(dir.path() / "g.txt");
    EXPECT_EQ(back.xs, g.xs);
    EXPECT_EQ(back.ys, g.ys);
    EXPECT_EQ(back.label, g.label);
}

TEST(LoadDirectory, EmptyIsUsageError) {
    TempDir dir;
    EXPECT_THROW(load_pair_directory(dir.path()), UsageError);
    EXPECT_THROW(load_pair_directory(dir.path() / "nope"), UsageError);
}

TEST(LoadDirectory, CauseEffectPairsLayout) {
    TempDir dir;
    write_text(dir.path() / "pairmeta.txt",
               "0001 1 1 2 2 1\n"
               "0002 2 2 1 1 0.5\n"
               "0003 1 2 3 3 1\n");
    write_text(dir.path() / "pair0001.txt", "1 2\n2 3\n3 5\n");
    write_text(dir.path() / "pair0002.txt", "1 2\n2 3\n3 5\n");
    write_text(dir.path() / "pair0003.txt", "1 2 3\n2 3 4\n3 5 6\n");
    const auto pairs = load_pair_directory(dir.path());
    ASSERT_EQ(pairs.size(), 2u);
    EXPECT_EQ(pairs[0].name, "pair0001");
    EXPECT_EQ(*pairs[0].label, Direction::XtoY);
    EXPECT_EQ(*pairs[1].label, Direction::YtoX);
}

TEST(LoadDirectory, TuebingenIfPresent) {
    const char* env = std::getenv("VCEI_TUEBINGEN_DIR");
    if (!env || !fs::exists(fs::path(env) / "pairmeta.txt")) GTEST_SKIP() << "cause-effect pairs not available";
    EXPECT_EQ(load_tuebingen(env).size(), 103u);
}

TEST(Standardize, CenterAndIqr) {
    const ScalingParams p = ScalingParams::fit(column({1.0, 2.0, 3.0}));
    EXPECT_DOUBLE_EQ(p.center(0), 2.0);
    EXPECT_DOUBLE_EQ(p.spread(0), 1.0);  // quantiles 1.5 and 2.5
}

TEST(Standardize, ConstantColumnIsFloored) {
    const SampleSet c = column({5.0, 5.0, 5.0});
    const ScalingParams p = ScalingParams::fit(c);
    EXPECT_EQ(p.spread(0), ScalingParams::kSpreadFloor);
    EXPECT_TRUE(p.transform(c).isZero(0.0));
}

TEST(Standardize, RoundTrip) {
    std::mt19937_64 rng(1);
    const Matrix x = oracle::gaussian(100, 2, rng) * 7.0 + Matrix::Constant(100, 2, 3.0);
    const ScalingParams p = ScalingParams::fit(x);
    EXPECT_LT((p.inverse_transform(p.transform(x)) - x).cwiseAbs().maxCoeff(), 1e-10);
    const ScalingParams again = ScalingParams::fit(p.transform(x));
    EXPECT_LT(again.center.cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((again.spread.array() - 1.0).abs().maxCoeff(), 1e-10);
}

TEST(Quantile, MatchesLinearInterpolation) {
    EXPECT_DOUBLE_EQ(quantile({4.0, 1.0, 3.0, 2.0}, 0.25), 1.75);
    EXPECT_DOUBLE_EQ(quantile({4.0, 1.0, 3.0, 2.0}, 1.0), 4.0);
}

TEST(Coreset, FullSizeIsIdentity) {
    const DataPair p = generate_synthetic(SyntheticFamily::Fig1, 30, 1);
    const Coreset c = extract_coreset(p, 30, Kernel::squared_exponential(1.0), 5);
    ASSERT_EQ(c.indices.size(), 30u);
    for (std::size_t i = 0; i < 30; ++i) EXPECT_EQ(c.indices[i], static_cast<Eigen::Index>(i));
}

TEST(Coreset, WithoutRareSamplesBeatsMedianRandomSubset) {
    std::mt19937_64 rng(2);
    DataPair p;
    p.xs = oracle::gaussian(1000, 1, rng);
    p.ys = oracle::gaussian(1000, 1, rng);
    const Kernel k = Kernel::squared_exponential(1.0);
    CoresetOptions opts;
    opts.rare_level = 0.0;
    const Coreset c = extract_coreset(p, 100, k, 8, opts);
    ASSERT_EQ(c.indices.size(), 100u);
    EXPECT_EQ(c.rare_count, 0);
    EXPECT_TRUE(std::is_sorted(c.indices.begin(), c.indices.end()));

    Matrix joint(1000, 2);
    joint << p.xs, p.ys;
    std::vector<double> random;
    for (int r = 0; r < 10; ++r) {
        const auto idx = random_subset(1000, 100, 100 + r);
        random.push_back(mmd2_biased(k, take_rows(joint, idx), joint).value);
    }
    const double mine = mmd2_biased(k, take_rows(joint, c.indices), joint).value;
    EXPECT_NEAR(mine, c.mmd2_to_full, 1e-12);
    EXPECT_LE(mine, quantile(random, 0.5));
}

TEST(Coreset, RareSamplesCanFillTheBudget) {
    // At the default level both marginals contribute about 5% of n each, so
    // with m = n / 10 nearly every slot goes to tail samples.
    std::mt19937_64 rng(2);
    DataPair p;
    p.xs = oracle::gaussian(1000, 1, rng);
    p.ys = oracle::gaussian(1000, 1, rng);
    const Coreset c = extract_coreset(p, 100, Kernel::squared_exponential(1.0), 8);
    EXPECT_GT(c.rare_count, 80);
    EXPECT_EQ(c.indices.size(), 100u);
}

TEST(Coreset, KeepsRareSamples) {
    const DataPair p = generate_synthetic(SyntheticFamily::AN, 400, 3);
    const Coreset c = extract_coreset(p, 100, Kernel::squared_exponential(1.0), 4);
    const Vector dx = kde_density_at_samples(p.xs);
    const Vector dy = kde_density_at_samples(p.ys);
    const double tx = quantile(std::vector<double>(dx.data(), dx.data() + dx.size()), 0.05);
    const double ty = quantile(std::vector<double>(dy.data(), dy.data() + dy.size()), 0.05);
    for (Eigen::Index i = 0; i < 400; ++i) {
        if (dx(i) < tx || dy(i) < ty) {
            EXPECT_TRUE(std::binary_search(c.indices.begin(), c.indices.end(), i)) << "rare index " << i;
        }
    }
}

TEST(Coreset, LargeSetReduces) {
    const DataPair p = generate_synthetic(SyntheticFamily::LS, 5000, 6);
    const Coreset c = extract_coreset(p, 100, Kernel::squared_exponential(1.0), 1);
    EXPECT_EQ(c.indices.size(), 100u);
}

TEST(RandomSubset, SortedDistinctDeterministic) {
    const auto a = random_subset(50, 10, 3);
    EXPECT_EQ(a, random_subset(50, 10, 3));
    EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
    EXPECT_EQ(std::adjacent_find(a.begin(), a.end()), a.end());
    EXPECT_EQ(random_subset(5, 10, 3).size(), 5u);
}

TEST(Synthetic, Fig1Shape) {
    const SyntheticSample s = generate_synthetic_detailed(SyntheticFamily::Fig1, 500, 9);
    const DataPair& p = s.pair;
    EXPECT_EQ(p.size(), 500);
    EXPECT_EQ(*p.label, Direction::XtoY);
    EXPECT_GE(p.xs.minCoeff(), -2.5);
    EXPECT_LE(p.xs.maxCoeff(), 2.5);
    // eps = y / (-x^2 / 2) should look standard normal.
    double sum = 0.0, sq = 0.0;
    for (Eigen::Index i = 0; i < 500; ++i) {
        const double e = p.ys(i, 0) / (-0.5 * p.xs(i, 0) * p.xs(i, 0));
        sum += e;
        sq += e * e;
    }
    EXPECT_LT(std::abs(sum / 500), 3.0 / std::sqrt(500.0));
    EXPECT_NEAR(sq / 500, 1.0, 0.25);
    EXPECT_NEAR(s.mean(1.3), 0.0, 1e-12);
}

TEST(Synthetic, Deterministic) {
    for (auto name : family_names()) {
        const SyntheticFamily f = parse_family(name);
        const DataPair a = generate_synthetic(f, 64, 21);
        const DataPair b = generate_synthetic(f, 64, 21);
        EXPECT_EQ(a.xs, b.xs) << name;
        EXPECT_EQ(a.ys, b.ys) << name;
        EXPECT_NE(a.ys, generate_synthetic(f, 64, 22).ys) << name;
    }
}

TEST(Synthetic, AdditiveNoiseResidualsCentered) {
    const SyntheticSample s = generate_synthetic_detailed(SyntheticFamily::AN, 1000, 13);
    Vector r(1000);
    for (Eigen::Index i = 0; i < 1000; ++i) r(i) = s.pair.ys(i, 0) - s.mean(s.pair.xs(i, 0));
    const double mean = r.mean();
    const double sd = std::sqrt((r.array() - mean).square().sum() / 999.0);
    EXPECT_LT(std::abs(mean), 3.0 * sd / std::sqrt(1000.0));
}

TEST(Synthetic, UnknownFamilyListsNames) {
    try {
        parse_family("gauss");
        FAIL();
    } catch (const UsageError& e) {
        EXPECT_NE(std::string(e.what()).find("fig1"), std::string::npos);
    }
    EXPECT_THROW(generate_synthetic(SyntheticFamily::AN, 1, 0), InsufficientDataError);
}

TEST(DataPairType, SwapExchangesRolesAndLabel) {
    const DataPair p = generate_synthetic(SyntheticFamily::MNU, 20, 2);
    const DataPair s = p.swapped();
    EXPECT_EQ(s.xs, p.ys);
    EXPECT_EQ(*s.label, Direction::YtoX);
}
