#include "oracles.hpp"
#include "vcei/regressor.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace vcei;

namespace {

Matrix grid(double lo, double hi, int n) { return Vector::LinSpaced(n, lo, hi); }

}  // namespace

TEST(WeightedGp, UniformWeightsEqualUnweighted) {
    std::mt19937_64 rng(1);
    const Matrix x = oracle::gaussian(30, 1, rng);
    const Matrix y = x.array().sin().matrix() + 0.1 * oracle::gaussian(30, 1, rng);
    const Kernel k = Kernel::squared_exponential(0.8);
    const Matrix q = grid(-2, 2, 20);
    const Matrix a = WeightedGp::fit(x, y, WeightVector::uniform(30), k, {}).predict_mean(q);
    const Matrix b = WeightedGp::fit(x, y, std::nullopt, k, {}).predict_mean(q);
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-9);
    const Matrix ref = oracle::gp_mean(x, y, Vector::Constant(30, 1e-2), q, 0.8);
    EXPECT_LT((b - ref).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(WeightedGp, IntegerWeightsEqualDuplication) {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> count(0, 4);
    for (int t = 0; t < 10; ++t) {
        const int n = 12;
        const Matrix x = oracle::gaussian(n, 1, rng);
        const Matrix y = x.array().square().matrix() + 0.2 * oracle::gaussian(n, 1, rng);
        Vector c(n);
        for (int i = 0; i < n; ++i) c(i) = count(rng);
        c(0) = std::max(c(0), 1.0);
        c(1) = std::max(c(1), 1.0);
        const double total = c.sum();
        const int n_eff = static_cast<int>((c.array() > 0).count());
        const double sigma2 = 1e-2;

        Matrix xd(static_cast<Eigen::Index>(total), 1), yd(static_cast<Eigen::Index>(total), 1);
        Eigen::Index r = 0;
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < static_cast<int>(c(i)); ++k, ++r) {
                xd(r, 0) = x(i, 0);
                yd(r, 0) = y(i, 0);
            }
        const double tau2 = sigma2 * total / n_eff;
        const Matrix q = grid(-2.5, 2.5, 20);
        const Matrix ref = oracle::gp_mean(xd, yd, Vector::Constant(xd.rows(), tau2), q, 0.9);

        GpOptions opts;
        opts.noise_variance = sigma2;
        const WeightedGp gp = WeightedGp::fit(x, y, WeightVector(c / total), Kernel::squared_exponential(0.9), opts);
        EXPECT_EQ(gp.effective_count(), n_eff);
        EXPECT_LT((gp.predict_mean(q) - ref).cwiseAbs().maxCoeff(), 1e-6);
    }
}

TEST(WeightedGp, SingleSurvivorIsInsufficient) {
    const Matrix x = grid(0, 1, 5);
    EXPECT_THROW(WeightedGp::fit(x, x, WeightVector(Vector::Unit(5, 2)), Kernel::squared_exponential(1.0), {}),
                 InsufficientSupportError);
}

TEST(WeightedGp, InterpolatesWithTinyNoise) {
    const Matrix x = grid(-1, 1, 8);
    const Matrix y = x.array().cube().matrix();
    GpOptions opts;
    opts.noise_variance = 1e-8;
    const WeightedGp gp = WeightedGp::fit(x, y, std::nullopt, Kernel::squared_exponential(0.5), opts);
    EXPECT_LT((gp.predict_mean(x) - y).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(WeightedGp, RevertsToZeroFarAway) {
    const Matrix x = grid(-1, 1, 8);
    const Matrix y = Matrix::Constant(8, 1, 3.0);
    const WeightedGp gp = WeightedGp::fit(x, y, std::nullopt, Kernel::squared_exponential(0.3), {});
    Matrix far(1, 1);
    far << 50.0;
    EXPECT_NEAR(gp.predict_mean(far)(0, 0), 0.0, 1e-3);
}

TEST(WeightedGp, LinearData) {
    const Matrix x = grid(-1, 1, 50);
    const Matrix y = 2.0 * x;
    GpOptions opts;
    opts.noise_variance = 1e-4;
    const WeightedGp gp = WeightedGp::fit(x, y, std::nullopt, Kernel::squared_exponential(1.0), opts);
    EXPECT_LT((gp.predict_mean(x) - y).cwiseAbs().maxCoeff(), 0.05);
}

TEST(WeightedGp, ZeroWeightsAreDropped) {
    std::mt19937_64 rng(3);
    const Matrix x = oracle::gaussian(10, 1, rng);
    const Matrix y = oracle::gaussian(10, 1, rng);
    Vector w = Vector::Zero(10);
    w.head(4).setConstant(0.25);
    const Kernel k = Kernel::squared_exponential(1.0);
    const WeightedGp a = WeightedGp::fit(x, y, WeightVector(w), k, {});
    const WeightedGp b = WeightedGp::fit(x.topRows(4), y.topRows(4), std::nullopt, k, {});
    EXPECT_EQ(a.training_size(), 4);
    const Matrix q = grid(-2, 2, 20);
    EXPECT_LT((a.predict_mean(q) - b.predict_mean(q)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(WeightedGp, ResamplingIsSeededAndUnweighted) {
    std::mt19937_64 rng(4);
    const Matrix x = oracle::gaussian(20, 1, rng);
    const Matrix y = oracle::gaussian(20, 1, rng);
    Vector w = Vector::LinSpaced(20, 1.0, 2.0);
    w /= w.sum();
    GpOptions opts;
    opts.scheme = WeightingScheme::Resampling;
    opts.resample_seed = 5;
    const Kernel k = Kernel::squared_exponential(1.0);
    const WeightedGp a = WeightedGp::fit(x, y, WeightVector(w), k, opts);
    const WeightedGp b = WeightedGp::fit(x, y, WeightVector(w), k, opts);
    const Matrix q = grid(-2, 2, 20);
    EXPECT_EQ(a.predict_mean(q), b.predict_mean(q));
    EXPECT_EQ(a.training_size(), 20);
    EXPECT_TRUE((a.noise_diagonal().array() == opts.noise_variance).all());
    opts.resample_seed = 6;
    EXPECT_NE(WeightedGp::fit(x, y, WeightVector(w), k, opts).predict_mean(q), a.predict_mean(q));
}

TEST(WeightedGp, ShapeChecks) {
    const Matrix x = grid(0, 1, 5);
    const Kernel k = Kernel::squared_exponential(1.0);
    EXPECT_THROW(WeightedGp::fit(x, grid(0, 1, 4), std::nullopt, k, {}), ShapeError);
    const WeightedGp gp = WeightedGp::fit(x, x, std::nullopt, k, {});
    EXPECT_THROW(gp.predict_mean(Matrix::Zero(3, 2)), ShapeError);
    GpOptions bad;
    bad.noise_variance = 0.0;
    EXPECT_THROW(WeightedGp::fit(x, x, std::nullopt, k, bad), UsageError);
}
