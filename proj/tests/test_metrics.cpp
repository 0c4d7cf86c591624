#include <cmath>

#include <gtest/gtest.h>

#include "support.hpp"
#include "wtperf/metrics.hpp"

using namespace wtperf;
using wtperf::fixtures::make_dataset;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v)
{
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

/// Curve on a 1-D W lattice 0..n-1 with a constant band.
DifferenceCurve curve(const Eigen::VectorXd& f1, const Eigen::VectorXd& f2, double band = 1e9)
{
    DifferenceCurve c;
    c.grid = make_grid({GridAxis{Covariate::W, 0.0, static_cast<double>(f1.size() - 1), 0, static_cast<std::size_t>(f1.size())}});
    c.f1 = f1;
    c.f2 = f2;
    c.diff = f2 - f1;
    c.upper = Eigen::VectorXd::Constant(f1.size(), band);
    c.lower = -c.upper;
    c.var1 = c.var2 = Eigen::VectorXd::Zero(f1.size());
    return c;
}

Dataset powers(std::initializer_list<double> y)
{
    std::vector<double> w(y.size(), 0.0);
    return make_dataset("O", {Covariate::W}, {w}, std::vector<double>(y));
}

} // namespace

TEST(Unweighted, IdenticalCurvesAreZero)
{
    auto c = curve(vec({100, 200}), vec({100, 200}));
    auto d = delta_unweighted(c);
    EXPECT_EQ(d.kw, 0.0);
    EXPECT_EQ(*d.pct, 0.0);
}

TEST(Unweighted, ConstantShift)
{
    auto c = curve(Eigen::VectorXd::Constant(7, 500), Eigen::VectorXd::Constant(7, 525));
    auto d = delta_unweighted(c);
    EXPECT_NEAR(d.kw, 25.0, 1e-12);
    EXPECT_NEAR(*d.pct, 5.0, 1e-12);
}

TEST(Unweighted, ThreePointHandSum)
{
    auto d = delta_unweighted(curve(vec({100, 200, 300}), vec({110, 190, 330})));
    EXPECT_NEAR(d.kw, 10.0, 1e-9);
    EXPECT_NEAR(*d.pct, 5.0, 1e-9);
}

TEST(Unweighted, ZeroBaseHasNoPercent)
{
    auto d = delta_unweighted(curve(vec({0, 0}), vec({1, 1})));
    EXPECT_FALSE(d.pct.has_value());
}

TEST(Weighted, ThreePointHandSum)
{
    auto d = delta_weighted(curve(vec({100, 200, 300}), vec({110, 190, 330})), vec({0.5, 0.25, 0.25}));
    EXPECT_NEAR(d.kw, 10.0, 1e-9);
    EXPECT_NEAR(*d.pct, 100.0 * 10.0 / 175.0, 1e-9);
}

TEST(Weighted, UniformEqualsUnweighted)
{
    Rng r(3);
    Eigen::VectorXd f1(50), f2(50);
    for (Eigen::Index i = 0; i < 50; ++i) {
        f1[i] = r.uniform(0, 1500);
        f2[i] = f1[i] + r.normal(0, 30);
    }
    auto c = curve(f1, f2);
    auto u = delta_unweighted(c);
    auto w = delta_weighted(c, Eigen::VectorXd::Constant(50, 1.0 / 50));
    EXPECT_NEAR(u.kw, w.kw, 1e-12);
}

TEST(Weighted, UnitMass)
{
    auto c = curve(vec({100, 200, 300}), vec({110, 190, 330}));
    EXPECT_DOUBLE_EQ(delta_weighted(c, vec({0, 1, 0})).kw, -10.0);
}

TEST(FrequencyWeights, UnitMassAndSnapping)
{
    auto c = curve(vec({1, 2, 3, 4}), vec({1, 2, 3, 4}));
    auto o1 = make_dataset("A", {Covariate::W}, {{2.1, 1.9, 2.4}}, {0, 0, 0});
    auto P = frequency_weights(o1, o1.empty_like(), c.grid);
    EXPECT_DOUBLE_EQ(P[2], 1.0);
    auto o2 = make_dataset("B", {Covariate::W}, {{-5.0, 40.0}}, {0, 0});
    P = frequency_weights(o2, o1, c.grid);
    EXPECT_NEAR(P.sum(), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(P[0], 0.2);
    EXPECT_DOUBLE_EQ(P[3], 0.2);
    EXPECT_THROW(frequency_weights(o1.empty_like(), o1.empty_like(), c.grid), Error);
}

TEST(FrequencyWeights, UniformWeatherApproachesUniformWeights)
{
    Rng r(8);
    const std::size_t n = 100000;
    std::vector<double> w(n), t(n), y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = r.uniform(-0.5, 9.5);
        t[i] = r.uniform(-0.5, 4.5);
    }
    auto d = make_dataset("U", {Covariate::W, Covariate::T}, {w, t}, y);
    auto grid = make_grid({GridAxis{Covariate::W, 0, 9, 0, 10}, GridAxis{Covariate::T, 0, 4, 0, 5}});
    auto P = frequency_weights(d, d.empty_like(), grid);
    const double expect = 1.0 / 50.0;
    const double tol = 3.0 / std::sqrt(static_cast<double>(n)); // on cell shares
    EXPECT_LT((P.array() - expect).abs().maxCoeff(), tol);
}

TEST(Statistical, InsideBandIsZero)
{
    auto c = curve(vec({100, 200}), vec({105, 195}), 10.0);
    EXPECT_EQ(delta_statistical(c).kw, 0.0);
}

TEST(Statistical, ConstantExcess)
{
    auto c = curve(Eigen::VectorXd::Constant(4, 100), Eigen::VectorXd::Constant(4, 130), 10.0);
    EXPECT_NEAR(delta_statistical(c).kw, 20.0, 1e-12);
    EXPECT_NEAR(delta_statistical(c, std::nullopt, SignificanceMode::FullOutside).kw, 30.0, 1e-12);
}

TEST(Statistical, TwoPointHandComputation)
{
    auto c = curve(vec({100, 100}), vec({115, 95}), 10.0);
    EXPECT_NEAR(delta_statistical(c).kw, 2.5, 1e-9);
    auto neg = curve(vec({100, 100}), vec({85, 95}), 10.0);
    EXPECT_NEAR(delta_statistical(neg).kw, -2.5, 1e-9);
}

TEST(Statistical, ExcessNeverExceedsDiff)
{
    Rng r(4);
    Eigen::VectorXd f1(200), f2(200);
    for (Eigen::Index i = 0; i < 200; ++i) {
        f1[i] = r.uniform(0, 1000);
        f2[i] = f1[i] + r.normal(0, 40);
    }
    auto c = curve(f1, f2, 25.0);
    auto s = significant_part(c);
    for (Eigen::Index i = 0; i < 200; ++i) {
        if (std::fabs(c.diff[i]) > 25.0) {
            EXPECT_LE(std::fabs(s[i]), std::fabs(c.diff[i]));
            EXPECT_GE(s[i] * c.diff[i], 0.0);
        } else {
            EXPECT_EQ(s[i], 0.0);
        }
    }
}

TEST(Scaled, TwoBinHandComputation)
{
    // bins of 100 kW: f1 = 100 -> bin 2, f1 = 300 -> bin 4
    auto c = curve(vec({100, 100, 300}), vec({110, 120, 290}));
    auto o = powers({150, 150, 150, 350});
    auto s = delta_scaled(c, o, o.empty_like(), 1500.0, 15);
    EXPECT_NEAR(s.value.kw, 8.75, 1e-9);
    EXPECT_NEAR(*s.value.pct, 100.0 * 8.75 / 150.0, 1e-9);
    EXPECT_NEAR(s.bins[1].pi, 0.75, 1e-12);
    EXPECT_NEAR(s.bins[3].pi, 0.25, 1e-12);
    EXPECT_NEAR(s.bins[1].delta, 15.0, 1e-12);
    EXPECT_NEAR(s.bins[3].mu, 300.0, 1e-12);
}

TEST(Scaled, EmptyQBinsAreRenormalisedAway)
{
    auto c = curve(vec({100, 100, 300}), vec({110, 120, 290}));
    // 50% of the original power sits in bins with no grid points
    auto o = powers({150, 150, 150, 350, 900, 900, 900, 900});
    auto s = delta_scaled(c, o, o.empty_like(), 1500.0, 15);
    EXPECT_NEAR(s.value.kw, 8.75, 1e-9);
    double sum = 0;
    for (const auto& b : s.bins) sum += b.pi;
    EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(Scaled, SingleBinCollapsesToUnweighted)
{
    auto c = curve(vec({210, 220, 250}), vec({215, 230, 240}));
    auto o = powers({205, 260, 299});
    auto s = delta_scaled(c, o, o, 1500.0, 15);
    EXPECT_NEAR(s.value.kw, delta_unweighted(c).kw, 1e-12);
}

TEST(Scaled, ClampsOutOfRangePower)
{
    EXPECT_EQ(power_bin(-20.0, 1500, 15), 0u);
    EXPECT_EQ(power_bin(1500.0, 1500, 15), 14u);
    EXPECT_EQ(power_bin(1800.0, 1500, 15), 14u);
    EXPECT_EQ(power_bin(99.999, 1500, 15), 0u);
    EXPECT_EQ(power_bin(100.0, 1500, 15), 1u);
}

TEST(Scaled, Errors)
{
    auto c = curve(vec({100, 100}), vec({110, 120}));
    auto o = powers({900});
    EXPECT_THROW(delta_scaled(c, o, o, 1500.0, 15), Error);
    EXPECT_THROW(delta_scaled(c, o.empty_like(), o.empty_like(), 1500.0, 15), Error);
}

TEST(ControlTest, Adjustment)
{
    EXPECT_NEAR(control_test_adjust(2.29, 0.97), 1.32, 1e-12);
    EXPECT_EQ(control_test_adjust(3.0, 0.0), 3.0);
    EXPECT_EQ(control_test_adjust(1.7, 1.7), 0.0);
    EXPECT_FALSE(control_test_adjust(std::optional<double>{}, std::optional<double>{1.0}).has_value());
}

TEST(AllMetrics, ZeroOnIdenticalCurves)
{
    auto c = curve(vec({100, 400, 900, 1200}), vec({100, 400, 900, 1200}), 5.0);
    auto o = powers({100, 400, 900, 1200, 1300});
    auto m = compute_metrics(c, o, o);
    EXPECT_EQ(m.unweighted.kw, 0.0);
    EXPECT_EQ(m.weighted.kw, 0.0);
    EXPECT_EQ(m.stat_unweighted.kw, 0.0);
    EXPECT_EQ(m.stat_weighted.kw, 0.0);
    EXPECT_EQ(m.scaled.kw, 0.0);
    EXPECT_EQ(m.stat_scaled.kw, 0.0);
    EXPECT_NEAR(m.frequency_weights.sum(), 1.0, 1e-9);
}
