#include <algorithm>
#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "support.hpp"
#include "wtperf/matching.hpp"

using namespace wtperf;
using wtperf::fixtures::make_dataset;

namespace {

const std::vector<Covariate> kW{Covariate::W};

MatchSpec spec_of(std::vector<Covariate> order, double varpi = 0.2)
{
    MatchSpec s;
    s.covariate_order = std::move(order);
    s.varpi = varpi;
    return s;
}

std::set<std::pair<std::string, long long>> identity_set(const Dataset& d)
{
    std::set<std::pair<std::string, long long>> s;
    for (const auto& r : d.records) s.emplace(r.turbine_id, r.timestamp.time_since_epoch().count());
    return s;
}

double linear_sd(const std::vector<double>& v)
{
    double m = 0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

/// Set-based oracle: filter the pool covariate by covariate, intersecting as
/// it goes, then take the closest survivor.
std::set<std::size_t> oracle_one_way(const Dataset& base, const Dataset& cand, const std::vector<Covariate>& order,
                                     double varpi, std::set<std::size_t>* matched_base)
{
    std::vector<double> thr, sig;
    for (auto c : order) {
        sig.push_back(linear_sd(cand.column(c)));
        thr.push_back(varpi * sig.back());
    }
    std::set<std::size_t> pool;
    for (std::size_t i = 0; i < cand.n(); ++i) pool.insert(i);
    std::set<std::size_t> taken;
    for (std::size_t j = 0; j < base.n(); ++j) { // toy inputs are already time-ordered
        std::set<std::size_t> group = pool;
        for (std::size_t c = 0; c < order.size(); ++c) {
            std::set<std::size_t> next;
            for (auto i : group)
                if (std::fabs(cand.records[i].at(order[c]) - base.records[j].at(order[c])) < thr[c]) next.insert(i);
            group = next;
        }
        if (group.empty()) continue;
        std::size_t best = *group.begin();
        double bd = 1e300;
        for (auto i : group) {
            double d = 0;
            for (std::size_t c = 0; c < order.size(); ++c) {
                const double z = (cand.records[i].at(order[c]) - base.records[j].at(order[c])) / sig[c];
                d += z * z;
            }
            if (d < bd) {
                bd = d;
                best = i;
            }
        }
        pool.erase(best);
        taken.insert(best);
        if (matched_base) matched_base->insert(j);
    }
    return taken;
}

void expect_certificate(const Dataset& base, const Dataset& cand, const MatchSpec& spec)
{
    auto r = match_one_way(base, cand, spec);
    std::set<std::size_t> used;
    for (auto [j, i] : r.pairs) {
        EXPECT_TRUE(used.insert(i).second) << "candidate consumed twice";
        for (std::size_t c = 0; c < spec.covariate_order.size(); ++c) {
            const auto cov = spec.covariate_order[c];
            const double gap = spec.is_circular(cov)
                                   ? stats::angular_difference(base.records[j].at(cov), cand.records[i].at(cov))
                                   : std::fabs(base.records[j].at(cov) - cand.records[i].at(cov));
            EXPECT_LT(gap, r.threshold[c]);
        }
    }
}

} // namespace

TEST(MatchOneWay, ClosestWithinThreshold)
{
    auto base = make_dataset("B", kW, {{5.0}}, {0});
    auto cand = make_dataset("C", kW, {{5.01, 9.0}}, {0, 0});
    auto r = match_one_way(base, cand, spec_of(kW));
    EXPECT_NEAR(r.sigma[0], 2.8214, 1e-4);
    EXPECT_NEAR(r.threshold[0], 0.564, 1e-3);
    ASSERT_EQ(r.pairs.size(), 1u);
    EXPECT_EQ(r.pairs[0], (std::pair<std::size_t, std::size_t>{0, 0}));
}

TEST(MatchOneWay, NoCandidateWithinThreshold)
{
    auto base = make_dataset("B", kW, {{5.0}}, {0});
    auto cand = make_dataset("C", kW, {{9.0, 10.0}}, {0, 0});
    auto r = match_one_way(base, cand, spec_of(kW));
    EXPECT_TRUE(r.pairs.empty());
    EXPECT_EQ(r.matched_1.n(), 0u);
}

TEST(MatchOneWay, IdenticalDatasetsMatchThemselves)
{
    auto d = fixtures::gaussian_cloud("A", 200, 4);
    auto r = match_one_way(d, d, spec_of({Covariate::W, Covariate::T, Covariate::TI}));
    ASSERT_EQ(r.pairs.size(), d.n());
    for (auto [j, i] : r.pairs) EXPECT_EQ(i, j);
}

TEST(MatchOneWay, ZeroSpreadFallsBackToExactWithWarning)
{
    auto base = make_dataset("B", {Covariate::W, Covariate::T}, {{5, 6}, {1, 2}}, {0, 0});
    auto cand = make_dataset("C", {Covariate::W, Covariate::T}, {{5, 5.5, 6}, {1, 1, 1}}, {0, 0, 0});
    auto r = match_one_way(base, cand, spec_of({Covariate::W, Covariate::T}, 1.0));
    EXPECT_FALSE(r.warnings.empty());
    ASSERT_EQ(r.pairs.size(), 1u);
    EXPECT_EQ(r.pairs[0].first, 0u);
}

TEST(MatchOneWay, CircularDirectionWrapsAtNorth)
{
    auto base = make_dataset("B", {Covariate::D}, {{359.0}}, {0});
    auto cand = make_dataset("C", {Covariate::D}, {{1.0, 90.0, 180.0}}, {0, 0, 0});
    auto r = match_one_way(base, cand, spec_of({Covariate::D}));
    ASSERT_EQ(r.pairs.size(), 1u);
    EXPECT_EQ(r.pairs[0].second, 0u);
}

TEST(MatchOneWay, MonotoneInVarpi)
{
    for (std::uint64_t s = 0; s < 5; ++s) {
        auto a = fixtures::gaussian_cloud("A", 300, s, 8.0);
        auto b = fixtures::gaussian_cloud("B", 300, s + 50, 9.5);
        std::size_t prev = 0;
        for (double v : {0.05, 0.1, 0.2, 0.4, 0.8}) {
            auto r = match_one_way(a, b, spec_of({Covariate::W, Covariate::T}, v));
            EXPECT_GE(r.pairs.size(), prev) << v;
            prev = r.pairs.size();
        }
    }
}

TEST(MatchOneWay, ThresholdCertificate)
{
    for (std::uint64_t s = 0; s < 10; ++s) {
        auto a = fixtures::gaussian_cloud("A", 400, s, 8.0);
        auto b = fixtures::gaussian_cloud("B", 400, 1000 + s, 9.0);
        expect_certificate(a, b, spec_of({Covariate::W, Covariate::T, Covariate::TI}));
        expect_certificate(b, a, spec_of({Covariate::W, Covariate::T, Covariate::TI}));
    }
}

TEST(MatchOneWay, Errors)
{
    auto a = fixtures::gaussian_cloud("A", 10, 1);
    EXPECT_THROW(match_one_way(a, a, spec_of({})), Error);
    EXPECT_THROW(match_one_way(a, a, spec_of(kW, 0.0)), Error);
    EXPECT_THROW(match_one_way(a, a, spec_of({Covariate::W, Covariate::W})), Error);
    EXPECT_THROW(match_one_way(a, a, spec_of({Covariate::D})), Error);
    EXPECT_THROW(match_one_way(a, a.empty_like(), spec_of(kW)), Error);
}

TEST(MatchTwoWay, IdenticalInputsKeepEverything)
{
    auto d = fixtures::gaussian_cloud("A", 150, 2);
    auto r = match_two_way(d, d, spec_of({Covariate::W, Covariate::T}));
    EXPECT_EQ(r.matched_1.n(), d.n());
    EXPECT_EQ(r.matched_2.n(), d.n());
    EXPECT_EQ(r.baseline_direction, BaselineDirection::Symmetric);
}

TEST(MatchTwoWay, SymmetricUnderSwap)
{
    for (std::uint64_t s = 0; s < 10; ++s) {
        auto a = fixtures::gaussian_cloud("A", 250, 10 + s, 8.0);
        auto b = fixtures::gaussian_cloud("B", 220, 90 + s, 9.0, 2.5, 7);
        auto spec = spec_of({Covariate::W, Covariate::T, Covariate::TI});
        auto ab = match_two_way(a, b, spec);
        auto ba = match_two_way(b, a, spec);
        EXPECT_EQ(identity_set(ab.matched_1), identity_set(ba.matched_2));
        EXPECT_EQ(identity_set(ab.matched_2), identity_set(ba.matched_1));
    }
}

TEST(MatchTwoWay, FivePointToyAgainstOracle)
{
    const std::vector<Covariate> order{Covariate::W, Covariate::T};
    auto d1 = make_dataset("P", order, {{4.0, 5.0, 6.2, 8.0, 11.0}, {10, 12, 9, 15, 11}}, {0, 0, 0, 0, 0});
    auto d2 = make_dataset("Q", order, {{4.3, 5.6, 6.0, 9.5, 10.6}, {11, 12.5, 14, 15, 10}}, {0, 0, 0, 0, 0});
    for (double varpi : {0.2, 0.5, 1.0}) {
        std::set<std::size_t> o1, o2;
        auto from1 = oracle_one_way(d2, d1, order, varpi, &o2); // d2 as baseline picks from d1
        auto from2 = oracle_one_way(d1, d2, order, varpi, &o1);
        o1.insert(from1.begin(), from1.end());
        o2.insert(from2.begin(), from2.end());
        auto r = match_two_way(d1, d2, spec_of(order, varpi));
        EXPECT_EQ(std::set<std::size_t>(r.kept_1.begin(), r.kept_1.end()), o1) << varpi;
        EXPECT_EQ(std::set<std::size_t>(r.kept_2.begin(), r.kept_2.end()), o2) << varpi;
    }
}

TEST(MatchTwoWay, DeduplicatesOnRecordIdentity)
{
    auto d = make_dataset("A", kW, {{1, 2, 3}}, {0, 0, 0});
    auto e = make_dataset("B", kW, {{1, 2, 3}}, {0, 0, 0});
    auto r = match_two_way(d, e, spec_of(kW));
    EXPECT_EQ(r.matched_1.n(), 3u);
    EXPECT_EQ(r.pairs.size(), 6u);
}

TEST(Diagnostics, IdenticalInputsHaveZeroKsAfter)
{
    auto d = fixtures::gaussian_cloud("A", 100, 3);
    const std::vector<Covariate> order{Covariate::W, Covariate::T};
    auto r = match_two_way(d, d, spec_of(order));
    auto g = matching_diagnostics(d, d, r, order);
    for (const auto& c : g.covariates) EXPECT_EQ(c.ks_after, 0.0);
    EXPECT_DOUBLE_EQ(g.retention_1, 1.0);
}

TEST(Diagnostics, MatchingReducesShiftedDiscrepancy)
{
    const std::vector<Covariate> order{Covariate::W, Covariate::T};
    for (std::uint64_t s = 0; s < 10; ++s) {
        auto a = fixtures::gaussian_cloud("A", 500, 500 + s, 8.0);
        auto b = fixtures::gaussian_cloud("B", 500, 600 + s, 10.0);
        auto r = match_two_way(a, b, spec_of(order));
        auto g = matching_diagnostics(a, b, r, order);
        EXPECT_LT(g.covariates[0].ks_after, g.covariates[0].ks_before);
        EXPECT_GE(g.retention_1, 0.0);
        EXPECT_LE(g.retention_1, 1.0);
        EXPECT_LE(g.retention_2, 1.0);
    }
}
