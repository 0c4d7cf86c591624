#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "wtperf/dataset.hpp"
#include "wtperf/error.hpp"
#include "wtperf/stats.hpp"

namespace wtperf {

struct MatchSpec {
    std::vector<Covariate> covariate_order; ///< most to least important
    double varpi = 0.2;                      ///< thresholding coefficient
    std::vector<Covariate> circular{Covariate::D};

    bool is_circular(Covariate c) const
    {
        return std::find(circular.begin(), circular.end(), c) != circular.end();
    }

    void validate() const
    {
        if (!(varpi > 0.0)) throw Error("varpi must be positive");
        if (covariate_order.empty()) throw Error("covariate order must be non-empty");
        for (std::size_t i = 0; i < covariate_order.size(); ++i)
            for (std::size_t j = 0; j < i; ++j)
                if (covariate_order[i] == covariate_order[j])
                    throw Error("duplicate covariate in matching order");
    }
};

enum class BaselineDirection { First, Second, Symmetric };

struct MatchResult {
    Dataset matched_1;
    Dataset matched_2;
    /// (index in input 1, index in input 2)
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    BaselineDirection baseline_direction = BaselineDirection::First;
    /// Per covariate in matching order: sigma over the candidate set and the
    /// resulting threshold, for the (last) one-way pass.
    std::vector<double> sigma;
    std::vector<double> threshold;
    std::vector<std::string> warnings;
    /// Indices into the inputs that survived, ascending.
    std::vector<std::size_t> kept_1, kept_2;
};

namespace detail {

inline double covariate_spread(const Dataset& ds, Covariate c, bool circular)
{
    auto col = ds.column(c);
    if (circular) {
        auto s = stats::circular_summary(col);
        return std::isfinite(s.sd_deg) ? (s.sd_deg < 1e-9 ? 0.0 : s.sd_deg) : 180.0;
    }
    return stats::sample_sd(col);
}

inline double covariate_gap(double a, double b, bool circular)
{
    return circular ? stats::angular_difference(a, b) : std::fabs(a - b);
}

/// Threshold test of one covariate. A zero threshold degenerates to equality.
inline bool within(double gap, double threshold)
{
    return threshold > 0.0 ? gap < threshold : gap == 0.0;
}

inline std::vector<std::size_t> time_order(const Dataset& ds)
{
    std::vector<std::size_t> idx(ds.n());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return ds.records[a].timestamp < ds.records[b].timestamp;
    });
    return idx;
}

} // namespace detail

/// Hierarchical subgrouping with `baseline` as the reference. Baseline
/// records are visited in timestamp order; each takes the closest
/// (standardised Euclidean over the matching covariates) unconsumed candidate
/// that passes every threshold, or stays unmatched. Input 1 of the result is
/// the baseline, input 2 the candidate set.
inline MatchResult match_one_way(const Dataset& baseline, const Dataset& candidate,
                                 const MatchSpec& spec)
{
    spec.validate();
    baseline.require(spec.covariate_order);
    candidate.require(spec.covariate_order);
    if (candidate.empty()) throw Error("matching: candidate dataset is empty");

    const auto& order = spec.covariate_order;
    const std::size_t p = order.size();
    MatchResult res;
    res.baseline_direction = BaselineDirection::First;
    std::vector<bool> circ(p);
    for (std::size_t c = 0; c < p; ++c) {
        circ[c] = spec.is_circular(order[c]);
        const double s = detail::covariate_spread(candidate, order[c], circ[c]);
        res.sigma.push_back(s);
        res.threshold.push_back(spec.varpi * s);
        if (s == 0.0)
            res.warnings.push_back("covariate " + std::string(name(order[c])) +
                                   " has zero spread in candidate set; exact matching applied");
    }

    // candidates sorted by the first covariate narrow the scan when it is linear
    std::vector<std::size_t> by_first(candidate.n());
    std::iota(by_first.begin(), by_first.end(), 0);
    const Covariate first = order.front();
    if (!circ[0])
        std::stable_sort(by_first.begin(), by_first.end(), [&](std::size_t a, std::size_t b) {
            return candidate.records[a].at(first) < candidate.records[b].at(first);
        });
    std::vector<double> first_vals;
    first_vals.reserve(by_first.size());
    for (auto i : by_first) first_vals.push_back(candidate.records[i].at(first));

    std::vector<bool> consumed(candidate.n(), false);
    for (auto j : detail::time_order(baseline)) {
        const auto& b = baseline.records[j];
        std::size_t lo = 0, hi = by_first.size();
        if (!circ[0]) {
            const double v = b.at(first);
            // slightly wider than the threshold; within() makes the exact call
            const double t = res.threshold[0] + 1e-9 * (std::fabs(v) + res.threshold[0] + 1.0);
            lo = static_cast<std::size_t>(
                std::lower_bound(first_vals.begin(), first_vals.end(), v - t) - first_vals.begin());
            hi = static_cast<std::size_t>(
                std::upper_bound(first_vals.begin(), first_vals.end(), v + t) - first_vals.begin());
        }
        std::size_t best = candidate.n();
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t s = lo; s < hi; ++s) {
            const std::size_t i = by_first[s];
            if (consumed[i]) continue;
            const auto& r = candidate.records[i];
            double d2 = 0.0;
            bool ok = true;
            for (std::size_t c = 0; c < p && ok; ++c) {
                const double gap = detail::covariate_gap(r.at(order[c]), b.at(order[c]), circ[c]);
                ok = detail::within(gap, res.threshold[c]);
                const double z = gap / (res.sigma[c] > 0.0 ? res.sigma[c] : 1.0);
                d2 += z * z;
            }
            if (!ok) continue;
            if (d2 < best_d || (d2 == best_d && i < best)) {
                best_d = d2;
                best = i;
            }
        }
        if (best < candidate.n()) {
            consumed[best] = true;
            res.pairs.emplace_back(j, best);
        }
    }

    for (auto [j, i] : res.pairs) {
        res.kept_1.push_back(j);
        res.kept_2.push_back(i);
    }
    std::sort(res.kept_1.begin(), res.kept_1.end());
    std::sort(res.kept_2.begin(), res.kept_2.end());
    res.matched_1 = baseline.subset(res.kept_1);
    res.matched_2 = candidate.subset(res.kept_2);
    return res;
}

namespace detail {

inline std::vector<std::size_t> unique_records(const Dataset& ds, std::vector<std::size_t> idx)
{
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    std::set<std::pair<std::string, Timestamp>> seen;
    std::vector<std::size_t> out;
    for (auto i : idx) {
        const auto& r = ds.records[i];
        if (seen.emplace(r.turbine_id, r.timestamp).second) out.push_back(i);
    }
    return out;
}

} // namespace detail

/// Matching run once with each input as the baseline; the per-side unions,
/// deduplicated on (turbine_id, timestamp), form the final subsets. The
/// result is invariant to argument order.
inline MatchResult match_two_way(const Dataset& d1, const Dataset& d2, const MatchSpec& spec)
{
    if (d1.empty() || d2.empty()) throw Error("matching: both datasets must be non-empty");
    auto second_as_base = match_one_way(d2, d1, spec);
    auto first_as_base = match_one_way(d1, d2, spec);

    MatchResult res;
    res.baseline_direction = BaselineDirection::Symmetric;
    res.sigma = first_as_base.sigma;
    res.threshold = first_as_base.threshold;
    res.warnings = second_as_base.warnings;
    res.warnings.insert(res.warnings.end(), first_as_base.warnings.begin(), first_as_base.warnings.end());

    std::vector<std::size_t> side1, side2;
    for (auto [j2, i1] : second_as_base.pairs) {
        res.pairs.emplace_back(i1, j2);
        side1.push_back(i1);
        side2.push_back(j2);
    }
    for (auto [j1, i2] : first_as_base.pairs) {
        res.pairs.emplace_back(j1, i2);
        side1.push_back(j1);
        side2.push_back(i2);
    }
    res.kept_1 = detail::unique_records(d1, std::move(side1));
    res.kept_2 = detail::unique_records(d2, std::move(side2));
    res.matched_1 = d1.subset(res.kept_1);
    res.matched_2 = d2.subset(res.kept_2);
    return res;
}

struct CovariateDiscrepancy {
    Covariate covariate{};
    double ks_before = 0.0;
    double ks_after = 0.0;
};

struct MatchDiagnostics {
    std::vector<CovariateDiscrepancy> covariates;
    double retention_1 = 0.0; ///< n_matched / n_before, side 1
    double retention_2 = 0.0;
    std::size_t n_before_1 = 0, n_before_2 = 0, n_after_1 = 0, n_after_2 = 0;
};

inline MatchDiagnostics matching_diagnostics(const Dataset& before_1, const Dataset& before_2,
                                             const MatchResult& result,
                                             const std::vector<Covariate>& covariates)
{
    MatchDiagnostics d;
    d.n_before_1 = before_1.n();
    d.n_before_2 = before_2.n();
    d.n_after_1 = result.matched_1.n();
    d.n_after_2 = result.matched_2.n();
    d.retention_1 = d.n_before_1 ? static_cast<double>(d.n_after_1) / static_cast<double>(d.n_before_1) : 0.0;
    d.retention_2 = d.n_before_2 ? static_cast<double>(d.n_after_2) / static_cast<double>(d.n_before_2) : 0.0;
    for (auto c : covariates) {
        CovariateDiscrepancy cd;
        cd.covariate = c;
        cd.ks_before = stats::ks_statistic(before_1.column(c), before_2.column(c));
        cd.ks_after = stats::ks_statistic(result.matched_1.column(c), result.matched_2.column(c));
        d.covariates.push_back(cd);
    }
    return d;
}

} // namespace wtperf
