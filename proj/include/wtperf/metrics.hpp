#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <vector>

#include "wtperf/dataset.hpp"
#include "wtperf/error.hpp"
#include "wtperf/gp.hpp"

namespace wtperf {

/// A difference in kW and relative to the base side (side 1). The percent is
/// empty when the base denominator is zero.
struct Delta {
    double kw = 0.0;
    std::optional<double> pct;
};

namespace detail {

inline std::optional<double> percent(double num, double den)
{
    if (den == 0.0 || !std::isfinite(den)) return std::nullopt;
    return num / den * 100.0;
}

} // namespace detail

/// Plain average of f2 - f1 over the grid.
inline Delta delta_unweighted(const DifferenceCurve& c)
{
    if (c.size() == 0) throw Error("empty difference curve");
    const double n = static_cast<double>(c.size());
    return {c.diff.sum() / n, detail::percent(c.diff.sum() / n, c.f1.sum() / n)};
}

/// Relative frequency of the pooled original covariates per grid point. Each
/// record goes to its nearest lattice point (per-axis rounding, which is the
/// cell of the nearest point); records outside the bounds snap to the edge.
inline Eigen::VectorXd frequency_weights(const Dataset& original_1, const Dataset& original_2,
                                         const TestGrid& grid)
{
    const auto covs = grid.covariates();
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
    double total = 0.0;
    std::vector<std::size_t> coords(grid.axes.size());
    for (const Dataset* ds : {&original_1, &original_2}) {
        if (ds->empty()) continue;
        ds->require(covs);
        for (const auto& r : ds->records) {
            for (std::size_t a = 0; a < grid.axes.size(); ++a) {
                const auto& ax = grid.axes[a];
                const double u = std::round((r.at(ax.covariate) - ax.min) / ax.step);
                coords[a] = static_cast<std::size_t>(std::clamp(u, 0.0, static_cast<double>(ax.count - 1)));
            }
            counts[static_cast<Eigen::Index>(grid.index_of(coords))] += 1.0;
            total += 1.0;
        }
    }
    if (total == 0.0) throw Error("frequency weights: original datasets are empty");
    return counts / total;
}

inline Delta delta_weighted(const DifferenceCurve& c, const Eigen::VectorXd& P)
{
    if (static_cast<std::size_t>(P.size()) != c.size()) throw Error("weights misaligned with grid");
    return {P.dot(c.diff), detail::percent(P.dot(c.diff), P.dot(c.f1))};
}

enum class SignificanceMode {
    Excess,     ///< signed excess beyond the nearer band edge
    FullOutside ///< the whole diff wherever it leaves the band
};

/// Per-point contribution counted by the statistically significant metric.
inline Eigen::VectorXd significant_part(const DifferenceCurve& c, SignificanceMode mode = SignificanceMode::Excess)
{
    Eigen::VectorXd out = Eigen::VectorXd::Zero(c.diff.size());
    for (Eigen::Index i = 0; i < c.diff.size(); ++i) {
        const double d = c.diff[i];
        if (d > c.upper[i]) out[i] = mode == SignificanceMode::Excess ? d - c.upper[i] : d;
        else if (d < c.lower[i]) out[i] = mode == SignificanceMode::Excess ? d - c.lower[i] : d;
    }
    return out;
}

/// Statistically significant difference; unweighted when P is empty. Percent
/// uses the same base as the corresponding plain metric.
inline Delta delta_statistical(const DifferenceCurve& c, const std::optional<Eigen::VectorXd>& P = std::nullopt,
                               SignificanceMode mode = SignificanceMode::Excess)
{
    if (c.size() == 0) throw Error("empty difference curve");
    const Eigen::VectorXd s = significant_part(c, mode);
    if (P) {
        if (static_cast<std::size_t>(P->size()) != c.size()) throw Error("weights misaligned with grid");
        return {P->dot(s), detail::percent(P->dot(s), P->dot(c.f1))};
    }
    const double n = static_cast<double>(c.size());
    return {s.sum() / n, detail::percent(s.sum() / n, c.f1.sum() / n)};
}

struct PowerBin {
    double lower = 0.0, upper = 0.0; ///< kW
    std::size_t grid_count = 0;      ///< |Q_k|
    double raw_frequency = 0.0;      ///< share of original power values in the bin
    double pi = 0.0;                 ///< frequency renormalised over non-empty Q_k
    double mu = 0.0;                 ///< mean f1 over Q_k
    double delta = 0.0;              ///< mean (f2 - f1) over Q_k
};

struct ScaledDelta {
    Delta value;
    std::vector<PowerBin> bins;
};

/// Bin index in [0, K): negatives clamp to the first bin, values at or above
/// rated clamp to the last.
inline std::size_t power_bin(double kw, double rated, std::size_t K)
{
    const double w = rated / static_cast<double>(K);
    const double b = std::floor(kw / w);
    if (!(b > 0.0)) return 0;
    return std::min(static_cast<std::size_t>(b), K - 1);
}

/// Per-point differences `diff` re-weighted by the power histogram of the
/// pooled original data, with f1 as the binning reference.
inline ScaledDelta scale_to_power_bins(const Eigen::VectorXd& f1, const Eigen::VectorXd& diff,
                                       const Dataset& original_1, const Dataset& original_2,
                                       double rated_power, std::size_t K = 15)
{
    if (!(rated_power > 0.0)) throw Error("rated power must be positive");
    if (K == 0) throw Error("bin count must be positive");
    ScaledDelta out;
    out.bins.resize(K);
    const double w = rated_power / static_cast<double>(K);
    for (std::size_t k = 0; k < K; ++k) {
        out.bins[k].lower = w * static_cast<double>(k);
        out.bins[k].upper = w * static_cast<double>(k + 1);
    }
    std::vector<double> sum_f1(K, 0.0), sum_diff(K, 0.0);
    if (f1.size() != diff.size()) throw Error("scaled delta: vectors misaligned");
    for (Eigen::Index i = 0; i < diff.size(); ++i) {
        const auto k = power_bin(f1[i], rated_power, K);
        ++out.bins[k].grid_count;
        sum_f1[k] += f1[i];
        sum_diff[k] += diff[i];
    }
    double total = 0.0;
    for (const Dataset* ds : {&original_1, &original_2})
        for (const auto& r : ds->records) {
            out.bins[power_bin(r.y, rated_power, K)].raw_frequency += 1.0;
            total += 1.0;
        }
    if (total == 0.0) throw Error("scaled delta: original datasets are empty");
    double mass = 0.0;
    bool any = false;
    for (std::size_t k = 0; k < K; ++k) {
        auto& b = out.bins[k];
        b.raw_frequency /= total;
        if (b.grid_count) {
            any = true;
            mass += b.raw_frequency;
            b.mu = sum_f1[k] / static_cast<double>(b.grid_count);
            b.delta = sum_diff[k] / static_cast<double>(b.grid_count);
        }
    }
    if (!any) throw Error("scaled delta: every power bin is empty");
    if (mass == 0.0) throw Error("scaled delta: original power data never falls in an occupied bin");
    double num = 0.0, den = 0.0;
    for (auto& b : out.bins) {
        if (!b.grid_count) continue;
        b.pi = b.raw_frequency / mass;
        num += b.pi * b.delta;
        den += b.pi * b.mu;
    }
    out.value = {num, detail::percent(num, den)};
    return out;
}

inline ScaledDelta delta_scaled(const DifferenceCurve& c, const Dataset& original_1, const Dataset& original_2,
                                double rated_power, std::size_t K = 15)
{
    return scale_to_power_bins(c.f1, c.diff, original_1, original_2, rated_power, K);
}

/// Test-turbine change less the control turbine's change.
inline double control_test_adjust(double test, double control) { return test - control; }

inline std::optional<double> control_test_adjust(std::optional<double> test, std::optional<double> control)
{
    if (!test || !control) return std::nullopt;
    return *test - *control;
}

struct ComparisonMetrics {
    Delta unweighted, weighted;
    Delta stat_unweighted, stat_weighted;
    Delta scaled, stat_scaled;
    Eigen::VectorXd frequency_weights;
    std::vector<PowerBin> bin_table;
};

struct MetricOptions {
    double rated_power = 1500.0;
    std::size_t bins = 15;
    SignificanceMode significance = SignificanceMode::Excess;
};

inline ComparisonMetrics compute_metrics(const DifferenceCurve& c, const Dataset& original_1,
                                         const Dataset& original_2, const MetricOptions& opt = {})
{
    ComparisonMetrics m;
    m.frequency_weights = frequency_weights(original_1, original_2, c.grid);
    m.unweighted = delta_unweighted(c);
    m.weighted = delta_weighted(c, m.frequency_weights);
    m.stat_unweighted = delta_statistical(c, std::nullopt, opt.significance);
    m.stat_weighted = delta_statistical(c, m.frequency_weights, opt.significance);
    auto s = delta_scaled(c, original_1, original_2, opt.rated_power, opt.bins);
    m.scaled = s.value;
    m.bin_table = std::move(s.bins);
    m.stat_scaled = scale_to_power_bins(c.f1, significant_part(c, opt.significance), original_1, original_2,
                                        opt.rated_power, opt.bins)
                        .value;
    return m;
}

} // namespace wtperf
