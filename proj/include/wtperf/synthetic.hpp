#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <numbers>
#include <string>
#include <vector>

#include "wtperf/dataset.hpp"
#include "wtperf/error.hpp"
#include "wtperf/random.hpp"
#include "wtperf/stats.hpp"

namespace wtperf::synth {

/// Logistic power curve in wind speed with a multiplicative temperature
/// (density proxy) factor, capped at rated power.
struct PowerCurve {
    double cut_in = 3.0;     ///< m/s
    double cut_out = 25.0;   ///< m/s
    double rated = 1500.0;   ///< kW
    double midpoint = 8.0;   ///< m/s, logistic centre
    double slope = 1.0;      ///< m/s, logistic width
    double temp_coefficient = 0.004; ///< fractional change per degC below reference
    double temp_reference = 15.0;    ///< degC

    void validate() const
    {
        if (!(cut_in >= 0 && cut_out > cut_in && rated > 0 && slope > 0))
            throw Error("power curve parameters out of range");
    }

    double operator()(double w, double t) const
    {
        if (w < cut_in || w >= cut_out) return 0.0;
        auto sig = [&](double v) { return 1.0 / (1.0 + std::exp(-(v - midpoint) / slope)); };
        const double s0 = sig(cut_in);
        const double shape = (sig(w) - s0) / (1.0 - s0);
        const double density = 1.0 + temp_coefficient * (temp_reference - t);
        return std::min(rated, rated * shape * density);
    }
};

struct UpgradeSpec {
    double r = 0.0;             ///< fractional power increase
    double cutoff_speed = 9.0;  ///< m/s, applies to W >= cutoff

    void validate() const
    {
        if (!(r > -1.0)) throw Error("upgrade r must exceed -1");
        if (!(cutoff_speed >= 0.0)) throw Error("upgrade cutoff must be non-negative");
    }
};

struct WeatherModel {
    double weibull_shape = 2.0;
    double weibull_scale = 8.0;     ///< m/s
    double temp_mean = 12.0;        ///< degC
    double temp_amplitude = 10.0;   ///< degC, annual cycle
    double temp_noise = 3.0;        ///< degC
    double ti_median = 0.11;
    double ti_log_sd = 0.3;
    double direction_mean = 220.0;  ///< degrees
    double direction_sd = 50.0;     ///< degrees
    double sdd_mean = 8.0;          ///< degrees
    double sdd_sd = 3.0;

    void validate() const
    {
        if (!(weibull_shape > 0 && weibull_scale > 0 && temp_noise >= 0 && ti_median > 0 && ti_log_sd >= 0 &&
              direction_sd >= 0 && sdd_mean >= 0 && sdd_sd >= 0))
            throw Error("weather model parameters out of range");
    }
};

struct PeriodSpec {
    std::string label;
    Timestamp start{};
    std::size_t n_records = 0;
    std::string setting;
    double wind_scale = 1.0;  ///< drift multiplier on the Weibull scale
    double temp_shift = 0.0;  ///< drift on the temperature mean, degC
};

struct TurbineSpec {
    std::string id;
    double x = 0.0, y = 0.0, elevation = 0.0;
    double wind_scale = 1.0;  ///< local wind resource multiplier
    double efficiency = 1.0;  ///< multiplier on the power function
    std::map<std::string, UpgradeSpec> upgrades; ///< by period label, applies from that period on
};

struct SyntheticConfig {
    std::vector<TurbineSpec> turbines;
    std::vector<PeriodSpec> periods;
    WeatherModel weather{};
    PowerCurve curve{};
    double noise_sd = 20.0; ///< kW
    std::uint64_t seed = 1;

    void validate() const
    {
        if (turbines.empty()) throw Error("synthetic config: no turbines");
        if (periods.empty()) throw Error("synthetic config: no periods");
        if (!(noise_sd >= 0.0)) throw Error("synthetic config: noise sd must be non-negative");
        weather.validate();
        curve.validate();
        for (const auto& t : turbines) {
            if (!(t.wind_scale > 0 && t.efficiency > 0)) throw Error("turbine scales must be positive");
            for (const auto& [label, u] : t.upgrades) {
                u.validate();
                if (u.cutoff_speed < curve.cut_in || u.cutoff_speed > curve.cut_out)
                    throw Error("upgrade cutoff must lie within [cut-in, cut-out]");
                if (std::none_of(periods.begin(), periods.end(), [&](const PeriodSpec& p) { return p.label == label; }))
                    throw Error("upgrade names unknown period '" + label + "'");
            }
        }
    }

    /// n turbines named T01.. on a line, sharing the given periods.
    static SyntheticConfig simple(std::size_t n_turbines, std::vector<PeriodSpec> periods, std::uint64_t seed)
    {
        SyntheticConfig c;
        c.seed = seed;
        c.periods = std::move(periods);
        for (std::size_t i = 0; i < n_turbines; ++i) {
            TurbineSpec t;
            char buf[16];
            std::snprintf(buf, sizeof buf, "T%02zu", i + 1);
            t.id = buf;
            t.x = 300.0 * static_cast<double>(i);
            c.turbines.push_back(std::move(t));
        }
        return c;
    }
};

inline constexpr auto kRecordSpacing = std::chrono::minutes(10);

inline PeriodPartition partition_of(const SyntheticConfig& c)
{
    std::vector<Period> ps;
    for (const auto& p : c.periods)
        ps.push_back(Period{p.label, p.start,
                            p.start + std::chrono::duration_cast<std::chrono::seconds>(
                                          kRecordSpacing * static_cast<std::int64_t>(p.n_records)),
                            p.setting});
    return PeriodPartition(std::move(ps));
}

/// y <- y (1 + r) where W >= cutoff; covariates untouched.
inline Dataset apply_upgrade(const Dataset& ds, const UpgradeSpec& spec)
{
    spec.validate();
    Dataset out = ds;
    for (auto& r : out.records)
        if (r.at(Covariate::W) >= spec.cutoff_speed) r.y *= 1.0 + spec.r;
    return out;
}

/// r' = r * (energy with W >= cutoff) / (total energy), on pre-upgrade power.
inline double effective_increase(const Dataset& ds, const UpgradeSpec& spec)
{
    if (ds.empty()) throw Error("effective increase: empty dataset");
    double affected = 0.0, total = 0.0;
    for (const auto& r : ds.records) {
        total += r.y;
        if (r.at(Covariate::W) >= spec.cutoff_speed) affected += r.y;
    }
    if (total == 0.0) throw Error("effective increase: zero total power");
    return spec.r * affected / total;
}

struct TurbineTruth {
    double efficiency = 1.0;
    double wind_scale = 1.0;
    std::map<std::string, UpgradeSpec> upgrades;
};

struct SyntheticFarm {
    std::vector<Dataset> turbines;     ///< full series, upgrades applied
    std::vector<Dataset> pre_upgrade;  ///< same draws, no upgrade
    PeriodPartition partition;
    PowerCurve curve;
    std::vector<TurbineSpec> layout;

    /// Noise-free power of turbine i at (W, T) before any upgrade.
    double truth(std::size_t turbine, double w, double t) const
    {
        return layout.at(turbine).efficiency * curve(w, t);
    }
};

/// Draws every turbine's series. Each turbine uses its own sub-seed, so a
/// turbine's data do not depend on how many turbines the farm has before it.
inline SyntheticFarm generate(const SyntheticConfig& c)
{
    c.validate();
    SyntheticFarm farm;
    farm.partition = partition_of(c);
    farm.curve = c.curve;
    farm.layout = c.turbines;
    const auto& wm = c.weather;
    for (std::size_t ti = 0; ti < c.turbines.size(); ++ti) {
        const auto& spec = c.turbines[ti];
        Rng rng(derive_seed(c.seed, ti));
        Dataset ds;
        ds.turbine_id = spec.id;
        ds.available = {Covariate::W, Covariate::T, Covariate::D, Covariate::TI, Covariate::sdD};
        Dataset upgraded = ds;
        std::optional<UpgradeSpec> active;
        for (const auto& p : c.periods) {
            if (auto it = spec.upgrades.find(p.label); it != spec.upgrades.end()) active = it->second;
            for (std::size_t i = 0; i < p.n_records; ++i) {
                ScadaRecord r;
                r.turbine_id = spec.id;
                r.timestamp = p.start + std::chrono::duration_cast<std::chrono::seconds>(
                                            kRecordSpacing * static_cast<std::int64_t>(i));
                const double day = static_cast<double>(
                    std::chrono::floor<std::chrono::days>(r.timestamp).time_since_epoch().count());
                const double w = rng.weibull(wm.weibull_shape, wm.weibull_scale * p.wind_scale * spec.wind_scale);
                const double t = wm.temp_mean + p.temp_shift +
                                 wm.temp_amplitude * std::sin(2.0 * std::numbers::pi * (day - 105.0) / 365.25) +
                                 rng.normal(0.0, wm.temp_noise);
                r.at(Covariate::W) = w;
                r.at(Covariate::T) = t;
                r.at(Covariate::D) = stats::wrap360(rng.normal(wm.direction_mean, wm.direction_sd));
                r.at(Covariate::TI) = wm.ti_median * std::exp(rng.normal(0.0, wm.ti_log_sd));
                r.at(Covariate::sdD) = std::fabs(rng.normal(wm.sdd_mean, wm.sdd_sd));
                r.y = spec.efficiency * c.curve(w, t) + rng.normal(0.0, c.noise_sd);
                ScadaRecord u = r;
                if (active && w >= active->cutoff_speed) u.y *= 1.0 + active->r;
                ds.records.push_back(std::move(r));
                upgraded.records.push_back(std::move(u));
            }
        }
        farm.pre_upgrade.push_back(std::move(ds));
        farm.turbines.push_back(std::move(upgraded));
    }
    return farm;
}

} // namespace wtperf::synth
