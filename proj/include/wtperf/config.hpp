#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "wtperf/covariate.hpp"
#include "wtperf/dataset.hpp"
#include "wtperf/error.hpp"
#include "wtperf/gp.hpp"
#include "wtperf/ingest.hpp"
#include "wtperf/metrics.hpp"
#include "wtperf/subset_selection.hpp"
#include "wtperf/synthetic.hpp"

namespace wtperf {

using json = nlohmann::json;

/// The four-period upgrade timeline V0 / V0+P1 / V1+P1 / V1+P2 with its gaps
/// (Nov 2017 and Jun 2018 fall outside every period).
inline PeriodPartition four_period_upgrade_partition()
{
    auto d = [](const char* s) { return *parse_timestamp(s); };
    return PeriodPartition({{"V0", d("2015-07-01"), d("2016-08-01"), "V0"},
                            {"V0+P1", d("2016-08-01"), d("2017-11-01"), "V0+P1"},
                            {"V1+P1", d("2017-12-01"), d("2018-06-01"), "V1+P1"},
                            {"V1+P2", d("2018-07-01"), d("2019-06-01"), "V1+P2"}});
}

inline Timestamp json_timestamp(const json& j, const char* what)
{
    auto t = parse_timestamp(j.get<std::string>());
    if (!t) throw Error(std::string("invalid ISO-8601 date for ") + what + ": " + j.get<std::string>());
    return *t;
}

inline PeriodPartition partition_from_json(const json& j)
{
    if (j.is_string() && j.get<std::string>() == "upgrade-timeline") return four_period_upgrade_partition();
    std::vector<Period> ps;
    for (const auto& p : j)
        ps.push_back(Period{p.at("label").get<std::string>(), json_timestamp(p.at("start"), "period start"),
                            json_timestamp(p.at("end"), "period end"), p.value("setting", std::string{})});
    return PeriodPartition(std::move(ps));
}

inline json partition_to_json(const PeriodPartition& part)
{
    json a = json::array();
    for (const auto& p : part.periods())
        a.push_back({{"label", p.label}, {"start", format_timestamp(p.start)}, {"end", format_timestamp(p.end)},
                     {"setting", p.setting}});
    return a;
}

inline Schema schema_from_json(const json& j)
{
    Schema s;
    for (const auto& [field, col] : j.items()) s.columns[field] = col.get<std::string>();
    return s;
}

inline std::vector<Covariate> covariates_from_json(const json& j)
{
    std::vector<Covariate> out;
    for (const auto& v : j) {
        auto c = parse_covariate(v.get<std::string>());
        if (std::find(out.begin(), out.end(), c) != out.end()) throw Error("duplicate covariate in config");
        out.push_back(c);
    }
    return out;
}

inline json covariates_to_json(const std::vector<Covariate>& cs)
{
    json a = json::array();
    for (auto c : cs) a.push_back(std::string(name(c)));
    return a;
}

enum class Analysis { Temporal, Spatial, Spacetime };

/// Everything a farm run needs besides the data.
struct FarmConfig {
    Schema schema{};
    PeriodPartition partition{};
    double rated_power = 1500.0;
    std::vector<Covariate> candidates{Covariate::W, Covariate::T, Covariate::D, Covariate::TI, Covariate::sdD};
    std::optional<std::vector<Covariate>> covariate_order; ///< skips selection when set
    std::vector<std::string> representative_turbines;     ///< empty: first turbine
    FarmSubsetStrategy subset_strategy = FarmSubsetStrategy::Representative;
    std::optional<std::string> selection_period;          ///< empty: first period
    std::size_t knn_k = 50;
    std::size_t folds = 10;
    std::uint64_t seed = 17;
    double varpi = 0.2;
    std::size_t comparison_covariates = 2;
    std::size_t grid_resolution = 50;
    double alpha = 0.05;
    std::size_t bins = 15;
    SignificanceMode significance = SignificanceMode::Excess;
    std::string map_metric = "pct_scaled";
    std::optional<std::string> baseline_turbine;
    std::optional<std::string> baseline_period;
    std::vector<Analysis> analyses{Analysis::Temporal, Analysis::Spatial, Analysis::Spacetime};
    std::size_t gp_max_points = 2500;
    std::size_t hyper_max_points = 300;
    int hyper_starts = 3;
    int hyper_max_iterations = 60;

    CvOptions cv() const { return CvOptions{knn_k, folds, seed, rated_power}; }

    FunctionalComparisonOptions comparison() const
    {
        FunctionalComparisonOptions o;
        o.grid_resolution = grid_resolution;
        o.alpha = alpha;
        o.hyper.seed = seed;
        o.hyper.starts = hyper_starts;
        o.hyper.max_iterations = hyper_max_iterations;
        o.hyper.max_points = hyper_max_points;
        o.gp.max_points = gp_max_points;
        return o;
    }

    MetricOptions metric_options() const { return MetricOptions{rated_power, bins, significance}; }
};

inline FarmConfig farm_config_from_json(const json& j)
{
    FarmConfig c;
    if (j.contains("schema")) c.schema = schema_from_json(j.at("schema"));
    if (j.contains("periods")) c.partition = partition_from_json(j.at("periods"));
    c.rated_power = j.value("rated_power", c.rated_power);
    if (j.contains("candidates")) c.candidates = covariates_from_json(j.at("candidates"));
    if (j.contains("covariate_order") && !j.at("covariate_order").is_null())
        c.covariate_order = covariates_from_json(j.at("covariate_order"));
    if (j.contains("representative_turbines"))
        c.representative_turbines = j.at("representative_turbines").get<std::vector<std::string>>();
    if (j.contains("subset_strategy")) {
        auto s = j.at("subset_strategy").get<std::string>();
        if (s == "representative") c.subset_strategy = FarmSubsetStrategy::Representative;
        else if (s == "union") c.subset_strategy = FarmSubsetStrategy::Union;
        else throw Error("unknown subset_strategy '" + s + "'");
    }
    if (j.contains("selection_period")) c.selection_period = j.at("selection_period").get<std::string>();
    c.knn_k = j.value("knn_k", c.knn_k);
    c.folds = j.value("folds", c.folds);
    c.seed = j.value("seed", c.seed);
    c.varpi = j.value("varpi", c.varpi);
    c.comparison_covariates = j.value("comparison_covariates", c.comparison_covariates);
    c.grid_resolution = j.value("grid_resolution", c.grid_resolution);
    c.alpha = j.value("alpha", c.alpha);
    c.bins = j.value("bins", c.bins);
    if (j.contains("significance")) {
        auto s = j.at("significance").get<std::string>();
        if (s == "excess") c.significance = SignificanceMode::Excess;
        else if (s == "full") c.significance = SignificanceMode::FullOutside;
        else throw Error("unknown significance mode '" + s + "'");
    }
    c.map_metric = j.value("map_metric", c.map_metric);
    if (j.contains("baseline")) {
        const auto& b = j.at("baseline");
        if (b.contains("turbine")) c.baseline_turbine = b.at("turbine").get<std::string>();
        if (b.contains("period")) c.baseline_period = b.at("period").get<std::string>();
    }
    if (j.contains("analyses")) {
        c.analyses.clear();
        for (const auto& a : j.at("analyses")) {
            auto s = a.get<std::string>();
            if (s == "temporal") c.analyses.push_back(Analysis::Temporal);
            else if (s == "spatial") c.analyses.push_back(Analysis::Spatial);
            else if (s == "spacetime") c.analyses.push_back(Analysis::Spacetime);
            else throw Error("unknown analysis '" + s + "'");
        }
    }
    if (j.contains("gp")) {
        const auto& g = j.at("gp");
        c.gp_max_points = g.value("max_points", c.gp_max_points);
        c.hyper_max_points = g.value("hyper_points", c.hyper_max_points);
        c.hyper_starts = g.value("starts", c.hyper_starts);
        c.hyper_max_iterations = g.value("max_iterations", c.hyper_max_iterations);
    }
    if (!(c.rated_power > 0)) throw Error("rated_power must be positive");
    if (!(c.varpi > 0)) throw Error("varpi must be positive");
    if (!(c.alpha > 0 && c.alpha < 1)) throw Error("alpha must lie in (0, 1)");
    if (c.comparison_covariates == 0) throw Error("comparison_covariates must be positive");
    return c;
}

inline json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error("invalid JSON in '" + path + "': " + e.what());
    }
}

// ---------------------------------------------------------------------------

inline synth::SyntheticConfig synthetic_config_from_json(const json& j)
{
    using namespace synth;
    SyntheticConfig c;
    c.seed = j.value("seed", c.seed);
    c.noise_sd = j.value("noise_sd", c.noise_sd);
    if (j.contains("weather")) {
        const auto& w = j.at("weather");
        auto& m = c.weather;
        m.weibull_shape = w.value("weibull_shape", m.weibull_shape);
        m.weibull_scale = w.value("weibull_scale", m.weibull_scale);
        m.temp_mean = w.value("temp_mean", m.temp_mean);
        m.temp_amplitude = w.value("temp_amplitude", m.temp_amplitude);
        m.temp_noise = w.value("temp_noise", m.temp_noise);
        m.ti_median = w.value("ti_median", m.ti_median);
        m.ti_log_sd = w.value("ti_log_sd", m.ti_log_sd);
        m.direction_mean = w.value("direction_mean", m.direction_mean);
        m.direction_sd = w.value("direction_sd", m.direction_sd);
        m.sdd_mean = w.value("sdd_mean", m.sdd_mean);
        m.sdd_sd = w.value("sdd_sd", m.sdd_sd);
    }
    if (j.contains("power_curve")) {
        const auto& p = j.at("power_curve");
        auto& m = c.curve;
        m.cut_in = p.value("cut_in", m.cut_in);
        m.cut_out = p.value("cut_out", m.cut_out);
        m.rated = p.value("rated", m.rated);
        m.midpoint = p.value("midpoint", m.midpoint);
        m.slope = p.value("slope", m.slope);
        m.temp_coefficient = p.value("temp_coefficient", m.temp_coefficient);
        m.temp_reference = p.value("temp_reference", m.temp_reference);
    }
    for (const auto& p : j.at("periods")) {
        PeriodSpec ps;
        ps.label = p.at("label").get<std::string>();
        ps.start = json_timestamp(p.at("start"), "period start");
        ps.n_records = p.at("n_records").get<std::size_t>();
        ps.setting = p.value("setting", std::string{});
        ps.wind_scale = p.value("wind_scale", 1.0);
        ps.temp_shift = p.value("temp_shift", 0.0);
        c.periods.push_back(std::move(ps));
    }
    const auto& ts = j.at("turbines");
    if (ts.is_number_unsigned()) {
        auto simple = SyntheticConfig::simple(ts.get<std::size_t>(), c.periods, c.seed);
        c.turbines = std::move(simple.turbines);
    } else {
        for (const auto& t : ts) {
            TurbineSpec s;
            s.id = t.at("id").get<std::string>();
            s.x = t.value("x", 0.0);
            s.y = t.value("y", 0.0);
            s.elevation = t.value("elevation", 0.0);
            s.wind_scale = t.value("wind_scale", 1.0);
            s.efficiency = t.value("efficiency", 1.0);
            if (t.contains("upgrades"))
                for (const auto& u : t.at("upgrades"))
                    s.upgrades[u.at("period").get<std::string>()] =
                        UpgradeSpec{u.at("r").get<double>(), u.value("cutoff_speed", 9.0)};
            c.turbines.push_back(std::move(s));
        }
    }
    c.validate();
    return c;
}

} // namespace wtperf
