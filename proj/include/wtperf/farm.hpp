#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "wtperf/config.hpp"
#include "wtperf/dataset.hpp"
#include "wtperf/gp.hpp"
#include "wtperf/ingest.hpp"
#include "wtperf/matching.hpp"
#include "wtperf/metrics.hpp"
#include "wtperf/stats.hpp"
#include "wtperf/subset_selection.hpp"

namespace wtperf {

inline constexpr const char* kVersion = "wtperf 1.0.0";

enum class JobKind { Temporal, Spatial, Spacetime };

inline std::string_view name(JobKind k)
{
    switch (k) {
    case JobKind::Temporal: return "temporal";
    case JobKind::Spatial: return "spatial";
    case JobKind::Spacetime: return "spacetime";
    }
    return "?";
}

struct Side {
    std::string turbine;
    std::string period;
    bool operator==(const Side&) const = default;
};

struct ComparisonJob {
    Side a, b; ///< a is the base (side 1); differences are b - a
    JobKind kind = JobKind::Temporal;
    std::string group; ///< aggregation key, e.g. the period pair

    void validate() const
    {
        switch (kind) {
        case JobKind::Temporal:
            if (a.turbine != b.turbine || a.period == b.period)
                throw Error("temporal job must compare two periods of one turbine");
            break;
        case JobKind::Spatial:
            if (a.period != b.period || a.turbine == b.turbine)
                throw Error("spatial job must compare two turbines in one period");
            break;
        case JobKind::Spacetime: break;
        }
    }
};

/// Per-turbine full series, keyed by turbine id.
struct FarmData {
    std::map<std::string, Dataset> turbines;
    std::map<std::string, std::tuple<double, double, double>> layout; ///< id -> (x, y, elevation)

    /// Records of one turbine falling in one period (empty when unknown).
    Dataset slice(const std::string& turbine, const std::string& period, const PeriodPartition& part) const
    {
        auto it = turbines.find(turbine);
        if (it == turbines.end()) throw Error("unknown turbine '" + turbine + "'");
        auto parts = partition(it->second, part);
        auto p = parts.by_label.find(period);
        if (p == parts.by_label.end()) throw Error("unknown period '" + period + "'");
        return std::move(p->second);
    }
};

/// Farm-level pipeline settings resolved once per run.
struct PipelineSettings {
    std::vector<Covariate> matching_order;
    std::vector<Covariate> comparison_covariates;
    double varpi = 0.2;
    FunctionalComparisonOptions comparison{};
    MetricOptions metrics{};
};

inline PipelineSettings make_settings(const FarmConfig& cfg, std::vector<Covariate> order)
{
    if (order.empty()) throw Error("empty covariate order");
    PipelineSettings s;
    s.matching_order = order;
    const auto m = std::min(cfg.comparison_covariates, order.size());
    s.comparison_covariates.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
    s.varpi = cfg.varpi;
    s.comparison = cfg.comparison();
    s.metrics = cfg.metric_options();
    return s;
}

struct JobResult {
    ComparisonJob job;
    bool ok = false;
    std::string error;
    std::size_t n_a = 0, n_b = 0;
    std::size_t matched_a = 0, matched_b = 0;
    ComparisonMetrics metrics;
    TestOutcome outcome;
    std::optional<Hyperparameters> hyper;
    std::vector<std::string> warnings;
};

/// Matching, functional comparison on the top covariates, then every metric.
/// Failures are captured in the result rather than thrown.
inline JobResult compare_pair(const Dataset& a, const Dataset& b, const ComparisonJob& job,
                              const PipelineSettings& s)
{
    JobResult r;
    r.job = job;
    r.n_a = a.n();
    r.n_b = b.n();
    try {
        if (a.empty() || b.empty()) throw Error("empty dataset");
        MatchSpec spec;
        spec.covariate_order = s.matching_order;
        spec.varpi = s.varpi;
        auto m = match_two_way(a, b, spec);
        r.warnings = m.warnings;
        r.matched_a = m.matched_1.n();
        r.matched_b = m.matched_2.n();
        if (m.matched_1.empty() || m.matched_2.empty()) throw Error("empty matched set");
        auto fc = compare_functions(m.matched_1, m.matched_2, s.comparison_covariates, s.comparison);
        r.hyper = fc.hyper.hyper;
        r.outcome = fc.outcome;
        r.metrics = compute_metrics(fc.curve, a, b, s.metrics);
        r.ok = true;
    } catch (const std::exception& e) {
        r.ok = false;
        r.error = e.what();
    }
    return r;
}

inline const std::vector<std::string>& metric_names()
{
    static const std::vector<std::string> n{
        "delta_unweighted_kw", "pct_unweighted", "delta_weighted_kw", "pct_weighted",
        "delta_stat_unweighted_kw", "pct_stat_unweighted", "delta_stat_weighted_kw", "pct_stat_weighted",
        "delta_scaled_kw", "pct_scaled", "delta_stat_scaled_kw", "pct_stat_scaled"};
    return n;
}

inline std::optional<double> metric_value(const ComparisonMetrics& m, std::string_view key)
{
    const std::pair<std::string_view, const Delta*> table[] = {
        {"unweighted", &m.unweighted},           {"weighted", &m.weighted},
        {"stat_unweighted", &m.stat_unweighted}, {"stat_weighted", &m.stat_weighted},
        {"scaled", &m.scaled},                   {"stat_scaled", &m.stat_scaled}};
    for (auto [base, d] : table) {
        if (key == "pct_" + std::string(base)) return d->pct;
        if (key == "delta_" + std::string(base) + "_kw") return d->kw;
    }
    throw Error("unknown metric '" + std::string(key) + "'");
}

struct GroupSummary {
    std::string group;
    std::string metric;
    stats::FiveNumber summary;
};

struct MapValue {
    std::string turbine;
    std::string period;
    std::optional<double> value; ///< empty for failed jobs
    bool baseline = false;
    std::string status;
};

struct FarmReport {
    std::string analysis;
    std::string metric; ///< metric used for map values
    std::vector<JobResult> jobs;
    std::vector<GroupSummary> aggregates;
    std::vector<MapValue> map;
};

/// Runs jobs on up to `workers` threads; results keep job order.
inline std::vector<JobResult> run_jobs(const FarmData& data, const PeriodPartition& part,
                                       const std::vector<ComparisonJob>& jobs, const PipelineSettings& s,
                                       std::size_t workers = 1)
{
    std::vector<JobResult> results(jobs.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            try {
                jobs[i].validate();
                auto a = data.slice(jobs[i].a.turbine, jobs[i].a.period, part);
                auto b = data.slice(jobs[i].b.turbine, jobs[i].b.period, part);
                results[i] = compare_pair(a, b, jobs[i], s);
            } catch (const std::exception& e) {
                results[i].job = jobs[i];
                results[i].error = e.what();
            }
        }
    };
    workers = std::max<std::size_t>(1, std::min(workers, jobs.size()));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    return results;
}

inline std::vector<GroupSummary> summarize_groups(const std::vector<JobResult>& jobs)
{
    std::vector<std::string> groups;
    for (const auto& j : jobs)
        if (std::find(groups.begin(), groups.end(), j.job.group) == groups.end()) groups.push_back(j.job.group);
    std::vector<GroupSummary> out;
    for (const auto& g : groups)
        for (const auto& m : metric_names()) {
            std::vector<double> v;
            for (const auto& j : jobs)
                if (j.ok && j.job.group == g)
                    if (auto x = metric_value(j.metrics, m)) v.push_back(*x);
            out.push_back(GroupSummary{g, m, stats::five_number(v)});
        }
    return out;
}

/// Every turbine, each consecutive period pair (later minus earlier).
inline FarmReport temporal_analysis(const FarmData& data, const PeriodPartition& part, const PipelineSettings& s,
                                    std::size_t workers = 1)
{
    if (part.size() < 2) throw Error("temporal analysis needs at least two periods");
    std::vector<ComparisonJob> jobs;
    const auto& ps = part.periods();
    for (const auto& [id, ds] : data.turbines)
        for (std::size_t p = 1; p < ps.size(); ++p)
            jobs.push_back(ComparisonJob{{id, ps[p - 1].label}, {id, ps[p].label}, JobKind::Temporal,
                                         "[" + std::to_string(p + 1) + "-" + std::to_string(p) + "] " +
                                             ps[p].label + " vs " + ps[p - 1].label});
    FarmReport r;
    r.analysis = "temporal";
    r.jobs = run_jobs(data, part, jobs, s, workers);
    r.aggregates = summarize_groups(r.jobs);
    return r;
}

/// Every other turbine against the baseline turbine within one period.
inline FarmReport spatial_analysis(const FarmData& data, const std::string& baseline, const std::string& period,
                                   const PeriodPartition& part, const PipelineSettings& s,
                                   const std::string& metric = "pct_scaled", std::size_t workers = 1)
{
    if (!data.turbines.count(baseline)) throw Error("unknown baseline turbine '" + baseline + "'");
    if (data.slice(baseline, period, part).empty())
        throw Error("baseline turbine has no data in period '" + period + "'");
    std::vector<ComparisonJob> jobs;
    for (const auto& [id, ds] : data.turbines)
        if (id != baseline)
            jobs.push_back(ComparisonJob{{baseline, period}, {id, period}, JobKind::Spatial, period});
    FarmReport r;
    r.analysis = "spatial";
    r.metric = metric;
    r.jobs = run_jobs(data, part, jobs, s, workers);
    r.aggregates = summarize_groups(r.jobs);
    r.map.push_back(MapValue{baseline, period, 0.0, true, "baseline"});
    for (const auto& j : r.jobs)
        r.map.push_back(MapValue{j.job.b.turbine, period,
                                 j.ok ? metric_value(j.metrics, metric) : std::nullopt, false,
                                 j.ok ? "ok" : "failed"});
    return r;
}

/// Every (turbine, period) cell against one fixed baseline cell.
inline FarmReport spacetime_analysis(const FarmData& data, const Side& baseline, const PeriodPartition& part,
                                     const PipelineSettings& s, const std::string& metric = "pct_scaled",
                                     std::size_t workers = 1)
{
    if (!data.turbines.count(baseline.turbine)) throw Error("unknown baseline turbine '" + baseline.turbine + "'");
    if (data.slice(baseline.turbine, baseline.period, part).empty())
        throw Error("baseline dataset is empty");
    std::vector<ComparisonJob> jobs;
    for (const auto& p : part.periods())
        for (const auto& [id, ds] : data.turbines) {
            Side cell{id, p.label};
            if (cell == baseline) continue;
            jobs.push_back(ComparisonJob{baseline, cell, JobKind::Spacetime, p.label});
        }
    FarmReport r;
    r.analysis = "spacetime";
    r.metric = metric;
    r.jobs = run_jobs(data, part, jobs, s, workers);
    r.aggregates = summarize_groups(r.jobs);
    for (const auto& p : part.periods())
        for (const auto& [id, ds] : data.turbines) {
            if (Side{id, p.label} == baseline) {
                r.map.push_back(MapValue{id, p.label, 0.0, true, "baseline"});
                continue;
            }
            for (const auto& j : r.jobs)
                if (j.job.b == Side{id, p.label})
                    r.map.push_back(MapValue{id, p.label, j.ok ? metric_value(j.metrics, metric) : std::nullopt,
                                             false, j.ok ? "ok" : "failed"});
        }
    return r;
}

// ---------------------------------------------------------------------------
// Loading and emission

/// Reads every *.csv under `dir` (sorted by name). Files may carry a
/// turbine_id column; otherwise the file stem names the turbine.
inline FarmData load_farm_directory(const std::string& dir, const Schema& schema = {})
{
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw Error("data directory '" + dir + "' not found");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    FarmData farm;
    for (const auto& f : files) {
        std::ifstream in(f);
        auto table = parse_scada_table(in, schema, f.stem().string());
        for (auto& [id, ds] : table.by_turbine) {
            auto [it, inserted] = farm.turbines.try_emplace(id, std::move(ds));
            if (!inserted) {
                auto& dst = it->second;
                dst.records.insert(dst.records.end(), ds.records.begin(), ds.records.end());
                dst.sort_by_time();
            }
        }
    }
    if (farm.turbines.empty()) throw Error("no turbine data found in '" + dir + "'");
    return farm;
}

/// Layout CSV: id,x,y[,elevation].
inline std::map<std::string, std::tuple<double, double, double>> read_layout(std::istream& in)
{
    std::map<std::string, std::tuple<double, double, double>> out;
    std::string line;
    if (!std::getline(in, line)) return out;
    while (std::getline(in, line)) {
        auto cells = detail::split(line, line.find('\t') != std::string::npos ? '\t' : ',');
        if (cells.size() < 3 || cells[0].empty()) continue;
        auto x = detail::parse_number(cells[1]), y = detail::parse_number(cells[2]);
        if (!x || !y) throw Error("layout: bad coordinates for '" + std::string(cells[0]) + "'");
        double e = 0.0;
        if (cells.size() > 3)
            if (auto v = detail::parse_number(cells[3])) e = *v;
        out[std::string(cells[0])] = {*x, *y, e};
    }
    return out;
}

namespace detail {

inline std::string fmt(std::optional<double> v) { return v ? format_number(*v) : std::string{}; }

inline std::string csv_escape(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string o = "\"";
    for (char c : s) {
        if (c == '"') o += '"';
        o += c;
    }
    return o + "\"";
}

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ULL)
{
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline json delta_json(const Delta& d) { return {{"kw", d.kw}, {"pct", d.pct ? json(*d.pct) : json(nullptr)}}; }

} // namespace detail

inline json metrics_to_json(const ComparisonMetrics& m)
{
    json bins = json::array();
    for (std::size_t k = 0; k < m.bin_table.size(); ++k) {
        const auto& b = m.bin_table[k];
        bins.push_back({{"bin", k + 1}, {"lower_kw", b.lower}, {"upper_kw", b.upper}, {"grid_count", b.grid_count},
                        {"raw_frequency", b.raw_frequency}, {"pi", b.pi}, {"mu_kw", b.mu}, {"delta_kw", b.delta}});
    }
    return {{"unweighted", detail::delta_json(m.unweighted)},
            {"weighted", detail::delta_json(m.weighted)},
            {"stat_unweighted", detail::delta_json(m.stat_unweighted)},
            {"stat_weighted", detail::delta_json(m.stat_weighted)},
            {"scaled", detail::delta_json(m.scaled)},
            {"stat_scaled", detail::delta_json(m.stat_scaled)},
            {"bin_table", bins}};
}

inline std::string region_text(const TestOutcome& t)
{
    std::string s;
    for (const auto& r : t.region_extent) {
        if (!s.empty()) s += ';';
        s += std::string(name(r.covariate)) + ":" + detail::format_number(r.min) + ".." + detail::format_number(r.max);
    }
    return s;
}

inline json job_to_json(const JobResult& j)
{
    json o{{"kind", std::string(name(j.job.kind))}, {"group", j.job.group},
           {"a", {{"turbine", j.job.a.turbine}, {"period", j.job.a.period}}},
           {"b", {{"turbine", j.job.b.turbine}, {"period", j.job.b.period}}},
           {"status", j.ok ? "ok" : "failed"}, {"n_a", j.n_a}, {"n_b", j.n_b},
           {"matched_a", j.matched_a}, {"matched_b", j.matched_b}};
    if (!j.ok) {
        o["error"] = j.error;
        return o;
    }
    o["reject"] = j.outcome.reject;
    o["rejection_points"] = j.outcome.rejection_region.size();
    o["rejection_region"] = region_text(j.outcome);
    o["metrics"] = metrics_to_json(j.metrics);
    if (j.hyper)
        o["hyperparameters"] = {{"lengthscales", j.hyper->kernel.lengthscales},
                                {"signal_variance", j.hyper->kernel.signal_variance},
                                {"noise_variance", j.hyper->noise_variance}};
    if (!j.warnings.empty()) o["warnings"] = j.warnings;
    return o;
}

/// Writes jobs.csv, boxplot_summary.csv, map_values.csv, report.json and
/// run_manifest.json. Output depends only on the reports and manifest.
inline void emit_report(const std::vector<FarmReport>& reports, const FarmData& data, const std::string& out_dir,
                        const json& manifest)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    auto open = [&](const std::string& file) {
        std::ofstream f(fs::path(out_dir) / file, std::ios::binary);
        if (!f) throw Error("cannot write '" + (fs::path(out_dir) / file).string() + "'");
        return f;
    };
    {
        auto f = open("jobs.csv");
        f << "analysis,kind,group,turbine_a,period_a,turbine_b,period_b,status,error,n_a,n_b,matched_a,matched_b,"
             "reject,rejection_points,rejection_region";
        for (const auto& m : metric_names()) f << ',' << m;
        f << '\n';
        for (const auto& r : reports)
            for (const auto& j : r.jobs) {
                f << r.analysis << ',' << name(j.job.kind) << ',' << detail::csv_escape(j.job.group) << ','
                  << j.job.a.turbine << ',' << j.job.a.period << ',' << j.job.b.turbine << ',' << j.job.b.period
                  << ',' << (j.ok ? "ok" : "failed") << ',' << detail::csv_escape(j.error) << ',' << j.n_a << ','
                  << j.n_b << ',' << j.matched_a << ',' << j.matched_b << ',';
                if (j.ok)
                    f << (j.outcome.reject ? "true" : "false") << ',' << j.outcome.rejection_region.size() << ','
                      << detail::csv_escape(region_text(j.outcome));
                else
                    f << ",,";
                for (const auto& m : metric_names())
                    f << ',' << (j.ok ? detail::fmt(metric_value(j.metrics, m)) : std::string{});
                f << '\n';
            }
    }
    {
        auto f = open("boxplot_summary.csv");
        f << "analysis,group,metric,count,min,q1,median,q3,max,mean\n";
        for (const auto& r : reports)
            for (const auto& g : r.aggregates) {
                f << r.analysis << ',' << detail::csv_escape(g.group) << ',' << g.metric << ',' << g.summary.count;
                if (g.summary.count) {
                    for (double v : {g.summary.min, g.summary.q1, g.summary.median, g.summary.q3, g.summary.max,
                                     g.summary.mean})
                        f << ',' << detail::format_number(v);
                } else {
                    f << ",,,,,,";
                }
                f << '\n';
            }
    }
    {
        auto f = open("map_values.csv");
        f << "analysis,metric,turbine,period,x,y,elevation,role,status,value,sign,magnitude\n";
        for (const auto& r : reports)
            for (const auto& m : r.map) {
                std::string x, y, e;
                if (auto it = data.layout.find(m.turbine); it != data.layout.end()) {
                    x = detail::format_number(std::get<0>(it->second));
                    y = detail::format_number(std::get<1>(it->second));
                    e = detail::format_number(std::get<2>(it->second));
                }
                f << r.analysis << ',' << r.metric << ',' << m.turbine << ',' << m.period << ',' << x << ',' << y
                  << ',' << e << ',' << (m.baseline ? "baseline" : "compared") << ',' << m.status << ','
                  << detail::fmt(m.value) << ',';
                if (m.value) f << (*m.value > 0 ? 1 : (*m.value < 0 ? -1 : 0)) << ',' << detail::format_number(std::fabs(*m.value));
                else f << ',';
                f << '\n';
            }
    }
    {
        json all = json::array();
        for (const auto& r : reports) {
            json jr{{"analysis", r.analysis}, {"metric", r.metric}};
            jr["jobs"] = json::array();
            for (const auto& j : r.jobs) jr["jobs"].push_back(job_to_json(j));
            jr["aggregates"] = json::array();
            for (const auto& g : r.aggregates)
                jr["aggregates"].push_back({{"group", g.group}, {"metric", g.metric}, {"count", g.summary.count},
                                            {"min", g.summary.min}, {"q1", g.summary.q1},
                                            {"median", g.summary.median}, {"q3", g.summary.q3},
                                            {"max", g.summary.max}, {"mean", g.summary.mean}});
            jr["map"] = json::array();
            for (const auto& m : r.map)
                jr["map"].push_back({{"turbine", m.turbine}, {"period", m.period},
                                     {"value", m.value ? json(*m.value) : json(nullptr)},
                                     {"baseline", m.baseline}, {"status", m.status}});
            all.push_back(std::move(jr));
        }
        auto f = open("report.json");
        f << all.dump(2) << '\n';
    }
    {
        auto f = open("run_manifest.json");
        f << manifest.dump(2) << '\n';
    }
}

/// Resolves the farm covariate order: from the config when given, otherwise
/// forward selection on the representative turbines.
inline std::pair<std::vector<Covariate>, std::optional<SelectionResult>>
resolve_covariate_order(const FarmData& data, const FarmConfig& cfg)
{
    if (cfg.covariate_order) return {*cfg.covariate_order, std::nullopt};
    std::vector<std::string> reps = cfg.representative_turbines;
    if (reps.empty()) reps.push_back(data.turbines.begin()->first);
    std::vector<Dataset> sets;
    for (const auto& id : reps) {
        auto it = data.turbines.find(id);
        if (it == data.turbines.end()) throw Error("unknown representative turbine '" + id + "'");
        if (cfg.partition.size()) {
            const auto& label = cfg.selection_period ? *cfg.selection_period : cfg.partition.periods().front().label;
            sets.push_back(data.slice(id, label, cfg.partition));
        } else {
            sets.push_back(it->second);
        }
    }
    std::vector<Covariate> cands;
    for (auto c : cfg.candidates)
        if (std::all_of(sets.begin(), sets.end(), [&](const Dataset& d) { return d.has(c); })) cands.push_back(c);
    auto sel = select_farm_subset(sets, cands, cfg.cv(), cfg.subset_strategy);
    return {sel.best_subset, sel};
}

inline json selection_to_json(const SelectionResult& s)
{
    return {{"ordered_covariates", covariates_to_json(s.ordered_covariates)},
            {"best_subset", covariates_to_json(s.best_subset)},
            {"rmse_path_pct", s.rmse_path},
            {"k_neighbors", s.k_neighbors},
            {"folds", s.folds}};
}

struct FarmRunInputs {
    std::string data_dir;
    std::string layout_file; ///< optional
    std::string config_file;
    std::string out_dir;
    std::size_t workers = 1;
};

/// The `farm run` command: load, select, run the configured analyses, emit.
inline std::vector<FarmReport> run_farm(const FarmRunInputs& in)
{
    const json cfg_json = read_json_file(in.config_file);
    const FarmConfig cfg = farm_config_from_json(cfg_json);
    if (cfg.partition.size() == 0) throw Error("config declares no periods");
    FarmData data = load_farm_directory(in.data_dir, cfg.schema);
    if (!in.layout_file.empty()) {
        std::ifstream lf(in.layout_file);
        if (!lf) throw Error("cannot open layout '" + in.layout_file + "'");
        data.layout = read_layout(lf);
    }
    auto [order, selection] = resolve_covariate_order(data, cfg);
    const auto settings = make_settings(cfg, order);

    const std::string base_turbine = cfg.baseline_turbine ? *cfg.baseline_turbine : data.turbines.begin()->first;
    const std::string base_period = cfg.baseline_period ? *cfg.baseline_period : cfg.partition.periods().front().label;

    std::vector<FarmReport> reports;
    for (auto a : cfg.analyses) {
        switch (a) {
        case Analysis::Temporal:
            reports.push_back(temporal_analysis(data, cfg.partition, settings, in.workers));
            break;
        case Analysis::Spatial:
            for (const auto& p : cfg.partition.periods()) {
                if (data.slice(base_turbine, p.label, cfg.partition).empty()) continue;
                reports.push_back(spatial_analysis(data, base_turbine, p.label, cfg.partition, settings,
                                                   cfg.map_metric, in.workers));
            }
            break;
        case Analysis::Spacetime:
            reports.push_back(spacetime_analysis(data, {base_turbine, base_period}, cfg.partition, settings,
                                                 cfg.map_metric, in.workers));
            break;
        }
    }

    json files = json::array();
    for (const auto& [id, ds] : data.turbines) files.push_back({{"turbine", id}, {"records", ds.n()}});
    json manifest{{"version", kVersion},
                  {"rng", Rng::kName},
                  {"config_hash", detail::hex64(detail::fnv1a(cfg_json.dump()))},
                  {"config", cfg_json},
                  {"turbines", files},
                  {"matching_order", covariates_to_json(settings.matching_order)},
                  {"comparison_covariates", covariates_to_json(settings.comparison_covariates)},
                  {"baseline", {{"turbine", base_turbine}, {"period", base_period}}}};
    if (selection) manifest["selection"] = selection_to_json(*selection);
    emit_report(reports, data, in.out_dir, manifest);
    return reports;
}

} // namespace wtperf
