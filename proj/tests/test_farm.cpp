#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "support.hpp"
#include "wtperf/farm.hpp"
#include "wtperf/synthetic.hpp"

using namespace wtperf;
namespace fs = std::filesystem;

namespace {

std::vector<synth::PeriodSpec> periods(std::size_t n, std::size_t count = 2)
{
    std::vector<synth::PeriodSpec> ps;
    for (std::size_t p = 0; p < count; ++p) {
        synth::PeriodSpec s;
        s.label = "P" + std::to_string(p + 1);
        s.start = *parse_timestamp("2020-01-01 00:00") + std::chrono::days(60 * static_cast<int>(p));
        s.n_records = n;
        ps.push_back(s);
    }
    return ps;
}

FarmData to_farm(const synth::SyntheticFarm& f)
{
    FarmData d;
    for (const auto& t : f.turbines) d.turbines.emplace(t.turbine_id, t);
    for (const auto& t : f.layout) d.layout[t.id] = {t.x, t.y, t.elevation};
    return d;
}

PipelineSettings quick_settings()
{
    FarmConfig cfg;
    cfg.grid_resolution = 20;
    cfg.gp_max_points = 800;
    cfg.hyper_max_points = 200;
    cfg.hyper_starts = 2;
    return make_settings(cfg, {Covariate::W, Covariate::T, Covariate::TI});
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t lines(const fs::path& p)
{
    auto s = slurp(p);
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

fs::path scratch(const std::string& name)
{
    auto p = fs::temp_directory_path() / ("wtperf_test_" + name);
    fs::remove_all(p);
    return p;
}

} // namespace

TEST(Job, KindInvariants)
{
    EXPECT_THROW((ComparisonJob{{"A", "P1"}, {"B", "P2"}, JobKind::Temporal, ""}.validate()), Error);
    EXPECT_THROW((ComparisonJob{{"A", "P1"}, {"B", "P2"}, JobKind::Spatial, ""}.validate()), Error);
    EXPECT_NO_THROW((ComparisonJob{{"A", "P1"}, {"A", "P2"}, JobKind::Temporal, ""}.validate()));
    EXPECT_NO_THROW((ComparisonJob{{"A", "P1"}, {"B", "P1"}, JobKind::Spatial, ""}.validate()));
}

TEST(ComparePair, SelfComparisonIsZero)
{
    auto f = synth::generate(synth::SyntheticConfig::simple(1, periods(600, 1), 3));
    const auto& d = f.turbines[0];
    auto r = compare_pair(d, d, ComparisonJob{{"T01", "P1"}, {"T01", "P1"}, JobKind::Spacetime, ""}, quick_settings());
    ASSERT_TRUE(r.ok) << r.error;
    EXPECT_FALSE(r.outcome.reject);
    for (const auto& m : metric_names())
        if (m.rfind("delta_", 0) == 0) EXPECT_EQ(*metric_value(r.metrics, m), 0.0) << m;
}

TEST(ComparePair, EmptyDatasetFailsWithNote)
{
    auto f = synth::generate(synth::SyntheticConfig::simple(1, periods(100, 1), 3));
    auto r = compare_pair(f.turbines[0], f.turbines[0].empty_like(), ComparisonJob{}, quick_settings());
    EXPECT_FALSE(r.ok);
    EXPECT_NE(r.error.find("empty dataset"), std::string::npos);
}

TEST(Temporal, CountsAndAggregates)
{
    auto f = synth::generate(synth::SyntheticConfig::simple(2, periods(500), 5));
    auto farm = to_farm(f);
    auto rep = temporal_analysis(farm, f.partition, quick_settings(), 2);
    EXPECT_EQ(rep.jobs.size(), 2u);
    std::set<std::string> groups;
    for (const auto& a : rep.aggregates) groups.insert(a.group);
    EXPECT_EQ(groups.size(), 1u);
    for (const auto& j : rep.jobs) {
        EXPECT_TRUE(j.ok) << j.error;
        EXPECT_EQ(j.job.a.period, "P1");
        EXPECT_EQ(j.job.b.period, "P2");
    }
    // aggregates recomputed from the long table agree
    for (const auto& a : rep.aggregates) {
        std::vector<double> v;
        for (const auto& j : rep.jobs)
            if (j.ok && j.job.group == a.group)
                if (auto x = metric_value(j.metrics, a.metric)) v.push_back(*x);
        auto f5 = stats::five_number(v);
        EXPECT_EQ(f5.count, a.summary.count);
        EXPECT_EQ(f5.median, a.summary.median);
        EXPECT_EQ(f5.mean, a.summary.mean);
    }
}

TEST(Temporal, EmptyPeriodFailsOnlyThatJob)
{
    auto f = synth::generate(synth::SyntheticConfig::simple(2, periods(400), 5));
    auto farm = to_farm(f);
    auto& recs = farm.turbines.at("T02").records;
    recs.erase(std::remove_if(recs.begin(), recs.end(),
                              [&](const ScadaRecord& r) { return f.partition.locate(r.timestamp) == 1u; }),
               recs.end());
    auto rep = temporal_analysis(farm, f.partition, quick_settings());
    ASSERT_EQ(rep.jobs.size(), 2u);
    EXPECT_TRUE(rep.jobs[0].ok);
    EXPECT_FALSE(rep.jobs[1].ok);
    for (const auto& a : rep.aggregates) EXPECT_LE(a.summary.count, 1u);
}

TEST(Temporal, UniformUpgradeShowsUp)
{
    auto cfg = synth::SyntheticConfig::simple(3, periods(1500), 8);
    for (auto& t : cfg.turbines) t.upgrades["P2"] = synth::UpgradeSpec{0.06, 9.0};
    auto f = synth::generate(cfg);
    auto rep = temporal_analysis(to_farm(f), f.partition, quick_settings(), 3);
    std::vector<double> pct;
    double target = 0;
    for (std::size_t t = 0; t < 3; ++t) {
        const auto& j = rep.jobs[t];
        ASSERT_TRUE(j.ok) << j.error;
        pct.push_back(*j.metrics.weighted.pct);
        auto post = partition(f.pre_upgrade[t], f.partition).by_label.at("P2");
        target += 100.0 * synth::effective_increase(post, synth::UpgradeSpec{0.06, 9.0}) / 3.0;
    }
    std::sort(pct.begin(), pct.end());
    EXPECT_NEAR(pct[1], target, 0.3 * target);
}

TEST(Spatial, CountsBaselineAndAntisymmetry)
{
    auto f = synth::generate(synth::SyntheticConfig::simple(3, periods(600, 1), 6));
    auto farm = to_farm(f);
    auto s = quick_settings();
    auto rep = spatial_analysis(farm, "T01", "P1", f.partition, s);
    EXPECT_EQ(rep.jobs.size(), 2u);
    ASSERT_EQ(rep.map.size(), 3u);
    EXPECT_TRUE(rep.map[0].baseline);
    EXPECT_EQ(*rep.map[0].value, 0.0);

    auto a = farm.slice("T01", "P1", f.partition), b = farm.slice("T02", "P1", f.partition);
    auto ab = compare_pair(a, b, ComparisonJob{{"T01", "P1"}, {"T02", "P1"}, JobKind::Spatial, ""}, s);
    auto ba = compare_pair(b, a, ComparisonJob{{"T02", "P1"}, {"T01", "P1"}, JobKind::Spatial, ""}, s);
    ASSERT_TRUE(ab.ok && ba.ok);
    EXPECT_EQ(ab.metrics.unweighted.kw, -ba.metrics.unweighted.kw);
    EXPECT_NEAR(ab.metrics.weighted.kw, -ba.metrics.weighted.kw, 1e-9);
    EXPECT_THROW(spatial_analysis(farm, "nope", "P1", f.partition, s), Error);
}

TEST(Spatial, IdenticalCopyTurbineIsZero)
{
    auto f = synth::generate(synth::SyntheticConfig::simple(1, periods(500, 1), 6));
    auto farm = to_farm(f);
    Dataset copy = farm.turbines.at("T01");
    copy.turbine_id = "T01b";
    for (auto& r : copy.records) r.turbine_id = "T01b";
    farm.turbines.emplace("T01b", copy);
    auto rep = spatial_analysis(farm, "T01", "P1", f.partition, quick_settings(), "pct_weighted");
    ASSERT_TRUE(rep.jobs[0].ok);
    EXPECT_EQ(rep.jobs[0].metrics.weighted.kw, 0.0);
    EXPECT_EQ(*rep.map[1].value, 0.0);
}

TEST(Spatial, BetterSitedButDeratedTurbineMapsNegative)
{
    auto cfg = synth::SyntheticConfig::simple(2, periods(1500, 1), 13);
    cfg.turbines[1].wind_scale = 1.15;
    cfg.turbines[1].efficiency = 0.95;
    auto f = synth::generate(cfg);
    auto num = [](const Dataset& d) {
        double s = 0;
        for (const auto& r : d.records) s += r.y;
        return s;
    };
    EXPECT_GT(num(f.turbines[1]), num(f.turbines[0]));
    auto rep = spatial_analysis(to_farm(f), "T01", "P1", f.partition, quick_settings());
    ASSERT_TRUE(rep.jobs[0].ok) << rep.jobs[0].error;
    ASSERT_TRUE(rep.map[1].value);
    EXPECT_LT(*rep.map[1].value, 0.0);
}

TEST(Spacetime, CountsAndBaselineCell)
{
    auto f = synth::generate(synth::SyntheticConfig::simple(2, periods(400, 3), 7));
    auto farm = to_farm(f);
    auto rep = spacetime_analysis(farm, {"T01", "P1"}, f.partition, quick_settings(), "pct_scaled", 4);
    EXPECT_EQ(rep.jobs.size(), 2u * 3u - 1u);
    EXPECT_EQ(rep.map.size(), 6u);
    for (const auto& j : rep.jobs) EXPECT_EQ(j.job.a, (Side{"T01", "P1"}));
    std::size_t baselines = 0;
    for (const auto& m : rep.map)
        if (m.baseline) {
            ++baselines;
            EXPECT_EQ(*m.value, 0.0);
        }
    EXPECT_EQ(baselines, 1u);
}

TEST(Spacetime, PostUpgradeCellsShiftUp)
{
    auto cfg = synth::SyntheticConfig::simple(2, periods(1500), 9);
    cfg.turbines[1].upgrades["P2"] = synth::UpgradeSpec{0.08, 9.0};
    auto f = synth::generate(cfg);
    auto rep = spacetime_analysis(to_farm(f), {"T01", "P1"}, f.partition, quick_settings(), "pct_weighted", 3);
    std::map<std::pair<std::string, std::string>, double> v;
    for (const auto& m : rep.map) v[{m.turbine, m.period}] = *m.value;
    const double shift = v[{"T02", "P2"}] - v[{"T02", "P1"}];
    auto post = partition(f.pre_upgrade[1], f.partition).by_label.at("P2");
    const double target = 100.0 * synth::effective_increase(post, synth::UpgradeSpec{0.08, 9.0});
    EXPECT_NEAR(shift, target, 0.35 * target);
}

TEST(Report, EmptyReportWritesHeadersOnly)
{
    auto dir = scratch("empty");
    FarmReport r;
    r.analysis = "temporal";
    emit_report({r}, FarmData{}, dir.string(), json::object());
    for (auto f : {"jobs.csv", "boxplot_summary.csv", "map_values.csv"}) EXPECT_EQ(lines(dir / f), 1u) << f;
    EXPECT_TRUE(fs::exists(dir / "report.json"));
    EXPECT_TRUE(fs::exists(dir / "run_manifest.json"));
}

TEST(Report, RowsPerJobAndDeterministic)
{
    auto f = synth::generate(synth::SyntheticConfig::simple(2, periods(400), 5));
    auto farm = to_farm(f);
    auto s = quick_settings();
    auto d1 = scratch("det1"), d2 = scratch("det2");
    emit_report({temporal_analysis(farm, f.partition, s, 1)}, farm, d1.string(), json::object());
    emit_report({temporal_analysis(farm, f.partition, s, 2)}, farm, d2.string(), json::object());
    EXPECT_EQ(lines(d1 / "jobs.csv"), 3u);
    for (auto name : {"jobs.csv", "boxplot_summary.csv", "map_values.csv", "report.json"})
        EXPECT_EQ(slurp(d1 / name), slurp(d2 / name)) << name;
}

TEST(Report, UnwritableDestination)
{
    auto blocker = scratch("blocker");
    std::ofstream(blocker.string()) << "x";
    EXPECT_THROW(emit_report({}, FarmData{}, (blocker / "sub").string(), json::object()), Error);
}

TEST(Layout, ParsesOptionalElevation)
{
    std::istringstream in("id,x,y,elevation\nT01,0,0,100\nT02,300,10\n");
    auto l = read_layout(in);
    EXPECT_EQ(l.size(), 2u);
    EXPECT_DOUBLE_EQ(std::get<2>(l.at("T01")), 100.0);
    EXPECT_DOUBLE_EQ(std::get<2>(l.at("T02")), 0.0);
}

TEST(MetricLookup, UnknownNameThrows)
{
    ComparisonMetrics m;
    EXPECT_THROW(metric_value(m, "pct_bogus"), Error);
    EXPECT_EQ(*metric_value(m, "delta_scaled_kw"), 0.0);
}
