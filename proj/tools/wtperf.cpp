// wtperf: command-line front end for the performance-comparison pipeline.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "wtperf/wtperf.hpp"

namespace fs = std::filesystem;
using namespace wtperf;

namespace {

void write_curve(std::ostream& out, const DifferenceCurve& c)
{
    for (const auto& a : c.grid.axes) out << name(a.covariate) << ',';
    out << "f1,f2,diff,lower,upper\n";
    for (std::size_t i = 0; i < c.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        for (Eigen::Index a = 0; a < c.grid.points.cols(); ++a) out << detail::format_number(c.grid.points(k, a)) << ',';
        out << detail::format_number(c.f1[k]) << ',' << detail::format_number(c.f2[k]) << ','
            << detail::format_number(c.diff[k]) << ',' << detail::format_number(c.lower[k]) << ','
            << detail::format_number(c.upper[k]) << '\n';
    }
}

/// Rebuilds a DifferenceCurve from the table written by `compare`. The
/// lattice is inferred from the distinct values per axis.
DifferenceCurve read_curve(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) throw Error("curve file is empty");
    auto header = detail::split(line, ',');
    if (header.size() < 6) throw Error("curve file: expected covariate columns then f1,f2,diff,lower,upper");
    const std::size_t dims = header.size() - 5;
    std::vector<Covariate> covs;
    for (std::size_t a = 0; a < dims; ++a) covs.push_back(parse_covariate(detail::trim(header[a])));
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        auto cells = detail::split(line, ',');
        if (cells.size() != header.size()) throw Error("curve file: ragged row");
        std::vector<double> r;
        for (auto c : cells) {
            auto v = detail::parse_number(c);
            if (!v) throw Error("curve file: bad number '" + std::string(c) + "'");
            r.push_back(*v);
        }
        rows.push_back(std::move(r));
    }
    std::vector<GridAxis> axes;
    std::size_t total = 1;
    for (std::size_t a = 0; a < dims; ++a) {
        std::vector<double> vals;
        for (const auto& r : rows) vals.push_back(r[a]);
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        if (vals.size() < 2) throw Error("curve file: axis with fewer than two values");
        axes.push_back(GridAxis{covs[a], vals.front(), vals.back(), 0.0, vals.size()});
        total *= vals.size();
    }
    if (total != rows.size()) throw Error("curve file: rows do not form a full lattice");
    DifferenceCurve c;
    c.grid = make_grid(std::move(axes));
    const auto n = static_cast<Eigen::Index>(rows.size());
    c.f1.resize(n);
    c.f2.resize(n);
    c.diff.resize(n);
    c.lower.resize(n);
    c.upper.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        c.f1[i] = r[dims];
        c.f2[i] = r[dims + 1];
        c.diff[i] = r[dims + 2];
        c.lower[i] = r[dims + 3];
        c.upper[i] = r[dims + 4];
    }
    c.var1 = c.var2 = Eigen::VectorXd::Zero(n);
    return c;
}

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Wind turbine space-time performance comparison"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    // select
    auto* sel = app.add_subcommand("select", "Covariate subset selection by kNN cross-validation");
    std::string sel_input, sel_candidates = "W,T,D,TI,sdD", sel_direction = "forward";
    CvOptions cv;
    sel->add_option("--input", sel_input, "SCADA table")->required();
    sel->add_option("--candidates", sel_candidates, "comma-separated covariates");
    sel->add_option("--k", cv.k, "neighbors");
    sel->add_option("--folds", cv.folds, "CV folds");
    sel->add_option("--seed", cv.seed, "fold shuffle seed");
    sel->add_option("--rated-power", cv.rated_power, "rated power in kW");
    sel->add_option("--direction", sel_direction, "forward or backward")->check(CLI::IsMember({"forward", "backward"}));

    // match
    auto* mat = app.add_subcommand("match", "Two-way covariate matching");
    std::string mat_a, mat_b, mat_order = "W,T,TI", mat_out = ".";
    double varpi = 0.2;
    mat->add_option("--a", mat_a, "first dataset")->required();
    mat->add_option("--b", mat_b, "second dataset")->required();
    mat->add_option("--order", mat_order, "matching covariate order");
    mat->add_option("--varpi", varpi, "threshold factor");
    mat->add_option("--out", mat_out, "output directory");

    // compare
    auto* cmp = app.add_subcommand("compare", "GP functional comparison of two matched datasets");
    std::string cmp_a, cmp_b, cmp_covs = "W,T", cmp_out;
    FunctionalComparisonOptions fco;
    cmp->add_option("--a", cmp_a, "first matched dataset")->required();
    cmp->add_option("--b", cmp_b, "second matched dataset")->required();
    cmp->add_option("--covariates", cmp_covs, "comparison covariates");
    cmp->add_option("--grid", fco.grid_resolution, "points per axis");
    cmp->add_option("--alpha", fco.alpha, "significance level");
    cmp->add_option("--seed", fco.hyper.seed, "optimizer restart seed");
    cmp->add_option("--out", cmp_out, "curve table (stdout when omitted)");

    // metrics
    auto* met = app.add_subcommand("metrics", "Difference metrics from a curve table");
    std::string met_curve, met_a, met_b, met_sig = "excess";
    MetricOptions mo;
    met->add_option("--curve", met_curve, "curve table written by compare")->required();
    met->add_option("--orig-a", met_a, "first original dataset")->required();
    met->add_option("--orig-b", met_b, "second original dataset")->required();
    met->add_option("--bins", mo.bins, "power bins");
    met->add_option("--rated-power", mo.rated_power, "rated power in kW");
    met->add_option("--significance", met_sig, "excess or full")->check(CLI::IsMember({"excess", "full"}));

    // synth
    auto* syn = app.add_subcommand("synth", "Generate a synthetic farm");
    std::string syn_config, syn_out;
    syn->add_option("--config", syn_config, "synthetic config")->required();
    syn->add_option("--out", syn_out, "output directory")->required();

    // farm run
    auto* farm = app.add_subcommand("farm", "Farm-wide analyses");
    farm->require_subcommand(1);
    auto* run = farm->add_subcommand("run", "Run configured analyses over a data directory");
    FarmRunInputs fr;
    run->add_option("--data-dir", fr.data_dir, "directory of SCADA tables")->required();
    run->add_option("--layout", fr.layout_file, "turbine layout table");
    run->add_option("--config", fr.config_file, "farm config")->required();
    run->add_option("--out", fr.out_dir, "output directory")->required();
    run->add_option("--jobs", fr.workers, "worker threads");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sel) {
            auto ds = read_scada_file(sel_input);
            auto cands = parse_covariate_list(sel_candidates);
            auto res = sel_direction == "forward" ? forward_select(ds, cands, cv) : backward_select(ds, cands, cv);
            print_json(selection_to_json(res));
        } else if (*mat) {
            auto a = read_scada_file(mat_a), b = read_scada_file(mat_b);
            MatchSpec spec;
            spec.covariate_order = parse_covariate_list(mat_order);
            spec.varpi = varpi;
            auto m = match_two_way(a, b, spec);
            auto d = matching_diagnostics(a, b, m, spec.covariate_order);
            fs::create_directories(mat_out);
            write_scada_file((fs::path(mat_out) / "matched_a.csv").string(), m.matched_1);
            write_scada_file((fs::path(mat_out) / "matched_b.csv").string(), m.matched_2);
            json cov = json::array();
            for (const auto& c : d.covariates)
                cov.push_back({{"covariate", std::string(name(c.covariate))},
                               {"ks_before", c.ks_before},
                               {"ks_after", c.ks_after}});
            json diag{{"order", covariates_to_json(spec.covariate_order)},
                      {"varpi", varpi},
                      {"n_before", {d.n_before_1, d.n_before_2}},
                      {"n_after", {d.n_after_1, d.n_after_2}},
                      {"retention", {d.retention_1, d.retention_2}},
                      {"pairs", m.pairs.size()},
                      {"covariates", cov},
                      {"warnings", m.warnings}};
            std::ofstream f(fs::path(mat_out) / "diagnostics.json");
            f << diag.dump(2) << '\n';
            print_json(diag);
        } else if (*cmp) {
            auto a = read_scada_file(cmp_a), b = read_scada_file(cmp_b);
            auto fc = compare_functions(a, b, parse_covariate_list(cmp_covs), fco);
            if (cmp_out.empty()) {
                write_curve(std::cout, fc.curve);
            } else {
                std::ofstream f(cmp_out);
                if (!f) throw Error("cannot write '" + cmp_out + "'");
                write_curve(f, fc.curve);
            }
            std::cerr << "reject=" << (fc.outcome.reject ? "true" : "false")
                      << " rejection_points=" << fc.outcome.rejection_region.size() << '\n';
        } else if (*met) {
            std::ifstream cf(met_curve);
            if (!cf) throw Error("cannot open curve '" + met_curve + "'");
            auto curve = read_curve(cf);
            mo.significance = met_sig == "full" ? SignificanceMode::FullOutside : SignificanceMode::Excess;
            auto m = compute_metrics(curve, read_scada_file(met_a), read_scada_file(met_b), mo);
            print_json(metrics_to_json(m));
        } else if (*syn) {
            auto cfg = synthetic_config_from_json(read_json_file(syn_config));
            auto farm_data = synth::generate(cfg);
            fs::create_directories(syn_out);
            for (const auto& ds : farm_data.turbines)
                write_scada_file((fs::path(syn_out) / (ds.turbine_id + ".csv")).string(), ds);
            std::ofstream lf(fs::path(syn_out) / "layout.txt");
            lf << "id,x,y,elevation\n";
            for (const auto& t : farm_data.layout)
                lf << t.id << ',' << detail::format_number(t.x) << ',' << detail::format_number(t.y) << ','
                   << detail::format_number(t.elevation) << '\n';
            std::cout << "wrote " << farm_data.turbines.size() << " turbines to " << syn_out << '\n';
        } else if (*run) {
            auto reports = run_farm(fr);
            std::size_t jobs = 0, failed = 0;
            for (const auto& r : reports)
                for (const auto& j : r.jobs) {
                    ++jobs;
                    if (!j.ok) ++failed;
                }
            std::cout << "jobs=" << jobs << " failed=" << failed << " out=" << fr.out_dir << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
