#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wtperf/dataset.hpp"
#include "wtperf/error.hpp"
#include "wtperf/stats.hpp"

namespace wtperf {

/// Maps record fields ("timestamp", "turbine_id", "W", ..., "y", "rho", "S")
/// to header column names.
struct Schema {
    std::map<std::string, std::string> columns;

    /// Every header column whose name is a known field maps onto itself.
    static Schema identity() { return Schema{}; }

    bool empty() const { return columns.empty(); }
};

namespace detail {

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line, char delim)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(delim, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::optional<double> parse_number(std::string_view s)
{
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::string format_number(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline const std::vector<std::string>& known_fields()
{
    static const std::vector<std::string> f{"timestamp", "turbine_id", "W", "T", "D", "TI",
                                            "sdD", "y", "rho", "S"};
    return f;
}

} // namespace detail

/// Parsed rows for one or several turbines, before per-turbine splitting.
struct ParsedTable {
    std::map<std::string, Dataset> by_turbine;
    std::size_t dropped = 0;
};

/// Reads delimiter-separated text (comma or tab, detected from the header).
/// Rows with a missing or unparseable mapped field, or violating the
/// record invariants, are dropped and counted. Duplicate timestamps within
/// one turbine keep the first occurrence.
inline ParsedTable parse_scada_table(std::istream& in, const Schema& schema,
                                     const std::string& default_turbine_id = "unknown")
{
    if (!in) throw Error("unreadable source");
    std::string header_line;
    if (!std::getline(in, header_line)) throw Error("source is empty: header row required");
    const char delim = header_line.find('\t') != std::string::npos ? '\t' : ',';
    auto header = detail::split(header_line, delim);

    // field -> column index
    std::map<std::string, std::size_t> index;
    auto find_col = [&](std::string_view col) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == col) return i;
        return std::nullopt;
    };
    if (schema.empty()) {
        for (const auto& f : detail::known_fields())
            if (auto i = find_col(f)) index[f] = *i;
    } else {
        for (const auto& [field, col] : schema.columns) {
            if (std::find(detail::known_fields().begin(), detail::known_fields().end(), field) ==
                detail::known_fields().end())
                throw Error("schema maps unknown field '" + field + "'");
            auto i = find_col(col);
            if (!i) throw Error("schema column '" + col + "' absent from header");
            index[field] = *i;
        }
    }
    if (!index.count("timestamp")) throw Error("no timestamp column mapped");

    std::vector<Covariate> available;
    for (auto c : kAllCovariates)
        if (index.count(std::string(name(c)))) available.push_back(c);
    const bool has_y = index.count("y") > 0;
    const bool has_id = index.count("turbine_id") > 0;

    ParsedTable out;
    std::string line;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        auto cells = detail::split(line, delim);
        auto cell = [&](const std::string& field) -> std::string_view {
            auto i = index.at(field);
            return i < cells.size() ? cells[i] : std::string_view{};
        };
        ScadaRecord r;
        auto ts = parse_timestamp(cell("timestamp"));
        bool ok = ts.has_value();
        if (ok) r.timestamp = *ts;
        r.turbine_id = has_id ? std::string(cell("turbine_id")) : default_turbine_id;
        if (r.turbine_id.empty()) ok = false;
        for (auto c : available) {
            if (!ok) break;
            auto v = detail::parse_number(cell(std::string(name(c))));
            if (!v) { ok = false; break; }
            r.at(c) = *v;
        }
        if (ok && has_y) {
            auto v = detail::parse_number(cell("y"));
            if (v) r.y = *v; else ok = false;
        }
        if (ok) {
            if (!std::isnan(r.at(Covariate::W)) && r.at(Covariate::W) < 0) ok = false;
            if (!std::isnan(r.at(Covariate::TI)) && r.at(Covariate::TI) < 0) ok = false;
            if (!std::isnan(r.at(Covariate::sdD)) && r.at(Covariate::sdD) < 0) ok = false;
            if (!std::isnan(r.at(Covariate::D))) r.at(Covariate::D) = stats::wrap360(r.at(Covariate::D));
        }
        if (!ok) {
            ++out.dropped;
            continue;
        }
        auto [it, inserted] = out.by_turbine.try_emplace(r.turbine_id);
        if (inserted) {
            it->second.turbine_id = r.turbine_id;
            it->second.available = available;
        }
        it->second.records.push_back(std::move(r));
    }

    for (auto& [id, ds] : out.by_turbine) {
        ds.sort_by_time();
        std::vector<ScadaRecord> unique;
        unique.reserve(ds.records.size());
        for (auto& r : ds.records) {
            if (!unique.empty() && unique.back().timestamp == r.timestamp) {
                ++ds.dropped_count;
                ++out.dropped;
                continue;
            }
            unique.push_back(std::move(r));
        }
        ds.records = std::move(unique);
    }
    if (out.by_turbine.empty()) throw Error("zero valid rows");
    return out;
}

/// Single-turbine parse. Row-level drops are recorded in dropped_count.
inline Dataset parse_scada(std::istream& in, const Schema& schema = {},
                           const std::string& default_turbine_id = "unknown")
{
    auto table = parse_scada_table(in, schema, default_turbine_id);
    if (table.by_turbine.size() != 1)
        throw Error("source holds " + std::to_string(table.by_turbine.size()) +
                    " turbines; use parse_scada_table");
    Dataset ds = std::move(table.by_turbine.begin()->second);
    ds.dropped_count = table.dropped;
    return ds;
}

inline Dataset read_scada_file(const std::string& path, const Schema& schema = {})
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    auto id = path.substr(path.find_last_of('/') + 1);
    id = id.substr(0, id.find_last_of('.'));
    return parse_scada(in, schema, id);
}

/// Writes the canonical CSV layout that parse_scada reads back.
inline void write_scada(std::ostream& out, const Dataset& ds)
{
    out << "timestamp,turbine_id";
    for (auto c : kAllCovariates)
        if (ds.has(c)) out << ',' << name(c);
    out << ",y\n";
    for (const auto& r : ds.records) {
        out << format_timestamp(r.timestamp) << ',' << r.turbine_id;
        for (auto c : kAllCovariates)
            if (ds.has(c)) out << ',' << detail::format_number(r.at(c));
        out << ',' << detail::format_number(r.y) << '\n';
    }
}

inline void write_scada_file(const std::string& path, const Dataset& ds)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    write_scada(out, ds);
}

// ---------------------------------------------------------------------------
// High-frequency aggregation

using SampleTime = std::chrono::sys_time<std::chrono::milliseconds>;

struct HighFrequencySample {
    SampleTime time{};
    double w = 0.0; ///< wind speed, m/s
    double d = 0.0; ///< direction, degrees
    double t = 0.0; ///< temperature, degC
};

struct AggregatedWindow {
    ScadaRecord record; ///< y left NaN
    std::size_t samples = 0;
    bool ti_defined = true; ///< false when mean wind speed is zero; TI is NaN then
};

/// Windows are aligned to multiples of `window` since the epoch and stamped
/// with their start. A window needs at least two samples to be emitted.
inline std::vector<AggregatedWindow>
aggregate_high_frequency(std::span<const HighFrequencySample> samples,
                         std::chrono::milliseconds window = std::chrono::minutes(10),
                         const std::string& turbine_id = "unknown")
{
    if (window.count() <= 0) throw Error("aggregation window must be positive");
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (samples[i].time < samples[i - 1].time) throw Error("samples are not time-ordered");

    std::vector<AggregatedWindow> out;
    std::size_t i = 0;
    while (i < samples.size()) {
        const auto key = samples[i].time.time_since_epoch() / window;
        std::size_t j = i;
        while (j < samples.size() && samples[j].time.time_since_epoch() / window == key) ++j;
        if (j - i >= 2) {
            std::vector<double> w, d, t;
            for (std::size_t k = i; k < j; ++k) {
                w.push_back(samples[k].w);
                d.push_back(samples[k].d);
                t.push_back(samples[k].t);
            }
            AggregatedWindow a;
            a.samples = j - i;
            a.record.turbine_id = turbine_id;
            a.record.timestamp = std::chrono::floor<std::chrono::seconds>(SampleTime{key * window});
            const double mw = stats::mean(w);
            a.record.at(Covariate::W) = mw;
            a.record.at(Covariate::T) = stats::mean(t);
            auto circ = stats::circular_summary(d);
            a.record.at(Covariate::D) = circ.mean_deg;
            // identical directions can leave R-bar a hair under 1
            a.record.at(Covariate::sdD) = circ.sd_deg < 1e-6 ? 0.0 : circ.sd_deg;
            if (mw > 0.0) {
                a.record.at(Covariate::TI) = stats::sample_sd(w) / mw;
            } else {
                a.ti_defined = false;
            }
            out.push_back(std::move(a));
        }
        i = j;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Period partition

struct Partitioned {
    std::map<std::string, Dataset> by_label;
    std::size_t excluded = 0;
};

/// Assigns each record to the period containing it; records in gaps are
/// excluded. Every period label is present in the result, possibly empty.
inline Partitioned partition(const Dataset& ds, const PeriodPartition& periods)
{
    Partitioned out;
    for (const auto& p : periods.periods()) {
        Dataset d = ds.empty_like();
        d.period_label = p.label;
        out.by_label.emplace(p.label, std::move(d));
    }
    for (const auto& r : ds.records) {
        auto idx = periods.locate(r.timestamp);
        if (!idx) {
            ++out.excluded;
            continue;
        }
        out.by_label.at(periods.periods()[*idx].label).records.push_back(r);
    }
    return out;
}

} // namespace wtperf
