#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wtperf/covariate.hpp"
#include "wtperf/error.hpp"
#include "wtperf/time.hpp"

namespace wtperf {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// One 10-minute observation. Covariates that a source does not carry are NaN.
struct ScadaRecord {
    Timestamp timestamp{};
    std::string turbine_id;
    std::array<double, kAllCovariates.size()> x{kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
    double y = kNaN; ///< active power, kW

    double at(Covariate c) const { return x[static_cast<std::size_t>(c)]; }
    double& at(Covariate c) { return x[static_cast<std::size_t>(c)]; }
};

/// Records of one turbine (and usually one period), ordered by timestamp.
struct Dataset {
    std::string turbine_id;
    std::string period_label;
    std::vector<ScadaRecord> records;
    std::vector<Covariate> available;
    std::size_t dropped_count = 0;

    std::size_t n() const { return records.size(); }
    std::size_t p() const { return available.size(); }
    bool empty() const { return records.empty(); }

    bool has(Covariate c) const
    {
        return std::find(available.begin(), available.end(), c) != available.end();
    }

    void require(const std::vector<Covariate>& cs) const
    {
        for (auto c : cs)
            if (!has(c))
                throw Error("dataset '" + turbine_id + "' lacks covariate " + std::string(name(c)));
    }

    std::vector<double> column(Covariate c) const
    {
        std::vector<double> v;
        v.reserve(records.size());
        for (const auto& r : records) v.push_back(r.at(c));
        return v;
    }

    std::vector<double> power() const
    {
        std::vector<double> v;
        v.reserve(records.size());
        for (const auto& r : records) v.push_back(r.y);
        return v;
    }

    /// Same metadata, no records.
    Dataset empty_like() const
    {
        Dataset d;
        d.turbine_id = turbine_id;
        d.period_label = period_label;
        d.available = available;
        return d;
    }

    Dataset subset(const std::vector<std::size_t>& indices) const
    {
        Dataset d = empty_like();
        d.records.reserve(indices.size());
        for (auto i : indices) d.records.push_back(records.at(i));
        return d;
    }

    void sort_by_time()
    {
        std::stable_sort(records.begin(), records.end(),
                         [](const ScadaRecord& a, const ScadaRecord& b) {
                             return a.timestamp < b.timestamp;
                         });
    }
};

struct Period {
    std::string label;
    Timestamp start{};
    Timestamp end{}; ///< exclusive
    std::string setting;
};

/// Chronologically ordered, non-overlapping half-open intervals; gaps allowed.
class PeriodPartition {
public:
    PeriodPartition() = default;
    explicit PeriodPartition(std::vector<Period> periods) : periods_(std::move(periods))
    {
        for (std::size_t i = 0; i < periods_.size(); ++i) {
            if (!(periods_[i].start < periods_[i].end))
                throw Error("period '" + periods_[i].label + "' has empty or reversed interval");
            if (i && periods_[i].start < periods_[i - 1].end)
                throw Error("period '" + periods_[i].label + "' overlaps or precedes its predecessor");
            for (std::size_t j = 0; j < i; ++j)
                if (periods_[j].label == periods_[i].label)
                    throw Error("duplicate period label '" + periods_[i].label + "'");
        }
    }

    const std::vector<Period>& periods() const { return periods_; }
    std::size_t size() const { return periods_.size(); }

    std::optional<std::size_t> locate(Timestamp t) const
    {
        auto it = std::upper_bound(periods_.begin(), periods_.end(), t,
                                   [](Timestamp v, const Period& p) { return v < p.start; });
        if (it == periods_.begin()) return std::nullopt;
        auto idx = static_cast<std::size_t>(it - periods_.begin()) - 1;
        if (t < periods_[idx].end) return idx;
        return std::nullopt;
    }

private:
    std::vector<Period> periods_;
};

} // namespace wtperf
