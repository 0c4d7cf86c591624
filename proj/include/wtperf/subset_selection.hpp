#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "wtperf/dataset.hpp"
#include "wtperf/error.hpp"
#include "wtperf/random.hpp"
#include "wtperf/stats.hpp"

namespace wtperf {

/// k-nearest-neighbour regressor in z-scored covariate space. Scaling uses
/// the training rows' mean and sample sd; a constant covariate gets unit scale.
class KnnRegressor {
public:
    KnnRegressor(std::vector<std::vector<double>> rows, std::vector<double> y, std::size_t k)
        : y_(std::move(y)), k_(k)
    {
        if (rows.empty()) throw Error("kNN: empty training set");
        p_ = rows.front().size();
        if (p_ == 0) throw Error("kNN: empty covariate list");
        if (k_ == 0) throw Error("kNN: k must be positive");
        if (k_ > rows.size()) throw Error("kNN: k exceeds number of training rows");
        center_.assign(p_, 0.0);
        scale_.assign(p_, 1.0);
        for (std::size_t j = 0; j < p_; ++j) {
            std::vector<double> col;
            col.reserve(rows.size());
            for (const auto& r : rows) col.push_back(r[j]);
            center_[j] = stats::mean(col);
            const double sd = stats::sample_sd(col);
            scale_[j] = sd > 0.0 ? sd : 1.0;
        }
        z_.reserve(rows.size() * p_);
        for (const auto& r : rows)
            for (std::size_t j = 0; j < p_; ++j) z_.push_back((r[j] - center_[j]) / scale_[j]);
        scratch_.resize(rows.size());
    }

    std::size_t size() const { return y_.size(); }

    /// Mean response of the k nearest rows; equidistant rows resolve to the
    /// lower row index.
    double predict(std::span<const double> query) const
    {
        if (query.size() != p_) throw Error("kNN: query dimension mismatch");
        std::vector<double> q(p_);
        for (std::size_t j = 0; j < p_; ++j) q[j] = (query[j] - center_[j]) / scale_[j];
        const std::size_t n = y_.size();
        for (std::size_t i = 0; i < n; ++i) {
            double d2 = 0.0;
            const double* row = &z_[i * p_];
            for (std::size_t j = 0; j < p_; ++j) {
                const double diff = row[j] - q[j];
                d2 += diff * diff;
            }
            scratch_[i] = {d2, i};
        }
        std::nth_element(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(k_ - 1),
                         scratch_.end());
        double s = 0.0;
        for (std::size_t i = 0; i < k_; ++i) s += y_[scratch_[i].second];
        return s / static_cast<double>(k_);
    }

private:
    std::vector<double> y_;
    std::size_t k_;
    std::size_t p_ = 0;
    std::vector<double> center_, scale_, z_;
    mutable std::vector<std::pair<double, std::size_t>> scratch_;
};

namespace detail {

inline std::vector<std::vector<double>> rows_of(const Dataset& ds, const std::vector<Covariate>& cs,
                                                std::span<const std::size_t> idx)
{
    std::vector<std::vector<double>> rows;
    rows.reserve(idx.size());
    for (auto i : idx) {
        std::vector<double> r(cs.size());
        for (std::size_t j = 0; j < cs.size(); ++j) r[j] = ds.records[i].at(cs[j]);
        rows.push_back(std::move(r));
    }
    return rows;
}

/// Indices of ds in (timestamp, turbine_id) order.
inline std::vector<std::size_t> canonical_order(const Dataset& ds)
{
    std::vector<std::size_t> idx(ds.n());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const auto& ra = ds.records[a];
        const auto& rb = ds.records[b];
        if (ra.timestamp != rb.timestamp) return ra.timestamp < rb.timestamp;
        return ra.turbine_id < rb.turbine_id;
    });
    return idx;
}

} // namespace detail

inline double knn_predict(const Dataset& train, const std::vector<Covariate>& covariates,
                          std::span<const double> query, std::size_t k)
{
    if (covariates.empty()) throw Error("kNN: empty covariate list");
    train.require(covariates);
    auto idx = detail::canonical_order(train);
    KnnRegressor knn(detail::rows_of(train, covariates, idx), [&] {
        std::vector<double> y;
        for (auto i : idx) y.push_back(train.records[i].y);
        return y;
    }(), k);
    return knn.predict(query);
}

struct CvOptions {
    std::size_t k = 50;
    std::size_t folds = 10;
    std::uint64_t seed = 17;
    double rated_power = 1500.0; ///< kW
};

/// Out-of-fold RMSE as a percentage of rated power. Folds come from a seeded
/// shuffle of the canonical (timestamp-sorted) order, so the result does not
/// depend on input row order.
inline double cv_rmse(const Dataset& ds, const std::vector<Covariate>& covariates,
                      const CvOptions& opt)
{
    if (opt.folds < 2) throw Error("cross-validation needs at least 2 folds");
    if (ds.n() < opt.folds) throw Error("fewer rows than folds");
    if (!(opt.rated_power > 0.0)) throw Error("rated power must be positive");
    if (covariates.empty()) throw Error("kNN: empty covariate list");
    ds.require(covariates);

    const auto canon = detail::canonical_order(ds);
    std::vector<std::size_t> perm(canon.size());
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(opt.seed);
    rng.shuffle(perm);
    std::vector<std::size_t> fold_of(canon.size());
    for (std::size_t pos = 0; pos < perm.size(); ++pos) fold_of[perm[pos]] = pos % opt.folds;

    double sse = 0.0;
    for (std::size_t f = 0; f < opt.folds; ++f) {
        // canonical order within each side keeps the tie-break on row position
        std::vector<std::size_t> train, test;
        for (std::size_t c = 0; c < canon.size(); ++c)
            (fold_of[c] == f ? test : train).push_back(canon[c]);
        std::vector<double> ytrain;
        ytrain.reserve(train.size());
        for (auto i : train) ytrain.push_back(ds.records[i].y);
        KnnRegressor knn(detail::rows_of(ds, covariates, train), std::move(ytrain), opt.k);
        std::vector<double> q(covariates.size());
        for (auto i : test) {
            for (std::size_t j = 0; j < covariates.size(); ++j) q[j] = ds.records[i].at(covariates[j]);
            const double e = knn.predict(q) - ds.records[i].y;
            sse += e * e;
        }
    }
    return std::sqrt(sse / static_cast<double>(ds.n())) / opt.rated_power * 100.0;
}

struct SelectionResult {
    /// Importance ranking over all candidates. The first best_subset.size()
    /// entries form the selected subset.
    std::vector<Covariate> ordered_covariates;
    std::vector<Covariate> best_subset;
    /// rmse_path[m] is the CV RMSE (% rated) of the first m+1 ordered covariates.
    std::vector<double> rmse_path;
    std::size_t k_neighbors = 0;
    std::size_t folds = 0;
};

/// Greedy forward stepwise selection. The full path is traced so the ranking
/// covers every candidate; the best subset stops at the first addition that
/// fails to strictly lower the RMSE.
inline SelectionResult forward_select(const Dataset& ds, const std::vector<Covariate>& candidates,
                                      const CvOptions& opt)
{
    if (candidates.empty()) throw Error("forward selection needs at least one candidate");
    SelectionResult res;
    res.k_neighbors = opt.k;
    res.folds = opt.folds;
    std::vector<Covariate> remaining = candidates;
    std::vector<Covariate> chosen;
    bool stopped = false;
    while (!remaining.empty()) {
        std::size_t best_j = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < remaining.size(); ++j) {
            auto trial = chosen;
            trial.push_back(remaining[j]);
            const double e = cv_rmse(ds, trial, opt);
            if (e < best) {
                best = e;
                best_j = j;
            }
        }
        if (!stopped && !res.rmse_path.empty() && !(best < res.rmse_path.back())) stopped = true;
        chosen.push_back(remaining[best_j]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_j));
        res.rmse_path.push_back(best);
        if (!stopped) res.best_subset = chosen;
    }
    res.ordered_covariates = chosen;
    return res;
}

/// Greedy backward elimination down to a single covariate. The ranking is the
/// reverse removal order; the best subset is the set at which no removal
/// strictly lowers the RMSE.
inline SelectionResult backward_select(const Dataset& ds, const std::vector<Covariate>& candidates,
                                       const CvOptions& opt)
{
    if (candidates.empty()) throw Error("backward selection needs at least one candidate");
    SelectionResult res;
    res.k_neighbors = opt.k;
    res.folds = opt.folds;
    std::vector<Covariate> current = candidates;
    double current_rmse = cv_rmse(ds, current, opt);
    std::vector<std::pair<std::vector<Covariate>, double>> path{{current, current_rmse}};
    std::vector<Covariate> removed;
    bool stopped = false;
    std::vector<Covariate> best = current;
    while (current.size() > 1) {
        std::size_t best_j = 0;
        double best_e = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < current.size(); ++j) {
            auto trial = current;
            trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(j));
            const double e = cv_rmse(ds, trial, opt);
            if (e < best_e) {
                best_e = e;
                best_j = j;
            }
        }
        if (!stopped && !(best_e < current_rmse)) stopped = true;
        removed.push_back(current[best_j]);
        current.erase(current.begin() + static_cast<std::ptrdiff_t>(best_j));
        current_rmse = best_e;
        path.emplace_back(current, best_e);
        if (!stopped) best = current;
    }
    res.ordered_covariates = current;
    for (auto it = removed.rbegin(); it != removed.rend(); ++it) res.ordered_covariates.push_back(*it);
    for (auto it = path.rbegin(); it != path.rend(); ++it) res.rmse_path.push_back(it->second);
    res.best_subset.assign(res.ordered_covariates.begin(),
                           res.ordered_covariates.begin() + static_cast<std::ptrdiff_t>(best.size()));
    return res;
}

enum class FarmSubsetStrategy { Representative, Union };

/// Farm-wide subset. Representative pools the given turbines' data and runs
/// one forward selection; Union takes the union of per-turbine best subsets,
/// ranked by mean position in the per-turbine orderings.
inline SelectionResult select_farm_subset(const std::vector<Dataset>& turbines,
                                          const std::vector<Covariate>& candidates,
                                          const CvOptions& opt,
                                          FarmSubsetStrategy strategy = FarmSubsetStrategy::Representative)
{
    if (turbines.empty()) throw Error("farm subset selection needs at least one turbine");
    if (strategy == FarmSubsetStrategy::Representative) {
        Dataset pooled = turbines.front().empty_like();
        for (const auto& t : turbines)
            pooled.records.insert(pooled.records.end(), t.records.begin(), t.records.end());
        return forward_select(pooled, candidates, opt);
    }
    std::vector<SelectionResult> per;
    for (const auto& t : turbines) per.push_back(forward_select(t, candidates, opt));
    std::vector<std::pair<double, std::size_t>> score;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        bool in_union = false;
        double pos = 0.0;
        for (const auto& r : per) {
            in_union |= std::find(r.best_subset.begin(), r.best_subset.end(), candidates[c]) !=
                        r.best_subset.end();
            pos += static_cast<double>(
                std::find(r.ordered_covariates.begin(), r.ordered_covariates.end(), candidates[c]) -
                r.ordered_covariates.begin());
        }
        score.emplace_back(pos / static_cast<double>(per.size()) + (in_union ? 0.0 : 1e6), c);
    }
    std::stable_sort(score.begin(), score.end());
    SelectionResult res;
    res.k_neighbors = opt.k;
    res.folds = opt.folds;
    Dataset pooled = turbines.front().empty_like();
    for (const auto& t : turbines)
        pooled.records.insert(pooled.records.end(), t.records.begin(), t.records.end());
    for (auto [s, c] : score) {
        res.ordered_covariates.push_back(candidates[c]);
        if (s < 1e6) res.best_subset.push_back(candidates[c]);
        res.rmse_path.push_back(cv_rmse(pooled, res.ordered_covariates, opt));
    }
    return res;
}

} // namespace wtperf
