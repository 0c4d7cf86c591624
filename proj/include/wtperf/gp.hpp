#pragma once

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "wtperf/dataset.hpp"
#include "wtperf/error.hpp"
#include "wtperf/lbfgs.hpp"
#include "wtperf/random.hpp"
#include "wtperf/stats.hpp"

namespace wtperf {

/// Squared-exponential kernel with one lengthscale per input dimension:
/// k(a, b) = s^2 exp(-1/2 sum_j ((a_j - b_j) / l_j)^2).
struct Kernel {
    std::vector<double> lengthscales;
    double signal_variance = 1.0; ///< kW^2

    std::size_t dim() const { return lengthscales.size(); }

    void validate() const
    {
        if (lengthscales.empty()) throw Error("kernel needs at least one lengthscale");
        for (double l : lengthscales)
            if (!(l > 0.0) || !std::isfinite(l)) throw Error("kernel lengthscales must be positive");
        if (!(signal_variance > 0.0) || !std::isfinite(signal_variance))
            throw Error("kernel signal variance must be positive");
    }

    template <typename A, typename B>
    double operator()(const A& a, const B& b) const
    {
        double z = 0.0;
        for (std::size_t j = 0; j < lengthscales.size(); ++j) {
            const double d = (a[j] - b[j]) / lengthscales[j];
            z += d * d;
        }
        return signal_variance * std::exp(-0.5 * z);
    }

    bool operator==(const Kernel&) const = default;
};

struct Hyperparameters {
    Kernel kernel;
    double noise_variance = 1.0; ///< kW^2

    void validate() const
    {
        kernel.validate();
        if (!(noise_variance > 0.0) || !std::isfinite(noise_variance))
            throw Error("noise variance must be positive");
    }

    /// [log l_1..log l_p, log s^2, log noise]
    Eigen::VectorXd to_log() const
    {
        const auto p = static_cast<Eigen::Index>(kernel.dim());
        Eigen::VectorXd v(p + 2);
        for (Eigen::Index j = 0; j < p; ++j) v[j] = std::log(kernel.lengthscales[static_cast<std::size_t>(j)]);
        v[p] = std::log(kernel.signal_variance);
        v[p + 1] = std::log(noise_variance);
        return v;
    }

    static Hyperparameters from_log(const Eigen::VectorXd& v)
    {
        Hyperparameters h;
        const auto p = v.size() - 2;
        for (Eigen::Index j = 0; j < p; ++j) h.kernel.lengthscales.push_back(std::exp(v[j]));
        h.kernel.signal_variance = std::exp(v[p]);
        h.noise_variance = std::exp(v[p + 1]);
        return h;
    }

    bool operator==(const Hyperparameters&) const = default;
};

inline Eigen::MatrixXd design_matrix(const Dataset& ds, const std::vector<Covariate>& covs)
{
    ds.require(covs);
    Eigen::MatrixXd X(static_cast<Eigen::Index>(ds.n()), static_cast<Eigen::Index>(covs.size()));
    for (std::size_t i = 0; i < ds.n(); ++i)
        for (std::size_t j = 0; j < covs.size(); ++j)
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = ds.records[i].at(covs[j]);
    return X;
}

inline Eigen::VectorXd response_vector(const Dataset& ds)
{
    Eigen::VectorXd y(static_cast<Eigen::Index>(ds.n()));
    for (std::size_t i = 0; i < ds.n(); ++i) y[static_cast<Eigen::Index>(i)] = ds.records[i].y;
    return y;
}

/// K(A, B) with entry (i, j) = k(a_i, b_j).
inline Eigen::MatrixXd kernel_matrix(const Kernel& k, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B)
{
    Eigen::MatrixXd K(A.rows(), B.rows());
    for (Eigen::Index j = 0; j < B.rows(); ++j)
        for (Eigen::Index i = 0; i < A.rows(); ++i) K(i, j) = k(A.row(i), B.row(j));
    return K;
}

/// K(X, X), filled on one triangle and mirrored so it is exactly symmetric.
inline Eigen::MatrixXd kernel_matrix(const Kernel& k, const Eigen::MatrixXd& X)
{
    const auto n = X.rows();
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        K(j, j) = k.signal_variance;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double v = k(X.row(i), X.row(j));
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return K;
}

struct JitterPolicy {
    double initial = 1e-8; ///< relative to signal variance
    double growth = 10.0;
    double maximum = 1e-2;
};

/// Cholesky of K + noise*I; escalates diagonal jitter on failure.
/// Returns the jitter actually added (0 when none was needed).
inline double factorize(Eigen::MatrixXd A, double signal_variance, Eigen::LLT<Eigen::MatrixXd>& llt,
                        const JitterPolicy& policy = {})
{
    llt.compute(A);
    if (llt.info() == Eigen::Success) return 0.0;
    for (double rel = policy.initial; rel <= policy.maximum * (1 + 1e-12); rel *= policy.growth) {
        const double jitter = rel * signal_variance;
        Eigen::MatrixXd B = A;
        B.diagonal().array() += jitter;
        llt.compute(B);
        if (llt.info() == Eigen::Success) return jitter;
    }
    throw Error("covariance factorization failed after maximum jitter (" +
                std::to_string(policy.maximum) + " x signal variance)");
}

struct LogLikelihood {
    double value = -std::numeric_limits<double>::infinity();
    /// d value / d [log l_1..log l_p, log s^2, log noise]
    Eigen::VectorXd gradient;
    double jitter = 0.0;
};

/// Log marginal likelihood of a zero-mean GP at `y` (already centred).
inline LogLikelihood log_marginal_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                             const Hyperparameters& h, bool with_gradient = true)
{
    h.validate();
    if (static_cast<std::size_t>(X.cols()) != h.kernel.dim()) throw Error("input dimension mismatch");
    const auto n = X.rows();
    const Eigen::MatrixXd Kf = kernel_matrix(h.kernel, X);
    Eigen::MatrixXd A = Kf;
    A.diagonal().array() += h.noise_variance;
    Eigen::LLT<Eigen::MatrixXd> llt;
    LogLikelihood out;
    out.jitter = factorize(A, h.kernel.signal_variance, llt);
    const Eigen::VectorXd alpha = llt.solve(y);
    const Eigen::MatrixXd L = llt.matrixL();
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) logdet += std::log(L(i, i));
    out.value = -0.5 * y.dot(alpha) - logdet - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    if (!with_gradient) return out;

    const auto p = static_cast<Eigen::Index>(h.kernel.dim());
    out.gradient.setZero(p + 2);
    Eigen::MatrixXd W = llt.solve(Eigen::MatrixXd::Identity(n, n));
    W = alpha * alpha.transpose() - W; // alpha alpha^T - A^{-1}
    for (Eigen::Index j = 0; j < p; ++j) {
        const double l2 = h.kernel.lengthscales[static_cast<std::size_t>(j)] *
                          h.kernel.lengthscales[static_cast<std::size_t>(j)];
        double acc = 0.0;
        for (Eigen::Index c = 0; c < n; ++c)
            for (Eigen::Index r = c + 1; r < n; ++r) {
                const double d = X(r, j) - X(c, j);
                acc += W(r, c) * Kf(r, c) * d * d / l2;
            }
        out.gradient[j] = acc; // 0.5 * 2 for the mirrored triangle
    }
    out.gradient[p] = 0.5 * (W.array() * Kf.array()).sum();
    out.gradient[p + 1] = 0.5 * h.noise_variance * W.trace();
    return out;
}

namespace detail {

/// Deterministic stratified thinning: rows are ordered by a coarse lattice
/// cell over the columns of X, then taken at evenly spaced positions, which
/// allocates the sample proportionally to cell occupancy.
inline std::vector<std::size_t> stratified_subsample(const Eigen::MatrixXd& X, std::size_t cap,
                                                     int bins_per_axis = 10)
{
    const auto n = static_cast<std::size_t>(X.rows());
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    if (n <= cap) return idx;
    std::vector<std::uint64_t> cell(n, 0);
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double lo = X.col(j).minCoeff(), hi = X.col(j).maxCoeff();
        const double w = hi > lo ? (hi - lo) / bins_per_axis : 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            auto b = static_cast<std::uint64_t>(std::floor((X(static_cast<Eigen::Index>(i), j) - lo) / w));
            b = std::min<std::uint64_t>(b, static_cast<std::uint64_t>(bins_per_axis - 1));
            cell[i] = cell[i] * static_cast<std::uint64_t>(bins_per_axis) + b;
        }
    }
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return cell[a] < cell[b]; });
    std::vector<std::size_t> out;
    out.reserve(cap);
    for (std::size_t k = 0; k < cap; ++k) out.push_back(idx[(k * n) / cap]);
    std::sort(out.begin(), out.end());
    return out;
}

inline Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<std::size_t>& rows)
{
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

inline Eigen::VectorXd take_rows(const Eigen::VectorXd& y, const std::vector<std::size_t>& rows)
{
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(rows[i])];
    return out;
}

} // namespace detail

struct HyperFitOptions {
    std::uint64_t seed = 17;
    int starts = 3;
    int max_iterations = 60;
    std::size_t max_points = 300; ///< pooled rows used by the likelihood
};

struct HyperFitResult {
    Hyperparameters hyper;
    double log_likelihood = 0.0;
    int successful_starts = 0;
    Eigen::VectorXd lower_log, upper_log; ///< search box
};

/// Maximum-likelihood hyperparameters on arbitrary inputs. Search runs in log
/// space inside a box scaled to the data; start 0 is a data-driven guess and
/// the rest are seeded perturbations of it.
inline HyperFitResult fit_hyperparameters(const Eigen::MatrixXd& X, const Eigen::VectorXd& y_raw,
                                          const HyperFitOptions& opt = {})
{
    if (X.rows() == 0) throw Error("hyperparameter fit: no data");
    const auto p = X.cols();
    const Eigen::VectorXd y = (y_raw.array() - y_raw.mean()).matrix();
    double var_y = y.squaredNorm() / std::max<double>(1.0, static_cast<double>(y.size() - 1));
    const double scale_y = var_y > 0.0 ? var_y : 1.0;

    HyperFitResult out;
    out.lower_log.resize(p + 2);
    out.upper_log.resize(p + 2);
    Eigen::VectorXd guess(p + 2);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double m = X.col(j).mean();
        const double sd = std::sqrt((X.col(j).array() - m).square().sum() / std::max<double>(1.0, static_cast<double>(X.rows() - 1)));
        const double s = sd > 0.0 ? sd : 1.0;
        out.lower_log[j] = std::log(1e-2 * s);
        out.upper_log[j] = std::log(1e2 * s);
        guess[j] = std::log(s);
    }
    out.lower_log[p] = std::log(1e-4 * scale_y);
    out.upper_log[p] = std::log(1e2 * scale_y);
    guess[p] = std::log(scale_y);
    out.lower_log[p + 1] = std::log(1e-6 * scale_y);
    out.upper_log[p + 1] = std::log(1e1 * scale_y);
    guess[p + 1] = std::log(1e-2 * scale_y);

    Rng rng(opt.seed);
    double best = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < std::max(1, opt.starts); ++s) {
        Eigen::VectorXd x0 = guess;
        if (s > 0) {
            for (Eigen::Index j = 0; j < p; ++j) x0[j] += rng.uniform(-1.5, 1.5);
            x0[p] += rng.uniform(-1.0, 1.0);
            x0[p + 1] += rng.uniform(-4.0, 1.5);
        }
        Objective f = [&](const Eigen::VectorXd& v, Eigen::VectorXd& g) {
            try {
                auto ll = log_marginal_likelihood(X, y, Hyperparameters::from_log(v));
                if (!std::isfinite(ll.value)) return std::numeric_limits<double>::infinity();
                g = -ll.gradient;
                return -ll.value;
            } catch (const Error&) {
                return std::numeric_limits<double>::infinity();
            }
        };
        LbfgsOptions lo;
        lo.max_iterations = opt.max_iterations;
        auto r = minimize_lbfgs(f, x0, out.lower_log, out.upper_log, lo);
        if (!std::isfinite(r.value)) continue;
        ++out.successful_starts;
        if (-r.value > best) {
            best = -r.value;
            out.hyper = Hyperparameters::from_log(r.x);
        }
    }
    if (out.successful_starts == 0)
        throw Error("hyperparameter fit: non-finite likelihood on every start (degenerate data?)");
    out.log_likelihood = best;
    return out;
}

/// Shared hyperparameters from the pooled matched datasets.
inline HyperFitResult fit_hyperparameters(const Dataset& d1, const Dataset& d2,
                                          const std::vector<Covariate>& covs,
                                          const HyperFitOptions& opt = {})
{
    if (d1.empty() && d2.empty()) throw Error("hyperparameter fit: matched datasets are empty");
    d1.require(covs);
    d2.require(covs);
    // pooled rows in a canonical order so swapping d1 and d2 changes nothing
    std::vector<const ScadaRecord*> pooled;
    for (const auto* ds : {&d1, &d2})
        for (const auto& r : ds->records) pooled.push_back(&r);
    std::stable_sort(pooled.begin(), pooled.end(), [&](const ScadaRecord* a, const ScadaRecord* b) {
        if (a->timestamp != b->timestamp) return a->timestamp < b->timestamp;
        if (a->turbine_id != b->turbine_id) return a->turbine_id < b->turbine_id;
        if (a->y != b->y) return a->y < b->y;
        for (auto c : covs)
            if (a->at(c) != b->at(c)) return a->at(c) < b->at(c);
        return false;
    });
    Eigen::MatrixXd X(static_cast<Eigen::Index>(pooled.size()), static_cast<Eigen::Index>(covs.size()));
    Eigen::VectorXd y(X.rows());
    for (std::size_t i = 0; i < pooled.size(); ++i) {
        for (std::size_t j = 0; j < covs.size(); ++j)
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = pooled[i]->at(covs[j]);
        y[static_cast<Eigen::Index>(i)] = pooled[i]->y;
    }
    const auto rows = detail::stratified_subsample(X, opt.max_points);
    return fit_hyperparameters(detail::take_rows(X, rows), detail::take_rows(y, rows), opt);
}

/// Fitted GP power curve. Immutable once built.
class GpModel {
public:
    GpModel(Eigen::MatrixXd X, const Eigen::VectorXd& y, double offset, Hyperparameters h,
            std::vector<Covariate> covariates, const JitterPolicy& jitter = {})
        : X_(std::move(X)), offset_(offset), hyper_(std::move(h)), covariates_(std::move(covariates))
    {
        hyper_.validate();
        if (X_.rows() == 0) throw Error("GP fit: no training data");
        if (static_cast<std::size_t>(X_.cols()) != hyper_.kernel.dim()) throw Error("GP fit: dimension mismatch");
        y_ = (y.array() - offset_).matrix();
        Eigen::MatrixXd A = kernel_matrix(hyper_.kernel, X_);
        A.diagonal().array() += hyper_.noise_variance;
        jitter_ = factorize(std::move(A), hyper_.kernel.signal_variance, llt_, jitter);
        alpha_ = llt_.solve(y_);
    }

    const Hyperparameters& hyper() const { return hyper_; }
    const std::vector<Covariate>& covariates() const { return covariates_; }
    const Eigen::MatrixXd& inputs() const { return X_; }
    const Eigen::VectorXd& centred_outputs() const { return y_; }
    const Eigen::VectorXd& alpha() const { return alpha_; }
    const Eigen::LLT<Eigen::MatrixXd>& factor() const { return llt_; }
    double offset() const { return offset_; }
    double jitter() const { return jitter_; }
    std::size_t n() const { return static_cast<std::size_t>(X_.rows()); }

    struct Prediction {
        Eigen::VectorXd mean;
        Eigen::VectorXd variance; ///< posterior variance of f, clamped at 0
    };

    Prediction predict(const Eigen::MatrixXd& points, Eigen::Index chunk = 512) const
    {
        if (points.cols() != X_.cols()) throw Error("GP predict: dimension mismatch");
        Prediction out;
        out.mean.resize(points.rows());
        out.variance.resize(points.rows());
        for (Eigen::Index start = 0; start < points.rows(); start += chunk) {
            const auto m = std::min(chunk, points.rows() - start);
            const Eigen::MatrixXd Ks = kernel_matrix(hyper_.kernel, X_, points.middleRows(start, m));
            out.mean.segment(start, m) = (Ks.transpose() * alpha_).array() + offset_;
            const Eigen::MatrixXd V = llt_.matrixL().solve(Ks);
            out.variance.segment(start, m) =
                (hyper_.kernel.signal_variance - V.colwise().squaredNorm().array()).max(0.0).matrix().transpose();
        }
        return out;
    }

private:
    Eigen::MatrixXd X_;
    Eigen::VectorXd y_;
    double offset_ = 0.0;
    Hyperparameters hyper_;
    std::vector<Covariate> covariates_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd alpha_;
    double jitter_ = 0.0;
};

struct GpFitOptions {
    std::size_t max_points = 2500; ///< larger datasets are thinned
    JitterPolicy jitter{};
};

/// Fits on `ds`, centring the outputs on `offset` (the dataset mean when
/// omitted).
inline GpModel fit_gp(const Dataset& ds, const std::vector<Covariate>& covs, const Hyperparameters& h,
                      std::optional<double> offset = std::nullopt, const GpFitOptions& opt = {})
{
    if (ds.empty()) throw Error("GP fit: dataset is empty");
    Eigen::MatrixXd X = design_matrix(ds, covs);
    Eigen::VectorXd y = response_vector(ds);
    const double off = offset ? *offset : y.mean();
    if (ds.n() > opt.max_points) {
        const auto rows = detail::stratified_subsample(X, opt.max_points);
        X = detail::take_rows(X, rows);
        y = detail::take_rows(y, rows);
    }
    return GpModel(std::move(X), y, off, h, covs, opt.jitter);
}

// ---------------------------------------------------------------------------

struct GridAxis {
    Covariate covariate{};
    double min = 0.0, max = 0.0, step = 0.0;
    std::size_t count = 0;

    double value(std::size_t i) const { return i + 1 == count ? max : min + step * static_cast<double>(i); }
};

/// Regular lattice; point index enumerates the last axis fastest.
struct TestGrid {
    std::vector<GridAxis> axes;
    Eigen::MatrixXd points;

    std::size_t size() const { return static_cast<std::size_t>(points.rows()); }

    std::vector<Covariate> covariates() const
    {
        std::vector<Covariate> c;
        for (const auto& a : axes) c.push_back(a.covariate);
        return c;
    }

    /// Per-axis lattice coordinates of a point.
    std::vector<std::size_t> coordinates(std::size_t index) const
    {
        std::vector<std::size_t> out(axes.size());
        for (std::size_t a = axes.size(); a-- > 0;) {
            out[a] = index % axes[a].count;
            index /= axes[a].count;
        }
        return out;
    }

    std::size_t index_of(const std::vector<std::size_t>& coords) const
    {
        std::size_t idx = 0;
        for (std::size_t a = 0; a < axes.size(); ++a) idx = idx * axes[a].count + coords[a];
        return idx;
    }
};

inline TestGrid make_grid(std::vector<GridAxis> axes)
{
    TestGrid g;
    std::size_t total = 1;
    for (auto& a : axes) {
        if (a.count < 2) throw Error("grid axis needs at least 2 points");
        if (!(a.max > a.min)) throw Error("zero-width grid axis for " + std::string(name(a.covariate)));
        a.step = (a.max - a.min) / static_cast<double>(a.count - 1);
        total *= a.count;
    }
    g.axes = std::move(axes);
    g.points.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(g.axes.size()));
    for (std::size_t i = 0; i < total; ++i) {
        auto c = g.coordinates(i);
        for (std::size_t a = 0; a < g.axes.size(); ++a)
            g.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) = g.axes[a].value(c[a]);
    }
    return g;
}

/// Lattice over the intersection of the two datasets' covariate ranges.
inline TestGrid build_test_grid(const Dataset& d1, const Dataset& d2, const std::vector<Covariate>& covs,
                                const std::vector<std::size_t>& resolution)
{
    if (d1.empty() || d2.empty()) throw Error("test grid: matched datasets must be non-empty");
    if (resolution.size() != covs.size()) throw Error("test grid: one resolution per covariate required");
    std::vector<GridAxis> axes;
    for (std::size_t a = 0; a < covs.size(); ++a) {
        auto c1 = d1.column(covs[a]), c2 = d2.column(covs[a]);
        const double lo = std::max(*std::min_element(c1.begin(), c1.end()), *std::min_element(c2.begin(), c2.end()));
        const double hi = std::min(*std::max_element(c1.begin(), c1.end()), *std::max_element(c2.begin(), c2.end()));
        if (!(hi > lo))
            throw Error("test grid: empty or zero-width support intersection for " + std::string(name(covs[a])));
        axes.push_back(GridAxis{covs[a], lo, hi, 0.0, resolution[a]});
    }
    return make_grid(std::move(axes));
}

inline TestGrid build_test_grid(const Dataset& d1, const Dataset& d2, const std::vector<Covariate>& covs,
                                std::size_t resolution = 50)
{
    return build_test_grid(d1, d2, covs, std::vector<std::size_t>(covs.size(), resolution));
}

struct DifferenceCurve {
    TestGrid grid;
    Eigen::VectorXd f1, f2, diff; ///< diff = f2 - f1
    Eigen::VectorXd var1, var2;
    Eigen::VectorXd lower, upper; ///< band around zero for diff
    double alpha = 0.05;

    std::size_t size() const { return static_cast<std::size_t>(diff.size()); }
};

inline double normal_quantile(double p)
{
    return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), p);
}

/// Pointwise band under the equal-functions null:
/// +/- z_{1-alpha/2} sqrt(var1 + var2).
inline DifferenceCurve difference_band(const GpModel& m1, const GpModel& m2, const TestGrid& grid,
                                       double alpha = 0.05)
{
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must lie in (0, 1)");
    if (m1.covariates() != m2.covariates() || m1.covariates() != grid.covariates())
        throw Error("difference band: models and grid must share covariates");
    if (!(m1.hyper() == m2.hyper())) throw Error("difference band: models must share hyperparameters");
    DifferenceCurve c;
    c.grid = grid;
    c.alpha = alpha;
    auto p1 = m1.predict(grid.points);
    auto p2 = m2.predict(grid.points);
    c.f1 = std::move(p1.mean);
    c.f2 = std::move(p2.mean);
    c.var1 = std::move(p1.variance);
    c.var2 = std::move(p2.variance);
    c.diff = c.f2 - c.f1;
    const double z = normal_quantile(1.0 - alpha / 2.0);
    c.upper = z * (c.var1 + c.var2).array().sqrt().matrix();
    c.lower = -c.upper;
    return c;
}

struct AxisRange {
    Covariate covariate{};
    double min = 0.0, max = 0.0;
};

struct TestOutcome {
    bool reject = false;
    std::vector<std::size_t> rejection_region; ///< grid indices outside the band
    std::vector<AxisRange> region_extent;      ///< covariate-unit bounds of the region
};

inline TestOutcome hypothesis_test(const DifferenceCurve& c)
{
    TestOutcome t;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        if (c.diff[k] > c.upper[k] || c.diff[k] < c.lower[k]) t.rejection_region.push_back(i);
    }
    t.reject = !t.rejection_region.empty();
    if (t.reject && c.grid.points.cols() > 0) {
        for (std::size_t a = 0; a < c.grid.axes.size(); ++a) {
            AxisRange r{c.grid.axes[a].covariate, std::numeric_limits<double>::infinity(),
                        -std::numeric_limits<double>::infinity()};
            for (auto i : t.rejection_region) {
                const double v = c.grid.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a));
                r.min = std::min(r.min, v);
                r.max = std::max(r.max, v);
            }
            t.region_extent.push_back(r);
        }
    }
    return t;
}

struct FunctionalComparisonOptions {
    std::size_t grid_resolution = 50;
    double alpha = 0.05;
    HyperFitOptions hyper{};
    GpFitOptions gp{};
};

struct FunctionalComparison {
    HyperFitResult hyper;
    DifferenceCurve curve;
    TestOutcome outcome;
    std::size_t n_fit_1 = 0, n_fit_2 = 0;
};

/// Shared-hyperparameter fit, both GPs centred on the pooled mean, grid,
/// band and test.
inline FunctionalComparison compare_functions(const Dataset& d1, const Dataset& d2,
                                              const std::vector<Covariate>& covs,
                                              const FunctionalComparisonOptions& opt = {})
{
    if (d1.empty() || d2.empty()) throw Error("functional comparison: empty matched dataset");
    FunctionalComparison out;
    out.hyper = fit_hyperparameters(d1, d2, covs, opt.hyper);
    const auto y1 = d1.power(), y2 = d2.power();
    const double pooled = (std::accumulate(y1.begin(), y1.end(), 0.0) + std::accumulate(y2.begin(), y2.end(), 0.0)) /
                          static_cast<double>(y1.size() + y2.size());
    auto m1 = fit_gp(d1, covs, out.hyper.hyper, pooled, opt.gp);
    auto m2 = fit_gp(d2, covs, out.hyper.hyper, pooled, opt.gp);
    out.n_fit_1 = m1.n();
    out.n_fit_2 = m2.n();
    auto grid = build_test_grid(d1, d2, covs, opt.grid_resolution);
    out.curve = difference_band(m1, m2, grid, opt.alpha);
    out.outcome = hypothesis_test(out.curve);
    return out;
}

} // namespace wtperf
