#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>

namespace wtperf {

struct LbfgsOptions {
    int max_iterations = 60;
    int history = 6;
    double gradient_tolerance = 1e-5; ///< on the projected gradient, inf-norm
    double relative_tolerance = 1e-9; ///< on successive objective values
};

struct LbfgsResult {
    Eigen::VectorXd x;
    double value = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

/// Objective: returns f(x) and writes the gradient. Non-finite values are
/// treated as infeasible by the line search.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Box-constrained L-BFGS with projection onto the bounds and an Armijo
/// backtracking search along the projected path. Coordinates held at a
/// bound by the gradient are frozen for the step.
inline LbfgsResult minimize_lbfgs(const Objective& f, Eigen::VectorXd x, const Eigen::VectorXd& lower,
                                  const Eigen::VectorXd& upper, const LbfgsOptions& opt = {})
{
    const auto n = x.size();
    auto project = [&](Eigen::VectorXd v) {
        return v.cwiseMax(lower).cwiseMin(upper).eval();
    };
    x = project(x);
    Eigen::VectorXd g(n);
    double fx = f(x, g);
    LbfgsResult res;
    if (!std::isfinite(fx)) {
        res.x = x;
        return res;
    }
    std::deque<Eigen::VectorXd> s_hist, y_hist;

    auto free_mask = [&](const Eigen::VectorXd& xv, const Eigen::VectorXd& gv) {
        Eigen::VectorXd m = Eigen::VectorXd::Ones(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            if ((xv[i] <= lower[i] && gv[i] > 0) || (xv[i] >= upper[i] && gv[i] < 0)) m[i] = 0.0;
        }
        return m;
    };

    for (int it = 0; it < opt.max_iterations; ++it) {
        res.iterations = it + 1;
        const Eigen::VectorXd mask = free_mask(x, g);
        const Eigen::VectorXd pg = g.cwiseProduct(mask);
        if (pg.lpNorm<Eigen::Infinity>() < opt.gradient_tolerance) {
            res.converged = true;
            break;
        }
        // two-loop recursion restricted to free coordinates
        Eigen::VectorXd q = pg;
        std::vector<double> alpha(s_hist.size());
        for (int k = static_cast<int>(s_hist.size()) - 1; k >= 0; --k) {
            const auto s = s_hist[k].cwiseProduct(mask);
            const auto yv = y_hist[k].cwiseProduct(mask);
            const double sy = s.dot(yv);
            if (sy <= 1e-12) { alpha[k] = 0.0; continue; }
            alpha[k] = s.dot(q) / sy;
            q -= alpha[k] * yv;
        }
        double gamma = 1.0;
        if (!s_hist.empty()) {
            const auto s = s_hist.back().cwiseProduct(mask);
            const auto yv = y_hist.back().cwiseProduct(mask);
            const double yy = yv.squaredNorm();
            if (yy > 0 && s.dot(yv) > 0) gamma = s.dot(yv) / yy;
        }
        q *= gamma;
        for (std::size_t k = 0; k < s_hist.size(); ++k) {
            const auto s = s_hist[k].cwiseProduct(mask);
            const auto yv = y_hist[k].cwiseProduct(mask);
            const double sy = s.dot(yv);
            if (sy <= 1e-12) continue;
            const double beta = yv.dot(q) / sy;
            q += (alpha[k] - beta) * s;
        }
        Eigen::VectorXd dir = -q.cwiseProduct(mask);
        if (dir.dot(pg) >= 0) {
            dir = -pg; // not a descent direction; reset
            s_hist.clear();
            y_hist.clear();
        }
        // keep the first trial step bounded in log-parameter units
        const double dn = dir.lpNorm<Eigen::Infinity>();
        double step = dn > 2.0 ? 2.0 / dn : 1.0;

        Eigen::VectorXd xn, gn(n);
        double fn = std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls) {
            xn = project(x + step * dir);
            fn = f(xn, gn);
            if (std::isfinite(fn) && fn <= fx + 1e-4 * g.dot(xn - x)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        const Eigen::VectorXd s = xn - x;
        const Eigen::VectorXd yv = gn - g;
        if (s.dot(yv) > 1e-12) {
            s_hist.push_back(s);
            y_hist.push_back(yv);
            if (static_cast<int>(s_hist.size()) > opt.history) {
                s_hist.pop_front();
                y_hist.pop_front();
            }
        }
        const double prev = fx;
        x = xn;
        g = gn;
        fx = fn;
        if (std::fabs(prev - fx) <= opt.relative_tolerance * std::max(1.0, std::fabs(fx))) {
            res.converged = true;
            break;
        }
    }
    res.x = x;
    res.value = fx;
    return res;
}

} // namespace wtperf
