#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <initializer_list>
#include <string>
#include <vector>

#include "wtperf/dataset.hpp"
#include "wtperf/random.hpp"

namespace wtperf::fixtures {

inline Timestamp at_minute(long long m)
{
    return Timestamp{std::chrono::seconds(1'500'000'000LL + 600LL * m)};
}

/// Dataset from column vectors; records are spaced 10 minutes apart.
inline Dataset make_dataset(const std::string& id, const std::vector<Covariate>& covs,
                            const std::vector<std::vector<double>>& cols, const std::vector<double>& y,
                            long long first_minute = 0)
{
    Dataset d;
    d.turbine_id = id;
    d.available = covs;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ScadaRecord r;
        r.turbine_id = id;
        r.timestamp = at_minute(first_minute + static_cast<long long>(i));
        for (std::size_t c = 0; c < covs.size(); ++c) r.at(covs[c]) = cols[c][i];
        r.y = y[i];
        d.records.push_back(r);
    }
    return d;
}

/// Gaussian W/T cloud with a smooth power response.
inline Dataset gaussian_cloud(const std::string& id, std::size_t n, std::uint64_t seed, double w_mean = 9.0,
                              double w_sd = 2.0, long long first_minute = 0)
{
    Rng rng(seed);
    std::vector<double> w(n), t(n), ti(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = rng.normal(w_mean, w_sd);
        t[i] = rng.normal(10.0, 5.0);
        ti[i] = 0.1 + 0.02 * rng.uniform();
        y[i] = 20.0 * w[i] * w[i] + 3.0 * t[i] + rng.normal(0.0, 10.0);
    }
    return make_dataset(id, {Covariate::W, Covariate::T, Covariate::TI}, {w, t, ti}, y, first_minute);
}

} // namespace wtperf::fixtures

namespace wtperf::fixtures {

/// y = g(W) + h(T) + noise with D and TI carrying no signal. g dominates.
inline Dataset additive_family(std::size_t n, std::uint64_t seed, double noise_sd = 15.0)
{
    Rng rng(seed);
    std::vector<double> w(n), t(n), d(n), ti(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = std::min(rng.weibull(2.0, 8.0), 24.0);
        t[i] = rng.normal(10.0, 8.0);
        d[i] = rng.uniform(0.0, 360.0);
        ti[i] = rng.uniform(0.05, 0.2);
        const double g = 1500.0 / (1.0 + std::exp(-(w[i] - 8.0)));
        const double h = -8.0 * (t[i] - 10.0);
        y[i] = g + h + rng.normal(0.0, noise_sd);
    }
    return make_dataset("S", {Covariate::W, Covariate::T, Covariate::D, Covariate::TI}, {w, t, d, ti}, y);
}

} // namespace wtperf::fixtures
