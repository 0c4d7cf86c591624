#pragma once

#include <array>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wtperf/error.hpp"

namespace wtperf {

/// Environmental inputs of a power curve. Rho and Shear only appear in
/// upgrade-style datasets that carry them.
enum class Covariate { W, T, D, TI, sdD, Rho, Shear };

inline constexpr std::array<Covariate, 7> kAllCovariates{
    Covariate::W, Covariate::T, Covariate::D, Covariate::TI,
    Covariate::sdD, Covariate::Rho, Covariate::Shear};

inline constexpr std::string_view name(Covariate c)
{
    switch (c) {
    case Covariate::W: return "W";
    case Covariate::T: return "T";
    case Covariate::D: return "D";
    case Covariate::TI: return "TI";
    case Covariate::sdD: return "sdD";
    case Covariate::Rho: return "rho";
    case Covariate::Shear: return "S";
    }
    return "?";
}

inline std::optional<Covariate> covariate_from_name(std::string_view s)
{
    for (auto c : kAllCovariates)
        if (name(c) == s) return c;
    return std::nullopt;
}

/// Direction wraps at 360 degrees.
inline constexpr bool is_circular(Covariate c) { return c == Covariate::D; }

inline Covariate parse_covariate(std::string_view s)
{
    auto c = covariate_from_name(s);
    if (!c) throw Error("unknown covariate '" + std::string(s) + "'");
    return *c;
}

/// Parses "W,T,TI" into an ordered, duplicate-free list.
inline std::vector<Covariate> parse_covariate_list(std::string_view csv)
{
    std::vector<Covariate> out;
    std::string item;
    std::istringstream in{std::string(csv)};
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        auto c = parse_covariate(item);
        for (auto existing : out)
            if (existing == c) throw Error("duplicate covariate '" + item + "'");
        out.push_back(c);
    }
    return out;
}

inline std::string join_names(const std::vector<Covariate>& cs, char sep = ',')
{
    std::string s;
    for (std::size_t i = 0; i < cs.size(); ++i) {
        if (i) s += sep;
        s += name(cs[i]);
    }
    return s;
}

} // namespace wtperf
