#pragma once

// Source laws: uniform, and the Discrete-Boundary Gaussian (a normal law
// clamped to [lo, hi], which piles the tail probability onto the endpoints).

#include "ajscc/numerics.hpp"
#include "ajscc/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace ajscc::dist {

struct Uniform {
    double lo;
    double hi;
};

struct DiscreteBoundaryGaussian {
    double lo;
    double hi;
    double mu;
    double sigma;
};

class SourceDistribution {
public:
    using Law = std::variant<Uniform, DiscreteBoundaryGaussian>;

    static SourceDistribution uniform(double lo, double hi) {
        if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
            throw std::invalid_argument("uniform law needs finite lo < hi");
        return SourceDistribution(Uniform{lo, hi});
    }

    static SourceDistribution dbg(double lo, double hi, double mu, double sigma) {
        if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
            throw std::invalid_argument("discrete-boundary Gaussian needs finite lo < hi");
        if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(mu))
            throw std::invalid_argument("discrete-boundary Gaussian needs finite mu and sigma > 0");
        return SourceDistribution(DiscreteBoundaryGaussian{lo, hi, mu, sigma});
    }

    const Law& law() const noexcept { return law_; }
    bool is_uniform() const noexcept { return std::holds_alternative<Uniform>(law_); }
    double lo() const noexcept {
        return std::visit([](const auto& l) { return l.lo; }, law_);
    }
    double hi() const noexcept {
        return std::visit([](const auto& l) { return l.hi; }, law_);
    }

private:
    explicit SourceDistribution(Law law) : law_(law) {}
    Law law_;
};

struct DensityMass {
    double density;
    double point_mass;
};

/// Lower and upper endpoint masses of a discrete-boundary Gaussian.
inline std::pair<double, double> boundary_masses(const SourceDistribution& dist) {
    const auto* g = std::get_if<DiscreteBoundaryGaussian>(&dist.law());
    if (!g) throw std::invalid_argument("boundary masses are defined for discrete-boundary Gaussian laws only");
    const double s = std::numbers::sqrt2 * g->sigma;
    return {0.5 * std::erfc((g->mu - g->lo) / s), 0.5 * std::erfc((g->hi - g->mu) / s)};
}

/// Endpoint masses; zero for the uniform law.
inline std::pair<double, double> endpoint_masses(const SourceDistribution& dist) {
    if (dist.is_uniform()) return {0.0, 0.0};
    return boundary_masses(dist);
}

/// Continuous density at s and the discrete mass sitting exactly at s.
inline DensityMass pdf_mass(const SourceDistribution& dist, double s) {
    if (const auto* u = std::get_if<Uniform>(&dist.law())) {
        const bool inside = s >= u->lo && s <= u->hi;
        return {inside ? 1.0 / (u->hi - u->lo) : 0.0, 0.0};
    }
    const auto& g = std::get<DiscreteBoundaryGaussian>(dist.law());
    const auto [p_lo, p_hi] = boundary_masses(dist);
    double mass = 0.0;
    if (s == g.lo) mass = p_lo;
    else if (s == g.hi) mass = p_hi;
    const bool inside = s > g.lo && s < g.hi;
    return {inside ? normal_pdf((s - g.mu) / g.sigma) / g.sigma : 0.0, mass};
}

/// Probability carried by the continuous part on [a, b].
inline double continuous_mass(const SourceDistribution& dist, double a, double b) {
    a = std::max(a, dist.lo());
    b = std::min(b, dist.hi());
    if (!(b > a)) return 0.0;
    if (const auto* u = std::get_if<Uniform>(&dist.law())) return (b - a) / (u->hi - u->lo);
    const auto& g = std::get<DiscreteBoundaryGaussian>(dist.law());
    const double za = (a - g.mu) / g.sigma;
    const double zb = (b - g.mu) / g.sigma;
    // Difference of the tail on the side away from the mean keeps precision.
    if (za > 0.0) return normal_cdf(-za) - normal_cdf(-zb);
    return normal_cdf(zb) - normal_cdf(za);
}

template <class Gen>
double sample(const SourceDistribution& dist, Gen& g) {
    if (const auto* u = std::get_if<Uniform>(&dist.law())) return u->lo + (u->hi - u->lo) * uniform01(g);
    const auto& b = std::get<DiscreteBoundaryGaussian>(dist.law());
    const double v = b.mu + b.sigma * standard_normal(g);
    return v < b.lo ? b.lo : (v > b.hi ? b.hi : v);
}

/// The law of c * S for c > 0.
inline SourceDistribution scaled(const SourceDistribution& dist, double c) {
    if (!(c > 0.0)) throw std::invalid_argument("scale factor must be positive");
    if (const auto* u = std::get_if<Uniform>(&dist.law())) return SourceDistribution::uniform(c * u->lo, c * u->hi);
    const auto& g = std::get<DiscreteBoundaryGaussian>(dist.law());
    return SourceDistribution::dbg(c * g.lo, c * g.hi, c * g.mu, c * g.sigma);
}

namespace detail {

inline std::vector<double> parse_numbers(std::string_view text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string_view piece =
            text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        double v = 0.0;
        const auto* first = piece.data();
        const auto* last = piece.data() + piece.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (piece.empty() || ec != std::errc() || ptr != last)
            throw std::invalid_argument("not a number: '" + std::string(piece) + "'");
        out.push_back(v);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

inline std::string shortest(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace detail

/// Parses `uniform:lo,hi` or `dbg:lo,hi,mu,sigma`.
inline SourceDistribution parse_distribution(std::string_view text) {
    const std::size_t colon = text.find(':');
    if (colon == std::string_view::npos)
        throw std::invalid_argument("distribution spec needs a 'kind:' prefix: '" + std::string(text) + "'");
    const std::string_view kind = text.substr(0, colon);
    const auto args = detail::parse_numbers(text.substr(colon + 1));
    if (kind == "uniform") {
        if (args.size() != 2) throw std::invalid_argument("uniform expects lo,hi");
        return SourceDistribution::uniform(args[0], args[1]);
    }
    if (kind == "dbg") {
        if (args.size() != 4) throw std::invalid_argument("dbg expects lo,hi,mu,sigma");
        return SourceDistribution::dbg(args[0], args[1], args[2], args[3]);
    }
    throw std::invalid_argument("unknown distribution kind '" + std::string(kind) + "'");
}

inline std::string to_string(const SourceDistribution& dist) {
    using detail::shortest;
    if (const auto* u = std::get_if<Uniform>(&dist.law()))
        return "uniform:" + shortest(u->lo) + "," + shortest(u->hi);
    const auto& g = std::get<DiscreteBoundaryGaussian>(dist.law());
    return "dbg:" + shortest(g.lo) + "," + shortest(g.hi) + "," + shortest(g.mu) + "," + shortest(g.sigma);
}

}  // namespace ajscc::dist
