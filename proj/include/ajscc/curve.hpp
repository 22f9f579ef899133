#pragma once

// Rectangular-type (serpentine) N:1 mapping between source tuples and the
// transmitted arc-length scalar, plus the source-side quantizers.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ajscc {

/// Largest number of source dimensions accepted by build_config.
inline constexpr std::size_t kMaxDims = 16;

/// Geometry of a rectangular AJSCC curve.
///
/// Dimension 1 is carried continuously along each stage (a line segment of
/// length `stage_length()`); dimensions 2..N select the stage through their
/// quantized level indices. Dimension N is the outermost serpentine.
class MappingConfig {
public:
    std::size_t n_dims() const noexcept { return ranges_.size(); }
    const std::vector<double>& ranges() const noexcept { return ranges_; }
    double range(std::size_t k) const { return ranges_.at(k); }
    /// Level counts L_1..L_{N-1}; `levels()[j]` belongs to dimension j+2.
    const std::vector<int>& levels() const noexcept { return levels_; }
    /// Level spacings; `deltas()[j] = range(j+1) / (levels()[j] - 1)`.
    const std::vector<double>& deltas() const noexcept { return deltas_; }
    double d_max() const noexcept { return d_max_; }
    /// Stage length d = D_max / prod(L).
    double stage_length() const noexcept { return d_; }
    std::uint64_t stage_count() const noexcept { return stage_count_; }

    friend MappingConfig build_config(std::size_t n_dims, std::vector<double> ranges,
                                      std::vector<int> levels, double d_max);

private:
    MappingConfig() = default;

    std::vector<double> ranges_;
    std::vector<int> levels_;
    std::vector<double> deltas_;
    double d_max_ = 0.0;
    double d_ = 0.0;
    std::uint64_t stage_count_ = 0;
};

struct SourcePoint {
    std::vector<double> values;
};

struct LatticePoint {
    /// Position along the stage in [0, d], measured from the stage's x = 0 end.
    double x = 0.0;
    std::vector<int> level_indices;
};

struct MappedScalar {
    double m = 0.0;
};

/// Validates the parameters and derives d and the level spacings.
inline MappingConfig build_config(std::size_t n_dims, std::vector<double> ranges,
                                  std::vector<int> levels, double d_max) {
    if (n_dims < 2 || n_dims > kMaxDims)
        throw std::invalid_argument("n_dims must be in [2, " + std::to_string(kMaxDims) + "]");
    if (ranges.size() != n_dims)
        throw std::invalid_argument("expected " + std::to_string(n_dims) + " ranges, got " +
                                    std::to_string(ranges.size()));
    if (levels.size() != n_dims - 1)
        throw std::invalid_argument("expected " + std::to_string(n_dims - 1) + " level counts, got " +
                                    std::to_string(levels.size()));
    for (double r : ranges)
        if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("ranges must be positive and finite");
    if (!(d_max > 0.0) || !std::isfinite(d_max)) throw std::invalid_argument("d_max must be positive and finite");

    std::uint64_t product = 1;
    for (int l : levels) {
        if (l < 2) throw std::invalid_argument("level count below 2");
        product *= static_cast<std::uint64_t>(l);
        if (product > (std::uint64_t{1} << 52)) throw std::invalid_argument("too many stages");
    }

    MappingConfig c;
    c.deltas_.reserve(levels.size());
    for (std::size_t j = 0; j < levels.size(); ++j)
        c.deltas_.push_back(ranges[j + 1] / static_cast<double>(levels[j] - 1));
    c.ranges_ = std::move(ranges);
    c.levels_ = std::move(levels);
    c.d_max_ = d_max;
    c.stage_count_ = product;
    c.d_ = d_max / static_cast<double>(product);
    return c;
}

/// Nearest level index of `value` on the grid {0, delta, ..., (count-1)*delta}.
/// Exact half-spacing ties round up; out-of-grid values are clamped.
inline int quantize_level(double value, double delta, int level_count) {
    if (!(delta > 0.0)) throw std::invalid_argument("quantizer spacing must be positive");
    if (level_count < 1) throw std::invalid_argument("quantizer needs at least one level");
    const double top = static_cast<double>(level_count - 1);
    double q = value / delta;
    if (!(q > 0.0)) return 0;  // also catches NaN
    if (q >= top) return level_count - 1;
    const double whole = std::floor(q);
    int k = static_cast<int>(whole);
    if (q - whole >= 0.5) ++k;
    return k < level_count ? k : level_count - 1;
}

/// Uniform mid-tread ADC with 2^n_bits levels {0, R/(2^n-1), ..., R}.
inline double adc_quantize(double value, double range_r, int n_bits) {
    if (n_bits < 1 || n_bits > 16) throw std::invalid_argument("n_bits must be in [1, 16]");
    if (!(range_r > 0.0)) throw std::invalid_argument("ADC range must be positive");
    const int steps = (1 << n_bits) - 1;
    const int k = quantize_level(value, range_r / steps, steps + 1);
    return static_cast<double>(k) * range_r / steps;
}

/// ADC step R / (2^n_bits - 1), in source units.
inline double adc_step(double range_r, int n_bits) {
    if (n_bits < 1 || n_bits > 16) throw std::invalid_argument("n_bits must be in [1, 16]");
    return range_r / static_cast<double>((1 << n_bits) - 1);
}

inline double clamp_to_range(double v, double hi) {
    if (!(v > 0.0)) return 0.0;
    return v < hi ? v : hi;
}

/// Serpentine stage index of a lattice cell. Level digits are read
/// outermost-first; a digit is reflected whenever the index of the enclosing
/// (outer) block is odd.
inline std::uint64_t stage_index(const MappingConfig& config, std::span<const int> level_indices) {
    const auto& L = config.levels();
    std::uint64_t prefix = 0;
    for (std::size_t j = L.size(); j-- > 0;) {
        const auto k = static_cast<std::uint64_t>(level_indices[j]);
        const auto count = static_cast<std::uint64_t>(L[j]);
        const std::uint64_t digit = (prefix % 2 == 0) ? k : count - 1 - k;
        prefix = prefix * count + digit;
    }
    return prefix;
}

/// Inverse of stage_index; writes the level indices into `out`.
inline void stage_levels(const MappingConfig& config, std::uint64_t stage, std::span<int> out) {
    const auto& L = config.levels();
    std::uint64_t rem = stage;
    for (std::size_t j = 0; j < L.size(); ++j) {
        const auto count = static_cast<std::uint64_t>(L[j]);
        const std::uint64_t digit = rem % count;
        rem /= count;
        out[j] = static_cast<int>((rem % 2 == 0) ? digit : count - 1 - digit);
    }
}

/// Arc length of a point at position x on a stage. Even stages run in +x.
inline double arc_length(double stage_length, std::uint64_t stage, double x) {
    const double base = static_cast<double>(stage) * stage_length;
    return base + ((stage % 2 == 0) ? x : stage_length - x);
}

namespace detail {

struct EncodedStage {
    double x;
    std::uint64_t stage;
    double m;
};

// Allocation-free encode used by the simulator; `levels` must hold N-1 ints.
inline EncodedStage encode_into(const MappingConfig& config, std::span<const double> source,
                                std::span<int> levels) {
    const auto& R = config.ranges();
    const auto& L = config.levels();
    const auto& D = config.deltas();
    for (std::size_t j = 0; j < L.size(); ++j)
        levels[j] = quantize_level(clamp_to_range(source[j + 1], R[j + 1]), D[j], L[j]);
    const double d = config.stage_length();
    const double x = d / R[0] * clamp_to_range(source[0], R[0]);
    const std::uint64_t t = stage_index(config, levels);
    return {x, t, arc_length(d, t, x)};
}

struct DecodedStage {
    double x;
    std::uint64_t stage;
};

inline DecodedStage locate(const MappingConfig& config, double m) {
    const double d = config.stage_length();
    const double total = config.d_max();
    if (!(m > 0.0)) m = 0.0;
    if (m > total) m = total;
    const std::uint64_t last = config.stage_count() - 1;
    auto t = static_cast<std::uint64_t>(std::floor(m / d));
    if (t > last) t = last;
    // Guard floor() against a rounding step across the stage boundary.
    if (t > 0 && m < static_cast<double>(t) * d) --t;
    else if (t < last && m >= static_cast<double>(t + 1) * d) ++t;
    double u = m - static_cast<double>(t) * d;
    if (u < 0.0) u = 0.0;
    if (u > d) u = d;
    return {(t % 2 == 0) ? u : d - u, t};
}

}  // namespace detail

struct Encoded {
    LatticePoint lattice;
    MappedScalar mapped;
};

/// Maps a source tuple onto the curve. Components are clamped into [0, R_k].
inline Encoded encode(const MappingConfig& config, const SourcePoint& source) {
    if (source.values.size() != config.n_dims())
        throw std::invalid_argument("source point has wrong dimension");
    Encoded out;
    out.lattice.level_indices.resize(config.levels().size());
    const auto e = detail::encode_into(config, source.values, out.lattice.level_indices);
    out.lattice.x = e.x;
    out.mapped.m = e.m;
    return out;
}

/// Lattice point reached by arc length m (clamped to [0, D_max]).
inline LatticePoint locate(const MappingConfig& config, MappedScalar m) {
    const auto s = detail::locate(config, m.m);
    LatticePoint p;
    p.x = s.x;
    p.level_indices.resize(config.levels().size());
    stage_levels(config, s.stage, p.level_indices);
    return p;
}

/// Source-space coordinates of a lattice point.
inline SourcePoint to_source(const MappingConfig& config, const LatticePoint& p) {
    SourcePoint s;
    s.values.resize(config.n_dims());
    s.values[0] = p.x * config.range(0) / config.stage_length();
    for (std::size_t j = 0; j < p.level_indices.size(); ++j)
        s.values[j + 1] = static_cast<double>(p.level_indices[j]) * config.deltas()[j];
    return s;
}

inline SourcePoint decode(const MappingConfig& config, MappedScalar m) {
    return to_source(config, locate(config, m));
}

}  // namespace ajscc
