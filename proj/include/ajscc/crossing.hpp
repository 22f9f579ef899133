#pragma once

// Single stage-crossing cases of the 3:1 curve.
//
// A Left Stage Crossing (LSC) moves the received point past the x = 0 end of
// the transmitted stage, a Right Stage Crossing (RSC) past the x = d end. The
// twenty labelled sub-cases are keyed by the transmitted stage's position:
//   a  interior stage of a plane (a1: odd stage number, a2: even),
//   b  top/bottom stage of an interior plane (b1..b4 by plane parity),
//   c  top/bottom stage of the first or last plane (c1..c4).
// Stage and plane numbers are 1-based, counted from y = 0 and z = 0.
//
// The tabulated displacements describe the curve when L1 and L2 are both
// even. With an odd level count some positions connect differently;
// reachable_labels() reports which rows the geometry of a config realizes.

#include "ajscc/curve.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace ajscc {

enum class CrossingLabel : std::uint8_t {
    a1_LSC, a1_RSC, a2_LSC, a2_RSC,
    b1_LSC, b1_RSC, b2_LSC, b2_RSC, b3_LSC, b3_RSC, b4_LSC, b4_RSC,
    c1_LSC, c1_RSC, c2_LSC, c2_RSC, c3_LSC, c3_RSC, c4_LSC, c4_RSC,
    None, Multi,
};

inline constexpr std::size_t kTabulatedCases = 20;
inline constexpr std::size_t kCrossingLabelCount = 22;

inline constexpr std::array<std::string_view, kCrossingLabelCount> kCrossingLabelNames = {
    "a1_LSC", "a1_RSC", "a2_LSC", "a2_RSC",
    "b1_LSC", "b1_RSC", "b2_LSC", "b2_RSC", "b3_LSC", "b3_RSC", "b4_LSC", "b4_RSC",
    "c1_LSC", "c1_RSC", "c2_LSC", "c2_RSC", "c3_LSC", "c3_RSC", "c4_LSC", "c4_RSC",
    "None", "Multi",
};

constexpr std::string_view to_string(CrossingLabel l) { return kCrossingLabelNames[static_cast<std::size_t>(l)]; }

enum class Side : std::uint8_t { Left, Right };

constexpr Side side_of(CrossingLabel l) {
    return static_cast<std::size_t>(l) % 2 == 0 ? Side::Left : Side::Right;
}

/// Lattice-level effect of one crossing: which neighbouring level the
/// received point lands on (in units of the level spacing), or whether the
/// curve end absorbs it (x_r clamped to the end, no level change).
struct CaseRow {
    int dy = 0;
    int dz = 0;
    bool absorbing = false;

    friend constexpr bool operator==(const CaseRow&, const CaseRow&) = default;
};

/// Tabulated row of a labelled case.
constexpr CaseRow table_row(CrossingLabel l) {
    switch (l) {
        case CrossingLabel::a1_LSC: return {-1, 0, false};
        case CrossingLabel::a1_RSC: return {+1, 0, false};
        case CrossingLabel::a2_LSC: return {+1, 0, false};
        case CrossingLabel::a2_RSC: return {-1, 0, false};
        case CrossingLabel::b1_LSC: return {0, +1, false};
        case CrossingLabel::b1_RSC: return {-1, 0, false};
        case CrossingLabel::b2_LSC: return {0, -1, false};
        case CrossingLabel::b2_RSC: return {+1, 0, false};
        case CrossingLabel::b3_LSC: return {0, -1, false};
        case CrossingLabel::b3_RSC: return {-1, 0, false};
        case CrossingLabel::b4_LSC: return {0, +1, false};
        case CrossingLabel::b4_RSC: return {+1, 0, false};
        case CrossingLabel::c1_LSC: return {0, 0, true};
        case CrossingLabel::c1_RSC: return {+1, 0, false};
        case CrossingLabel::c2_LSC: return {0, 0, true};
        case CrossingLabel::c2_RSC: return {+1, 0, false};
        case CrossingLabel::c3_LSC: return {0, +1, false};
        case CrossingLabel::c3_RSC: return {-1, 0, false};
        case CrossingLabel::c4_LSC: return {0, -1, false};
        case CrossingLabel::c4_RSC: return {-1, 0, false};
        default: return {};
    }
}

/// Label of a crossing from stage (k_y, k_z) of an L1 x L2 curve.
constexpr CrossingLabel case_label(int k_y, int k_z, int L1, int L2, Side side) {
    const bool top = k_y == L1 - 1;
    const bool bottom = k_y == 0;
    int base = 0;  // index of the LSC entry of the sub-case
    if (!top && !bottom) {
        base = (k_y % 2 == 0) ? 0 : 2;
    } else if (k_z == 0 || k_z == L2 - 1) {
        const bool first = k_z == 0;
        if (bottom) base = first ? 12 : 14;
        else base = first ? 16 : 18;
    } else {
        const bool odd_plane = k_z % 2 == 0;
        if (odd_plane) base = top ? 4 : 6;
        else base = top ? 8 : 10;
    }
    return static_cast<CrossingLabel>(base + (side == Side::Right ? 1 : 0));
}

struct CrossingCase {
    CrossingLabel label = CrossingLabel::None;
    /// Displacement of the received lattice point from the transmitted one:
    /// (x_r - x_s, y_r - y_s, z_r - z_s); x in curve units, y and z in source units.
    std::array<double, 3> nu{};
};

/// Tabulated displacement of a labelled case for x-axis noise n at position x_s.
inline std::array<double, 3> table_nu(CrossingLabel label, double x_s, double n, double d, double delta_y,
                                      double delta_z) {
    const CaseRow row = table_row(label);
    double nu_x = 0.0;
    if (row.absorbing) nu_x = -x_s;
    else if (side_of(label) == Side::Left) nu_x = -n - 2.0 * x_s;
    else nu_x = 2.0 * d - 2.0 * x_s - n;
    return {nu_x, row.dy * delta_y, row.dz * delta_z};
}

namespace detail {

inline void require_3d(const MappingConfig& config) {
    if (config.n_dims() != 3) throw std::invalid_argument("crossing cases are defined for the 3:1 curve");
}

struct Neighbour {
    bool exists;
    std::uint64_t stage;
};

// Stage joined to `stage` at its x = 0 end (Left) or x = d end (Right).
inline Neighbour neighbour(const MappingConfig& config, std::uint64_t stage, Side side) {
    const bool even = stage % 2 == 0;
    const bool towards_start = (side == Side::Left) == even;
    if (towards_start) return {stage > 0, stage > 0 ? stage - 1 : 0};
    const bool has = stage + 1 < config.stage_count();
    return {has, has ? stage + 1 : stage};
}

}  // namespace detail

/// What the curve geometry does for a crossing out of stage (k_y, k_z).
inline CaseRow geometric_row(const MappingConfig& config, int k_y, int k_z, Side side) {
    detail::require_3d(config);
    const int levels[2] = {k_y, k_z};
    const auto nb = detail::neighbour(config, stage_index(config, levels), side);
    if (!nb.exists) return {0, 0, true};
    int other[2];
    stage_levels(config, nb.stage, other);
    return {other[0] - k_y, other[1] - k_z, false};
}

/// Classifies a transmitted/received lattice pair.
///
/// `n` is the channel noise projected on the x axis of the transmitted stage
/// (x_r = x_s + n when no crossing happens). LSC iff n < -x_s, RSC iff
/// n > d - x_s. A crossing is single when the received point lies on the
/// stage joined at that end (or on the same stage, clamped, when the curve
/// ends there); anything else is Multi.
inline CrossingCase classify_crossing(const MappingConfig& config, const LatticePoint& tx, const LatticePoint& rx,
                                      double n) {
    detail::require_3d(config);
    if (tx.level_indices.size() != 2 || rx.level_indices.size() != 2)
        throw std::invalid_argument("lattice points must carry two level indices");
    const double d = config.stage_length();
    const double dy = config.deltas()[0];
    const double dz = config.deltas()[1];
    const double x_s = tx.x;
    const std::uint64_t t_tx = stage_index(config, tx.level_indices);
    const std::uint64_t t_rx = stage_index(config, rx.level_indices);

    const auto displacement = [&] {
        return std::array<double, 3>{rx.x - x_s, (rx.level_indices[0] - tx.level_indices[0]) * dy,
                                     (rx.level_indices[1] - tx.level_indices[1]) * dz};
    };

    const bool lsc = n < -x_s;
    const bool rsc = n > d - x_s;
    if (!lsc && !rsc) {
        if (t_rx == t_tx) return {CrossingLabel::None, {n, 0.0, 0.0}};
        return {CrossingLabel::Multi, displacement()};
    }

    const Side side = lsc ? Side::Left : Side::Right;
    const auto nb = detail::neighbour(config, t_tx, side);
    bool single = false;
    if (!nb.exists) {
        single = t_rx == t_tx;
    } else {
        const double x_r = lsc ? -x_s - n : 2.0 * d - x_s - n;
        single = t_rx == nb.stage && x_r >= 0.0 && x_r <= d;
    }
    if (!single) return {CrossingLabel::Multi, displacement()};

    const auto& L = config.levels();
    const CrossingLabel label = case_label(tx.level_indices[0], tx.level_indices[1], L[0], L[1], side);
    return {label, table_nu(label, x_s, n, d, dy, dz)};
}

/// Labels whose tabulated row the geometry of `config` realizes at one or
/// more stage positions, in label order.
inline std::vector<CrossingLabel> reachable_labels(const MappingConfig& config) {
    detail::require_3d(config);
    const int L1 = config.levels()[0];
    const int L2 = config.levels()[1];
    std::array<bool, kTabulatedCases> hit{};
    for (int kz = 0; kz < L2; ++kz)
        for (int ky = 0; ky < L1; ++ky)
            for (Side side : {Side::Left, Side::Right}) {
                const CrossingLabel label = case_label(ky, kz, L1, L2, side);
                if (geometric_row(config, ky, kz, side) == table_row(label))
                    hit[static_cast<std::size_t>(label)] = true;
            }
    std::vector<CrossingLabel> out;
    for (std::size_t i = 0; i < kTabulatedCases; ++i)
        if (hit[i]) out.push_back(static_cast<CrossingLabel>(i));
    return out;
}

}  // namespace ajscc
