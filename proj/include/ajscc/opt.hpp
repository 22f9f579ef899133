#pragma once

// Exhaustive level-count search over predicted or simulated sum MSE.

#include "ajscc/analytic.hpp"
#include "ajscc/curve.hpp"
#include "ajscc/dist.hpp"
#include "ajscc/mc.hpp"
#include "ajscc/parallel.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace ajscc::opt {

enum class ObjectiveKind { AnalyticHigh, AnalyticLow, MonteCarlo };

struct Objective {
    ObjectiveKind kind = ObjectiveKind::AnalyticHigh;
    /// AnalyticLow: law of s_1 (uniform on [0, R_1] if unset) and the case
    /// weighting switch.
    std::optional<dist::SourceDistribution> source_s1;
    analytic::LowSnrOptions low;
    /// MonteCarlo: per-dimension laws (uniform on [0, R_k] if empty).
    std::vector<dist::SourceDistribution> sources;
    std::uint64_t trials = 100000;
    std::uint64_t seed = 1;

    static Objective analytic_high() { return {}; }
    static Objective analytic_low() {
        Objective o;
        o.kind = ObjectiveKind::AnalyticLow;
        return o;
    }
    static Objective monte_carlo(std::uint64_t trials, std::uint64_t seed) {
        Objective o;
        o.kind = ObjectiveKind::MonteCarlo;
        o.trials = trials;
        o.seed = seed;
        return o;
    }
};

struct LevelRange {
    int min = 2;
    int max = 2;
    int step = 1;
};

struct SweepSpec {
    std::vector<double> ranges;    // R_1..R_N
    double d_max = 0.0;
    SnrSpec snr;
    std::vector<LevelRange> levels;  // one per quantized dimension; one entry is shared when equal_levels
    bool equal_levels = false;
    Objective objective;
    Sensor sensor;
};

struct GridPoint {
    std::vector<int> levels;
    double mse = 0.0;
    /// Analytic terms. For MonteCarlo the per-dimension MSE: dimension 1 in
    /// noise_term, dimensions 2..N in quant_terms.
    MseBreakdown breakdown;
};

struct SweepResult {
    std::vector<GridPoint> grid;  // lexicographic in L, L_1 slowest
    std::vector<int> argmin;
    double mse_min = 0.0;
};

inline void validate(const LevelRange& r) {
    if (r.min < 2) throw std::invalid_argument("level range minimum must be at least 2");
    if (r.max < r.min) throw std::invalid_argument("level range maximum below minimum");
    if (r.step < 1) throw std::invalid_argument("level range step must be positive");
}

/// Level tuples of a sweep, in lexicographic order.
inline std::vector<std::vector<int>> level_grid(const SweepSpec& sweep) {
    if (sweep.ranges.size() < 2) throw std::invalid_argument("a sweep needs at least two dimensions");
    const std::size_t q = sweep.ranges.size() - 1;
    if (sweep.levels.empty()) throw std::invalid_argument("empty level grid");
    for (const auto& r : sweep.levels) validate(r);
    std::vector<std::vector<int>> out;
    if (sweep.equal_levels) {
        const LevelRange& r = sweep.levels.front();
        for (int l = r.min; l <= r.max; l += r.step) out.emplace_back(q, l);
        return out;
    }
    if (sweep.levels.size() != q) throw std::invalid_argument("need one level range per quantized dimension");
    std::vector<int> cur(q);
    for (std::size_t j = 0; j < q; ++j) cur[j] = sweep.levels[j].min;
    for (;;) {
        out.push_back(cur);
        std::size_t j = q;
        while (j-- > 0) {
            cur[j] += sweep.levels[j].step;
            if (cur[j] <= sweep.levels[j].max) break;
            cur[j] = sweep.levels[j].min;
            if (j == 0) return out;
        }
    }
}

/// Objective value and breakdown at one level tuple.
inline GridPoint evaluate(const SweepSpec& sweep, const std::vector<int>& levels) {
    const MappingConfig config = build_config(sweep.ranges.size(), sweep.ranges, levels, sweep.d_max);
    const NoiseModel noise = analytic::snr_to_sigma(config, sweep.snr);
    const Objective& obj = sweep.objective;
    GridPoint p;
    p.levels = levels;
    switch (obj.kind) {
        case ObjectiveKind::AnalyticHigh:
            if (sweep.sensor.is_digital()) p.breakdown = analytic::mse_high_digital(config, noise, sweep.sensor.n_bits);
            else if (config.n_dims() == 3) p.breakdown = analytic::mse_high_3d(config, noise);
            else p.breakdown = analytic::mse_high_nd(config, noise);
            break;
        case ObjectiveKind::AnalyticLow: {
            const auto s1 = obj.source_s1.value_or(dist::SourceDistribution::uniform(0.0, config.range(0)));
            p.breakdown = sweep.sensor.is_digital()
                              ? analytic::mse_low_digital(config, noise, s1, sweep.sensor.n_bits, obj.low)
                              : analytic::mse_low_3d(config, noise, s1, obj.low);
            break;
        }
        case ObjectiveKind::MonteCarlo: {
            std::vector<dist::SourceDistribution> sources = obj.sources;
            if (sources.empty())
                for (double r : sweep.ranges) sources.push_back(dist::SourceDistribution::uniform(0.0, r));
            const mc::SimulationSpec spec{config, noise, sources, sweep.sensor, obj.trials, obj.seed};
            const auto report = mc::run(spec);
            p.breakdown.noise_term = report.mse_per_dim[0];
            p.breakdown.quant_terms.assign(report.mse_per_dim.begin() + 1, report.mse_per_dim.end());
            p.mse = report.mse_sum;
            return p;
        }
    }
    p.mse = p.breakdown.total();
    return p;
}

/// Evaluates every grid point and picks the minimum, ties to the smaller
/// lexicographic L. MonteCarlo points share one seed (common random numbers).
inline SweepResult grid_search(const SweepSpec& sweep) {
    const auto grid = level_grid(sweep);
    if (grid.empty()) throw std::invalid_argument("empty level grid");
    SweepResult r;
    r.grid.resize(grid.size());
    // The simulator parallelizes internally; analytic points run side by side.
    const unsigned threads = sweep.objective.kind == ObjectiveKind::MonteCarlo ? 1u : 0u;
    parallel_for(grid.size(), [&](std::size_t i) { r.grid[i] = evaluate(sweep, grid[i]); }, threads);
    std::size_t best = 0;
    for (std::size_t i = 1; i < r.grid.size(); ++i)
        if (r.grid[i].mse < r.grid[best].mse) best = i;  // grid order is lexicographic, so ties keep the first
    r.argmin = r.grid[best].levels;
    r.mse_min = r.grid[best].mse;
    return r;
}

struct TrendRow {
    std::size_t n_dims = 0;
    double d_max = 0.0;
    SnrSpec snr;
    std::vector<int> argmin;
    double mse_min = 0.0;
};

/// Argmin level tuple for every (D_max, SNR) pair, D_max slowest.
inline std::vector<TrendRow> optimal_l_trend(const SweepSpec& sweep_template, const std::vector<double>& d_max_list,
                                             const std::vector<SnrSpec>& snr_list) {
    if (d_max_list.empty() || snr_list.empty()) throw std::invalid_argument("empty trend list");
    std::vector<TrendRow> rows;
    for (double d_max : d_max_list)
        for (const SnrSpec& snr : snr_list) {
            SweepSpec s = sweep_template;
            s.d_max = d_max;
            s.snr = snr;
            const auto r = grid_search(s);
            rows.push_back({s.ranges.size(), d_max, snr, r.argmin, r.mse_min});
        }
    return rows;
}

/// Ranges for an N-dimensional variant of a template: the template's first N
/// ranges, the last one repeated if the template is shorter.
inline std::vector<double> ranges_for(const std::vector<double>& ranges, std::size_t n_dims) {
    if (ranges.empty()) throw std::invalid_argument("template has no ranges");
    std::vector<double> out(ranges.begin(), ranges.begin() + static_cast<std::ptrdiff_t>(std::min(n_dims, ranges.size())));
    out.resize(n_dims, ranges.back());
    return out;
}

/// Argmin shared level count over (N, D_max), N slowest, for the analytic
/// high-SNR objective. With equal_l unset the full grid is searched and the
/// first argmin component is reported.
inline std::vector<TrendRow> optimal_l_vs_dims(const SweepSpec& sweep_template, const std::vector<std::size_t>& n_list,
                                               const std::vector<double>& d_max_list, const SnrSpec& snr,
                                               bool equal_l = true) {
    if (n_list.empty() || d_max_list.empty()) throw std::invalid_argument("empty trend list");
    std::vector<TrendRow> rows;
    for (std::size_t n : n_list)
        for (double d_max : d_max_list) {
            SweepSpec s = sweep_template;
            s.ranges = ranges_for(sweep_template.ranges, n);
            s.d_max = d_max;
            s.snr = snr;
            s.equal_levels = equal_l;
            s.objective = Objective::analytic_high();
            if (!equal_l) s.levels.assign(n - 1, sweep_template.levels.front());
            const auto r = grid_search(s);
            rows.push_back({n, d_max, snr, r.argmin, r.mse_min});
        }
    return rows;
}

}  // namespace ajscc::opt
