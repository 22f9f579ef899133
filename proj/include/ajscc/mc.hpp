#pragma once

// End-to-end Monte Carlo simulator: sample, (ADC), encode, add Gaussian noise
// on the mapped scalar, decode, and score per-dimension squared errors.
//
// Trial i draws all of its randomness from CounterStream(seed, i): the source
// components in dimension order, then one normal for the channel. Trials are
// grouped in fixed blocks summed with compensation and merged in block order,
// so a report depends on (spec, seed) only.

#include "ajscc/analytic.hpp"
#include "ajscc/crossing.hpp"
#include "ajscc/curve.hpp"
#include "ajscc/dist.hpp"
#include "ajscc/numerics.hpp"
#include "ajscc/parallel.hpp"
#include "ajscc/rng.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ajscc::mc {

struct SimulationSpec {
    MappingConfig config;
    NoiseModel noise;
    std::vector<dist::SourceDistribution> sources;  // one per dimension
    Sensor sensor;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
};

struct RunOptions {
    unsigned threads = 0;  // 0 = worker_count()
};

struct SimulationReport {
    std::vector<double> mse_per_dim;
    double mse_sum = 0.0;
    /// 95% normal-approximation half-width on mse_sum.
    double ci_halfwidth = 0.0;
    /// Events per classifier label (3:1 curves only; all zero otherwise).
    std::array<std::uint64_t, kCrossingLabelCount> crossing_counts{};
    std::uint64_t multi_crossing_count = 0;
    /// Trials whose x-axis noise met the LSC / RSC condition.
    std::uint64_t lsc_events = 0;
    std::uint64_t rsc_events = 0;
    /// Single crossings whose decoded displacement differs from the tabulated
    /// displacement of their label by more than 1e-9 (per label).
    std::array<std::uint64_t, kTabulatedCases> table_mismatch_counts{};
    std::uint64_t trials_run = 0;
};

inline void validate(const SimulationSpec& spec) {
    if (spec.trials == 0) throw std::invalid_argument("trials must be at least 1");
    if (spec.sources.size() != spec.config.n_dims())
        throw std::invalid_argument("need one source law per dimension");
    analytic::validate(spec.noise);
    if (spec.sensor.n_bits < 0 || spec.sensor.n_bits > 16) throw std::invalid_argument("n_bits must be in [0, 16]");
}

namespace detail {

inline constexpr std::uint64_t kBlockTrials = 4096;

struct Scratch {
    std::vector<double> source;
    std::vector<double> sensed;
    std::vector<double> sq_err;
    LatticePoint tx;
    LatticePoint rx;

    explicit Scratch(const MappingConfig& c)
        : source(c.n_dims()), sensed(c.n_dims()), sq_err(c.n_dims()) {
        tx.level_indices.resize(c.levels().size());
        rx.level_indices.resize(c.levels().size());
    }
};

struct TrialOutcome {
    double sum_sq = 0.0;
    bool lsc = false;
    bool rsc = false;
    CrossingLabel label = CrossingLabel::None;
    bool table_mismatch = false;
};

// One trial of the signal chain; per-dimension squared errors land in s.sq_err.
inline TrialOutcome simulate_trial(const SimulationSpec& spec, const Sensor& sensor, std::uint64_t trial, Scratch& s,
                                   bool classify) {
    const MappingConfig& config = spec.config;
    CounterStream gen(spec.seed, trial);
    const std::size_t n = config.n_dims();
    for (std::size_t k = 0; k < n; ++k)
        s.source[k] = clamp_to_range(dist::sample(spec.sources[k], gen), config.range(k));
    const double noise = spec.noise.sigma_n * standard_normal(gen);

    s.sensed = s.source;
    if (sensor.is_digital()) s.sensed[0] = adc_quantize(s.source[0], config.range(0), sensor.n_bits);

    const auto enc = ajscc::detail::encode_into(config, s.sensed, s.tx.level_indices);
    const auto dec = ajscc::detail::locate(config, enc.m + noise);
    stage_levels(config, dec.stage, s.rx.level_indices);

    TrialOutcome out;
    const double d = config.stage_length();
    const double e0 = dec.x * config.range(0) / d - s.source[0];
    s.sq_err[0] = e0 * e0;
    out.sum_sq = s.sq_err[0];
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double e = s.rx.level_indices[j] * config.deltas()[j] - s.source[j + 1];
        s.sq_err[j + 1] = e * e;
        out.sum_sq += s.sq_err[j + 1];
    }

    // Noise seen along the transmitted stage's own x axis.
    const double n_x = (enc.stage % 2 == 0) ? noise : -noise;
    out.lsc = n_x < -enc.x;
    out.rsc = n_x > d - enc.x;
    if (classify) {
        s.tx.x = enc.x;
        s.rx.x = dec.x;
        const CrossingCase c = classify_crossing(config, s.tx, s.rx, n_x);
        out.label = c.label;
        if (static_cast<std::size_t>(c.label) < kTabulatedCases) {
            const double actual[3] = {dec.x - enc.x,
                                      (s.rx.level_indices[0] - s.tx.level_indices[0]) * config.deltas()[0],
                                      (s.rx.level_indices[1] - s.tx.level_indices[1]) * config.deltas()[1]};
            const double tol = 1e-9 * std::max(1.0, d);
            for (int a = 0; a < 3; ++a)
                if (std::fabs(actual[a] - c.nu[static_cast<std::size_t>(a)]) > tol) out.table_mismatch = true;
        }
    }
    return out;
}

struct BlockAccumulator {
    std::vector<CompensatedSum> per_dim;
    CompensatedSum sum;
    CompensatedSum sum_sq;
    std::array<std::uint64_t, kCrossingLabelCount> labels{};
    std::array<std::uint64_t, kTabulatedCases> mismatches{};
    std::uint64_t lsc = 0;
    std::uint64_t rsc = 0;
};

template <class BlockFn>
void for_each_block(std::uint64_t trials, unsigned threads, BlockFn&& fn) {
    const std::uint64_t blocks = (trials + kBlockTrials - 1) / kBlockTrials;
    parallel_for(
        static_cast<std::size_t>(blocks),
        [&](std::size_t b) {
            const std::uint64_t begin = b * kBlockTrials;
            const std::uint64_t end = std::min(trials, begin + kBlockTrials);
            fn(b, begin, end);
        },
        threads);
}

inline double ci95(const CompensatedSum& sum, const CompensatedSum& sum_sq, std::uint64_t trials) {
    if (trials < 2) return 0.0;
    const double t = static_cast<double>(trials);
    const double mean = sum.value() / t;
    const double var = std::max(0.0, (sum_sq.value() / t - mean * mean) * t / (t - 1.0));
    return 1.96 * std::sqrt(var / t);
}

}  // namespace detail

inline SimulationReport run(const SimulationSpec& spec, const RunOptions& options = {}) {
    validate(spec);
    const std::size_t n = spec.config.n_dims();
    const bool classify = n == 3;
    const std::uint64_t blocks = (spec.trials + detail::kBlockTrials - 1) / detail::kBlockTrials;
    std::vector<detail::BlockAccumulator> acc(static_cast<std::size_t>(blocks));

    detail::for_each_block(spec.trials, options.threads, [&](std::size_t b, std::uint64_t begin, std::uint64_t end) {
        detail::Scratch scratch(spec.config);
        detail::BlockAccumulator& a = acc[b];
        a.per_dim.resize(n);
        for (std::uint64_t i = begin; i < end; ++i) {
            const auto o = detail::simulate_trial(spec, spec.sensor, i, scratch, classify);
            for (std::size_t k = 0; k < n; ++k) a.per_dim[k].add(scratch.sq_err[k]);
            a.sum.add(o.sum_sq);
            a.sum_sq.add(o.sum_sq * o.sum_sq);
            a.lsc += o.lsc;
            a.rsc += o.rsc;
            if (classify) {
                ++a.labels[static_cast<std::size_t>(o.label)];
                if (o.table_mismatch) ++a.mismatches[static_cast<std::size_t>(o.label)];
            }
        }
    });

    SimulationReport r;
    std::vector<CompensatedSum> per_dim(n);
    CompensatedSum sum, sum_sq;
    for (const auto& a : acc) {
        for (std::size_t k = 0; k < n; ++k) per_dim[k].add(a.per_dim[k]);
        sum.add(a.sum);
        sum_sq.add(a.sum_sq);
        r.lsc_events += a.lsc;
        r.rsc_events += a.rsc;
        for (std::size_t l = 0; l < kCrossingLabelCount; ++l) r.crossing_counts[l] += a.labels[l];
        for (std::size_t l = 0; l < kTabulatedCases; ++l) r.table_mismatch_counts[l] += a.mismatches[l];
    }
    const double t = static_cast<double>(spec.trials);
    CompensatedSum total;
    for (std::size_t k = 0; k < n; ++k) {
        r.mse_per_dim.push_back(per_dim[k].value() / t);
        total.add(r.mse_per_dim.back());
    }
    r.mse_sum = total.value();
    r.ci_halfwidth = detail::ci95(sum, sum_sq, spec.trials);
    r.multi_crossing_count = r.crossing_counts[static_cast<std::size_t>(CrossingLabel::Multi)];
    r.trials_run = spec.trials;
    return r;
}

struct CrossingRates {
    double pr_lsc_hat = 0.0;
    double pr_rsc_hat = 0.0;
    /// 95% binomial half-widths.
    double lsc_ci_halfwidth = 0.0;
    double rsc_ci_halfwidth = 0.0;
    /// Per-label frequencies (3:1 curves only).
    std::array<double, kCrossingLabelCount> per_case{};
    std::uint64_t trials = 0;
};

inline CrossingRates crossing_rates(const SimulationReport& r) {
    CrossingRates c;
    const double t = static_cast<double>(r.trials_run);
    c.trials = r.trials_run;
    c.pr_lsc_hat = static_cast<double>(r.lsc_events) / t;
    c.pr_rsc_hat = static_cast<double>(r.rsc_events) / t;
    c.lsc_ci_halfwidth = 1.96 * std::sqrt(c.pr_lsc_hat * (1.0 - c.pr_lsc_hat) / t);
    c.rsc_ci_halfwidth = 1.96 * std::sqrt(c.pr_rsc_hat * (1.0 - c.pr_rsc_hat) / t);
    for (std::size_t l = 0; l < kCrossingLabelCount; ++l) c.per_case[l] = static_cast<double>(r.crossing_counts[l]) / t;
    return c;
}

inline CrossingRates empirical_crossing_rates(const SimulationSpec& spec, const RunOptions& options = {}) {
    return crossing_rates(run(spec, options));
}

/// Digital-minus-analog sum MSE with both sensors fed the same draws.
struct PairedGap {
    double analog_mse = 0.0;
    double digital_mse = 0.0;
    double gap = 0.0;
    /// 95% half-width of the mean per-trial difference.
    double gap_ci_halfwidth = 0.0;
    std::uint64_t trials = 0;
};

inline PairedGap paired_gap(const SimulationSpec& spec, int n_bits, const RunOptions& options = {}) {
    validate(spec);
    const Sensor digital = Sensor::digital(n_bits);
    const std::uint64_t blocks = (spec.trials + detail::kBlockTrials - 1) / detail::kBlockTrials;
    struct Acc {
        CompensatedSum analog, digital, diff, diff_sq;
    };
    std::vector<Acc> acc(static_cast<std::size_t>(blocks));
    detail::for_each_block(spec.trials, options.threads, [&](std::size_t b, std::uint64_t begin, std::uint64_t end) {
        detail::Scratch scratch(spec.config);
        Acc& a = acc[b];
        for (std::uint64_t i = begin; i < end; ++i) {
            const double ea = detail::simulate_trial(spec, Sensor::analog(), i, scratch, false).sum_sq;
            const double ed = detail::simulate_trial(spec, digital, i, scratch, false).sum_sq;
            a.analog.add(ea);
            a.digital.add(ed);
            a.diff.add(ed - ea);
            a.diff_sq.add((ed - ea) * (ed - ea));
        }
    });
    CompensatedSum analog, dig, diff, diff_sq;
    for (const auto& a : acc) {
        analog.add(a.analog);
        dig.add(a.digital);
        diff.add(a.diff);
        diff_sq.add(a.diff_sq);
    }
    const double t = static_cast<double>(spec.trials);
    PairedGap g;
    g.analog_mse = analog.value() / t;
    g.digital_mse = dig.value() / t;
    g.gap = diff.value() / t;
    g.gap_ci_halfwidth = detail::ci95(diff, diff_sq, spec.trials);
    g.trials = spec.trials;
    return g;
}

}  // namespace ajscc::mc
