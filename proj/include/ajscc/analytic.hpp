#pragma once

// Closed-form and quadrature MSE predictors for the rectangular curve.
//
// Units: the channel noise n and the crossing displacement nu_x live on the
// curve (signal units). Every MseBreakdown term is a squared error of the
// recovered sources, in source units; nu_x is brought over by R_1 / d, the
// same factor that scales the noise term.

#include "ajscc/crossing.hpp"
#include "ajscc/curve.hpp"
#include "ajscc/dist.hpp"
#include "ajscc/numerics.hpp"

#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

namespace ajscc {

/// Additive Gaussian noise on the mapped scalar.
struct NoiseModel {
    double sigma_n = 0.0;
};

/// Analog sensor when n_bits == 0, otherwise an n_bits ADC on s_1.
struct Sensor {
    int n_bits = 0;

    static constexpr Sensor analog() { return {}; }
    static Sensor digital(int bits) {
        if (bits < 1 || bits > 16) throw std::invalid_argument("n_bits must be in [1, 16]");
        return {bits};
    }
    constexpr bool is_digital() const { return n_bits > 0; }
};

enum class SnrReference { MeanMappedPower, Explicit };

/// SNR in dB against the mean power of a mapped scalar uniform on
/// [0, D_max], or an explicit noise standard deviation.
struct SnrSpec {
    SnrReference reference = SnrReference::MeanMappedPower;
    double value = 0.0;  // dB, or sigma_n for Explicit

    static SnrSpec mean_mapped_power(double snr_db) { return {SnrReference::MeanMappedPower, snr_db}; }
    static SnrSpec explicit_sigma(double sigma_n) { return {SnrReference::Explicit, sigma_n}; }
};

struct MseBreakdown {
    double noise_term = 0.0;
    std::vector<double> quant_terms;  // one per quantized dimension
    double adc_term = 0.0;
    double lsc_term = 0.0;
    double rsc_term = 0.0;

    double total() const {
        const double quant = std::accumulate(quant_terms.begin(), quant_terms.end(), 0.0);
        return noise_term + quant + lsc_term + rsc_term + adc_term;
    }
};

namespace analytic {

inline void validate(const NoiseModel& noise) {
    if (!(noise.sigma_n >= 0.0) || !std::isfinite(noise.sigma_n))
        throw std::invalid_argument("sigma_n must be finite and non-negative");
}

inline NoiseModel snr_to_sigma(const MappingConfig& config, const SnrSpec& snr) {
    if (snr.reference == SnrReference::Explicit) {
        NoiseModel n{snr.value};
        validate(n);
        return n;
    }
    if (std::isnan(snr.value)) throw std::invalid_argument("SNR is NaN");
    const double mean_power = config.d_max() * config.d_max() / 3.0;
    return {std::sqrt(mean_power * std::pow(10.0, -snr.value / 10.0))};
}

/// Quantization error power of a uniform quantizer with spacing delta.
inline double uniform_quantization_power(double delta) { return delta * delta / 12.0; }

/// ADC error power R_1^2 / (12 (2^n - 1)^2).
inline double adc_term(double range_1, int n_bits) {
    const double steps = static_cast<double>((1 << n_bits) - 1);
    if (n_bits < 1 || n_bits > 16) throw std::invalid_argument("n_bits must be in [1, 16]");
    return range_1 * range_1 / (12.0 * steps * steps);
}

/// High-SNR sum MSE of the 3:1 curve, term by term:
/// R1^2 L1^2 L2^2 / Dmax^2 * sigma^2 + R2^2 / (12 (L1-1)^2) + R3^2 / (12 (L2-1)^2).
inline MseBreakdown mse_high_3d(const MappingConfig& config, const NoiseModel& noise) {
    if (config.n_dims() != 3) throw std::invalid_argument("mse_high_3d needs a 3:1 curve");
    validate(noise);
    const double R1 = config.range(0), R2 = config.range(1), R3 = config.range(2);
    const double L1 = config.levels()[0], L2 = config.levels()[1];
    const double D = config.d_max();
    MseBreakdown b;
    b.noise_term = R1 * R1 * L1 * L1 * L2 * L2 / (D * D) * noise.sigma_n * noise.sigma_n;
    b.quant_terms = {R2 * R2 / (12.0 * (L1 - 1) * (L1 - 1)), R3 * R3 / (12.0 * (L2 - 1) * (L2 - 1))};
    return b;
}

/// High-SNR sum MSE of the N:1 curve:
/// (R1 prod L_k / Dmax)^2 sigma^2 + sum_k R_{k+1}^2 / (12 (L_k - 1)^2).
inline MseBreakdown mse_high_nd(const MappingConfig& config, const NoiseModel& noise) {
    validate(noise);
    double prod = 1.0;
    for (int l : config.levels()) prod *= l;
    const double scale = config.range(0) * prod / config.d_max();
    MseBreakdown b;
    b.noise_term = scale * scale * noise.sigma_n * noise.sigma_n;
    for (std::size_t k = 0; k < config.levels().size(); ++k) {
        const double r = config.range(k + 1);
        const double lm1 = config.levels()[k] - 1.0;
        b.quant_terms.push_back(r * r / (12.0 * lm1 * lm1));
    }
    return b;
}

/// mse_high_nd plus the ADC term on s_1.
inline MseBreakdown mse_high_digital(const MappingConfig& config, const NoiseModel& noise, int n_bits) {
    const double adc = adc_term(config.range(0), n_bits);
    MseBreakdown b = config.n_dims() == 3 ? mse_high_3d(config, noise) : mse_high_nd(config, noise);
    b.adc_term = adc;
    return b;
}

namespace detail {

inline void require_on_stage(const dist::SourceDistribution& source, double d) {
    const double slack = 1e-12 * d;
    if (source.lo() < -slack || source.hi() > d + slack)
        throw std::invalid_argument("source law must be supported on [0, d]");
}

// E[f(S)] restricted to S in [a, b] for the continuous part, plus the
// endpoint masses. The continuous part is split around the Gaussian mode so a
// narrow density cannot slip between quadrature nodes.
template <class F>
double expect(const dist::SourceDistribution& source, F&& f, double a, double b) {
    double total = 0.0;
    a = std::max(a, source.lo());
    b = std::min(b, source.hi());
    if (b > a) {
        std::vector<double> cuts{a};
        if (const auto* g = std::get_if<dist::DiscreteBoundaryGaussian>(&source.law())) {
            for (double k : {-8.0, 0.0, 8.0}) {
                const double c = g->mu + k * g->sigma;
                if (c > cuts.back() && c < b) cuts.push_back(c);
            }
        }
        cuts.push_back(b);
        const auto integrand = [&](double s) { return dist::pdf_mass(source, s).density * f(s); };
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += quadrature(integrand, cuts[i], cuts[i + 1]);
    }
    const auto [p_lo, p_hi] = dist::endpoint_masses(source);
    if (p_lo > 0.0) total += p_lo * f(source.lo());
    if (p_hi > 0.0) total += p_hi * f(source.hi());
    return total;
}

// Beyond 40 sigma a Gaussian tail is below the smallest normal double.
inline constexpr double kTailReach = 40.0;

}  // namespace detail

/// Pr{LSC} = E_S[ Pr{S + n < 0} ] for a position law on [0, d].
inline double pr_lsc(const dist::SourceDistribution& source_x, const NoiseModel& noise, double d) {
    validate(noise);
    detail::require_on_stage(source_x, d);
    const double sigma = noise.sigma_n;
    if (sigma == 0.0) return 0.0;
    const double p = detail::expect(
        source_x, [&](double s) { return normal_cdf(-s / sigma); }, 0.0, detail::kTailReach * sigma);
    return std::clamp(p, 0.0, 1.0);
}

/// Pr{RSC} = E_S[ Pr{S + n > d} ].
inline double pr_rsc(const dist::SourceDistribution& source_x, const NoiseModel& noise, double d) {
    validate(noise);
    detail::require_on_stage(source_x, d);
    const double sigma = noise.sigma_n;
    if (sigma == 0.0) return 0.0;
    const double p = detail::expect(
        source_x, [&](double s) { return normal_cdf(-(d - s) / sigma); }, d - detail::kTailReach * sigma, d);
    return std::clamp(p, 0.0, 1.0);
}

/// Crossing-event statistics. Second moments are conditional on the event;
/// the Pr * E products are the joint contributions.
struct CrossingMoments {
    double pr_lsc = 0.0;
    double pr_rsc = 0.0;
    /// E[(-n - 2x_s)^2 + dy^2 | LSC] and E[(2d - 2x_s - n)^2 + dy^2 | RSC], curve units.
    double e_lsc_sq = 0.0;
    double e_rsc_sq = 0.0;
    /// Reflected displacement: E[(-n - 2x_s)^2 | LSC], E[(2d - 2x_s - n)^2 | RSC].
    double nu_x_lsc_sq = 0.0;
    double nu_x_rsc_sq = 0.0;
    /// Displacement when the curve end absorbs: E[x_s^2 | LSC], E[(d - x_s)^2 | RSC].
    double nu_x_lsc_absorbed_sq = 0.0;
    double nu_x_rsc_absorbed_sq = 0.0;
};

/// Crossing probabilities and displacement moments for a position law on
/// [0, d] (curve units) and the configured y spacing.
///
/// The inner Gaussian integrals over n < -x_s (LSC) and n > d - x_s (RSC)
/// are closed-form truncated moments; one quadrature over x_s remains.
inline CrossingMoments crossing_error_moments(const dist::SourceDistribution& source_x, const NoiseModel& noise,
                                              const MappingConfig& config) {
    validate(noise);
    const double d = config.stage_length();
    detail::require_on_stage(source_x, d);
    const double sigma = noise.sigma_n;
    CrossingMoments out;
    if (sigma == 0.0) return out;
    const double dy2 = config.deltas()[0] * config.deltas()[0];
    const double reach = detail::kTailReach * sigma;

    // LSC: x_r = -(x_s + n), so nu_x = -n - 2 x_s = -(n + 2 x_s).
    const auto lsc_reflect = [&](double s) {
        const TailMoments t = lower_tail(-s, sigma);
        return t.m2 + 4.0 * s * t.m1 + 4.0 * s * s * t.p;
    };
    const auto lsc_prob = [&](double s) { return normal_cdf(-s / sigma); };
    const auto lsc_absorb = [&](double s) { return s * s * normal_cdf(-s / sigma); };
    // RSC: with B = d - x_s, nu_x = 2B - n over n > B.
    const auto rsc_reflect = [&](double s) {
        const double B = d - s;
        const TailMoments t = upper_tail(B, sigma);
        return t.m2 - 4.0 * B * t.m1 + 4.0 * B * B * t.p;
    };
    const auto rsc_prob = [&](double s) { return normal_cdf(-(d - s) / sigma); };
    const auto rsc_absorb = [&](double s) {
        const double B = d - s;
        return B * B * normal_cdf(-B / sigma);
    };

    const double p_l = detail::expect(source_x, lsc_prob, 0.0, reach);
    const double p_r = detail::expect(source_x, rsc_prob, d - reach, d);
    out.pr_lsc = std::clamp(p_l, 0.0, 1.0);
    out.pr_rsc = std::clamp(p_r, 0.0, 1.0);
    if (out.pr_lsc >= 1e-300) {
        out.nu_x_lsc_sq = detail::expect(source_x, lsc_reflect, 0.0, reach) / p_l;
        out.nu_x_lsc_absorbed_sq = detail::expect(source_x, lsc_absorb, 0.0, reach) / p_l;
        out.e_lsc_sq = out.nu_x_lsc_sq + dy2;
    }
    if (out.pr_rsc >= 1e-300) {
        out.nu_x_rsc_sq = detail::expect(source_x, rsc_reflect, d - reach, d) / p_r;
        out.nu_x_rsc_absorbed_sq = detail::expect(source_x, rsc_absorb, d - reach, d) / p_r;
        out.e_rsc_sq = out.nu_x_rsc_sq + dy2;
    }
    return out;
}

/// Probability of each level index when a value drawn from `source` is
/// clamped into [0, (count-1) delta] and quantized.
inline std::vector<double> level_probabilities(const dist::SourceDistribution& source, double delta, int count) {
    std::vector<double> p(static_cast<std::size_t>(count), 0.0);
    const double inf = std::numeric_limits<double>::infinity();
    for (int k = 0; k < count; ++k) {
        const double a = k == 0 ? -inf : (k - 0.5) * delta;
        const double b = k == count - 1 ? inf : (k + 0.5) * delta;
        p[static_cast<std::size_t>(k)] = dist::continuous_mass(source, a, b);
    }
    const auto [p_lo, p_hi] = dist::endpoint_masses(source);
    if (p_lo > 0.0) p[static_cast<std::size_t>(quantize_level(source.lo(), delta, count))] += p_lo;
    if (p_hi > 0.0) p[static_cast<std::size_t>(quantize_level(source.hi(), delta, count))] += p_hi;
    return p;
}

/// Per-crossing penalties averaged over the tabulated cases, weighted by how
/// often the source law occupies each stage.
struct CaseWeights {
    double lateral_lsc = 0.0;   // E[nu_y^2 + nu_z^2 | LSC]
    double lateral_rsc = 0.0;   // E[nu_y^2 + nu_z^2 | RSC]
    double absorbing_lsc = 0.0; // share of LSC events absorbed by a curve end
    double absorbing_rsc = 0.0;
};

inline CaseWeights case_weights(const MappingConfig& config, const dist::SourceDistribution& source_s2,
                                const dist::SourceDistribution& source_s3) {
    ajscc::detail::require_3d(config);
    const int L1 = config.levels()[0], L2 = config.levels()[1];
    const double dy = config.deltas()[0], dz = config.deltas()[1];
    const auto py = level_probabilities(source_s2, dy, L1);
    const auto pz = level_probabilities(source_s3, dz, L2);
    CaseWeights w;
    for (int kz = 0; kz < L2; ++kz)
        for (int ky = 0; ky < L1; ++ky) {
            const double p = py[static_cast<std::size_t>(ky)] * pz[static_cast<std::size_t>(kz)];
            for (Side side : {Side::Left, Side::Right}) {
                const CaseRow row = table_row(case_label(ky, kz, L1, L2, side));
                const double lateral = row.dy * row.dy * dy * dy + row.dz * row.dz * dz * dz;
                if (side == Side::Left) {
                    w.lateral_lsc += p * lateral;
                    if (row.absorbing) w.absorbing_lsc += p;
                } else {
                    w.lateral_rsc += p * lateral;
                    if (row.absorbing) w.absorbing_rsc += p;
                }
            }
        }
    return w;
}

struct LowSnrOptions {
    /// Weight the crossing penalties by case frequency instead of charging
    /// dy^2 and a reflected nu_x on every crossing.
    bool case_weighted = false;
    /// Laws of s_2 and s_3 for the case weights; uniform on [0, R] if unset.
    std::optional<dist::SourceDistribution> source_s2;
    std::optional<dist::SourceDistribution> source_s3;
};

/// Medium/low-SNR sum MSE of the 3:1 curve: the high-SNR terms plus
/// Pr{LSC} E|e_LSC|^2 + Pr{RSC} E|e_RSC|^2 for single adjacent-stage crossings.
/// `source_s1` is the law of s_1 on [0, R_1].
inline MseBreakdown mse_low_3d(const MappingConfig& config, const NoiseModel& noise,
                               const dist::SourceDistribution& source_s1, const LowSnrOptions& options = {}) {
    MseBreakdown b = mse_high_3d(config, noise);
    const double d = config.stage_length();
    const double R1 = config.range(0);
    const auto source_x = dist::scaled(source_s1, d / R1);
    const CrossingMoments cm = crossing_error_moments(source_x, noise, config);
    const double to_source = (R1 / d) * (R1 / d);

    double lateral_l = config.deltas()[0] * config.deltas()[0];
    double lateral_r = lateral_l;
    double absorb_l = 0.0;
    double absorb_r = 0.0;
    if (options.case_weighted) {
        const auto s2 = options.source_s2.value_or(dist::SourceDistribution::uniform(0.0, config.range(1)));
        const auto s3 = options.source_s3.value_or(dist::SourceDistribution::uniform(0.0, config.range(2)));
        const CaseWeights w = case_weights(config, s2, s3);
        lateral_l = w.lateral_lsc;
        lateral_r = w.lateral_rsc;
        absorb_l = w.absorbing_lsc;
        absorb_r = w.absorbing_rsc;
    }
    const double nu_l = (1.0 - absorb_l) * cm.nu_x_lsc_sq + absorb_l * cm.nu_x_lsc_absorbed_sq;
    const double nu_r = (1.0 - absorb_r) * cm.nu_x_rsc_sq + absorb_r * cm.nu_x_rsc_absorbed_sq;
    b.lsc_term = cm.pr_lsc * (to_source * nu_l + lateral_l);
    b.rsc_term = cm.pr_rsc * (to_source * nu_r + lateral_r);
    return b;
}

/// mse_low_3d plus the ADC term on s_1.
inline MseBreakdown mse_low_digital(const MappingConfig& config, const NoiseModel& noise,
                                    const dist::SourceDistribution& source_s1, int n_bits,
                                    const LowSnrOptions& options = {}) {
    const double adc = adc_term(config.range(0), n_bits);
    MseBreakdown b = mse_low_3d(config, noise, source_s1, options);
    b.adc_term = adc;
    return b;
}

}  // namespace analytic
}  // namespace ajscc
