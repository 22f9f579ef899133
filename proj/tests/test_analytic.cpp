#include "ajscc/analytic.hpp"
#include "ajscc/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace ajscc;
using dist::SourceDistribution;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const MappingConfig kRef = build_config(3, {1, 1, 1}, {10, 10}, 1000);

// Pr{s + n < 0} for s ~ Uniform(0, d), integrated by parts in closed form.
double uniform_lsc_closed_form(double d, double sigma) {
    const double a = d / sigma;
    const double phi0 = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    return sigma / d * (a * normal_cdf(-a) + phi0 - normal_pdf(a));
}

}  // namespace

TEST_CASE("SNR conversion uses the mean mapped power") {
    CHECK_THAT(std::pow(analytic::snr_to_sigma(kRef, SnrSpec::mean_mapped_power(30)).sigma_n, 2),
               WithinRel(1e6 / 3 * 1e-3, 1e-12));
    CHECK(analytic::snr_to_sigma(kRef, SnrSpec::explicit_sigma(2.5)).sigma_n == 2.5);
    CHECK(analytic::snr_to_sigma(kRef, SnrSpec::mean_mapped_power(INFINITY)).sigma_n == 0.0);
    CHECK_THROWS_AS(analytic::snr_to_sigma(kRef, SnrSpec::explicit_sigma(-1)), std::invalid_argument);
}

TEST_CASE("high-SNR 3-D formula term by term") {
    auto b = analytic::mse_high_3d(kRef, {0.0});
    CHECK_THAT(b.total(), WithinRel(1.0 / 486, 1e-14));
    b = analytic::mse_high_3d(kRef, {1.0});
    CHECK_THAT(b.noise_term, WithinRel(0.01, 1e-14));
    CHECK_THAT(b.total(), WithinAbs(1.20576e-2, 1e-6));
    CHECK(b.lsc_term == 0.0);
    CHECK(b.rsc_term == 0.0);
    CHECK(b.adc_term == 0.0);

    const auto worst = analytic::mse_high_3d(build_config(3, {1, 2, 3}, {2, 2}, 100), {0.0});
    CHECK_THAT(worst.quant_terms[0], WithinRel(4.0 / 12, 1e-14));
    CHECK_THAT(worst.quant_terms[1], WithinRel(9.0 / 12, 1e-14));
    CHECK_THROWS_AS(analytic::mse_high_3d(build_config(2, {1, 1}, {4}, 10), {0.0}), std::invalid_argument);
}

TEST_CASE("N-D formula reduces to the 3-D one and matches the worked values") {
    for (const auto& levels : {std::vector<int>{10, 10}, {3, 17}, {40, 2}}) {
        const auto c = build_config(3, {1, 2, 0.5}, levels, 3000);
        const auto a = analytic::mse_high_3d(c, {1.7});
        const auto b = analytic::mse_high_nd(c, {1.7});
        CHECK_THAT(a.total(), WithinRel(b.total(), 1e-14));
        CHECK_THAT(a.noise_term, WithinRel(b.noise_term, 1e-14));
    }
    CHECK_THAT(analytic::mse_high_nd(build_config(2, {1, 1}, {10}, 500), {0.0}).total(), WithinRel(1.0 / 972, 1e-14));
    const auto b4 = analytic::mse_high_nd(build_config(4, {1, 1, 1, 1}, {5, 5, 5}, 3000), {1.0});
    CHECK_THAT(b4.noise_term, WithinRel(std::pow(125.0 / 3000, 2), 1e-14));
    REQUIRE(b4.quant_terms.size() == 3);
    for (double q : b4.quant_terms) CHECK_THAT(q, WithinRel(1.0 / 12 / 16, 1e-14));
}

TEST_CASE("digital sensing adds exactly the ADC term") {
    CHECK_THAT(analytic::adc_term(1, 3), WithinRel(1.0 / (12 * 49), 1e-15));
    CHECK_THAT(analytic::adc_term(1, 5), WithinRel(1.0 / (12 * 961), 1e-15));
    CHECK(analytic::adc_term(1, 16) < 1e-10);
    CHECK_THROWS_AS(analytic::adc_term(1, 0), std::invalid_argument);
    CHECK_THROWS_AS(analytic::mse_high_digital(kRef, {1.0}, 17), std::invalid_argument);
    CHECK_THROWS_AS(analytic::mse_low_digital(kRef, {1.0}, SourceDistribution::uniform(0, 1), 0), std::invalid_argument);

    const auto u = SourceDistribution::uniform(0, 1);
    for (double sigma : {0.0, 0.3, 2.0}) {
        for (int bits : {1, 3, 5, 16}) {
            const auto a = analytic::mse_high_3d(kRef, {sigma});
            const auto d = analytic::mse_high_digital(kRef, {sigma}, bits);
            CHECK(d.adc_term == analytic::adc_term(1, bits));
            CHECK(d.noise_term == a.noise_term);
            CHECK(d.quant_terms == a.quant_terms);
            CHECK_THAT(d.total() - a.total(), WithinAbs(analytic::adc_term(1, bits), 1e-15 * d.total()));
            if (sigma > 0) {
                const auto la = analytic::mse_low_3d(kRef, {sigma}, u);
                const auto ld = analytic::mse_low_digital(kRef, {sigma}, u, bits);
                CHECK(ld.lsc_term == la.lsc_term);
                CHECK(ld.rsc_term == la.rsc_term);
                CHECK_THAT(ld.total() - la.total(), WithinAbs(analytic::adc_term(1, bits), 1e-15 * ld.total()));
            }
        }
    }
    const auto l3 = analytic::mse_low_digital(kRef, {1.0}, u, 3).total();
    const auto l5 = analytic::mse_low_digital(kRef, {1.0}, u, 5).total();
    CHECK_THAT(l3 - l5, WithinRel(1.0 / 12 * (1.0 / 49 - 1.0 / 961), 1e-9));
    CHECK_THAT(analytic::mse_low_digital(kRef, {2.0}, u, 16).total(),
               WithinRel(analytic::mse_low_3d(kRef, {2.0}, u).total(), 1e-9));
}

TEST_CASE("uniform crossing probability matches its closed form") {
    for (double d : {1.0, 10.0}) {
        for (double sigma : {1e-3, 0.05, 0.5, 1.0, 3.0, 40.0}) {
            const auto u = SourceDistribution::uniform(0, d);
            const double lsc = analytic::pr_lsc(u, {sigma}, d);
            CHECK_THAT(lsc, WithinAbs(uniform_lsc_closed_form(d, sigma), 1e-9));
            CHECK_THAT(analytic::pr_rsc(u, {sigma}, d), WithinAbs(lsc, 1e-12));
        }
    }
    CHECK(analytic::pr_lsc(SourceDistribution::uniform(0, 1), {0.0}, 1) == 0.0);
    CHECK(analytic::pr_lsc(SourceDistribution::uniform(0, 1), {1e-9}, 1) < 1e-8);
    CHECK_THROWS_AS(analytic::pr_lsc(SourceDistribution::uniform(0, 2), {1.0}, 1), std::invalid_argument);
}

TEST_CASE("crossing probabilities agree with direct sampling") {
    const double d = 1.0;
    const int n = 1000000;
    for (const auto& law : {SourceDistribution::uniform(0, 1), SourceDistribution::dbg(0, 1, 1, 0.5),
                            SourceDistribution::dbg(0, 1, 0, 0.1), SourceDistribution::dbg(0, 1, 0.5, 1e-4)}) {
        const double sigma = 0.5;
        CounterStream g(21, 0);
        int lsc = 0, rsc = 0;
        for (int i = 0; i < n; ++i) {
            const double s = dist::sample(law, g);
            const double noise = sigma * standard_normal(g);
            lsc += s + noise < 0;
            rsc += s + noise > d;
        }
        const double pl = analytic::pr_lsc(law, {sigma}, d);
        const double pr = analytic::pr_rsc(law, {sigma}, d);
        CHECK(std::fabs(lsc / double(n) - pl) <= 3 * std::sqrt(pl * (1 - pl) / n));
        CHECK(std::fabs(rsc / double(n) - pr) <= 3 * std::sqrt(pr * (1 - pr) / n));
        CHECK(pl + pr <= 1.0);
    }
    const auto right = SourceDistribution::dbg(0, 1, 1, 0.3);
    CHECK(analytic::pr_rsc(right, {0.3}, 1) > analytic::pr_lsc(right, {0.3}, 1));
}

TEST_CASE("probabilities stay in range across laws and noise levels") {
    for (double sigma : {1e-6, 1e-2, 0.3, 1.0, 10.0, 1e4})
        for (const auto& law : {SourceDistribution::uniform(0, 2), SourceDistribution::dbg(0, 2, 0, 0.01),
                                SourceDistribution::dbg(0, 2, 2, 5), SourceDistribution::dbg(0, 2, 1, 1e-7)}) {
            const double pl = analytic::pr_lsc(law, {sigma}, 2);
            const double pr = analytic::pr_rsc(law, {sigma}, 2);
            CHECK(pl >= 0.0);
            CHECK(pr >= 0.0);
            CHECK(pl + pr <= 1.0 + 1e-12);
        }
}

TEST_CASE("crossing second moments agree with sampled crossing events") {
    const auto c = build_config(3, {1, 1, 1}, {10, 10}, 100);  // d = 1, delta_y = 1/9
    const double d = c.stage_length();
    const double dy2 = c.deltas()[0] * c.deltas()[0];
    const int n = 2000000;
    for (const auto& law : {SourceDistribution::uniform(0, 1), SourceDistribution::dbg(0, 1, 0.7, 0.4)}) {
        const double sigma = 0.5;
        const auto m = analytic::crossing_error_moments(law, {sigma}, c);
        CounterStream g(33, 0);
        double lsc_sum = 0.0, rsc_sum = 0.0, lsc_abs = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = dist::sample(law, g);
            const double noise = sigma * standard_normal(g);
            if (noise < -x) {
                lsc_sum += (-noise - 2 * x) * (-noise - 2 * x) + dy2;
                lsc_abs += x * x;
            } else if (noise > d - x) {
                rsc_sum += (2 * d - 2 * x - noise) * (2 * d - 2 * x - noise) + dy2;
            }
        }
        CHECK_THAT(m.pr_lsc * m.e_lsc_sq, WithinRel(lsc_sum / n, 0.02));
        CHECK_THAT(m.pr_rsc * m.e_rsc_sq, WithinRel(rsc_sum / n, 0.02));
        CHECK_THAT(m.pr_lsc * m.nu_x_lsc_absorbed_sq, WithinRel(lsc_abs / n, 0.02));
        CHECK_THAT(m.e_lsc_sq - m.nu_x_lsc_sq, WithinRel(dy2, 1e-12));
    }
    const auto sym = analytic::crossing_error_moments(SourceDistribution::uniform(0, 1), {0.3}, c);
    CHECK_THAT(sym.e_lsc_sq, WithinRel(sym.e_rsc_sq, 1e-9));
    const auto none = analytic::crossing_error_moments(SourceDistribution::uniform(0, 1), {0.0}, c);
    CHECK(none.pr_lsc == 0.0);
    CHECK(none.e_lsc_sq == 0.0);
    const auto tiny = analytic::crossing_error_moments(SourceDistribution::dbg(0, 1, 0.5, 1e-3), {1e-3}, c);
    CHECK(tiny.pr_lsc == 0.0);
    CHECK(tiny.e_lsc_sq == 0.0);
}

TEST_CASE("low-SNR MSE reduces to the high-SNR one as noise vanishes") {
    const auto u = SourceDistribution::uniform(0, 1);
    CHECK(analytic::mse_low_3d(kRef, {0.0}, u).total() == analytic::mse_high_3d(kRef, {0.0}).total());
    const double d = kRef.stage_length();
    double prev = INFINITY;
    for (double sigma = d / 10; sigma > 1e-4; sigma /= 1.5) {
        const double gap = analytic::mse_low_3d(kRef, {sigma}, u).total() - analytic::mse_high_3d(kRef, {sigma}).total();
        CHECK(gap >= 0.0);
        CHECK(gap <= prev);
        prev = gap;
    }
    CHECK(prev < 1e-6);
    for (double sigma : {0.1, 1.0, 10.0, 100.0}) {
        const auto lo = analytic::mse_low_3d(kRef, {sigma}, u);
        CHECK(lo.total() >= analytic::mse_high_3d(kRef, {sigma}).total());
        CHECK(lo.lsc_term >= 0.0);
        CHECK(lo.rsc_term >= 0.0);
    }
    CHECK_THAT(analytic::mse_low_digital(kRef, {0.0}, u, 4).total(),
               WithinRel(analytic::mse_high_digital(kRef, {0.0}, 4).total(), 1e-15));
}

TEST_CASE("level swap symmetry") {
    const auto u = SourceDistribution::uniform(0, 1);
    for (auto [l1, l2] : {std::pair{4, 9}, std::pair{12, 3}, std::pair{20, 21}}) {
        const auto a = build_config(3, {1, 2, 2}, {l1, l2}, 3000);
        const auto b = build_config(3, {1, 2, 2}, {l2, l1}, 3000);
        for (double sigma : {0.5, 5.0, 50.0}) {
            CHECK_THAT(analytic::mse_high_3d(a, {sigma}).total(), WithinRel(analytic::mse_high_3d(b, {sigma}).total(), 1e-14));
            // The crossing terms charge dy^2 on every crossing, so swapping
            // moves exactly (Pr{LSC} + Pr{RSC}) (dy^2 - dz^2) between curves.
            const auto m = analytic::crossing_error_moments(dist::scaled(u, a.stage_length()), {sigma}, a);
            const double dy2 = a.deltas()[0] * a.deltas()[0];
            const double dz2 = a.deltas()[1] * a.deltas()[1];
            const double shift = (m.pr_lsc + m.pr_rsc) * (dy2 - dz2);
            const double diff = analytic::mse_low_3d(a, {sigma}, u).total() - analytic::mse_low_3d(b, {sigma}, u).total();
            CHECK_THAT(diff, WithinAbs(shift, 1e-12 + 1e-9 * std::fabs(shift)));
        }
    }
}

TEST_CASE("level probabilities and case weights") {
    const auto p = analytic::level_probabilities(SourceDistribution::dbg(0, 1, 0.3, 0.4), 0.25, 5);
    double total = 0.0;
    for (double v : p) total += v;
    CHECK_THAT(total, WithinAbs(1.0, 1e-12));
    const auto q = analytic::level_probabilities(SourceDistribution::uniform(0, 1), 0.25, 5);
    CHECK_THAT(q[0], WithinRel(0.125, 1e-14));
    CHECK_THAT(q[2], WithinRel(0.25, 1e-14));

    // 2 x 2 curve: every stage is a first/last-plane edge stage.
    const auto c = build_config(3, {1, 1, 2}, {2, 2}, 8);
    const auto u1 = SourceDistribution::uniform(0, 1);
    const auto u2 = SourceDistribution::uniform(0, 2);
    const auto w = analytic::case_weights(c, u1, u2);
    CHECK_THAT(w.lateral_lsc, WithinRel(0.5 * 4.0, 1e-14));   // c3/c4 move one plane (dz = 2)
    CHECK_THAT(w.absorbing_lsc, WithinRel(0.5, 1e-14));        // c1/c2 absorb
    CHECK_THAT(w.lateral_rsc, WithinRel(1.0, 1e-14));          // every RSC moves one level in y
    CHECK(w.absorbing_rsc == 0.0);
}

TEST_CASE("case-weighted mode keeps the crossing probabilities") {
    const auto u = SourceDistribution::uniform(0, 1);
    analytic::LowSnrOptions opts;
    opts.case_weighted = true;
    const auto a = analytic::mse_low_3d(kRef, {2.0}, u);
    const auto b = analytic::mse_low_3d(kRef, {2.0}, u, opts);
    CHECK(a.noise_term == b.noise_term);
    CHECK(b.lsc_term > 0.0);
    CHECK(b.lsc_term != a.lsc_term);
    // Interior stages dominate a 10 x 10 curve, so the two modes stay close.
    CHECK_THAT(b.total(), WithinRel(a.total(), 0.05));
}
