#include "ajscc/analytic.hpp"
#include "ajscc/crossing.hpp"
#include "ajscc/mc.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <set>

using namespace ajscc;
using dist::SourceDistribution;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<SourceDistribution> uniform_sources(const MappingConfig& c) {
    std::vector<SourceDistribution> s;
    for (double r : c.ranges()) s.push_back(SourceDistribution::uniform(0, r));
    return s;
}

struct Constructed {
    CrossingCase classified;
    std::array<double, 3> decoded;  // actual (x_r - x_s, y_r - y_s, z_r - z_s)
};

// Sends stage (k_y, k_z) at position x_s through noise n_x along the stage's
// own x axis, decodes, and classifies.
Constructed construct(const MappingConfig& c, int ky, int kz, double x_s, double n_x) {
    const int levels[2] = {ky, kz};
    const auto t = stage_index(c, levels);
    const double m = arc_length(c.stage_length(), t, x_s);
    const double noise_m = (t % 2 == 0) ? n_x : -n_x;
    const LatticePoint tx{x_s, {ky, kz}};
    const LatticePoint rx = locate(c, MappedScalar{m + noise_m});
    Constructed out;
    out.classified = classify_crossing(c, tx, rx, n_x);
    out.decoded = {rx.x - x_s, (rx.level_indices[0] - ky) * c.deltas()[0], (rx.level_indices[1] - kz) * c.deltas()[1]};
    return out;
}

struct Position {
    int ky;
    int kz;
};

// First stage position carrying `label`'s sub-case.
Position position_of(const MappingConfig& c, CrossingLabel label) {
    for (int kz = 0; kz < c.levels()[1]; ++kz)
        for (int ky = 0; ky < c.levels()[0]; ++ky)
            if (case_label(ky, kz, c.levels()[0], c.levels()[1], side_of(label)) == label) return {ky, kz};
    throw std::logic_error("label not present");
}

bool same_report(const mc::SimulationReport& a, const mc::SimulationReport& b) {
    return a.mse_per_dim == b.mse_per_dim && std::memcmp(&a.mse_sum, &b.mse_sum, sizeof(double)) == 0 &&
           std::memcmp(&a.ci_halfwidth, &b.ci_halfwidth, sizeof(double)) == 0 &&
           a.crossing_counts == b.crossing_counts && a.lsc_events == b.lsc_events && a.rsc_events == b.rsc_events &&
           a.table_mismatch_counts == b.table_mismatch_counts && a.trials_run == b.trials_run;
}

}  // namespace

TEST_CASE("tabulated rows for the worked examples") {
    const auto c = build_config(3, {1, 1, 1}, {4, 4}, 160);  // d = 10
    const double d = c.stage_length();
    const double dy = c.deltas()[0], dz = c.deltas()[1];

    // Interior stage, odd 1-based stage number (k_y = 2), interior plane.
    auto e = construct(c, 2, 1, 3.0, -4.0);
    CHECK(e.classified.label == CrossingLabel::a1_LSC);
    CHECK_THAT(e.classified.nu[0], WithinAbs(4.0 - 6.0, 1e-12));
    CHECK_THAT(e.classified.nu[1], WithinAbs(-dy, 1e-15));
    CHECK(e.classified.nu[2] == 0.0);

    // Top stage of an odd-numbered interior plane (k_z = 2 is plane 3).
    e = construct(c, 3, 2, 2.0, -5.0);
    CHECK(e.classified.label == CrossingLabel::b1_LSC);
    CHECK_THAT(e.classified.nu[0], WithinAbs(5.0 - 4.0, 1e-12));
    CHECK(e.classified.nu[1] == 0.0);
    CHECK_THAT(e.classified.nu[2], WithinAbs(dz, 1e-15));

    // Bottom stage of the first plane: the curve start absorbs.
    e = construct(c, 0, 0, 2.5, -4.0);
    CHECK(e.classified.label == CrossingLabel::c1_LSC);
    CHECK_THAT(e.classified.nu[0], WithinAbs(-2.5, 1e-12));
    CHECK(e.classified.nu[1] == 0.0);
    CHECK(e.classified.nu[2] == 0.0);

    // No crossing.
    e = construct(c, 1, 1, 5.0, 2.0);
    CHECK(e.classified.label == CrossingLabel::None);
    CHECK(e.classified.nu == std::array<double, 3>{2.0, 0.0, 0.0});

    // Two stages away.
    e = construct(c, 1, 1, 5.0, -5.0 - 1.5 * d);
    CHECK(e.classified.label == CrossingLabel::Multi);
}

TEST_CASE("every tabulated case is realized by decoding on an even-level curve") {
    const auto c = build_config(3, {1, 2, 3}, {4, 4}, 160);
    const double d = c.stage_length();
    CHECK(reachable_labels(c).size() == kTabulatedCases);
    for (std::size_t i = 0; i < kTabulatedCases; ++i) {
        const auto label = static_cast<CrossingLabel>(i);
        const auto [ky, kz] = position_of(c, label);
        for (double x_s : {0.0, 0.2 * d, 0.5 * d, d}) {
            for (double over : {1e-6, 0.1 * d, 0.7 * d}) {
                const double n_x = side_of(label) == Side::Left ? -x_s - over : d - x_s + over;
                const auto e = construct(c, ky, kz, x_s, n_x);
                INFO(to_string(label) << " x_s=" << x_s << " over=" << over);
                REQUIRE(e.classified.label == label);
                for (int a = 0; a < 3; ++a) CHECK_THAT(e.decoded[a], WithinAbs(e.classified.nu[a], 1e-9));
            }
        }
    }
}

TEST_CASE("odd level counts realize only part of the table") {
    const auto c = build_config(3, {1, 1, 1}, {5, 4}, 200);
    const auto reach = reachable_labels(c);
    using L = CrossingLabel;
    const std::vector<L> expected{L::a1_LSC, L::a1_RSC, L::a2_LSC, L::a2_RSC, L::b2_LSC, L::b2_RSC,
                                  L::b4_LSC, L::b4_RSC, L::c1_LSC, L::c1_RSC, L::c2_LSC, L::c2_RSC};
    CHECK(reach == expected);
    const double d = c.stage_length();
    for (std::size_t i = 0; i < kTabulatedCases; ++i) {
        const auto label = static_cast<CrossingLabel>(i);
        const auto [ky, kz] = position_of(c, label);
        const double n_x = side_of(label) == Side::Left ? -0.3 * d - 0.2 * d : d - 0.3 * d + 0.2 * d;
        const auto e = construct(c, ky, kz, 0.3 * d, n_x);
        bool match = true;
        for (int a = 0; a < 3; ++a) match = match && std::fabs(e.decoded[a] - e.classified.nu[a]) < 1e-9;
        const bool reachable = std::find(reach.begin(), reach.end(), label) != reach.end();
        CHECK(match == (reachable || geometric_row(c, ky, kz, side_of(label)) == table_row(label)));
    }
}

TEST_CASE("classifier rejects malformed input") {
    const auto c2 = build_config(2, {1, 1}, {4}, 40);
    CHECK_THROWS_AS(classify_crossing(c2, {0, {0}}, {0, {0}}, 0.0), std::invalid_argument);
    const auto c3 = build_config(3, {1, 1, 1}, {4, 4}, 160);
    CHECK_THROWS_AS(classify_crossing(c3, {0, {0}}, {0, {0, 0}}, 0.0), std::invalid_argument);
}

TEST_CASE("noise-free simulation is a quantizer") {
    const auto c = build_config(3, {1, 1, 2}, {10, 6}, 1000);
    const mc::SimulationSpec spec{c, {0.0}, uniform_sources(c), Sensor::analog(), 1000000, 4};
    const auto r = mc::run(spec);
    CHECK(r.mse_per_dim[0] <= 1e-18);
    CHECK_THAT(r.mse_per_dim[1], WithinRel(std::pow(c.deltas()[0], 2) / 12, 0.01));
    CHECK_THAT(r.mse_per_dim[2], WithinRel(std::pow(c.deltas()[1], 2) / 12, 0.01));
    CHECK(r.lsc_events == 0);
    CHECK(r.crossing_counts[static_cast<std::size_t>(CrossingLabel::None)] == spec.trials);
    CHECK_THAT(r.mse_sum, WithinRel(r.mse_per_dim[0] + r.mse_per_dim[1] + r.mse_per_dim[2], 1e-12));
}

TEST_CASE("simulated MSE matches the high-SNR formula at the reference point") {
    const auto c = build_config(3, {1, 1, 1}, {10, 10}, 1000);
    const auto r = mc::run({c, {1.0}, uniform_sources(c), Sensor::analog(), 1000000, 17});
    CHECK_THAT(r.mse_sum, WithinRel(1.2058e-2, 0.02));
    std::uint64_t counted = 0;
    for (auto v : r.crossing_counts) counted += v;
    CHECK(counted == r.trials_run);
}

TEST_CASE("digital minus analog at zero noise is the ADC error power on s1") {
    const auto c = build_config(3, {1, 1, 1}, {10, 10}, 1000);
    const mc::SimulationSpec spec{c, {0.0}, uniform_sources(c), Sensor::analog(), 400000, 8};
    auto digital = spec;
    digital.sensor = Sensor::digital(3);
    const auto a = mc::run(spec);
    const auto b = mc::run(digital);
    CHECK_THAT(b.mse_per_dim[0] - a.mse_per_dim[0], WithinRel(1.0 / 588, 0.02));

    // The outermost ADC levels sit on stage edges and decode into the
    // neighbouring stage half the time, so the total gap exceeds the ADC term.
    const auto g = mc::paired_gap(spec, 3);
    CHECK(g.gap - 1.0 / 588 > 3 * g.gap_ci_halfwidth);
    CHECK_THAT(g.digital_mse, WithinRel(b.mse_sum, 1e-12));
    CHECK_THAT(g.analog_mse, WithinRel(a.mse_sum, 1e-12));
}

TEST_CASE("reports do not depend on the worker count") {
    const auto c = build_config(3, {1, 1, 1}, {5, 4}, 200);
    const mc::SimulationSpec spec{c, {3.0}, uniform_sources(c), Sensor::digital(4), 50000, 99};
    const auto a = mc::run(spec, {1});
    CHECK(same_report(a, mc::run(spec, {3})));
    CHECK(same_report(a, mc::run(spec, {8})));
    CHECK(same_report(a, mc::run(spec)));
    const auto g1 = mc::paired_gap(spec, 3, {1});
    const auto g4 = mc::paired_gap(spec, 3, {4});
    CHECK(std::memcmp(&g1.gap, &g4.gap, sizeof(double)) == 0);
}

TEST_CASE("invalid simulation specs are rejected") {
    const auto c = build_config(3, {1, 1, 1}, {4, 4}, 160);
    CHECK_THROWS_AS(mc::run({c, {1.0}, uniform_sources(c), Sensor::analog(), 0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(mc::run({c, {1.0}, {SourceDistribution::uniform(0, 1)}, Sensor::analog(), 10, 1}),
                    std::invalid_argument);
    CHECK_THROWS_AS(mc::run({c, {-1.0}, uniform_sources(c), Sensor::analog(), 10, 1}), std::invalid_argument);
    CHECK_THROWS_AS(mc::paired_gap({c, {1.0}, uniform_sources(c), Sensor::analog(), 10, 1}, 0), std::invalid_argument);
}

TEST_CASE("simulated single crossings reproduce their tabulated displacement") {
    const auto c = build_config(3, {1, 1, 1}, {4, 4}, 160);
    const auto r = mc::run({c, {c.stage_length() / 4}, uniform_sources(c), Sensor::analog(), 2000000, 5});
    for (std::size_t l = 0; l < kTabulatedCases; ++l) {
        INFO(to_string(static_cast<CrossingLabel>(l)));
        CHECK(r.crossing_counts[l] > 0);
        CHECK(r.table_mismatch_counts[l] == 0);
    }
}

TEST_CASE("empirical crossing rates") {
    const auto c = build_config(3, {1, 1, 1}, {10, 10}, 1000);
    auto rates = mc::empirical_crossing_rates({c, {0.0}, uniform_sources(c), Sensor::analog(), 10000, 1});
    CHECK(rates.pr_lsc_hat == 0.0);
    CHECK(rates.pr_rsc_hat == 0.0);

    // d = 1 and R_1 = 1 make the stage position law the source law.
    const auto unit = build_config(2, {1, 1}, {2}, 2);
    const mc::SimulationSpec spec{unit, {0.5}, uniform_sources(unit), Sensor::analog(), 2000000, 3};
    rates = mc::empirical_crossing_rates(spec);
    const double p = analytic::pr_lsc(SourceDistribution::uniform(0, 1), {0.5}, 1);
    const double sd = std::sqrt(p * (1 - p) / spec.trials);
    CHECK(std::fabs(rates.pr_lsc_hat - p) <= 3 * sd);
    CHECK(std::fabs(rates.pr_lsc_hat - rates.pr_rsc_hat) <= 3 * std::sqrt(2.0) * sd);
}

TEST_CASE("confidence intervals cover the high-SNR value") {
    // sigma << d keeps crossings below 1e-5, where the formula is exact.
    const auto c = build_config(3, {1, 1, 1}, {10, 10}, 1000);
    const double truth = analytic::mse_high_3d(c, {1e-3}).total();
    int covered = 0;
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        const auto r = mc::run({c, {1e-3}, uniform_sources(c), Sensor::analog(), 10000, 1000 + seed});
        covered += std::fabs(r.mse_sum - truth) <= r.ci_halfwidth;
    }
    CHECK(covered >= 360);
}

TEST_CASE("worker count honours AJSCC_THREADS") {
    ::setenv("AJSCC_THREADS", "3", 1);
    CHECK(worker_count() == 3);
    ::setenv("AJSCC_THREADS", "junk", 1);
    CHECK(worker_count() >= 1);
    ::unsetenv("AJSCC_THREADS");
}
