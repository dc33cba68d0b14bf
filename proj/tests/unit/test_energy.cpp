#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "wattsentry/baseline.hpp"
#include "wattsentry/energy.hpp"
#include "wattsentry/errors.hpp"

using namespace wattsentry;

namespace {

EnergySample sample_at(double t, double power) {
    EnergySample s;
    s.timestamp = t;
    s.voltage = 5.0;
    s.current = power / 5.0;
    s.power = power;
    return s;
}

std::vector<EnergySample> constant_train(double start, int n, double spacing,
                                         double power) {
    std::vector<EnergySample> out;
    for (int i = 0; i < n; ++i) {
        out.push_back(sample_at(start + spacing * i, power));
    }
    return out;
}

}  // namespace

TEST_CASE("sensor lines parse and reconstruct missing power") {
    auto s = parse_sensor_line("1.5,5.0,0.2,1.0");
    CHECK(s.timestamp == doctest::Approx(1.5));
    CHECK(s.voltage == doctest::Approx(5.0));
    CHECK(s.current == doctest::Approx(0.2));
    CHECK(s.power == doctest::Approx(1.0));
    CHECK_FALSE(s.consistency_warning);

    auto derived = parse_sensor_line("2.0,5.0,0.3,");
    CHECK(derived.power == doctest::Approx(1.5));

    // Reported power disagreeing with v*i by more than 10% gets flagged but
    // still parses.
    auto off = parse_sensor_line("3.0,5.0,0.2,2.0");
    CHECK(off.consistency_warning);
    CHECK(off.power == doctest::Approx(2.0));

    CHECK_THROWS_AS(parse_sensor_line("1.0,5.0,0.2"), ParseError);
    CHECK_THROWS_AS(parse_sensor_line("1.0,-5.0,0.2,1.0"), ParseError);
    CHECK_THROWS_AS(parse_sensor_line("1.0,5.0,abc,1.0"), ParseError);
}

TEST_CASE("constant power integrates to power times slot length") {
    // One sample a second over a 180 s slot at 1.3 W: the analytic energy is
    // P*T; the integration may differ by at most one spacing's worth.
    const double power = 1.3;
    auto train = constant_train(0.0, 180, 1.0, power);
    auto slot = integrate_slot(train, 0, 0.0, 180.0, 1.0);
    CHECK(std::fabs(slot.joules - power * 180.0) <= power * 1.0);
    CHECK(slot.sample_count == 180);
    CHECK(slot.mean_sample_joules == doctest::Approx(slot.joules / 180.0));
    CHECK_FALSE(slot.data_gap);
}

TEST_CASE("non-uniform spacing weighs each sample until the next") {
    // Hand-integrated: 2*(1-0) + 4*(2.5-1) + 8*(4-2.5) + 1*1 = 21 J over 4 samples.
    std::vector<EnergySample> train = {
        sample_at(0.0, 2.0), sample_at(1.0, 4.0), sample_at(2.5, 8.0),
        sample_at(4.0, 1.0)};
    auto slot = integrate_slot(train, 0, 0.0, 10.0, 1.0);
    CHECK(slot.joules == doctest::Approx(21.0));
    CHECK(slot.mean_sample_joules == doctest::Approx(5.25));
}

TEST_CASE("split integration sums to the whole within one boundary term") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> power_dist(0.1, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<EnergySample> train;
        double t = 0.0;
        while (t < 60.0) {
            train.push_back(sample_at(t, power_dist(rng)));
            t += 0.5 + 1.5 * std::uniform_real_distribution<double>(0, 1)(rng);
        }
        const auto whole = integrate_slot(train, 0, 0.0, 60.0, 1.0);

        const std::size_t cut = train.size() / 2;
        std::vector<EnergySample> left(train.begin(), train.begin() + cut);
        std::vector<EnergySample> right(train.begin() + cut, train.end());
        const double split_at = right.empty() ? 30.0 : right.front().timestamp;

        double sum = 0.0;
        if (!left.empty()) {
            sum += integrate_slot(left, 0, 0.0, split_at, 1.0).joules;
        }
        if (!right.empty()) {
            std::vector<EnergySample> shifted = right;
            sum += integrate_slot(shifted, 0, split_at, 60.0 - split_at, 1.0).joules;
        }
        // The cut replaces one inter-sample gap with a nominal spacing.
        const double bound = 3.0 * 2.0;  // max power * max gap
        CHECK(std::fabs(whole.joules - sum) <= bound);
    }
}

TEST_CASE("integration is linear in power") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> power_dist(0.1, 2.0);
    std::vector<EnergySample> a, b, both;
    for (int i = 0; i < 120; ++i) {
        const double t = 0.5 * i;
        const double pa = power_dist(rng);
        const double pb = power_dist(rng);
        a.push_back(sample_at(t, pa));
        b.push_back(sample_at(t, pb));
        both.push_back(sample_at(t, pa + pb));
    }
    const double ja = integrate_slot(a, 0, 0.0, 60.0, 1.0).joules;
    const double jb = integrate_slot(b, 0, 0.0, 60.0, 1.0).joules;
    const double jab = integrate_slot(both, 0, 0.0, 60.0, 1.0).joules;
    CHECK(jab == doctest::Approx(ja + jb).epsilon(1e-9));
}

TEST_CASE("gaps mark the slot instead of confirming on thin data") {
    auto empty = integrate_slot({}, 3, 540.0, 180.0, 1.0);
    CHECK(empty.joules == doctest::Approx(0.0));
    CHECK(empty.data_gap);
    CHECK(empty.sample_count == 0);

    // A 6-second hole inside an otherwise 1 Hz train exceeds 5 spacings.
    std::vector<EnergySample> holed;
    for (int i = 0; i < 30; ++i) holed.push_back(sample_at(i, 1.0));
    for (int i = 36; i < 60; ++i) holed.push_back(sample_at(i, 1.0));
    CHECK(integrate_slot(holed, 0, 0.0, 60.0, 1.0).data_gap);

    // Leading and trailing holes count too.
    auto leading = constant_train(10.0, 50, 1.0, 1.0);
    CHECK(integrate_slot(leading, 0, 0.0, 60.0, 1.0).data_gap);
    auto trailing = constant_train(0.0, 50, 1.0, 1.0);
    CHECK(integrate_slot(trailing, 0, 0.0, 60.0, 1.0).data_gap);

    auto dense = constant_train(0.0, 60, 1.0, 1.0);
    CHECK_FALSE(integrate_slot(dense, 0, 0.0, 60.0, 1.0).data_gap);
}

TEST_CASE("samples outside the slot or out of order are rejected") {
    auto outside = constant_train(100.0, 5, 1.0, 1.0);
    CHECK_THROWS_AS(integrate_slot(outside, 0, 0.0, 60.0, 1.0),
                    MalformedStreamError);

    std::vector<EnergySample> unordered = {sample_at(5.0, 1.0),
                                           sample_at(2.0, 1.0)};
    CHECK_THROWS_AS(integrate_slot(unordered, 0, 0.0, 60.0, 1.0),
                    MalformedStreamError);
}

TEST_CASE("normalize_energy mirrors the rate normalization") {
    CHECK(normalize_energy(0.0, 0.0, 1.42) == doctest::Approx(0.0));
    CHECK(normalize_energy(1.42, 0.0, 1.42) == doctest::Approx(1.0));
    CHECK(normalize_energy(0.71, 0.0, 1.42) == doctest::Approx(0.5));
    CHECK(normalize_energy(2.0, 0.0, 1.42) == doctest::Approx(1.0));
    CHECK_THROWS_AS(normalize_energy(1.0, 1.0, 1.0), InvalidBaselineError);
}

TEST_CASE("energy accumulator emits slot footprints on the shared grid") {
    const BaselineProfile profile = default_profile("dev");
    EnergyAccumulator acc("dev", 10.0, 1.0, &profile);

    std::vector<EnergySlot> closed;
    for (int i = 0; i < 25; ++i) {
        for (auto& s : acc.accumulate(sample_at(i, 1.0))) closed.push_back(s);
    }
    REQUIRE(closed.size() == 2);
    CHECK(closed[0].slot_index == 0);
    CHECK(closed[0].sample_count == 10);
    CHECK(closed[0].joules == doctest::Approx(10.0));
    CHECK(closed[0].mean_sample_joules == doctest::Approx(1.0));
    CHECK_FALSE(closed[0].data_gap);
    // Against the default [0, 1.42] extrema.
    CHECK(closed[0].normalized == doctest::Approx(1.0 / 1.42));

    auto tail = acc.flush();
    REQUIRE(tail.has_value());
    CHECK(tail->slot_index == 2);
    CHECK(tail->sample_count == 5);

    // A silent stretch turns into gap-flagged empty slots.
    EnergyAccumulator quiet("dev", 10.0, 1.0);
    quiet.accumulate(sample_at(1.0, 1.0));
    auto gaps = quiet.advance_to(40.0);
    REQUIRE(gaps.size() == 3);
    CHECK(gaps[1].data_gap);
    CHECK(gaps[1].joules == doctest::Approx(0.0));
}
