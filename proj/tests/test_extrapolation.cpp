#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "uitf/errors.hpp"
#include "uitf/extrapolation.hpp"
#include "uitf/rope.hpp"

using namespace uitf;
using extrap::Axis;
using rope::FrequencySchedule;
using rope::RopeConfig;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

FrequencySchedule from_periods(std::vector<double> periods, double base = 10000.0) {
    std::vector<double> freqs;
    freqs.reserve(periods.size());
    for (double t : periods) {
        freqs.push_back(kTwoPi / t);
    }
    return {RopeConfig{base, periods.size() * 2, 1}, std::move(freqs), {}};
}

// periods {2*pi, 64, 72, huge}: two near-dominant frequencies that must be
// corrected in sequence when extrapolating 64 -> 256
FrequencySchedule two_period_fixture() {
    return from_periods({kTwoPi, 64.0, 72.0, 6.2832e4});
}
} // namespace

TEST_CASE("scale_pi divides every frequency and records the changes") {
    const FrequencySchedule base = rope::build_schedule({10000.0, 8, 1});
    const FrequencySchedule scaled = extrap::scale_pi(base, 4.0);
    REQUIRE(scaled.size() == base.size());
    for (std::size_t j = 0; j < base.size(); ++j) {
        CHECK(scaled.freqs()[j] == base.freqs()[j] / 4.0);
    }
    CHECK(scaled.corrections().size() == 4);

    const FrequencySchedule identity = extrap::scale_pi(base, 1.0);
    CHECK(identity.freqs() == base.freqs());
    CHECK(identity.corrections().empty());

    CHECK_THROWS_AS(extrap::scale_pi(base, 0.5), ArgumentError);
    CHECK_THROWS_AS(extrap::scale_pi(base, 0.0), ArgumentError);
}

TEST_CASE("scale_ntk pins the first frequency and meets PI at the last") {
    const RopeConfig config{10000.0, 8, 1};
    const FrequencySchedule base = rope::build_schedule(config);
    for (double s : {1.0, 1.5, 2.0, 4.0}) {
        const FrequencySchedule ntk = extrap::scale_ntk(config, s);
        const FrequencySchedule pi = extrap::scale_pi(base, s);
        CHECK(ntk.freqs().front() == 1.0);
        CHECK(ntk.freqs().back() ==
              doctest::Approx(pi.freqs().back()).epsilon(1e-13));
        // interior dims interpolate between no scaling and full interpolation
        for (std::size_t j = 0; j < ntk.size(); ++j) {
            CHECK(ntk.freqs()[j] >= pi.freqs()[j] * (1.0 - 1e-12));
            CHECK(ntk.freqs()[j] <= base.freqs()[j] * (1.0 + 1e-12));
        }
    }
    CHECK_THROWS_AS(extrap::scale_ntk({10000.0, 2, 1}, 2.0), ConfigError);
    CHECK_THROWS_AS(extrap::scale_ntk(config, 0.9), ArgumentError);
}

TEST_CASE("scale_yarn ramps between interpolation and identity") {
    const RopeConfig config{10000.0, 16, 1};
    const FrequencySchedule base = rope::build_schedule(config);
    const double s = 4.0;

    SUBCASE("frequencies rotating less than alpha times interpolate fully") {
        // slowest frequency: 64 * theta / (2*pi) << 1 rotation over the grid
        const FrequencySchedule yarn = extrap::scale_yarn(config, s, 64);
        CHECK(yarn.freqs().back() == doctest::Approx(base.freqs().back() / s).epsilon(1e-14));
    }
    SUBCASE("frequencies rotating more than beta times stay untouched") {
        // fastest frequency: 256 / (2*pi) = 40.7 rotations > beta = 32
        const FrequencySchedule yarn = extrap::scale_yarn(config, s, 256);
        CHECK(yarn.freqs().front() == base.freqs().front());
    }
    SUBCASE("everything lies in the [theta/s, theta] bracket") {
        const FrequencySchedule yarn = extrap::scale_yarn(config, s, 64);
        for (std::size_t j = 0; j < yarn.size(); ++j) {
            CHECK(yarn.freqs()[j] >= base.freqs()[j] / s - 1e-15);
            CHECK(yarn.freqs()[j] <= base.freqs()[j] + 1e-15);
        }
        // frozen mid-ramp value: r_0 = 64/(2*pi), gamma = (r_0-1)/31
        const double gamma = (64.0 / kTwoPi - 1.0) / 31.0;
        CHECK(yarn.freqs()[0] == doctest::Approx((1.0 - gamma) / s + gamma).epsilon(1e-14));
    }
    SUBCASE("parameter validation") {
        CHECK_THROWS_AS(extrap::scale_yarn(config, s, 64, {32.0, 1.0}), ConfigError);
        CHECK_THROWS_AS(extrap::scale_yarn(config, s, 64, {0.0, 32.0}), ConfigError);
        CHECK_THROWS_AS(extrap::scale_yarn(config, s, 0), ArgumentError);
        CHECK_THROWS_AS(extrap::scale_yarn(config, 0.25, 64), ArgumentError);
    }
}

TEST_CASE("correct_dominant pins the dominant period to the target exactly") {
    const FrequencySchedule base = rope::build_schedule({10000.0, 16, 1});
    const auto [fixed, index] = extrap::correct_dominant(base, 64, 256);
    CHECK(index == 2);
    CHECK(fixed.freqs()[2] == kTwoPi / 256.0);
    CHECK(rope::check_non_repetition(fixed, 2, 256));
    REQUIRE(fixed.corrections().size() == 1);
    CHECK(fixed.corrections()[0].index == 2);
    CHECK(fixed.corrections()[0].old_theta == doctest::Approx(0.1));

    CHECK_THROWS_AS(extrap::correct_dominant(base, 64, 32), ArgumentError);
    CHECK_THROWS_AS(extrap::correct_dominant(base, 0, 256), ArgumentError);
}

TEST_CASE("rdfc corrects both near-dominant periods in two rounds per axis") {
    const FrequencySchedule sched = two_period_fixture();
    const rope::ResolutionSpec spec(64, 64, 256, 256);
    const extrap::RdfcResult result =
        extrap::rdfc(sched, sched, spec, extrap::collision_detector(1e-6));

    CHECK(result.log.converged);
    REQUIRE(result.log.iterations.size() == 4);

    std::vector<double> observed_h, observed_w;
    for (const extrap::RdfcIteration& it : result.log.iterations) {
        CHECK(it.new_theta == kTwoPi / 256.0);
        (it.axis == Axis::Height ? observed_h : observed_w).push_back(it.observed_period);
    }
    REQUIRE(observed_h.size() == 2);
    REQUIRE(observed_w.size() == 2);
    CHECK(observed_h[0] == 64.0);
    CHECK(observed_h[1] == 72.0);
    CHECK(observed_h[0] < observed_h[1]);
    CHECK(observed_w == observed_h);

    for (const FrequencySchedule* out : {&result.sched_h, &result.sched_w}) {
        CHECK(out->freqs()[1] == kTwoPi / 256.0);
        CHECK(out->freqs()[2] == kTwoPi / 256.0);
        CHECK(out->freqs()[0] == sched.freqs()[0]);
        CHECK(out->freqs()[3] == sched.freqs()[3]);
        CHECK(out->corrections().size() == 2);
    }
}

TEST_CASE("rdfc leaves an axis alone when only the other one repeats") {
    const FrequencySchedule sched = two_period_fixture();
    const rope::ResolutionSpec spec(64, 64, 64, 256);
    const extrap::RdfcResult result =
        extrap::rdfc(sched, sched, spec, extrap::collision_detector(1e-6));

    CHECK(result.log.converged);
    REQUIRE(result.log.iterations.size() == 2);
    for (const extrap::RdfcIteration& it : result.log.iterations) {
        CHECK(it.axis == Axis::Width);
        CHECK(it.new_theta == kTwoPi / 256.0);
    }
    CHECK(result.sched_h.freqs() == sched.freqs());
    CHECK(result.sched_h.corrections().empty());
}

TEST_CASE("auto detector walks a monotone period ladder to convergence") {
    const FrequencySchedule sched = from_periods({70.0, 80.0, 90.0, 100.0});
    const rope::ResolutionSpec spec(64, 64, 110, 110);
    for (double window : {0.25, 1.0}) {
        CAPTURE(window);
        const extrap::RdfcResult result =
            extrap::rdfc(sched, sched, spec, extrap::auto_detector(window));
        CHECK(result.log.converged);
        CHECK(result.log.iterations.size() == 8);
        for (double theta : result.sched_h.freqs()) {
            CHECK(theta == kTwoPi / 110.0);
        }
    }
}

TEST_CASE("a detector that keeps seeing old repetition raises stagnation") {
    // canonical ladder: after round one the full-window detector surfaces the
    // 2*pi period, which sits far below the observed 64
    const FrequencySchedule sched = rope::build_schedule({10000.0, 8, 1});
    const rope::ResolutionSpec spec(64, 64, 256, 256);
    try {
        extrap::rdfc(sched, sched, spec, extrap::auto_detector(1.0));
        FAIL("expected StagnationError");
    } catch (const extrap::StagnationError& e) {
        CHECK_FALSE(e.partial_log.converged);
        REQUIRE(e.partial_log.iterations.size() == 2);
        CHECK(e.partial_log.iterations[0].chosen_index == 1);
        CHECK(e.partial_log.iterations[0].new_theta == kTwoPi / 256.0);
    }
}

TEST_CASE("a detector that never reaches the target exhausts the index cap") {
    const FrequencySchedule sched = from_periods({60.0, 70.0});
    const rope::ResolutionSpec spec(64, 64, 4096, 4096);
    const extrap::PeriodDetector stubborn = [](const extrap::DetectorInput& in) {
        return extrap::DetectorReport{in.observed_h + 1.0, in.observed_w + 1.0};
    };
    try {
        extrap::rdfc(sched, sched, spec, stubborn);
        FAIL("expected IterationCapError");
    } catch (const extrap::IterationCapError& e) {
        CHECK_FALSE(e.partial_log.converged);
        // both indices burned on some axis before the cap fired
        CHECK(e.partial_log.iterations.size() >= 2);
    }
}

TEST_CASE("detector factories validate their knobs") {
    CHECK_THROWS_AS(extrap::auto_detector(0.0), ArgumentError);
    CHECK_THROWS_AS(extrap::auto_detector(1.5), ArgumentError);
    CHECK_THROWS_AS(extrap::collision_detector(0.0), ArgumentError);
    CHECK_THROWS_AS(extrap::collision_detector(-1.0), ArgumentError);
}

TEST_CASE("resolution spec rejects shrinking or empty extents") {
    CHECK_THROWS_AS(rope::ResolutionSpec(64, 64, 32, 256), ArgumentError);
    CHECK_THROWS_AS(rope::ResolutionSpec(0, 64, 64, 256), ArgumentError);
    const rope::ResolutionSpec spec(64, 32, 256, 64);
    CHECK(spec.scale_h() == 4.0);
    CHECK(spec.scale_w() == 2.0);
}
