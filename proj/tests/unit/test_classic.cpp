#include <doctest.h>

#include <cmath>

#include "pdrlab/angles.hpp"
#include "pdrlab/classic/dead_reckoning.hpp"
#include "pdrlab/classic/heading_calibration.hpp"
#include "pdrlab/classic/madgwick.hpp"
#include "pdrlab/sim/reference.hpp"

using namespace pdrlab;
using namespace pdrlab::classic;

TEST_CASE("dead_reckon_step: axis transforms and square closure") {
    DeadReckonState s;
    auto r = dead_reckon_step(s, 1.0, 0.0);
    CHECK(r.x == doctest::Approx(1.0));
    CHECK(r.y == doctest::Approx(0.0));

    r = dead_reckon_step(s, 1.0, kPi / 2);
    CHECK(std::abs(r.x) < 1e-12);
    CHECK(r.y == doctest::Approx(1.0).epsilon(1e-12));

    DeadReckonState sq;
    for (double theta : {0.0, kPi / 2, kPi, -kPi / 2}) sq = dead_reckon_step(sq, 1.0, theta);
    CHECK(std::abs(sq.x) < 1e-12);
    CHECK(std::abs(sq.y) < 1e-12);

    CHECK_THROWS_AS(dead_reckon_step(s, -0.1, 0.0), ConfigError);
}

namespace {

struct RefInputs {
    std::vector<double> rho, theta;
    std::array<double, 2> p0;
};

RefInputs inputs_from_reference(const std::vector<ReferencePose>& ref, double dt, double rho_scale) {
    RefInputs in;
    in.p0 = {ref.front().x, ref.front().y};
    for (std::size_t k = 0; k + 1 < ref.size(); ++k) {
        in.rho.push_back(ref[k].speed * dt * rho_scale);
        in.theta.push_back(ref[k].heading);
    }
    return in;
}

double mae_vs_ref(const ReconstructResult& res, const std::vector<ReferencePose>& ref) {
    double sum = 0.0;
    for (std::size_t k = 0; k < res.trajectory.size(); ++k)
        sum += std::hypot(res.trajectory[k].x - ref[k].x, res.trajectory[k].y - ref[k].y);
    return sum / static_cast<double>(res.trajectory.size());
}

}  // namespace

TEST_CASE("reconstruct: closes on exact reference inputs over 60 s") {
    auto profile = sim::ActivityProfile::preset(sim::Activity::walking);
    profile.duration = 60.0;
    const double dt = 0.01;
    const auto ref = sim::generate_reference(profile, 17, dt);
    const auto in = inputs_from_reference(ref, dt, 1.0);

    const auto res = reconstruct(in.p0, ref.front().t, dt, in.rho, in.theta);
    REQUIRE(res.trajectory.size() == ref.size());
    const auto& last = res.trajectory.back();
    CHECK(std::hypot(last.x - ref.back().x, last.y - ref.back().y) < 1e-6);
}

TEST_CASE("reconstruct: 5% velocity bias drifts linearly and recalibration wins") {
    auto profile = sim::ActivityProfile::preset(sim::Activity::walking);
    profile.duration = 60.0;
    const double dt = 0.01;
    const auto ref = sim::generate_reference(profile, 23, dt);
    const auto in = inputs_from_reference(ref, dt, 1.05);

    const auto pure = reconstruct(in.p0, ref.front().t, dt, in.rho, in.theta);
    const auto& last = pure.trajectory.back();
    const double terminal = std::hypot(last.x - ref.back().x, last.y - ref.back().y);

    // With a pure ratio bias the error vector is exactly 5% of the
    // displacement from the start.
    const double displacement = std::hypot(ref.back().x - ref.front().x, ref.back().y - ref.front().y);
    CHECK(terminal == doctest::Approx(0.05 * displacement).epsilon(1e-9));
    CHECK(terminal <= 0.05 * ref.back().cum_distance + 1e-9);

    std::vector<RecalFix> fixes;
    for (double ts = 30.0; ts <= 60.0; ts += 30.0) {
        const auto k = static_cast<std::size_t>(std::llround(ts / dt));
        fixes.push_back({ref[k].t, ref[k].x, ref[k].y});
    }
    const auto recal = reconstruct(in.p0, ref.front().t, dt, in.rho, in.theta, fixes);
    CHECK(mae_vs_ref(recal, ref) < mae_vs_ref(pure, ref));
}

TEST_CASE("reconstruct: out-of-span fixes are counted, not applied") {
    const std::vector<double> rho{1.0, 1.0};
    const std::vector<double> theta{0.0, 0.0};
    const std::vector<RecalFix> fixes{{-5.0, 9.0, 9.0}, {99.0, 9.0, 9.0}};
    const auto res = reconstruct({0.0, 0.0}, 0.0, 1.0, rho, theta, fixes);
    CHECK(res.ignored_fixes == 2);
    CHECK(res.trajectory.back().x == doctest::Approx(2.0));
}

TEST_CASE("madgwick_update: gravity equilibrium at identity") {
    OrientationState s;
    const auto r = madgwick_update(s, {0, 0, 0}, {0, 0, 9.81}, 0.1, 0.01);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(r.q[i] - s.q[i]) < 1e-9);
}

TEST_CASE("madgwick_update: pure yaw integration is exact") {
    const double omega = 1.3;
    OrientationState s;
    for (int k = 0; k < 100; ++k) s = madgwick_update(s, {0, 0, omega}, {0, 0, 0}, 0.0, 0.01);
    CHECK(yaw_of(s.q) == doctest::Approx(omega).epsilon(1e-6));
    const double norm = std::sqrt(s.q[0] * s.q[0] + s.q[1] * s.q[1] + s.q[2] * s.q[2] + s.q[3] * s.q[3]);
    CHECK(std::abs(norm - 1.0) < 1e-9);
}

TEST_CASE("madgwick_update: gravity correction shrinks estimate tilt monotonically") {
    // The estimate starts tilted (rotation about x by 0.3 rad) while the
    // sensor is physically level, reading pure gravity.
    OrientationState s;
    s.q = {std::cos(0.15), std::sin(0.15), 0.0, 0.0};
    double prev_tilt = tilt_of(s.q);
    CHECK(prev_tilt == doctest::Approx(0.3).epsilon(1e-9));

    for (int k = 0; k < 2000; ++k) {
        s = madgwick_update(s, {0, 0, 0}, {0, 0, 9.81}, 0.1, 0.01);
        const double tilt = tilt_of(s.q);
        CHECK(tilt <= prev_tilt + 1e-12);
        prev_tilt = tilt;
    }
    CHECK(prev_tilt < 0.01);
}

TEST_CASE("madgwick_update: zero-norm accel falls back to gyro-only") {
    OrientationState s;
    const auto r = madgwick_update(s, {0, 0, 0.5}, {0, 0, 0}, 0.1, 0.01);
    CHECK(yaw_of(r.q) == doctest::Approx(0.005));
    CHECK_THROWS_AS(madgwick_update(s, {0, 0, 0}, {0, 0, 9.81}, -0.1, 0.01), ConfigError);
    CHECK_THROWS_AS(madgwick_update(s, {0, 0, 0}, {0, 0, 9.81}, 0.1, 0.0), ConfigError);
}

TEST_CASE("calibrate_heading: offset recovery and motion gate") {
    const double fs = 10.0;
    const std::size_t n = 120;  // 12 s of motion at 1 m/s
    std::vector<std::array<double, 2>> positions(n);
    std::vector<double> theta_radio(n), theta_ori(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / fs;
        positions[k] = {t * std::cos(0.4), t * std::sin(0.4)};
        theta_radio[k] = 0.4;
    }

    SUBCASE("identity") {
        const auto r = calibrate_heading(theta_radio, positions, 10.0, fs);
        CHECK(r.calibrated);
        CHECK(std::abs(r.offset) < 1e-9);
        for (std::size_t k = 0; k < n; ++k) CHECK(r.theta[k] == doctest::Approx(theta_radio[k]));
    }

    SUBCASE("constant offset recovered") {
        for (std::size_t k = 0; k < n; ++k) theta_ori[k] = theta_radio[k] - 0.3;
        const auto r = calibrate_heading(theta_ori, positions, 10.0, fs);
        CHECK(r.calibrated);
        CHECK(r.offset == doctest::Approx(0.3).epsilon(1e-6));
        for (std::size_t k = 0; k < n; ++k)
            CHECK(wrap_angle(r.theta[k] - theta_radio[k]) == doctest::Approx(0.0).epsilon(1e-9));
    }

    SUBCASE("offsets across the circle recover to 1e-3") {
        for (double offset : {-3.0, -1.5, 0.7, 2.9}) {
            for (std::size_t k = 0; k < n; ++k) theta_ori[k] = wrap_angle(theta_radio[k] - offset);
            const auto r = calibrate_heading(theta_ori, positions, 10.0, fs);
            CHECK(r.calibrated);
            CHECK(std::abs(wrap_angle(r.offset - offset)) < 1e-3);
        }
    }

    SUBCASE("stationary subject is flagged uncalibrated") {
        std::vector<std::array<double, 2>> still(n, {3.0, 4.0});
        for (std::size_t k = 0; k < n; ++k) theta_ori[k] = 1.0;
        const auto r = calibrate_heading(theta_ori, still, 10.0, fs);
        CHECK_FALSE(r.calibrated);
        for (std::size_t k = 0; k < n; ++k) CHECK(r.theta[k] == 1.0);
    }

    SUBCASE("too few radio positions") {
        std::vector<std::array<double, 2>> one{{0.0, 0.0}};
        std::vector<double> th{0.0};
        CHECK_THROWS_AS(calibrate_heading(th, one, 10.0, fs), DataError);
    }
}
