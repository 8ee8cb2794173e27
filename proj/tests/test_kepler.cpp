#include <catch2/catch_amalgamated.hpp>

#include "lowthrust/kepler.hpp"
#include "test_helpers.hpp"

using namespace lowthrust;

TEST_CASE("kepler_propagate on the unit circular orbit", "[kepler]") {
    const Vec3 r0(1, 0, 0), v0(0, 1, 0);
    const GravParam mu{1.0};

    SECTION("full period returns the initial state") {
        const auto [r, v] = kepler_propagate(r0, v0, kTwoPi, mu);
        CHECK((r - r0).norm() < 1e-12);
        CHECK((v - v0).norm() < 1e-12);
    }
    SECTION("dt = 0 is the identity") {
        const auto [r, v] = kepler_propagate(r0, v0, 0.0, mu);
        CHECK(r == r0);
        CHECK(v == v0);
    }
    SECTION("quarter period reaches (0,1,0)") {
        const auto [r, v] = kepler_propagate(r0, v0, kPi / 2.0, mu);
        CHECK((r - Vec3(0, 1, 0)).norm() < 1e-12);
        CHECK((v - Vec3(-1, 0, 0)).norm() < 1e-12);
    }
    SECTION("hyperbolic state is rejected") {
        CHECK_THROWS_AS(kepler_propagate(r0, Vec3(0, 1.5, 0), 1.0, mu), NonElliptic);
    }
}

TEST_CASE("kepler_propagate composes and conserves invariants", "[kepler]") {
    Rng rng(11);
    double worst_comp = 0.0, worst_energy = 0.0, worst_h = 0.0;
    for (int it = 0; it < 300; ++it) {
        const GravParam mu{1.0};
        const auto [r0, v0] = coe_to_cart(lttest::random_elements(rng), mu);
        const double period = orbital_period(1.0 / (2.0 / r0.norm() - v0.squaredNorm()), mu);
        const double dt1 = rng.uniform(-0.8, 0.8) * period;
        const double dt2 = rng.uniform(-0.8, 0.8) * period;

        const auto [ra, va] = kepler_propagate(r0, v0, dt1 + dt2, mu);
        const auto [rm, vm] = kepler_propagate(r0, v0, dt1, mu);
        const auto [rb, vb] = kepler_propagate(rm, vm, dt2, mu);
        worst_comp = std::max(worst_comp, (ra - rb).norm() / r0.norm());
        worst_comp = std::max(worst_comp, (va - vb).norm() / v0.norm());

        const double e0 = 0.5 * v0.squaredNorm() - 1.0 / r0.norm();
        const double e1 = 0.5 * va.squaredNorm() - 1.0 / ra.norm();
        worst_energy = std::max(worst_energy, std::abs(e1 - e0) / std::abs(e0));
        worst_h = std::max(worst_h, (ra.cross(va) - r0.cross(v0)).norm() / r0.cross(v0).norm());
    }
    CHECK(worst_comp < 1e-10);
    CHECK(worst_energy < 1e-12);
    CHECK(worst_h < 1e-11);
}

TEST_CASE("anomaly conversions are mutually consistent and unwrapped", "[kepler]") {
    Rng rng(3);
    for (int it = 0; it < 2000; ++it) {
        const double e = rng.uniform(0.0, 0.97);
        const double ma = rng.uniform(-30.0, 30.0);  // several revolutions either way
        const double ea = mean_to_eccentric_anomaly(ma, e);
        CHECK(std::abs(eccentric_to_mean_anomaly(ea, e) - ma) < 1e-11 * std::max(1.0, std::abs(ma)));
        CHECK(std::abs(ea - ma) < kPi);  // stays on the unwrapped branch
        const double nu = unwrap_near(eccentric_to_true_anomaly(wrap_pi(ea), e), ea);
        const double ea_back = unwrap_near(true_to_eccentric_anomaly(wrap_pi(nu), e), nu);
        CHECK(std::abs(ea_back - ea) < 1e-10);
    }
}

TEST_CASE("kepler_sweep_angle matches the drawn fraction on a circle", "[kepler]") {
    const Vec3 r0(1, 0, 0), v0(0, 1, 0);
    const double sweep = kepler_sweep_angle(r0, v0, 0.37 * kTwoPi, {1.0});
    CHECK(sweep == Catch::Approx(0.37 * kTwoPi).epsilon(1e-10));
}
