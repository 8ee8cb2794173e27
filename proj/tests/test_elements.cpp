#include <catch2/catch_amalgamated.hpp>

#include "lowthrust/elements.hpp"
#include "lowthrust/rng.hpp"
#include "test_helpers.hpp"

using namespace lowthrust;

TEST_CASE("coe_to_mee matches the algebraic mapping", "[elements]") {
    SECTION("eccentric planar orbit") {
        const Mee m = coe_to_mee({2.0, 0.5, 0.0, 0.0, 0.0, 1.0});
        CHECK(m.p == Catch::Approx(1.5).epsilon(1e-14));
        CHECK(m.f == Catch::Approx(0.5).epsilon(1e-14));
        CHECK(m.g == Catch::Approx(0.0).margin(1e-14));
        CHECK(m.h == Catch::Approx(0.0).margin(1e-14));
        CHECK(m.k == Catch::Approx(0.0).margin(1e-14));
        CHECK(m.L == Catch::Approx(1.0).epsilon(1e-14));
    }
    SECTION("circular equatorial") {
        const Mee m = coe_to_mee({1.0, 0.0, 0.0, 0.0, 0.0, 0.3});
        CHECK(m.p == Catch::Approx(1.0));
        CHECK(m.f == Catch::Approx(0.0).margin(1e-15));
        CHECK(m.g == Catch::Approx(0.0).margin(1e-15));
        CHECK(m.L == Catch::Approx(0.3));
    }
    SECTION("polar orbit gives tan(i/2) = 1") {
        const Mee m = coe_to_mee({1.0, 0.0, kPi / 2.0, 0.0, 0.0, 0.0});
        CHECK(m.h == Catch::Approx(1.0).epsilon(1e-12));
        CHECK(m.k == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("rejects non-elliptic input") {
        CHECK_THROWS_AS(coe_to_mee({1.0, 1.5, 0.0, 0.0, 0.0, 0.0}), NonElliptic);
        CHECK_THROWS_AS(coe_to_mee({-1.0, 0.5, 0.0, 0.0, 0.0, 0.0}), NonElliptic);
    }
}

TEST_CASE("mee_to_coe inverts coe_to_mee", "[elements]") {
    const ClassicalElements coe = mee_to_coe({1.5, 0.5, 0.0, 0.0, 0.0, 1.0});
    CHECK(coe.a == Catch::Approx(2.0).epsilon(1e-13));
    CHECK(coe.e == Catch::Approx(0.5).epsilon(1e-13));
    CHECK(coe.nu == Catch::Approx(1.0).epsilon(1e-12));

    Rng rng(42);
    double worst = 0.0;
    for (int it = 0; it < 10000; ++it) {
        const ClassicalElements in = lttest::random_elements(rng);
        const ClassicalElements back = mee_to_coe(coe_to_mee(in));
        worst = std::max(worst, std::abs(back.a - in.a) / in.a);
        worst = std::max(worst, std::abs(back.e - in.e));
        worst = std::max(worst, std::abs(back.i - in.i));
        worst = std::max(worst, std::abs(wrap_pi(back.raan - in.raan)));
        // argp/nu are individually ill-conditioned near e=0; their sum is not
        worst = std::max(worst, std::abs(wrap_pi((back.argp + back.nu) - (in.argp + in.nu))));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("cart/mee roundtrips preserve the state", "[elements]") {
    SECTION("unit circular orbit") {
        const Mee m = cart_to_mee(Vec3(1, 0, 0), Vec3(0, 1, 0), {1.0});
        CHECK(m.p == Catch::Approx(1.0).epsilon(1e-13));
        CHECK(std::abs(m.f) < 1e-13);
        CHECK(std::abs(m.g) < 1e-13);
        CHECK(std::abs(m.h) < 1e-13);
        CHECK(std::abs(m.k) < 1e-13);
    }
    SECTION("escape-speed state is rejected") {
        CHECK_THROWS_AS(cart_to_mee(Vec3(1, 0, 0), Vec3(0, 2, 0), {1.0}), NonElliptic);
    }
    SECTION("random roundtrip keeps energy, momentum, and the state itself") {
        Rng rng(7);
        double worst = 0.0;
        for (int it = 0; it < 10000; ++it) {
            const GravParam mu{rng.uniform(0.5, 2.0)};
            const auto [r, v] = coe_to_cart(lttest::random_elements(rng), mu);
            const Mee m = cart_to_mee(r, v, mu);
            const auto [r2, v2] = mee_to_cart(m, mu);
            worst = std::max(worst, (r2 - r).norm() / r.norm());
            worst = std::max(worst, (v2 - v).norm() / v.norm());
            const double e0 = 0.5 * v.squaredNorm() - mu.mu / r.norm();
            const double e1 = 0.5 * v2.squaredNorm() - mu.mu / r2.norm();
            worst = std::max(worst, std::abs(e1 - e0) / std::abs(e0));
            worst = std::max(worst, (r2.cross(v2) - r.cross(v)).norm() / r.cross(v).norm());
        }
        CHECK(worst < 1e-10);
    }
}
