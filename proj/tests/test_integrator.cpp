#include <catch2/catch_amalgamated.hpp>

#include "lowthrust/dynamics.hpp"
#include "lowthrust/integrator.hpp"
#include "lowthrust/kepler.hpp"
#include "test_helpers.hpp"

using namespace lowthrust;

namespace {

using State6 = Eigen::Matrix<double, 6, 1>;

bool two_body(double, const State6& y, State6& dy) {
    const Vec3 r = y.head<3>();
    dy.head<3>() = y.tail<3>();
    dy.tail<3>() = -r / std::pow(r.norm(), 3);
    return true;
}

}  // namespace

TEST_CASE("dop853 reproduces Kepler propagation", "[integrator]") {
    Rng rng(5);
    OdeOptions opt;
    opt.rel_tol = opt.abs_tol = 1e-12;
    for (int it = 0; it < 20; ++it) {
        const auto [r0, v0] = coe_to_cart(lttest::random_elements(rng, 0.8), {1.0});
        State6 y0;
        y0 << r0, v0;
        const double a = 1.0 / (2.0 / r0.norm() - v0.squaredNorm());
        const double tf = rng.uniform(0.2, 1.0) * orbital_period(a, {1.0});
        const State6 yf = integrate_dop853<6>(two_body, 0.0, tf, y0, opt);
        const auto [rk, vk] = kepler_propagate(r0, v0, tf, {1.0});
        CHECK((yf.head<3>() - rk).norm() < 1e-9);
        CHECK((yf.tail<3>() - vk).norm() < 1e-9);
    }
}

TEST_CASE("coasting MEE dynamics reproduce Kepler over one period", "[integrator]") {
    Rng rng(29);
    auto rhs = [](double, const Vec6& y, Vec6& dy) {
        dy = mee_dynamics(Mee::from_vec(y), {1.0}, false).d_vec;
        return true;
    };
    OdeOptions opt;
    opt.rel_tol = opt.abs_tol = 1e-12;
    for (int it = 0; it < 20; ++it) {
        const Mee x0 = lttest::random_mee(rng);
        const auto [r0, v0] = mee_to_cart(x0, {1.0});
        const double a = x0.p / (1.0 - x0.f * x0.f - x0.g * x0.g);
        const double tf = orbital_period(a, {1.0});
        const Vec6 yf = integrate_dop853<6>(rhs, 0.0, tf, x0.as_vec(), opt);
        const auto [rk, vk] = kepler_propagate(r0, v0, tf, {1.0});
        const auto [rm, vm] = mee_to_cart(Mee::from_vec(yf), {1.0});
        CHECK((rm - rk).norm() < 1e-9);
        CHECK((vm - vk).norm() < 1e-9);
        CHECK(yf[5] - x0.L == Catch::Approx(kTwoPi).epsilon(1e-9));  // L unwrapped, one rev
    }
}

TEST_CASE("energy drift stays tiny over ten revolutions", "[integrator]") {
    State6 y0;
    y0 << 1.3, 0, 0, 0, 0.7, 0.25;
    OdeOptions opt;
    opt.rel_tol = opt.abs_tol = 1e-12;
    const double e0 = 0.5 * y0.tail<3>().squaredNorm() - 1.0 / y0.head<3>().norm();
    const State6 yf = integrate_dop853<6>(two_body, 0.0, 10.0 * kTwoPi, y0, opt);
    const double e1 = 0.5 * yf.tail<3>().squaredNorm() - 1.0 / yf.head<3>().norm();
    CHECK(std::abs(e1 - e0) < 1e-9);
}

TEST_CASE("inadmissible regions and step caps surface as errors", "[integrator]") {
    SECTION("rhs returning false raises StateInvalid") {
        auto rhs = [](double, const Eigen::Matrix<double, 1, 1>& y,
                      Eigen::Matrix<double, 1, 1>& dy) {
            if (y[0] > 0.5) return false;
            dy[0] = 1.0;
            return true;
        };
        Eigen::Matrix<double, 1, 1> y0;
        y0 << 0.0;
        OdeOptions opt;
        CHECK_THROWS_AS(integrate_dop853<1>(rhs, 0.0, 1.0, y0, opt), StateInvalid);
    }
    SECTION("step cap raises IntegrationFailure") {
        auto rhs = [](double, const Eigen::Matrix<double, 1, 1>& y,
                      Eigen::Matrix<double, 1, 1>& dy) {
            dy[0] = std::cos(100.0 * y[0]);
            return true;
        };
        Eigen::Matrix<double, 1, 1> y0;
        y0 << 0.0;
        OdeOptions opt;
        opt.max_steps = 3;
        CHECK_THROWS_AS(integrate_dop853<1>(rhs, 0.0, 1e6, y0, opt), IntegrationFailure);
    }
}
