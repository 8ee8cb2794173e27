#include <catch2/catch_amalgamated.hpp>

#include "lowthrust/shooting.hpp"
#include "test_helpers.hpp"

using namespace lowthrust;

namespace {

Costate coast_guess() {
    Costate z;
    z.lambda_x.setZero();
    z.lambda_m = 0.0;
    z.lambda_0 = 1.0;
    return z;
}

TransferProblem perturbed_seed(Rng& rng, double dv_mps) {
    TransferProblem prob = lttest::quick_seed(rng);
    Vec3 d1 = rng.unit_vector(), d2 = rng.unit_vector();
    const double w = rng.uniform(0.2, 0.8);
    prob.v1 += dv_mps * std::sqrt(w) * d1;
    prob.v2 += dv_mps * std::sqrt(1.0 - w) * d2;
    return prob;
}

}  // namespace

TEST_CASE("coast costate follows the Keplerian arc", "[shooting]") {
    Rng rng(71);
    const TransferProblem prob = lttest::quick_seed(rng);
    SolverConfig cfg;
    const CanonicalOcp ocp = make_canonical_ocp(prob, ThrustMode::fuel, cfg);

    Costate z = coast_guess();
    z.lambda_m = 0.0;
    const AugmentedResult prop = propagate_augmented(ocp.x0, 1.0, z, 0.0, ocp.dt, ocp, cfg);
    CHECK((prop.x.as_vec() - ocp.x_target).head<5>().norm() < 1e-6);
    CHECK(std::abs(prop.x.L - ocp.x_target[5]) < 1e-6);
    CHECK(prop.dv < 2.0 * ocp.thrust * cfg.epsilon * ocp.dt + 1e-12);
}

TEST_CASE("shoot_fuel residual structure", "[shooting]") {
    Rng rng(73);
    const TransferProblem prob = lttest::quick_seed(rng);
    SolverConfig cfg;
    const CanonicalOcp ocp = make_canonical_ocp(prob, ThrustMode::fuel, cfg);

    SECTION("coast costate nearly zeroes the state defect rows") {
        const Vec8 res = shoot_fuel(coast_guess(), ocp, cfg);
        CHECK(res.head<6>().lpNorm<Eigen::Infinity>() < 1e-6);
        CHECK(res[7] == Catch::Approx(0.0).margin(1e-12));  // ||z|| = 1 already
    }
    SECTION("normalization row sees the costate scale") {
        Costate z = coast_guess();
        z.lambda_0 = 2.0;
        const Vec8 res = shoot_fuel(z, ocp, cfg);
        CHECK(res[7] == Catch::Approx(1.0).epsilon(1e-9));
    }
    SECTION("rows 1-6 are invariant under positive costate scaling, row 7 is homogeneous") {
        Costate z = coast_guess();
        Rng r2(99);
        for (int i = 0; i < 6; ++i) z.lambda_x[i] = 1e-3 * r2.normal();
        z.lambda_m = 0.05;
        z.lambda_0 = 0.8;
        const Vec8 res1 = shoot_fuel(z, ocp, cfg);
        Costate z2 = Costate::from_vec(2.0 * z.as_vec());
        const Vec8 res2 = shoot_fuel(z2, ocp, cfg);
        CHECK((res2.head<6>() - res1.head<6>()).lpNorm<Eigen::Infinity>() < 1e-9);
        CHECK(res2[6] == Catch::Approx(2.0 * res1[6]).margin(1e-9));
    }
}

TEST_CASE("fuel solve on a Keplerian-coincident problem is an epsilon-coast", "[shooting]") {
    Rng rng(79);
    const TransferProblem prob = lttest::quick_seed(rng);
    SolverConfig cfg;
    cfg.record_trajectory = true;
    const FuelSolution sol = solve_fuel(prob, cfg, coast_guess());
    REQUIRE(sol.converged);
    CHECK(sol.residual_norm < cfg.shoot_tol);
    CHECK(sol.dv_canonical < 1e-4);
    CHECK(sol.mf == Catch::Approx(prob.spacecraft.m0 *
                                  std::exp(-sol.dv / prob.spacecraft.vex()))
                        .epsilon(1e-8));
}

TEST_CASE("perturbed fuel solve: multistart, recheck, warm restart", "[shooting]") {
    Rng rng(83);
    const TransferProblem prob = perturbed_seed(rng, 10.0);
    SolverConfig cfg;
    cfg.rng_seed = 5;
    FuelSolution sol = solve_fuel(prob, cfg, coast_guess());
    if (!sol.converged) sol = solve_fuel(prob, cfg);
    REQUIRE(sol.converged);
    CHECK(sol.dv > 0.0);

    const CanonicalOcp ocp = make_canonical_ocp(prob, ThrustMode::fuel, cfg);
    // re-evaluating the residual from the stored costate reproduces residual_norm
    const Vec8 res = shoot_fuel(sol.costate0, ocp, cfg);
    CHECK(std::abs(res.lpNorm<Eigen::Infinity>() - sol.residual_norm) < 1e-10);

    // warm restart lands immediately
    const FuelSolution warm = solve_fuel(prob, cfg, sol.costate0);
    REQUIRE(warm.converged);
    CHECK(warm.newton_iters <= 3);
    CHECK(warm.dv == Catch::Approx(sol.dv).epsilon(1e-6));

    // mass identity
    CHECK(warm.mf == Catch::Approx(prob.spacecraft.m0 *
                                   std::exp(-warm.dv / prob.spacecraft.vex()))
                         .epsilon(1e-8));
}

TEST_CASE("hamiltonian is constant along a converged fuel trajectory", "[shooting]") {
    Rng rng(89);
    const TransferProblem prob = perturbed_seed(rng, 20.0);
    SolverConfig cfg;
    cfg.rng_seed = 17;
    FuelSolution sol = solve_fuel(prob, cfg, coast_guess());
    if (!sol.converged) sol = solve_fuel(prob, cfg);
    REQUIRE(sol.converged);

    const CanonicalOcp ocp = make_canonical_ocp(prob, ThrustMode::fuel, cfg);
    // piecewise propagation, evaluating H at segment ends with the true costate
    const int nseg = 40;
    double h0 = 0.0, drift = 0.0;
    Costate lam = sol.costate0;
    Mee x = ocp.x0;
    double m = 1.0;
    for (int i = 0; i <= nseg; ++i) {
        const ControlLaw ctrl = control_law(lam, m, x, ocp.vex, cfg, ThrustMode::fuel);
        const double h = hamiltonian(lam, m, x, ctrl, ocp.thrust, ocp.vex, ocp.eps,
                                     ThrustMode::fuel);
        if (i == 0)
            h0 = h;
        else
            drift = std::max(drift, std::abs(h - h0));
        if (i == nseg) break;
        const double ta = ocp.dt * i / nseg, tb = ocp.dt * (i + 1) / nseg;
        const AugmentedResult step = propagate_augmented(x, m, lam, ta, tb, ocp, cfg);
        x = step.x;
        m = step.m;
        lam = step.lam;
    }
    CHECK(drift < 1e-6 * std::max(1.0, std::abs(h0)));
}

TEST_CASE("time solve on a mildly perturbed seed", "[shooting]") {
    Rng rng(97);
    TransferProblem prob = perturbed_seed(rng, 15.0);
    SolverConfig cfg;
    cfg.rng_seed = 23;
    const TimeSolution sol = solve_time(prob, cfg);
    REQUIRE(sol.converged);
    CHECK(sol.tf_min > 0.0);
    CHECK(sol.residual_norm < cfg.shoot_tol);

    // more thrust authority cannot lengthen the minimum time
    TransferProblem strong = prob;
    strong.spacecraft.t_max *= 2.0;
    TimeWarmStart warm{sol.costate0, sol.tf_canonical};
    const TimeSolution faster = solve_time(strong, cfg, warm);
    if (faster.converged) CHECK(faster.tf_min <= sol.tf_min * (1.0 + 1e-6));
}

TEST_CASE("time residual details", "[shooting]") {
    Rng rng(101);
    TransferProblem prob = lttest::quick_seed(rng);
    SolverConfig cfg;

    SECTION("coincident start: tf ~ 0 zeroes the state defect rows") {
        // target orbit = departure orbit (elements at t=0)
        prob.target_orbit = cart_to_coe(prob.r1, prob.v1, prob.mu);
        const CanonicalOcp ocp = make_canonical_ocp(prob, ThrustMode::time, cfg);
        const auto res = shoot_time(coast_guess(), 1e-8, ocp, cfg);
        CHECK(res.head<6>().lpNorm<Eigen::Infinity>() < 1e-6);
    }
    SECTION("transversality row is the stated algebraic identity") {
        const CanonicalOcp ocp = make_canonical_ocp(prob, ThrustMode::time, cfg);
        Costate z = coast_guess();
        Rng r2(7);
        for (int i = 0; i < 6; ++i) z.lambda_x[i] = 0.1 * r2.normal();
        const double tf = 0.8 * ocp.dt;
        const AugmentedResult prop = propagate_augmented(ocp.x0, 1.0, z, 0.0, tf, ocp, cfg);
        const ControlLaw ctrl = control_law(prop.lam, prop.m, prop.x, ocp.vex, cfg,
                                            ThrustMode::time);
        const double h = hamiltonian(prop.lam, prop.m, prop.x, ctrl, ocp.thrust, ocp.vex,
                                     ocp.eps, ThrustMode::time);
        const double rate = ocp.target_L_rate(tf);
        // choosing lambda_L = H/rate zeroes the transversality expression exactly
        const double lam_l = h / rate;
        CHECK(std::abs(h - lam_l * rate) < 4e-16 * std::abs(h));
    }
}
