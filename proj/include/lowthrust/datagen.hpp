#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lowthrust/elements.hpp"
#include "lowthrust/kepler.hpp"
#include "lowthrust/ocp_types.hpp"
#include "lowthrust/rng.hpp"

namespace lowthrust {

inline constexpr double kAstronomicalUnit = 1.495978707e11;  // m
inline constexpr double kMuSun = 1.32712440018e20;           // m^3/s^2

/// Coverage envelope for Keplerian orbital neighborhood sampling.
/// a_s and isp bounds are taken at the 1 AU reference scale.
struct GenerationRanges {
    double e_min = 0.0;
    double e_max = 0.95;
    double transfer_angle_max = 0.99 * kTwoPi;
    double a_s_min = 2.5e-6;   // m/s^2
    double a_s_max = 1.2e-2;   // m/s^2
    double isp_min = 700.0;    // s
    double isp_max = 9000.0;   // s
    double dt_frac_min = 0.02; // fraction of seed-orbit period
    double dt_frac_max = 0.99;
    double m0 = 1000.0;        // kg, fixed for generated records
};

/// Draw a Keplerian-coincident seed problem: both boundary states lie on one
/// sampled orbit separated by dt, so the zero-thrust transfer is feasible.
/// Seeds are generated at the 1 AU / solar-mu scale; canonicalization makes
/// the absolute scale immaterial downstream.
inline TransferProblem sample_seed_problem(Rng& rng, const GenerationRanges& ranges) {
    TransferProblem prob;
    prob.mu = GravParam{kMuSun};
    prob.spacecraft.m0 = ranges.m0;
    prob.spacecraft.isp = rng.log_uniform(ranges.isp_min, ranges.isp_max);
    prob.spacecraft.t_max = ranges.m0 * rng.log_uniform(ranges.a_s_min, ranges.a_s_max);

    ClassicalElements coe;
    coe.a = kAstronomicalUnit;
    coe.e = rng.uniform(ranges.e_min, ranges.e_max);
    coe.i = std::acos(rng.uniform(-1.0, 1.0));
    coe.raan = rng.uniform(0.0, kTwoPi);
    coe.argp = rng.uniform(0.0, kTwoPi);
    const double period = orbital_period(coe.a, prob.mu);

    // redraw the phase/duration pair until the swept angle is in range
    for (;;) {
        coe.nu = rng.uniform(0.0, kTwoPi);
        prob.dt = period * rng.uniform(ranges.dt_frac_min, ranges.dt_frac_max);
        std::tie(prob.r1, prob.v1) = coe_to_cart(coe, prob.mu);
        std::tie(prob.r2, prob.v2) = kepler_propagate(prob.r1, prob.v1, prob.dt, prob.mu);
        const double angle = kepler_sweep_angle(prob.r1, prob.v1, prob.dt, prob.mu);
        if (angle > 1e-4 && angle < ranges.transfer_angle_max) break;
    }
    return prob;
}

}  // namespace lowthrust
