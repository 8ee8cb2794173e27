#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lowthrust/elements.hpp"
#include "lowthrust/linalg.hpp"

namespace lowthrust {

struct Spacecraft {
    double m0 = 0.0;     // kg
    double t_max = 0.0;  // N
    double isp = 0.0;    // s
    double g0 = 9.80665; // m/s^2

    double vex() const { return isp * g0; }  // exhaust velocity, m/s
};

/// Raw transfer problem: the 17-variable input in SI units.
/// For the time-optimal problem `dt` is the initial guess for t_f and the
/// epoch offset at which the target passes through (r2, v2); `target_orbit`
/// (elements at t=0) is derived from (r2, v2, dt) when not set explicitly.
struct TransferProblem {
    Vec3 r1 = Vec3::Zero();
    Vec3 v1 = Vec3::Zero();
    Vec3 r2 = Vec3::Zero();
    Vec3 v2 = Vec3::Zero();
    double dt = 0.0;  // s
    Spacecraft spacecraft;
    GravParam mu;
    std::optional<ClassicalElements> target_orbit;
};

/// Augmented adjoint: lambda_x adjoint to the MEE state, lambda_m to mass,
/// lambda_0 the cost multiplier (constant, positive).
struct Costate {
    Vec6 lambda_x = Vec6::Zero();
    double lambda_m = 0.0;
    double lambda_0 = 1.0;

    Vec8 as_vec() const {
        Vec8 z;
        z << lambda_x, lambda_m, lambda_0;
        return z;
    }
    static Costate from_vec(const Vec8& z) {
        Costate c;
        c.lambda_x = z.head<6>();
        c.lambda_m = z[6];
        c.lambda_0 = z[7];
        return c;
    }
    double norm() const { return as_vec().norm(); }
};

enum class ThrustMode { fuel, time };

struct ControlLaw {
    Vec3 alpha = Vec3::Zero();  // unit thrust direction in the MEE control (RTN) frame
    double u = 0.0;             // throttle in (0,1); forced to 1 in time mode
    double rho = 0.0;           // switching value
    bool singular = false;      // ||M^T lambda_x|| below threshold, alpha undefined
};

struct SolverConfig {
    double epsilon = 1e-5;       // control smoothing
    double ode_rel_tol = 1e-11;
    double ode_abs_tol = 1e-11;
    double shoot_tol = 1e-9;     // convergence on ||residual||_inf
    int max_multistarts = 100;
    std::uint64_t rng_seed = 0;
    int max_newton_iters = 40;
    double mass_floor = 1e-3;    // fraction of m0 below which propagation aborts
    bool record_trajectory = false;
    int trajectory_samples = 128;
};

struct TrajectorySample {
    double t;   // canonical time
    Mee x;      // canonical MEE state
    double m;   // mass fraction of m0
    double u;   // throttle
};

struct FuelSolution {
    Costate costate0;            // canonical, at t0
    double dv = 0.0;             // m/s
    double mf = 0.0;             // kg
    double dv_canonical = 0.0;   // dv in VU
    double residual_norm = 0.0;  // ||Phi||_inf, dimensionless
    bool converged = false;
    int multistarts_used = 0;
    int newton_iters = 0;
    std::vector<TrajectorySample> trajectory;
};

struct TimeSolution {
    Costate costate0;            // canonical, at t0
    double tf_min = 0.0;         // s
    double tf_canonical = 0.0;   // tf in TU
    double residual_norm = 0.0;
    bool converged = false;
    int multistarts_used = 0;
    int newton_iters = 0;
    std::vector<TrajectorySample> trajectory;
};

}  // namespace lowthrust
