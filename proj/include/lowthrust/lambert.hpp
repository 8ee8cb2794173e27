#pragma once

#include <algorithm>
#include <cmath>

#include "lowthrust/elements.hpp"
#include "lowthrust/errors.hpp"
#include "lowthrust/kepler.hpp"
#include "lowthrust/linalg.hpp"

namespace lowthrust {

struct LambertSolution {
    Vec3 v1_lambert = Vec3::Zero();  // velocity on the arc at r1
    Vec3 v2_lambert = Vec3::Zero();  // velocity on the arc at r2
    Vec3 dv1 = Vec3::Zero();         // v1_lambert - v1_boundary (see attach_boundary_impulses)
    Vec3 dv2 = Vec3::Zero();         // v2_boundary - v2_lambert
    double ecc = 0.0;                // transfer-conic eccentricity
    double nu1 = 0.0;                // true anomaly at departure on the conic, [0, 2pi)
    double transfer_angle = 0.0;     // swept angle in (0, 2pi)
    int iterations = 0;
};

/// Zero-revolution Lambert solver (universal variables, Bate/Mueller/White
/// form). The transfer direction is chosen so the arc's orbit normal has a
/// positive projection on `normal_hint`. Safeguarded Newton/bisection on z
/// with a 60-iteration cap and 1e-12 relative tolerance on the time residual.
inline LambertSolution solve_lambert(const Vec3& r1, const Vec3& r2, double dt, GravParam gp,
                                     const Vec3& normal_hint) {
    const double mu = gp.mu;
    if (!(dt > 0.0) || !(mu > 0.0)) throw NoSolution("solve_lambert: dt and mu must be positive");
    const double r1n = r1.norm();
    const double r2n = r2.norm();
    const Vec3 cr = r1.cross(r2);
    const double crn = cr.norm();
    if (crn < 1e-11 * r1n * r2n)
        throw DegenerateGeometry("solve_lambert: r1 and r2 are collinear, transfer plane undefined");

    const double cos_dnu = r1.dot(r2) / (r1n * r2n);
    double dnu = std::atan2(crn / (r1n * r2n), cos_dnu);
    if (cr.dot(normal_hint) < 0.0) dnu = kTwoPi - dnu;

    const double sin_dnu = std::sin(dnu);
    const double big_a = sin_dnu * std::sqrt(r1n * r2n / (1.0 - cos_dnu));
    const double sqrt_mu = std::sqrt(mu);
    const double tol = 1e-12 * dt;

    // t(z) is monotone increasing on the admissible (y > 0) interval
    double z_lo = -4.0 * kTwoPi * kTwoPi;
    double z_hi = kTwoPi * kTwoPi * 0.9999;

    auto tof = [&](double zz, double& yy) {  // returns -1 when y <= 0
        const double c = detail::stumpff_c(zz);
        const double s = detail::stumpff_s(zz);
        yy = r1n + r2n + big_a * (zz * s - 1.0) / std::sqrt(c);
        if (!(yy > 0.0)) return -1.0;
        const double chi3 = std::pow(yy / c, 1.5);
        return (chi3 * s + big_a * std::sqrt(yy)) / sqrt_mu;
    };
    auto bump = [&](double zz, double err) {  // tighten the bracket around the root
        if (err > 0.0)
            z_hi = zz;
        else
            z_lo = zz;
    };

    LambertSolution sol;
    sol.transfer_angle = dnu;
    double z = 0.0, y = 0.0;
    bool converged = false;
    for (int it = 0; it < 60 && !converged; ++it) {
        ++sol.iterations;
        z = 0.5 * (z_lo + z_hi);
        double t = tof(z, y);
        if (t < 0.0) {
            // y <= 0: z too small on the short way, too large on the long way
            if (big_a >= 0.0)
                z_lo = z;
            else
                z_hi = z;
            continue;
        }
        double err = t - dt;
        if (std::abs(err) < tol) break;
        bump(z, err);

        // Newton refinements inside the bracket (Vallado's dt/dz form)
        for (int nr = 0; nr < 3; ++nr) {
            const double c = detail::stumpff_c(z);
            const double s = detail::stumpff_s(z);
            const double cp = (std::abs(z) > 1e-3) ? (1.0 - z * s - 2.0 * c) / (2.0 * z)
                                                   : -1.0 / 24.0 + z / 360.0;
            const double sp = (std::abs(z) > 1e-3) ? (c - 3.0 * s) / (2.0 * z)
                                                   : -1.0 / 120.0 + z / 2520.0;
            const double chi = std::sqrt(y / c);
            const double dtdz = (chi * chi * chi * (sp - 1.5 * s * cp / c) +
                                 0.125 * big_a * (3.0 * s * std::sqrt(y) / c + big_a / chi)) /
                                sqrt_mu;
            if (!std::isfinite(dtdz) || dtdz <= 0.0) break;
            const double z_next = z - err / dtdz;
            if (!(z_next > z_lo && z_next < z_hi)) break;
            double y_next = 0.0;
            const double t_next = tof(z_next, y_next);
            if (t_next < 0.0) break;
            z = z_next;
            y = y_next;
            err = t_next - dt;
            ++sol.iterations;
            if (std::abs(err) < tol) {
                converged = true;
                break;
            }
            bump(z, err);
        }
    }
    {
        double t_final = tof(z, y);
        if (!(t_final > 0.0) || std::abs(t_final - dt) > 1e-9 * dt)
            throw NoSolution("solve_lambert: time-of-flight iteration did not converge");
    }

    const double f = 1.0 - y / r1n;
    const double g = big_a * std::sqrt(y / mu);
    const double gdot = 1.0 - y / r2n;
    sol.v1_lambert = (r2 - f * r1) / g;
    sol.v2_lambert = (gdot * r2 - r1) / g;

    // conic shape at departure
    const Vec3& v1 = sol.v1_lambert;
    const Vec3 evec = ((v1.squaredNorm() - mu / r1n) * r1 - r1.dot(v1) * v1) / mu;
    sol.ecc = evec.norm();
    if (sol.ecc > 1e-12) {
        const double cnu = std::clamp(evec.dot(r1) / (sol.ecc * r1n), -1.0, 1.0);
        sol.nu1 = std::acos(cnu);
        if (r1.dot(v1) < 0.0) sol.nu1 = kTwoPi - sol.nu1;
    }
    return sol;
}

/// Fill the impulse fields relative to the problem boundary velocities:
/// dv1 is the burn onto the arc at departure, dv2 the burn off it at arrival.
inline void attach_boundary_impulses(LambertSolution& sol, const Vec3& v1_boundary,
                                     const Vec3& v2_boundary) {
    sol.dv1 = sol.v1_lambert - v1_boundary;
    sol.dv2 = v2_boundary - sol.v2_lambert;
}

}  // namespace lowthrust
