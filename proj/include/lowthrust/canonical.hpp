#pragma once

#include <cmath>

#include "lowthrust/errors.hpp"
#include "lowthrust/linalg.hpp"
#include "lowthrust/ocp_types.hpp"

namespace lowthrust {

/// Self-similar unit system: lengths by |r1|, gravitational parameter to 1.
struct CanonicalUnits {
    double length = 1.0;    // LU, m
    double time = 1.0;      // TU = sqrt(LU^3/mu), s
    double velocity = 1.0;  // VU = sqrt(mu/LU), m/s
    double mass = 1.0;      // MU = m0, kg

    double accel() const { return velocity / time; }

    static CanonicalUnits from(double r1_norm, double mu, double m0) {
        CanonicalUnits u;
        u.length = r1_norm;
        u.time = std::sqrt(r1_norm * r1_norm * r1_norm / mu);
        u.velocity = std::sqrt(mu / r1_norm);
        u.mass = m0;
        return u;
    }
};

struct RotatedStates {
    Vec3 r1, v1, r2, v2;
    Mat3 rotation;
};

/// Rotate boundary states so r1 lies on +x, r2 in the xy-plane, and the
/// in-plane component of v1 has a positive y-projection.
inline RotatedStates rotate_align(const Vec3& r1, const Vec3& v1, const Vec3& r2,
                                  const Vec3& v2) {
    const Vec3 cr = r1.cross(r2);
    if (cr.norm() < 1e-12 * r1.norm() * r2.norm())
        throw DegenerateGeometry("rotate_align: collinear boundary positions");
    const Vec3 n = cr.normalized();

    // in-plane part of v1 fixes the orientation tie-break
    const Vec3 v1_in_plane = v1 - v1.dot(n) * n;

    const Mat3 rot1 = rotation_between(r1, Vec3::UnitX());
    const Vec3 v1p = rot1 * v1_in_plane;
    const double phi = -std::atan2(v1p.z(), v1p.y());
    const Mat3 rot = rotate_x(phi) * rot1;

    RotatedStates out;
    out.rotation = rot;
    out.r1 = rot * r1;
    out.v1 = rot * v1;
    out.r2 = rot * r2;
    out.v2 = rot * v2;
    return out;
}

/// Rotated + non-dimensionalized problem: 11 independent scalars plus the
/// bookkeeping needed to undo the mapping.
struct CanonicalProblem {
    Vec3 r1c, v1c, r2c, v2c;  // dimensionless, rotated frame
    double dtc = 0.0;         // transfer time in TU
    double a_s = 0.0;         // T_max/m0 in canonical acceleration units
    double vex = 0.0;         // Isp*g0 in VU
    Mat3 rotation = Mat3::Identity();
    CanonicalUnits units;
};

inline CanonicalProblem canonicalize(const TransferProblem& prob) {
    const RotatedStates rs = rotate_align(prob.r1, prob.v1, prob.r2, prob.v2);
    const CanonicalUnits u = CanonicalUnits::from(prob.r1.norm(), prob.mu.mu, prob.spacecraft.m0);
    CanonicalProblem c;
    c.rotation = rs.rotation;
    c.units = u;
    c.r1c = rs.r1 / u.length;
    c.v1c = rs.v1 / u.velocity;
    c.r2c = rs.r2 / u.length;
    c.v2c = rs.v2 / u.velocity;
    c.dtc = prob.dt / u.time;
    c.a_s = (prob.spacecraft.t_max / prob.spacecraft.m0) / u.accel();
    c.vex = prob.spacecraft.isp * prob.spacecraft.g0 / u.velocity;
    return c;
}

enum class OutputKind { dv, tf };

/// Map a dimensionless model output back to physical units.
inline double rescale_output(double pred, OutputKind kind, const CanonicalUnits& units) {
    return kind == OutputKind::dv ? pred * units.velocity : pred * units.time;
}

}  // namespace lowthrust
