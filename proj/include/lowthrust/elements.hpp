#pragma once

#include <cmath>
#include <utility>

#include "lowthrust/errors.hpp"
#include "lowthrust/linalg.hpp"

namespace lowthrust {

struct GravParam {
    double mu = 0.0;  // m^3/s^2 (or 1 in canonical units)
};

/// Classical orbital elements. Angles in radians.
struct ClassicalElements {
    double a = 0.0;     // semi-major axis
    double e = 0.0;     // eccentricity
    double i = 0.0;     // inclination, [0, pi]
    double raan = 0.0;  // right ascension of ascending node
    double argp = 0.0;  // argument of perigee
    double nu = 0.0;    // true anomaly
};

/// Modified equinoctial elements. L is kept unwrapped along trajectories.
struct Mee {
    double p = 0.0;
    double f = 0.0;
    double g = 0.0;
    double h = 0.0;
    double k = 0.0;
    double L = 0.0;

    Vec6 as_vec() const {
        Vec6 v;
        v << p, f, g, h, k, L;
        return v;
    }
    static Mee from_vec(const Vec6& v) { return Mee{v[0], v[1], v[2], v[3], v[4], v[5]}; }

    double ecc() const { return std::sqrt(f * f + g * g); }
};

inline Mee coe_to_mee(const ClassicalElements& coe) {
    const double p = coe.a * (1.0 - coe.e * coe.e);
    if (!(p > 0.0) || coe.e >= 1.0) throw NonElliptic("coe_to_mee: a(1-e^2) must be positive");
    Mee m;
    m.p = p;
    m.f = coe.e * std::cos(coe.argp + coe.raan);
    m.g = coe.e * std::sin(coe.argp + coe.raan);
    const double t = std::tan(0.5 * coe.i);
    m.h = t * std::cos(coe.raan);
    m.k = t * std::sin(coe.raan);
    m.L = coe.argp + coe.raan + coe.nu;
    return m;
}

inline ClassicalElements mee_to_coe(const Mee& m) {
    const double e2 = m.f * m.f + m.g * m.g;
    if (!(m.p > 0.0) || e2 >= 1.0) throw NonElliptic("mee_to_coe: not an elliptic state");
    ClassicalElements coe;
    coe.a = m.p / (1.0 - e2);
    coe.e = std::sqrt(e2);
    coe.i = 2.0 * std::atan(std::sqrt(m.h * m.h + m.k * m.k));
    coe.raan = (m.h == 0.0 && m.k == 0.0) ? 0.0 : wrap_two_pi(std::atan2(m.k, m.h));
    const double lonper = (m.f == 0.0 && m.g == 0.0) ? 0.0 : std::atan2(m.g, m.f);  // argp + raan
    coe.argp = wrap_two_pi(lonper - coe.raan);
    coe.nu = wrap_two_pi(m.L - lonper);
    return coe;
}

/// Equinoctial in-plane basis vectors (f_hat, g_hat) for given h, k.
inline std::pair<Vec3, Vec3> equinoctial_basis(double h, double k) {
    const double s2 = 1.0 + h * h + k * k;
    Vec3 fh(1.0 + h * h - k * k, 2.0 * h * k, -2.0 * k);
    Vec3 gh(2.0 * h * k, 1.0 - h * h + k * k, 2.0 * h);
    return {fh / s2, gh / s2};
}

/// Cartesian state -> MEE. Rejects parabolic/hyperbolic/rectilinear states.
inline Mee cart_to_mee(const Vec3& r, const Vec3& v, GravParam gp) {
    const double mu = gp.mu;
    const double rn = r.norm();
    if (!(mu > 0.0) || !(rn > 0.0)) throw NonElliptic("cart_to_mee: invalid state");
    const double energy = 0.5 * v.squaredNorm() - mu / rn;
    if (!(energy < 0.0)) throw NonElliptic("cart_to_mee: state is not bound (v >= escape speed)");
    const Vec3 hv = r.cross(v);
    const double hn = hv.norm();
    if (hn < 1e-12 * rn * v.norm() || hn == 0.0)
        throw DegenerateGeometry("cart_to_mee: rectilinear orbit");
    const Vec3 hhat = hv / hn;
    if (1.0 + hhat.z() < 1e-12)
        throw DegenerateGeometry("cart_to_mee: retrograde equatorial orbit (i = pi) unsupported");

    Mee m;
    m.p = hn * hn / mu;
    m.h = -hhat.y() / (1.0 + hhat.z());
    m.k = hhat.x() / (1.0 + hhat.z());
    const Vec3 evec = v.cross(hv) / mu - r / rn;
    if (evec.norm() >= 1.0) throw NonElliptic("cart_to_mee: eccentricity >= 1");
    const auto [fh, gh] = equinoctial_basis(m.h, m.k);
    m.f = evec.dot(fh);
    m.g = evec.dot(gh);
    m.L = wrap_two_pi(std::atan2(r.dot(gh), r.dot(fh)));
    return m;
}

/// MEE -> Cartesian state.
inline std::pair<Vec3, Vec3> mee_to_cart(const Mee& m, GravParam gp) {
    const double mu = gp.mu;
    if (!(m.p > 0.0) || !(mu > 0.0)) throw NonElliptic("mee_to_cart: invalid state");
    const double cL = std::cos(m.L), sL = std::sin(m.L);
    const double w = 1.0 + m.f * cL + m.g * sL;
    const double r = m.p / w;
    const auto [fh, gh] = equinoctial_basis(m.h, m.k);
    const Vec3 pos = r * (cL * fh + sL * gh);
    const double c = std::sqrt(mu / m.p);
    const Vec3 vel = c * (-(sL + m.g) * fh + (cL + m.f) * gh);
    return {pos, vel};
}

inline ClassicalElements cart_to_coe(const Vec3& r, const Vec3& v, GravParam gp) {
    return mee_to_coe(cart_to_mee(r, v, gp));
}

inline std::pair<Vec3, Vec3> coe_to_cart(const ClassicalElements& coe, GravParam gp) {
    return mee_to_cart(coe_to_mee(coe), gp);
}

/// Orbital period of an elliptic state.
inline double orbital_period(double a, GravParam gp) {
    return kTwoPi * std::sqrt(a * a * a / gp.mu);
}

}  // namespace lowthrust
