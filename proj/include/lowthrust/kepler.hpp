#pragma once

#include <cmath>
#include <limits>
#include <utility>

#include "lowthrust/elements.hpp"
#include "lowthrust/errors.hpp"
#include "lowthrust/linalg.hpp"

namespace lowthrust {

namespace detail {

/// Stumpff C(z) = (1 - cos(sqrt(z)))/z for z > 0, with series near zero.
inline double stumpff_c(double z) {
    if (std::abs(z) < 1e-6) return 1.0 / 2.0 - z / 24.0 + z * z / 720.0;
    if (z > 0.0) {
        const double s = std::sqrt(z);
        return (1.0 - std::cos(s)) / z;
    }
    const double s = std::sqrt(-z);
    return (std::cosh(s) - 1.0) / (-z);
}

/// Stumpff S(z) = (sqrt(z) - sin(sqrt(z)))/z^(3/2) for z > 0.
inline double stumpff_s(double z) {
    if (std::abs(z) < 1e-6) return 1.0 / 6.0 - z / 120.0 + z * z / 5040.0;
    if (z > 0.0) {
        const double s = std::sqrt(z);
        return (s - std::sin(s)) / (z * s);
    }
    const double s = std::sqrt(-z);
    return (std::sinh(s) - s) / (-z * s);
}

}  // namespace detail

/// Two-body propagation of an elliptic Cartesian state by dt via the
/// universal Kepler equation (Newton iteration on the universal anomaly).
inline std::pair<Vec3, Vec3> kepler_propagate(const Vec3& r0, const Vec3& v0, double dt,
                                              GravParam gp) {
    const double mu = gp.mu;
    const double r0n = r0.norm();
    if (!(mu > 0.0) || !(r0n > 0.0)) throw NonElliptic("kepler_propagate: invalid state");
    const double alpha = 2.0 / r0n - v0.squaredNorm() / mu;  // 1/a
    if (!(alpha > 0.0)) throw NonElliptic("kepler_propagate: state is not elliptic");
    if (dt == 0.0) return {r0, v0};

    const double sqrt_mu = std::sqrt(mu);
    const double rdotv = r0.dot(v0);
    const double target = sqrt_mu * dt;

    double chi = target * alpha;  // elliptic initial guess
    const double scale = std::max(1.0, std::abs(target));
    const double tol_strict = 4.0 * std::numeric_limits<double>::epsilon() * scale;
    const double tol_loose = 1e-12 * scale;
    double prev_err = std::numeric_limits<double>::infinity();
    bool done = false;
    for (int it = 0; it < 60; ++it) {
        const double z = alpha * chi * chi;
        const double c = detail::stumpff_c(z);
        const double s = detail::stumpff_s(z);
        const double chi2 = chi * chi;
        const double t_chi =
            (rdotv / sqrt_mu) * chi2 * c + (1.0 - r0n * alpha) * chi2 * chi * s + r0n * chi;
        const double r_chi =
            chi2 * c + (rdotv / sqrt_mu) * chi * (1.0 - z * s) + r0n * (1.0 - z * c);
        const double err = target - t_chi;
        const double abs_err = std::abs(err);
        // drive to machine precision, settling for 1e-12 relative on stall
        if (abs_err < tol_strict || (abs_err >= prev_err && abs_err < tol_loose)) {
            done = true;
            break;
        }
        prev_err = abs_err;
        chi += err / r_chi;
    }
    if (!done) throw NoConvergence("kepler_propagate: universal Kepler iteration exceeded cap");

    const double z = alpha * chi * chi;
    const double c = detail::stumpff_c(z);
    const double s = detail::stumpff_s(z);
    const double fc = 1.0 - chi * chi * c / r0n;
    const double gc = dt - chi * chi * chi * s / sqrt_mu;
    const Vec3 r1 = fc * r0 + gc * v0;
    const double r1n = r1.norm();
    const double fdot = sqrt_mu / (r1n * r0n) * chi * (z * s - 1.0);
    const double gdot = 1.0 - chi * chi * c / r1n;
    return {r1, fdot * r0 + gdot * v0};
}

inline double mean_motion(double a, GravParam gp) { return std::sqrt(gp.mu / (a * a * a)); }

/// Eccentric anomaly from true anomaly (wrapped result in (-pi, pi]).
inline double true_to_eccentric_anomaly(double nu, double e) {
    return 2.0 * std::atan2(std::sqrt(1.0 - e) * std::sin(0.5 * nu),
                            std::sqrt(1.0 + e) * std::cos(0.5 * nu));
}

inline double eccentric_to_true_anomaly(double ea, double e) {
    return 2.0 * std::atan2(std::sqrt(1.0 + e) * std::sin(0.5 * ea),
                            std::sqrt(1.0 - e) * std::cos(0.5 * ea));
}

inline double eccentric_to_mean_anomaly(double ea, double e) { return ea - e * std::sin(ea); }

/// Solve Kepler's equation M = E - e sin(E) for E (Newton, unwrapped:
/// the returned E stays within pi of the given unwrapped M).
inline double mean_to_eccentric_anomaly(double ma, double e) {
    double ea = (e < 0.8) ? ma : ma + std::copysign(0.85 * e, std::sin(ma));
    for (int it = 0; it < 60; ++it) {
        const double fval = ea - e * std::sin(ea) - ma;
        if (std::abs(fval) < 1e-14 * std::max(1.0, std::abs(ma))) return ea;
        ea -= fval / (1.0 - e * std::cos(ea));
    }
    throw NoConvergence("mean_to_eccentric_anomaly: Kepler iteration exceeded cap");
}

/// Unwrap `angle` (any representative mod 2pi) to the branch nearest `ref`.
inline double unwrap_near(double angle, double ref) {
    return angle + kTwoPi * std::round((ref - angle) / kTwoPi);
}

/// True-longitude sweep over a Keplerian coast of duration |dt| < one period,
/// i.e. L(t0+dt) - L(t0) in (0, 2pi) for dt > 0.
inline double kepler_sweep_angle(const Vec3& r0, const Vec3& v0, double dt, GravParam gp) {
    const auto [r1, v1] = kepler_propagate(r0, v0, dt, gp);
    const Mee m0 = cart_to_mee(r0, v0, gp);
    const Mee m1 = cart_to_mee(r1, v1, gp);
    return wrap_two_pi(m1.L - m0.L);
}

}  // namespace lowthrust
