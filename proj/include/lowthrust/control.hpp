#pragma once

#include <cmath>

#include "lowthrust/dynamics.hpp"
#include "lowthrust/ocp_types.hpp"

namespace lowthrust {

namespace detail {

/// Smoothed throttle u*(rho) = 2e / (rho + 2e + sqrt(rho^2 + 4e^2)),
/// evaluated in a cancellation-free form for rho < 0.
inline double smoothed_throttle(double rho, double eps) {
    const double s = std::sqrt(rho * rho + 4.0 * eps * eps);
    if (rho >= 0.0) return 2.0 * eps / (rho + 2.0 * eps + s);
    return (s - rho) / (2.0 * eps + (s - rho));
}

/// Control from a precomputed M^T lambda_x primer vector.
inline ControlLaw control_from_primer(const Vec3& m_t_lambda, const Costate& lam, double m,
                                      double vex, double eps, ThrustMode mode) {
    ControlLaw ctrl;
    const double nm = m_t_lambda.norm();
    if (nm < 1e-14) {
        ctrl.singular = true;
        ctrl.alpha = Vec3::Zero();
    } else {
        ctrl.alpha = -m_t_lambda / nm;
    }
    if (mode == ThrustMode::time) {
        ctrl.u = 1.0;
        ctrl.rho = 0.0;
        return ctrl;
    }
    ctrl.rho = 1.0 - vex * nm / (lam.lambda_0 * m) - lam.lambda_m / lam.lambda_0;
    ctrl.u = smoothed_throttle(ctrl.rho, eps);
    return ctrl;
}

}  // namespace detail

/// Pointwise-optimal thrust direction and magnitude from the minimum
/// principle: alpha antiparallel to M^T lambda_x, throttle from the smoothed
/// switching law (forced to 1 in time mode).
inline ControlLaw control_law(const Costate& lam, double m, const Mee& x, double vex,
                              const SolverConfig& cfg, ThrustMode mode, GravParam gp = {1.0}) {
    const DynamicsEval dyn = mee_dynamics(x, gp, false);
    const Vec3 primer = dyn.m_mat.transpose() * lam.lambda_x;
    return detail::control_from_primer(primer, lam, m, vex, cfg.epsilon, mode);
}

/// Hamiltonian with an explicit control (thrust, vex, eps in consistent units).
inline double hamiltonian(const Costate& lam, double m, const Mee& x, const ControlLaw& ctrl,
                          double thrust, double vex, double eps, ThrustMode mode,
                          GravParam gp = {1.0}) {
    const DynamicsEval dyn = mee_dynamics(x, gp, false);
    const Vec6 xdot = dyn.d_vec + (thrust * ctrl.u / m) * (dyn.m_mat * ctrl.alpha);
    const double mdot = -thrust * ctrl.u / vex;
    double h = lam.lambda_x.dot(xdot) + lam.lambda_m * mdot;
    if (mode == ThrustMode::fuel) {
        const double u = ctrl.u;
        h += lam.lambda_0 * (thrust / vex) * (u - eps * std::log(u * (1.0 - u)));
    } else {
        h += lam.lambda_0;
    }
    return h;
}

}  // namespace lowthrust
