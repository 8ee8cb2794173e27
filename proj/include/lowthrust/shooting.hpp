#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "lowthrust/canonical.hpp"
#include "lowthrust/control.hpp"
#include "lowthrust/dynamics.hpp"
#include "lowthrust/integrator.hpp"
#include "lowthrust/kepler.hpp"
#include "lowthrust/newton.hpp"
#include "lowthrust/ocp_types.hpp"
#include "lowthrust/rng.hpp"

namespace lowthrust {

/// Transfer problem mapped to canonical units with precomputed boundary data.
/// All shooting work happens here; labels are rescaled on the way out.
struct CanonicalOcp {
    ThrustMode mode = ThrustMode::fuel;
    Mee x0;              // initial state, L wrapped to [0, 2pi)
    double thrust = 0.0; // canonical T_max (initial mass is 1)
    double vex = 0.0;    // canonical exhaust velocity
    double dt = 0.0;     // canonical transfer time (fuel: fixed, time: t_f guess)
    double eps = 1e-5;

    Vec6 x_target = Vec6::Zero();  // fuel mode: fixed target, L unwrapped past x0.L

    // time mode: target orbit shape (canonical) + Kepler bookkeeping at t=0
    double tgt_p = 0.0, tgt_f = 0.0, tgt_g = 0.0, tgt_h = 0.0, tgt_k = 0.0;
    double tgt_e = 0.0, tgt_n = 0.0, tgt_m0 = 0.0, tgt_lonper = 0.0;

    CanonicalProblem canon;

    /// Unwrapped target true longitude at canonical time t.
    double target_L(double t) const {
        const double ma = tgt_m0 + tgt_n * t;
        const double ea = mean_to_eccentric_anomaly(ma, tgt_e);
        const double nu = unwrap_near(eccentric_to_true_anomaly(wrap_pi(ea), tgt_e), ea);
        return tgt_lonper + nu;
    }

    Vec6 target_state(double t) const {
        Vec6 x;
        x << tgt_p, tgt_f, tgt_g, tgt_h, tgt_k, target_L(t);
        return x;
    }

    /// Target Keplerian rate of L (the only moving component), sqrt(mu p)/r^2.
    double target_L_rate(double t) const {
        const double L = target_L(t);
        const double w = 1.0 + tgt_f * std::cos(L) + tgt_g * std::sin(L);
        return std::sqrt(tgt_p) * (w / tgt_p) * (w / tgt_p);
    }
};

inline CanonicalOcp make_canonical_ocp(const TransferProblem& prob, ThrustMode mode,
                                       const SolverConfig& cfg) {
    CanonicalOcp ocp;
    ocp.mode = mode;
    ocp.canon = canonicalize(prob);
    ocp.eps = cfg.epsilon;
    ocp.thrust = ocp.canon.a_s;
    ocp.vex = ocp.canon.vex;
    ocp.dt = ocp.canon.dtc;
    const GravParam one{1.0};
    ocp.x0 = cart_to_mee(ocp.canon.r1c, ocp.canon.v1c, one);

    if (mode == ThrustMode::fuel) {
        Mee tgt = cart_to_mee(ocp.canon.r2c, ocp.canon.v2c, one);
        tgt.L = ocp.x0.L + wrap_two_pi(tgt.L - ocp.x0.L);  // single-revolution bracket
        ocp.x_target = tgt.as_vec();
        return ocp;
    }

    // time mode: target orbit anchored at t = 0, within half a revolution of x0
    Vec3 rt0, vt0;
    if (prob.target_orbit) {
        auto [r, v] = coe_to_cart(*prob.target_orbit, prob.mu);
        rt0 = ocp.canon.rotation * r / ocp.canon.units.length;
        vt0 = ocp.canon.rotation * v / ocp.canon.units.velocity;
    } else {
        std::tie(rt0, vt0) = kepler_propagate(ocp.canon.r2c, ocp.canon.v2c, -ocp.canon.dtc, one);
    }
    const Mee tmee = cart_to_mee(rt0, vt0, one);
    ocp.tgt_p = tmee.p;
    ocp.tgt_f = tmee.f;
    ocp.tgt_g = tmee.g;
    ocp.tgt_h = tmee.h;
    ocp.tgt_k = tmee.k;
    ocp.tgt_e = tmee.ecc();
    const double a = tmee.p / (1.0 - ocp.tgt_e * ocp.tgt_e);
    ocp.tgt_n = std::sqrt(1.0 / (a * a * a));
    const double L0 = unwrap_near(tmee.L, ocp.x0.L);
    const double lonper_w = (ocp.tgt_e > 0.0) ? std::atan2(tmee.g, tmee.f) : 0.0;
    const double nu0 = L0 - lonper_w;  // unwrapped by construction
    const double ea0 = unwrap_near(true_to_eccentric_anomaly(wrap_pi(nu0), ocp.tgt_e), nu0);
    ocp.tgt_m0 = eccentric_to_mean_anomaly(ea0, ocp.tgt_e);
    ocp.tgt_lonper = lonper_w;
    return ocp;
}

/// Result of one augmented propagation (canonical units throughout).
struct AugmentedResult {
    Mee x;
    double m = 1.0;
    Costate lam;
    double dv = 0.0;      // accumulated integral of (T u / m) dt
    double max_ecc = 0.0; // max sqrt(f^2+g^2) over accepted steps
};

namespace detail {

using AugState = Eigen::Matrix<double, 15, 1>;

struct AugmentedRhs {
    const CanonicalOcp* ocp;
    double lambda_0;
    double mass_floor;

    bool operator()(double /*t*/, const AugState& y, AugState& dy) const {
        const double p = y[0], f = y[1], g = y[2];
        const double m = y[6];
        if (!(p > 1e-8) || !(f * f + g * g < 1.0) || !(m > mass_floor)) return false;

        Mee x = Mee::from_vec(y.head<6>());
        const DynamicsEval dyn = mee_dynamics(x, GravParam{1.0}, true);

        Costate lam;
        lam.lambda_x = y.segment<6>(7);
        lam.lambda_m = y[13];
        lam.lambda_0 = lambda_0;

        const Vec3 primer = dyn.m_mat.transpose() * lam.lambda_x;
        const ControlLaw ctrl =
            control_from_primer(primer, lam, m, ocp->vex, ocp->eps, ocp->mode);

        const double acc = ocp->thrust * ctrl.u / m;
        const Vec6 m_alpha = dyn.m_mat * ctrl.alpha;
        dy.head<6>() = dyn.d_vec + acc * m_alpha;
        dy[6] = -ocp->thrust * ctrl.u / ocp->vex;
        for (int i = 0; i < 6; ++i) {
            const double dm_term = lam.lambda_x.dot(dyn.dM[i] * ctrl.alpha);
            dy[7 + i] = -(acc * dm_term + lam.lambda_x[5] * dyn.dD(5, i));
        }
        dy[13] = (ocp->thrust * ctrl.u / (m * m)) * lam.lambda_x.dot(m_alpha);
        dy[14] = acc;
        return dy.allFinite();
    }
};

inline AugState pack_augmented(const Mee& x0, double m0, const Costate& lam) {
    AugState y;
    y.head<6>() = x0.as_vec();
    y[6] = m0;
    y.segment<6>(7) = lam.lambda_x;
    y[13] = lam.lambda_m;
    y[14] = 0.0;
    return y;
}

}  // namespace detail

/// Integrate state, mass, costate, and the delta-v accumulator with the
/// closed-loop control from t0 to t1 (canonical units). Optionally records
/// evenly spaced trajectory samples.
inline AugmentedResult propagate_augmented(const Mee& x0, double m0, const Costate& lam0,
                                           double t0, double t1, const CanonicalOcp& ocp,
                                           const SolverConfig& cfg,
                                           std::vector<TrajectorySample>* samples = nullptr) {
    detail::AugmentedRhs rhs{&ocp, lam0.lambda_0, cfg.mass_floor};
    OdeOptions opt;
    opt.rel_tol = cfg.ode_rel_tol;
    opt.abs_tol = cfg.ode_abs_tol;
    Dop853<15, detail::AugmentedRhs&> solver(rhs, opt);

    detail::AugState y = detail::pack_augmented(x0, m0, lam0);
    AugmentedResult out;

    auto record = [&](double t, const detail::AugState& ys) {
        if (!samples) return;
        TrajectorySample s;
        s.t = t;
        s.x = Mee::from_vec(ys.head<6>());
        s.m = ys[6];
        Costate lam;
        lam.lambda_x = ys.segment<6>(7);
        lam.lambda_m = ys[13];
        lam.lambda_0 = lam0.lambda_0;
        const DynamicsEval dyn = mee_dynamics(s.x, GravParam{1.0}, false);
        s.u = detail::control_from_primer(dyn.m_mat.transpose() * lam.lambda_x, lam, s.m,
                                          ocp.vex, ocp.eps, ocp.mode)
                  .u;
        samples->push_back(s);
    };

    const int nseg = samples ? std::max(2, cfg.trajectory_samples) : 1;
    record(t0, y);
    for (int i = 1; i <= nseg; ++i) {
        const double ta = t0 + (t1 - t0) * (i - 1) / static_cast<double>(nseg);
        const double tb = t0 + (t1 - t0) * i / static_cast<double>(nseg);
        solver.advance(y, ta, tb);
        out.max_ecc = std::max(out.max_ecc, std::sqrt(y[1] * y[1] + y[2] * y[2]));
        record(tb, y);
    }

    out.x = Mee::from_vec(y.head<6>());
    out.m = y[6];
    out.lam.lambda_x = y.segment<6>(7);
    out.lam.lambda_m = y[13];
    out.lam.lambda_0 = lam0.lambda_0;
    out.dv = y[14];
    return out;
}

/// Fuel-problem shooting residual: 6 terminal state defects, lambda_m(t_f),
/// and the costate normalization row. NaN vector when propagation fails.
inline Vec8 shoot_fuel(const Costate& z, const CanonicalOcp& ocp, const SolverConfig& cfg) {
    Vec8 res = Vec8::Constant(std::numeric_limits<double>::quiet_NaN());
    try {
        const AugmentedResult prop = propagate_augmented(ocp.x0, 1.0, z, 0.0, ocp.dt, ocp, cfg);
        res.head<6>() = prop.x.as_vec() - ocp.x_target;
        res[6] = prop.lam.lambda_m;
        res[7] = z.norm() - 1.0;
    } catch (const Error&) {
    }
    return res;
}

/// Time-problem shooting residual (9 components): state defects against the
/// moving target, lambda_m(t_f), the time-transversality row
/// H(t_f) - lambda_L(t_f) * Ldot_target(t_f), and the normalization row.
inline Eigen::Matrix<double, 9, 1> shoot_time(const Costate& z, double tf,
                                              const CanonicalOcp& ocp,
                                              const SolverConfig& cfg) {
    Eigen::Matrix<double, 9, 1> res =
        Eigen::Matrix<double, 9, 1>::Constant(std::numeric_limits<double>::quiet_NaN());
    if (!(tf > 0.0)) return res;
    try {
        const AugmentedResult prop = propagate_augmented(ocp.x0, 1.0, z, 0.0, tf, ocp, cfg);
        res.head<6>() = prop.x.as_vec() - ocp.target_state(tf);
        res[6] = prop.lam.lambda_m;
        const ControlLaw ctrl =
            control_law(prop.lam, prop.m, prop.x, ocp.vex, cfg, ThrustMode::time);
        const double h = hamiltonian(prop.lam, prop.m, prop.x, ctrl, ocp.thrust, ocp.vex,
                                     ocp.eps, ThrustMode::time);
        res[7] = h - prop.lam.lambda_x[5] * ocp.target_L_rate(tf);
        res[8] = z.norm() - 1.0;
    } catch (const Error&) {
    }
    return res;
}

namespace detail {

inline Vec8 random_unit_costate(Rng& rng) {
    for (;;) {
        Vec8 z;
        for (int i = 0; i < 8; ++i) z[i] = rng.normal();
        const double n = z.norm();
        if (n < 1e-12) continue;
        z /= n;
        if (z[7] > 0.0) return z;  // lambda_0 must be positive
    }
}

}  // namespace detail

/// Solve the fuel-optimal TPBVP. With a warm start, a single damped solve;
/// otherwise up to cfg.max_multistarts random unit-sphere costates.
/// Non-convergence is reported as a value, not an exception.
inline FuelSolution solve_fuel(const TransferProblem& prob, const SolverConfig& cfg,
                               std::optional<Costate> warm_start = std::nullopt) {
    const CanonicalOcp ocp = make_canonical_ocp(prob, ThrustMode::fuel, cfg);
    FuelSolution out;

    NewtonOptions nopt;
    nopt.tol = cfg.shoot_tol;
    nopt.max_iters = cfg.max_newton_iters;
    auto residual_fn = [&](const Eigen::VectorXd& zv) -> Eigen::VectorXd {
        return shoot_fuel(Costate::from_vec(zv), ocp, cfg);
    };

    auto finish = [&](const NewtonResult& nr) {
        const Costate z = Costate::from_vec(nr.z);
        out.costate0 = z;
        out.residual_norm = nr.res_inf;
        out.newton_iters = nr.iters;
        out.converged = true;
        std::vector<TrajectorySample> traj;
        const AugmentedResult prop =
            propagate_augmented(ocp.x0, 1.0, z, 0.0, ocp.dt, ocp, cfg,
                                cfg.record_trajectory ? &traj : nullptr);
        out.dv_canonical = prop.dv;
        out.dv = prop.dv * ocp.canon.units.velocity;
        out.mf = prop.m * prob.spacecraft.m0;
        out.trajectory = std::move(traj);
    };

    if (warm_start) {
        const NewtonResult nr = damped_newton(residual_fn, warm_start->as_vec(), nopt);
        if (nr.converged && nr.z[7] > 0.0) finish(nr);
        return out;
    }

    Rng rng(cfg.rng_seed);
    for (int ms = 0; ms < cfg.max_multistarts; ++ms) {
        out.multistarts_used = ms + 1;
        const Vec8 z0 = detail::random_unit_costate(rng);
        const NewtonResult nr = damped_newton(residual_fn, z0, nopt);
        if (nr.converged && nr.z[7] > 0.0) {
            finish(nr);
            return out;
        }
    }
    return out;
}

struct TimeWarmStart {
    Costate costate;
    double tf_canonical = 0.0;
};

namespace detail {

/// Initial guess for the time problem via continuation on fixed-time fuel
/// problems: rendezvous with the moving target at its tau-position becomes
/// infeasible exactly at tau = tf_min, and the near-boundary fuel costate
/// (full-thrust regime) carries over to the time problem up to the lambda_0
/// component, which is recovered from the transversality row.
inline std::optional<Eigen::VectorXd> time_guess_from_fuel_chain(const CanonicalOcp& ocp,
                                                                 const SolverConfig& cfg) {
    CanonicalOcp fuel = ocp;
    fuel.mode = ThrustMode::fuel;

    NewtonOptions nopt;
    nopt.tol = cfg.shoot_tol;
    nopt.max_iters = 30;

    auto solve_at = [&](double tau, const Vec8& z0) -> std::optional<Vec8> {
        fuel.dt = tau;
        fuel.x_target = ocp.target_state(tau);
        auto fn = [&](const Eigen::VectorXd& zv) -> Eigen::VectorXd {
            return shoot_fuel(Costate::from_vec(zv), fuel, cfg);
        };
        const NewtonResult nr = damped_newton(fn, z0, nopt);
        if (nr.converged && nr.z[7] > 0.0) return Vec8(nr.z);
        return std::nullopt;
    };

    Vec8 coast = Vec8::Zero();
    coast[7] = 1.0;

    double tau = ocp.dt;
    std::optional<Vec8> root = solve_at(tau, coast);
    if (!root) {
        // not reachable in dt (or coast guess too far): march tau upward
        for (int k = 0; k < 12 && !root; ++k) {
            tau *= 1.5;
            root = solve_at(tau, coast);
        }
        if (!root) return std::nullopt;
    } else {
        // reachable: march tau down to the infeasibility bracket
        for (int k = 0; k < 40; ++k) {
            const double tau_next = tau * 0.6;
            const std::optional<Vec8> next = solve_at(tau_next, *root);
            if (!next) {
                // refine the bracket once to get closer to the boundary
                const double tau_mid = std::sqrt(tau * tau_next);
                const std::optional<Vec8> mid = solve_at(tau_mid, *root);
                if (mid) {
                    tau = tau_mid;
                    root = mid;
                }
                break;
            }
            tau = tau_next;
            root = next;
            if (tau < 1e-5 * ocp.dt) break;
        }
    }

    // lambda_0 from the transversality row (it enters H additively and does
    // not influence time-mode dynamics)
    Costate lam = Costate::from_vec(*root);
    Eigen::VectorXd guess(9);
    try {
        const AugmentedResult prop = propagate_augmented(ocp.x0, 1.0, lam, 0.0, tau, ocp, cfg);
        const ControlLaw ctrl =
            control_law(prop.lam, prop.m, prop.x, ocp.vex, cfg, ThrustMode::time);
        const double h_no_lam0 = hamiltonian(prop.lam, prop.m, prop.x, ctrl, ocp.thrust,
                                             ocp.vex, ocp.eps, ThrustMode::time) -
                                 lam.lambda_0;
        double lam0 = prop.lam.lambda_x[5] * ocp.target_L_rate(tau) - h_no_lam0;
        if (!(lam0 > 0.0)) lam0 = 0.1;
        Vec8 z = *root;
        z[7] = lam0;
        z /= z.norm();
        guess.head<8>() = z;
        guess[8] = tau;
    } catch (const Error&) {
        return std::nullopt;
    }
    return guess;
}

}  // namespace detail

/// Solve the time-optimal TPBVP; t_f is a ninth unknown initialized from
/// problem.dt (scaled by it for conditioning).
inline TimeSolution solve_time(const TransferProblem& prob, const SolverConfig& cfg,
                               std::optional<TimeWarmStart> warm_start = std::nullopt) {
    const CanonicalOcp ocp = make_canonical_ocp(prob, ThrustMode::time, cfg);
    TimeSolution out;
    const double tf_scale = ocp.dt;

    NewtonOptions nopt;
    nopt.tol = cfg.shoot_tol;
    nopt.max_iters = cfg.max_newton_iters;
    auto residual_fn = [&](const Eigen::VectorXd& zv) -> Eigen::VectorXd {
        const Costate z = Costate::from_vec(zv.head<8>());
        const double tf = zv[8] * tf_scale;
        return shoot_time(z, tf, ocp, cfg);
    };

    auto finish = [&](const NewtonResult& nr) {
        out.costate0 = Costate::from_vec(nr.z.head<8>());
        out.tf_canonical = nr.z[8] * tf_scale;
        out.tf_min = out.tf_canonical * ocp.canon.units.time;
        out.residual_norm = nr.res_inf;
        out.newton_iters = nr.iters;
        out.converged = true;
        if (cfg.record_trajectory) {
            std::vector<TrajectorySample> traj;
            propagate_augmented(ocp.x0, 1.0, out.costate0, 0.0, out.tf_canonical, ocp, cfg,
                                &traj);
            out.trajectory = std::move(traj);
        }
    };

    auto accept = [&](const NewtonResult& nr) {
        return nr.converged && nr.z[7] > 0.0 && nr.z[8] * tf_scale > 0.0;
    };

    if (warm_start) {
        Eigen::VectorXd z0(9);
        z0.head<8>() = warm_start->costate.as_vec();
        z0[8] = warm_start->tf_canonical / tf_scale;
        const NewtonResult nr = damped_newton(residual_fn, z0, nopt);
        if (accept(nr)) finish(nr);
        return out;
    }

    // continuation on fixed-time fuel problems gives a near-root guess;
    // random multistarts are the fallback
    if (const auto guess = detail::time_guess_from_fuel_chain(ocp, cfg)) {
        Eigen::VectorXd z0 = *guess;
        z0[8] /= tf_scale;
        const NewtonResult nr = damped_newton(residual_fn, z0, nopt);
        out.multistarts_used = 1;
        if (accept(nr)) {
            finish(nr);
            return out;
        }
    }

    Rng rng(cfg.rng_seed);
    for (int ms = 0; ms < cfg.max_multistarts; ++ms) {
        out.multistarts_used = ms + 1;
        Eigen::VectorXd z0(9);
        z0.head<8>() = detail::random_unit_costate(rng);
        // t_f initialized from problem.dt, later starts explore around it:
        // short-transfer roots sit far below dt when thrust authority is high
        z0[8] = (ms == 0) ? 1.0 : std::pow(10.0, rng.uniform(-1.7, 0.45));
        const NewtonResult nr = damped_newton(residual_fn, z0, nopt);
        if (accept(nr)) {
            finish(nr);
            return out;
        }
    }
    return out;
}

}  // namespace lowthrust
