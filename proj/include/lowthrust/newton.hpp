#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Dense>

namespace lowthrust {

struct NewtonOptions {
    double tol = 1e-9;         // convergence on ||F||_inf
    int max_iters = 40;
    double fd_step = 1e-8;     // forward-difference step on unit-scaled unknowns
    int max_backtracks = 10;
    bool use_broyden = true;   // rank-1 Jacobian updates between rebuilds
};

struct NewtonResult {
    Eigen::VectorXd z;
    Eigen::VectorXd residual;
    double res_inf = std::numeric_limits<double>::quiet_NaN();
    int iters = 0;
    long evals = 0;
    bool converged = false;
};

namespace detail {

inline bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace detail

/// Damped Newton for square systems with numerically differenced Jacobian,
/// Broyden updates between rebuilds, and a dogleg trust-region fallback when
/// the damped step stalls. F may return NaNs for inadmissible points; those
/// trial points are rejected by the line search.
template <class F>
NewtonResult damped_newton(F&& fn, Eigen::VectorXd z0, const NewtonOptions& opt) {
    using Eigen::MatrixXd;
    using Eigen::VectorXd;
    const int n = static_cast<int>(z0.size());

    NewtonResult out;
    out.z = std::move(z0);
    out.residual = fn(out.z);
    ++out.evals;
    if (!detail::all_finite(out.residual)) return out;
    out.res_inf = out.residual.lpNorm<Eigen::Infinity>();

    MatrixXd jac(n, n);
    bool have_jac = false;
    bool jac_is_fresh = false;

    auto build_jacobian = [&]() -> bool {
        for (int j = 0; j < n; ++j) {
            const double h = opt.fd_step * std::max(1.0, std::abs(out.z[j]));
            VectorXd zp = out.z;
            zp[j] += h;
            VectorXd rp = fn(zp);
            ++out.evals;
            if (!detail::all_finite(rp)) {
                zp[j] = out.z[j] - h;  // try the backward difference
                rp = fn(zp);
                ++out.evals;
                if (!detail::all_finite(rp)) return false;
                jac.col(j) = (out.residual - rp) / h;
            } else {
                jac.col(j) = (rp - out.residual) / h;
            }
        }
        have_jac = true;
        jac_is_fresh = true;
        return true;
    };

    for (out.iters = 0; out.iters < opt.max_iters; ++out.iters) {
        if (out.res_inf < opt.tol) {
            out.converged = true;
            return out;
        }
        if (!have_jac && !build_jacobian()) return out;

        VectorXd step = jac.partialPivLu().solve(-out.residual);
        if (!detail::all_finite(step)) {
            step = jac.colPivHouseholderQr().solve(-out.residual);
            if (!detail::all_finite(step)) {
                if (!jac_is_fresh && build_jacobian()) {
                    --out.iters;
                    continue;
                }
                return out;
            }
        }

        const double r2 = out.residual.norm();
        bool accepted = false;
        double damping = 1.0;
        for (int bt = 0; bt <= opt.max_backtracks; ++bt) {
            const VectorXd z_try = out.z + damping * step;
            const VectorXd r_try = fn(z_try);
            ++out.evals;
            if (detail::all_finite(r_try) && r_try.norm() < (1.0 - 1e-4 * damping) * r2) {
                if (opt.use_broyden) {
                    const VectorXd dz = z_try - out.z;
                    const VectorXd dr = r_try - out.residual;
                    jac += (dr - jac * dz) * dz.transpose() / dz.squaredNorm();
                    jac_is_fresh = false;
                }
                out.z = z_try;
                out.residual = r_try;
                out.res_inf = r_try.lpNorm<Eigen::Infinity>();
                accepted = true;
                break;
            }
            damping *= 0.5;
        }
        if (accepted) continue;

        // dogleg fallback on the Gauss-Newton model; the radius is capped so a
        // near-singular Jacobian's huge Newton step cannot poison the sweep
        const VectorXd grad = jac.transpose() * out.residual;
        const double gn2 = grad.squaredNorm();
        const double jg2 = (jac * grad).squaredNorm();
        if (gn2 > 0.0 && jg2 > 0.0) {
            const VectorXd cauchy = -(gn2 / jg2) * grad;
            double radius = std::min(0.25 * step.norm(), 4.0 * (1.0 + out.z.norm()));
            for (int tr = 0; tr < 12 && !accepted; ++tr) {
                VectorXd d;
                if (step.norm() <= radius) {
                    d = step;
                } else if (cauchy.norm() >= radius) {
                    d = (radius / cauchy.norm()) * cauchy;
                } else {
                    const VectorXd w = step - cauchy;
                    const double a = w.squaredNorm();
                    const double b = 2.0 * cauchy.dot(w);
                    const double c = cauchy.squaredNorm() - radius * radius;
                    const double tau = (-b + std::sqrt(std::max(0.0, b * b - 4.0 * a * c))) /
                                       (2.0 * a);
                    d = cauchy + tau * w;
                }
                const VectorXd z_try = out.z + d;
                const VectorXd r_try = fn(z_try);
                ++out.evals;
                if (detail::all_finite(r_try) && r_try.norm() < r2) {
                    out.z = z_try;
                    out.residual = r_try;
                    out.res_inf = r_try.lpNorm<Eigen::Infinity>();
                    accepted = true;
                }
                radius *= 0.25;
            }
        }
        // Levenberg-Marquardt sweep when the dogleg makes no progress
        if (!accepted) {
            const MatrixXd jtj = jac.transpose() * jac;
            const double scale = std::max(jtj.trace() / n, 1e-12);
            for (double mu = 1e-6 * scale; mu <= 1e4 * scale && !accepted; mu *= 30.0) {
                MatrixXd damped = jtj;
                damped.diagonal().array() += mu;
                const VectorXd d = damped.ldlt().solve(-grad);
                if (!detail::all_finite(d)) continue;
                const VectorXd z_try = out.z + d;
                const VectorXd r_try = fn(z_try);
                ++out.evals;
                if (detail::all_finite(r_try) && r_try.norm() < r2) {
                    out.z = z_try;
                    out.residual = r_try;
                    out.res_inf = r_try.lpNorm<Eigen::Infinity>();
                    accepted = true;
                }
            }
        }
        if (accepted) {
            have_jac = false;  // model was poor locally, rebuild next pass
            continue;
        }
        if (!jac_is_fresh) {
            if (!build_jacobian()) return out;
            --out.iters;
            continue;
        }
        return out;  // stalled with a fresh Jacobian
    }
    out.converged = out.res_inf < opt.tol;
    return out;
}

}  // namespace lowthrust
