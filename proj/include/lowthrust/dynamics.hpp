#pragma once

#include <array>
#include <cmath>

#include "lowthrust/elements.hpp"
#include "lowthrust/linalg.hpp"

namespace lowthrust {

/// MEE equations of motion split as xdot = D(x) + M(x) * a_rtn, where a_rtn
/// is the perturbing acceleration in the local radial/transverse/normal frame.
struct DynamicsEval {
    Vec6 d_vec = Vec6::Zero();
    Mat63 m_mat = Mat63::Zero();
    bool has_partials = false;
    Mat66 dD = Mat66::Zero();            // dD(i,j) = dD_i/dx_j
    std::array<Mat63, 6> dM = {};        // dM[j] = dM/dx_j
};

/// Evaluate D, M (and optionally their analytic partials) at an MEE state.
/// Uses w = 1 + f cosL + g sinL, s^2 = 1 + h^2 + k^2.
inline DynamicsEval mee_dynamics(const Mee& x, GravParam gp, bool with_partials = false) {
    DynamicsEval out;
    const double mu = gp.mu;
    const double p = x.p, f = x.f, g = x.g, h = x.h, k = x.k;
    const double cL = std::cos(x.L), sL = std::sin(x.L);
    const double w = 1.0 + f * cL + g * sL;
    const double s2 = 1.0 + h * h + k * k;
    const double xi = h * sL - k * cL;
    const double q = std::sqrt(p / mu);
    const double inv_w = 1.0 / w;

    // gravitational drift: only L advances
    const double dL = std::sqrt(mu * p) * (w / p) * (w / p);
    out.d_vec[5] = dL;

    // control influence matrix, scaled by sqrt(p/mu)
    Mat63 n = Mat63::Zero();
    n(0, 1) = 2.0 * p * inv_w;
    n(1, 0) = sL;
    n(1, 1) = ((w + 1.0) * cL + f) * inv_w;
    n(1, 2) = -xi * g * inv_w;
    n(2, 0) = -cL;
    n(2, 1) = ((w + 1.0) * sL + g) * inv_w;
    n(2, 2) = xi * f * inv_w;
    n(3, 2) = 0.5 * s2 * cL * inv_w;
    n(4, 2) = 0.5 * s2 * sL * inv_w;
    n(5, 2) = xi * inv_w;
    out.m_mat = q * n;

    if (!with_partials) return out;
    out.has_partials = true;

    const double inv_w2 = inv_w * inv_w;
    const double sqrt_mu = std::sqrt(mu);
    const double wL = -f * sL + g * cL;   // dw/dL
    const double xiL = h * cL + k * sL;   // dxi/dL

    // D partials (only the L row is nonzero)
    out.dD(5, 0) = -1.5 * sqrt_mu * std::pow(p, -2.5) * w * w;
    out.dD(5, 1) = sqrt_mu * std::pow(p, -1.5) * 2.0 * w * cL;
    out.dD(5, 2) = sqrt_mu * std::pow(p, -1.5) * 2.0 * w * sL;
    out.dD(5, 5) = sqrt_mu * std::pow(p, -1.5) * 2.0 * w * wL;

    // dM/dp = M/(2p) + q * dN/dp (only N(0,1) depends on p)
    out.dM[0] = out.m_mat / (2.0 * p);
    out.dM[0](0, 1) += q * 2.0 * inv_w;

    // dM/df (dw/df = cL)
    {
        Mat63 d = Mat63::Zero();
        d(0, 1) = -2.0 * p * cL * inv_w2;
        d(1, 1) = ((cL * cL + 1.0) * w - ((w + 1.0) * cL + f) * cL) * inv_w2;
        d(1, 2) = xi * g * cL * inv_w2;
        d(2, 1) = (cL * sL * w - ((w + 1.0) * sL + g) * cL) * inv_w2;
        d(2, 2) = xi * (w - f * cL) * inv_w2;
        d(3, 2) = -0.5 * s2 * cL * cL * inv_w2;
        d(4, 2) = -0.5 * s2 * sL * cL * inv_w2;
        d(5, 2) = -xi * cL * inv_w2;
        out.dM[1] = q * d;
    }
    // dM/dg (dw/dg = sL)
    {
        Mat63 d = Mat63::Zero();
        d(0, 1) = -2.0 * p * sL * inv_w2;
        d(1, 1) = (cL * sL * w - ((w + 1.0) * cL + f) * sL) * inv_w2;
        d(1, 2) = -xi * (w - g * sL) * inv_w2;
        d(2, 1) = ((sL * sL + 1.0) * w - ((w + 1.0) * sL + g) * sL) * inv_w2;
        d(2, 2) = -xi * f * sL * inv_w2;
        d(3, 2) = -0.5 * s2 * cL * sL * inv_w2;
        d(4, 2) = -0.5 * s2 * sL * sL * inv_w2;
        d(5, 2) = -xi * sL * inv_w2;
        out.dM[2] = q * d;
    }
    // dM/dh (dxi/dh = sL, ds2/dh = 2h)
    {
        Mat63 d = Mat63::Zero();
        d(1, 2) = -sL * g * inv_w;
        d(2, 2) = sL * f * inv_w;
        d(3, 2) = h * cL * inv_w;
        d(4, 2) = h * sL * inv_w;
        d(5, 2) = sL * inv_w;
        out.dM[3] = q * d;
    }
    // dM/dk (dxi/dk = -cL, ds2/dk = 2k)
    {
        Mat63 d = Mat63::Zero();
        d(1, 2) = cL * g * inv_w;
        d(2, 2) = -cL * f * inv_w;
        d(3, 2) = k * cL * inv_w;
        d(4, 2) = k * sL * inv_w;
        d(5, 2) = -cL * inv_w;
        out.dM[4] = q * d;
    }
    // dM/dL
    {
        Mat63 d = Mat63::Zero();
        d(0, 1) = -2.0 * p * wL * inv_w2;
        d(1, 0) = cL;
        d(1, 1) = ((wL * cL - (w + 1.0) * sL) * w - ((w + 1.0) * cL + f) * wL) * inv_w2;
        d(1, 2) = -g * (xiL * w - xi * wL) * inv_w2;
        d(2, 0) = sL;
        d(2, 1) = ((wL * sL + (w + 1.0) * cL) * w - ((w + 1.0) * sL + g) * wL) * inv_w2;
        d(2, 2) = f * (xiL * w - xi * wL) * inv_w2;
        d(3, 2) = 0.5 * s2 * (-sL * w - cL * wL) * inv_w2;
        d(4, 2) = 0.5 * s2 * (cL * w - sL * wL) * inv_w2;
        d(5, 2) = (xiL * w - xi * wL) * inv_w2;
        out.dM[5] = q * d;
    }
    return out;
}

/// Radial / transverse / normal basis at an MEE state, as rows of a matrix
/// that maps inertial vectors into RTN components.
inline Mat3 mee_rtn_basis(const Mee& x, GravParam gp) {
    const auto [r, v] = mee_to_cart(x, gp);
    const Vec3 rhat = r.normalized();
    const Vec3 nhat = r.cross(v).normalized();
    const Vec3 that = nhat.cross(rhat);
    Mat3 b;
    b.row(0) = rhat;
    b.row(1) = that;
    b.row(2) = nhat;
    return b;
}

}  // namespace lowthrust
