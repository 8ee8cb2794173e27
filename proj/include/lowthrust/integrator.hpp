#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "lowthrust/errors.hpp"

namespace lowthrust {

struct OdeOptions {
    double rel_tol = 1e-11;
    double abs_tol = 1e-11;
    long max_steps = 500000;
    double initial_step = 0.0;  // 0 -> automatic
};

struct OdeStats {
    long n_rhs = 0;
    long n_steps = 0;
    long n_rejected = 0;
};

namespace dop853 {

// Hairer-Norsett-Wanner DOP853 tableau (explicit 8(5,3) pair).
inline constexpr double c2 = 0.526001519587677318785587544488e-01;
inline constexpr double c3 = 0.789002279381515978178381316732e-01;
inline constexpr double c4 = 0.118350341907227396726757197510e+00;
inline constexpr double c5 = 0.281649658092772603273242802490e+00;
inline constexpr double c6 = 0.333333333333333333333333333333e+00;
inline constexpr double c7 = 0.25e+00;
inline constexpr double c8 = 0.307692307692307692307692307692e+00;
inline constexpr double c9 = 0.651282051282051282051282051282e+00;
inline constexpr double c10 = 0.6e+00;
inline constexpr double c11 = 0.857142857142857142857142857142e+00;

inline constexpr double a21 = 5.26001519587677318785587544488e-2;
inline constexpr double a31 = 1.97250569845378994544595329183e-2;
inline constexpr double a32 = 5.91751709536136983633785987549e-2;
inline constexpr double a41 = 2.95875854768068491816892993775e-2;
inline constexpr double a43 = 8.87627564304205475450678981324e-2;
inline constexpr double a51 = 2.41365134159266685502369798665e-1;
inline constexpr double a53 = -8.84549479328286085344864962717e-1;
inline constexpr double a54 = 9.24834003261792003115737966543e-1;
inline constexpr double a61 = 3.7037037037037037037037037037e-2;
inline constexpr double a64 = 1.70828608729473871279604482173e-1;
inline constexpr double a65 = 1.25467687566822425016691814123e-1;
inline constexpr double a71 = 3.7109375e-2;
inline constexpr double a74 = 1.70252211019544039314978060272e-1;
inline constexpr double a75 = 6.02165389804559606850219397283e-2;
inline constexpr double a76 = -1.7578125e-2;
inline constexpr double a81 = 3.70920001185047927108779319836e-2;
inline constexpr double a84 = 1.70383925712239993810214054705e-1;
inline constexpr double a85 = 1.07262030446373284651809199168e-1;
inline constexpr double a86 = -1.53194377486244017527936158236e-2;
inline constexpr double a87 = 8.27378916381402288758473766002e-3;
inline constexpr double a91 = 6.24110958716075717114429577812e-1;
inline constexpr double a94 = -3.36089262944694129406857109825e0;
inline constexpr double a95 = -8.68219346841726006818189891453e-1;
inline constexpr double a96 = 2.75920996994467083049415600797e1;
inline constexpr double a97 = 2.01540675504778934086186788979e1;
inline constexpr double a98 = -4.34898841810699588477366255144e1;
inline constexpr double a101 = 4.77662536438264365890433908527e-1;
inline constexpr double a104 = -2.48811461997166764192642586468e0;
inline constexpr double a105 = -5.90290826836842996371446475743e-1;
inline constexpr double a106 = 2.12300514481811942347288949897e1;
inline constexpr double a107 = 1.52792336328824235832596922938e1;
inline constexpr double a108 = -3.32882109689848629194453265587e1;
inline constexpr double a109 = -2.03312017085086261358222928593e-2;
inline constexpr double a111 = -9.3714243008598732571704021658e-1;
inline constexpr double a114 = 5.18637242884406370830023853209e0;
inline constexpr double a115 = 1.09143734899672957818500254654e0;
inline constexpr double a116 = -8.14978701074692612513997267357e0;
inline constexpr double a117 = -1.85200656599969598641566180701e1;
inline constexpr double a118 = 2.27394870993505042818970056734e1;
inline constexpr double a119 = 2.49360555267965238987089396762e0;
inline constexpr double a1110 = -3.0467644718982195003823669022e0;
inline constexpr double a121 = 2.27331014751653820792359768449e0;
inline constexpr double a124 = -1.05344954667372501984066689879e1;
inline constexpr double a125 = -2.00087205822486249909675718444e0;
inline constexpr double a126 = -1.79589318631187989172765950534e1;
inline constexpr double a127 = 2.79488845294199600508499808837e1;
inline constexpr double a128 = -2.85899827713502369474065508674e0;
inline constexpr double a129 = -8.87285693353062954433549289258e0;
inline constexpr double a1210 = 1.23605671757943030647266201528e1;
inline constexpr double a1211 = 6.43392746015763530355970484046e-1;

inline constexpr double b1 = 5.42937341165687622380535766363e-2;
inline constexpr double b6 = 4.45031289275240888144113950566e0;
inline constexpr double b7 = 1.89151789931450038304281599044e0;
inline constexpr double b8 = -5.8012039600105847814672114227e0;
inline constexpr double b9 = 3.1116436695781989440891606237e-1;
inline constexpr double b10 = -1.52160949662516078556178806805e-1;
inline constexpr double b11 = 2.01365400804030348374776537501e-1;
inline constexpr double b12 = 4.47106157277725905176885569043e-2;

// 3rd-order error weights
inline constexpr double bhh1 = 0.244094488188976377952755905512e+00;
inline constexpr double bhh2 = 0.733846688281611857341361741547e+00;
inline constexpr double bhh3 = 0.220588235294117647058823529412e-01;

// 5th-order error weights
inline constexpr double er1 = 0.1312004499419488073250102996e-01;
inline constexpr double er6 = -0.1225156446376204440720569753e+01;
inline constexpr double er7 = -0.4957589496572501915214079952e+00;
inline constexpr double er8 = 0.1664377182454986536961530415e+01;
inline constexpr double er9 = -0.3503288487499736816886487290e+00;
inline constexpr double er10 = 0.3341791187130174790297318841e+00;
inline constexpr double er11 = 0.8192320648511571246570742613e-01;
inline constexpr double er12 = -0.2235530786388629525884427845e-01;

}  // namespace dop853

/// Adaptive DOP853 integrator over a fixed-size state.
///
/// The right-hand side has signature
///   bool rhs(double t, const State& y, State& dydt)
/// and returns false when `y` has left the admissible region, which forces
/// step rejection (StateInvalid if no admissible step size exists).
template <int N, class Rhs>
class Dop853 {
public:
    using State = Eigen::Matrix<double, N, 1>;

    Dop853(Rhs rhs, const OdeOptions& opt) : rhs_(rhs), opt_(opt) {}

    /// Integrate y from t0 to t1 in place; returns stats. Keeps the step-size
    /// suggestion between calls so segmented output stays efficient.
    void advance(State& y, double t0, double t1) {
        if (t1 == t0) return;
        const double dir = t1 > t0 ? 1.0 : -1.0;
        double t = t0;
        State f0;
        if (!rhs_(t, y, f0)) throw StateInvalid("dop853: initial state invalid");
        ++stats_.n_rhs;
        double h = (h_next_ != 0.0) ? std::abs(h_next_) : initial_step(y, f0, t0, t1);
        h = std::min(h, std::abs(t1 - t0));
        double err_old = 1e-4;
        bool rejected_last = false;
        long invalid_in_row = 0;

        for (long step = 0; step < opt_.max_steps; ++step) {
            if (h < 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0)) {
                if (invalid_in_row > 0)
                    throw StateInvalid("dop853: state left admissible region");
                throw IntegrationFailure("dop853: step size underflow");
            }
            bool last = false;
            if ((t + dir * h * 1.0001 - t1) * dir > 0.0) {
                h = std::abs(t1 - t);
                last = true;
            }
            const double hs = dir * h;

            State y_new, slope;
            double err;
            if (!try_step(y, f0, t, hs, y_new, slope, err)) {
                ++stats_.n_rejected;
                ++invalid_in_row;
                h *= 0.25;
                rejected_last = true;
                continue;
            }
            invalid_in_row = 0;

            if (!(err < 1.0)) {  // rejects NaN as well
                ++stats_.n_rejected;
                const double scale = std::isfinite(err)
                                         ? std::max(kSafe * std::pow(err, -kAlpha), kMinScale)
                                         : kMinScale;
                h *= scale;
                rejected_last = true;
                continue;
            }

            // accept
            ++stats_.n_steps;
            t += hs;
            y = y_new;
            double scale = (err == 0.0) ? kMaxScale
                                        : kSafe * std::pow(err, -kAlpha) * std::pow(err_old, kBeta);
            scale = std::clamp(scale, kMinScale, kMaxScale);
            if (rejected_last) scale = std::min(scale, 1.0);
            rejected_last = false;
            err_old = std::max(err, 1e-4);
            h *= scale;
            h_next_ = h;

            if (last || (t - t1) * dir >= 0.0) return;
            if (!rhs_(t, y, f0)) throw StateInvalid("dop853: state left admissible region");
            ++stats_.n_rhs;
        }
        throw IntegrationFailure("dop853: step cap exceeded");
    }

    void reset_step() { h_next_ = 0.0; }
    const OdeStats& stats() const { return stats_; }

private:
    static constexpr double kAlpha = 1.0 / 8.0;
    static constexpr double kBeta = 0.0;
    static constexpr double kSafe = 0.9;
    static constexpr double kMinScale = 0.333;
    static constexpr double kMaxScale = 6.0;

    double error_scale(double yi, double yni) const {
        return opt_.abs_tol + opt_.rel_tol * std::max(std::abs(yi), std::abs(yni));
    }

    // One DOP853 step of (signed) size hs from (t, y) with slope f0 at y.
    // Returns false if any stage hits an inadmissible state.
    bool try_step(const State& y, const State& f0, double t, double hs, State& y_new,
                  State& slope, double& err) {
        using namespace dop853;
        State k2, k3, k4, k5, k6, k7, k8, k9, k10, k11, k12, yw;
        auto eval = [&](double c, const State& arg, State& out) {
            ++stats_.n_rhs;
            return rhs_(t + c * hs, arg, out);
        };

        yw = y + hs * (a21 * f0);
        if (!eval(c2, yw, k2)) return false;
        yw = y + hs * (a31 * f0 + a32 * k2);
        if (!eval(c3, yw, k3)) return false;
        yw = y + hs * (a41 * f0 + a43 * k3);
        if (!eval(c4, yw, k4)) return false;
        yw = y + hs * (a51 * f0 + a53 * k3 + a54 * k4);
        if (!eval(c5, yw, k5)) return false;
        yw = y + hs * (a61 * f0 + a64 * k4 + a65 * k5);
        if (!eval(c6, yw, k6)) return false;
        yw = y + hs * (a71 * f0 + a74 * k4 + a75 * k5 + a76 * k6);
        if (!eval(c7, yw, k7)) return false;
        yw = y + hs * (a81 * f0 + a84 * k4 + a85 * k5 + a86 * k6 + a87 * k7);
        if (!eval(c8, yw, k8)) return false;
        yw = y + hs * (a91 * f0 + a94 * k4 + a95 * k5 + a96 * k6 + a97 * k7 + a98 * k8);
        if (!eval(c9, yw, k9)) return false;
        yw = y + hs * (a101 * f0 + a104 * k4 + a105 * k5 + a106 * k6 + a107 * k7 + a108 * k8 +
                       a109 * k9);
        if (!eval(c10, yw, k10)) return false;
        yw = y + hs * (a111 * f0 + a114 * k4 + a115 * k5 + a116 * k6 + a117 * k7 + a118 * k8 +
                       a119 * k9 + a1110 * k10);
        if (!eval(c11, yw, k11)) return false;
        yw = y + hs * (a121 * f0 + a124 * k4 + a125 * k5 + a126 * k6 + a127 * k7 + a128 * k8 +
                       a129 * k9 + a1210 * k10 + a1211 * k11);
        if (!eval(1.0, yw, k12)) return false;

        slope = b1 * f0 + b6 * k6 + b7 * k7 + b8 * k8 + b9 * k9 + b10 * k10 + b11 * k11 +
                b12 * k12;
        y_new = y + hs * slope;

        // Hairer's combined 5th/3rd-order error estimate
        double err3 = 0.0, err5 = 0.0;
        for (int i = 0; i < N; ++i) {
            const double sk = error_scale(y[i], y_new[i]);
            const double e3 = slope[i] - bhh1 * f0[i] - bhh2 * k9[i] - bhh3 * k12[i];
            const double e5 = er1 * f0[i] + er6 * k6[i] + er7 * k7[i] + er8 * k8[i] +
                              er9 * k9[i] + er10 * k10[i] + er11 * k11[i] + er12 * k12[i];
            err3 += (e3 / sk) * (e3 / sk);
            err5 += (e5 / sk) * (e5 / sk);
        }
        double deno = err5 + 0.01 * err3;
        if (deno <= 0.0) deno = 1.0;
        err = std::abs(hs) * err5 * std::sqrt(1.0 / (N * deno));
        return true;
    }

    // Hairer HINIT-style starting step estimate.
    double initial_step(const State& y, const State& f0, double t0, double t1) {
        if (opt_.initial_step > 0.0) return opt_.initial_step;
        const double dir = t1 > t0 ? 1.0 : -1.0;
        double dnf = 0.0, dny = 0.0;
        for (int i = 0; i < N; ++i) {
            const double sk = opt_.abs_tol + opt_.rel_tol * std::abs(y[i]);
            dnf += (f0[i] / sk) * (f0[i] / sk);
            dny += (y[i] / sk) * (y[i] / sk);
        }
        double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
        h = std::min(h, std::abs(t1 - t0));

        State y1 = y + dir * h * f0;
        State f1;
        if (!rhs_(t0 + dir * h, y1, f1)) return std::max(1e-6 * std::abs(t1 - t0), 1e-12);
        ++stats_.n_rhs;
        double der2 = 0.0;
        for (int i = 0; i < N; ++i) {
            const double sk = opt_.abs_tol + opt_.rel_tol * std::abs(y[i]);
            der2 += ((f1[i] - f0[i]) / sk) * ((f1[i] - f0[i]) / sk);
        }
        der2 = std::sqrt(der2) / h;
        const double der12 = std::max(der2, std::sqrt(dnf));
        double h1 = (der12 <= 1e-15) ? std::max(1e-6, h * 1e-3)
                                     : std::pow(0.01 / der12, 1.0 / 8.0);
        return std::min({100.0 * h, h1, std::abs(t1 - t0)});
    }

    Rhs rhs_;
    OdeOptions opt_;
    OdeStats stats_;
    double h_next_ = 0.0;
};

/// One-shot integration helper.
template <int N, class Rhs>
Eigen::Matrix<double, N, 1> integrate_dop853(Rhs&& rhs, double t0, double t1,
                                             Eigen::Matrix<double, N, 1> y0,
                                             const OdeOptions& opt, OdeStats* stats = nullptr) {
    Dop853<N, Rhs&> solver(rhs, opt);
    solver.advance(y0, t0, t1);
    if (stats) *stats = solver.stats();
    return y0;
}

}  // namespace lowthrust
