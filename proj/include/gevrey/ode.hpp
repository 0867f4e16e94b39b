#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "gevrey/errors.hpp"

namespace gevrey {

using CMat2 = Eigen::Matrix2cd;

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-14;
    double h0 = 1e-3;
    long max_steps = 10'000'000;
};

struct OdeStats {
    long accepted = 0;
    long rejected = 0;
};

// Dormand-Prince 5(4) for Y' = C(s) Y with 2x2 complex Y.
// Returns Y at every requested output point (sorted, >= s0).
inline std::vector<CMat2> integrate_linear(const std::function<CMat2(double)>& coef, double s0, const CMat2& y0,
                                           const std::vector<double>& outputs, const OdeOptions& opt = {},
                                           OdeStats* stats = nullptr)
{
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;

    std::vector<CMat2> out;
    out.reserve(outputs.size());
    double s = s0;
    CMat2 y = y0;
    double h = opt.h0;
    CMat2 k1 = coef(s) * y;
    OdeStats st;
    auto norm = [](const CMat2& m) { return m.cwiseAbs().maxCoeff(); };
    for (double target : outputs) {
        if (target < s - 1e-15) throw Error(ErrorCode::argument, "ODE outputs must be sorted and >= start");
        while (s < target) {
            if (st.accepted + st.rejected > opt.max_steps)
                throw Error(ErrorCode::stiffness, "ODE step budget exhausted");
            bool last = false;
            if (s + h >= target) {
                h = target - s;
                last = true;
            }
            const CMat2 k2 = coef(s + c2 * h) * (y + h * (a21 * k1));
            const CMat2 k3 = coef(s + c3 * h) * (y + h * (a31 * k1 + a32 * k2));
            const CMat2 k4 = coef(s + c4 * h) * (y + h * (a41 * k1 + a42 * k2 + a43 * k3));
            const CMat2 k5 = coef(s + c5 * h) * (y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            const CMat2 k6 = coef(s + h) * (y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            const CMat2 yn = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            const CMat2 k7 = coef(s + h) * yn;
            const CMat2 err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            const double scale = opt.atol + opt.rtol * std::max(norm(y), norm(yn));
            const double r = norm(err) / scale;
            if (r <= 1.0) {
                s = last ? target : s + h;
                y = yn;
                k1 = k7;
                ++st.accepted;
            } else {
                ++st.rejected;
                last = false;
            }
            const double fac = r == 0 ? 5.0 : std::clamp(0.9 * std::pow(r, -0.2), 0.2, 5.0);
            const double hn = h * fac;
            if (!last) h = hn;
            else h = std::max(h, hn);
            if (h < 1e-14 * std::max(1.0, std::abs(s)))
                throw Error(ErrorCode::stiffness, "ODE step size underflow");
        }
        out.push_back(y);
    }
    if (stats) *stats = st;
    return out;
}

inline CMat2 integrate_mode_ode(const std::function<CMat2(double)>& coef, double s0, double s1, double tol = 1e-10)
{
    if (s1 < s0) throw Error(ErrorCode::argument, "integrate_mode_ode needs s0 <= s1");
    OdeOptions opt;
    opt.rtol = tol;
    opt.atol = tol * 1e-4;
    return integrate_linear(coef, s0, CMat2::Identity(), {s1}, opt).front();
}

} // namespace gevrey
