#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "gevrey/airy.hpp"
#include "gevrey/errors.hpp"
#include "gevrey/ode.hpp"

namespace gevrey {

enum class FlowCase { smooth, airy };

inline const char* to_string(FlowCase c) { return c == FlowCase::smooth ? "smooth" : "airy"; }

// eta = 1 for the smooth case, 1/2 for the Airy case.
inline double eta_of(FlowCase c) { return c == FlowCase::smooth ? 1.0 : 0.5; }

// Matrix m * exp(lg).
struct ScaledMatrix {
    CMat2 m = CMat2::Identity();
    double lg = 0;

    double log_norm() const { return std::log(m.cwiseAbs().maxCoeff()) + lg; }

    CMat2 value() const
    {
        if (lg > 700) throw Error(ErrorCode::overflow, "propagator exceeds double range; use the scaled form");
        return m * std::exp(lg);
    }

    // det(m e^lg) as a scaled value
    ScaledComplex det() const { return ScaledComplex{m.determinant(), 2 * lg}.normalized(); }
};

// Closed form exp(a B), B = [[0,1],[-g^2,0]], a = i n (s^2 - s'^2)/2.
inline ScaledMatrix smooth_mode_propagator(int n, double gamma0, double s0, double s1)
{
    if (s0 > s1) throw Error(ErrorCode::argument, "smooth propagator needs s' <= s");
    if (!(gamma0 > 0)) throw Error(ErrorCode::argument, "gamma0 must be positive");
    const double phi = n * gamma0 * (s1 * s1 - s0 * s0) / 2;
    const double a = std::abs(phi);
    const double e = std::exp(-2 * a);
    const double ch = (1 + e) / 2;
    const double sh = (phi < 0 ? -1.0 : 1.0) * (1 - e) / 2;
    const cplx I(0, 1);
    ScaledMatrix r;
    r.m << ch, I * sh / gamma0, -I * gamma0 * sh, ch;
    r.lg = a;
    return r;
}

inline CMat2 smooth_mode_coefficient(int n, double gamma0, double s)
{
    CMat2 c;
    const cplx I(0, 1);
    c << 0, I * double(n) * s, -I * double(n) * s * gamma0 * gamma0, 0;
    return c;
}

inline CMat2 airy_mode_coefficient(int n, double gamma0, double eps, double s)
{
    CMat2 c;
    const cplx I(0, 1);
    c << 0, I * double(n) * std::cbrt(1 / eps), -I * double(n) * std::cbrt(eps) * gamma0 * gamma0 * s, 0;
    return c;
}

namespace prop_detail {

struct AiryColumns {
    ScaledComplex a, ap, b, bp; // Ai_n(s), Ai_n'(s), Ai_n(js), Ai_n'(js)
};

inline AiryColumns airy_columns(const AiryScale& sc, double s)
{
    AiryPair p = airy_n_ray(sc, s, 0.0);
    AiryPair q = airy_n_ray(sc, s, 2 * std::numbers::pi / 3);
    return {p.ai, p.aip, q.ai, q.aip};
}

inline ScaledMatrix assemble(const std::array<ScaledComplex, 4>& e)
{
    double L = -INFINITY;
    for (const auto& v : e)
        if (v.m != cplx(0)) L = std::max(L, v.lg);
    if (!std::isfinite(L)) L = 0;
    ScaledMatrix r;
    r.lg = L;
    for (int i = 0; i < 4; ++i) r.m(i / 2, i % 2) = e[i].m == cplx(0) ? cplx(0) : e[i].m * std::exp(e[i].lg - L);
    return r;
}

} // namespace prop_detail

namespace prop_detail {

// Phi(s) Phi(s')^{-1} from cached columns at s' (P) and s (S).
inline ScaledMatrix airy_flow_from(int n, double eps, const AiryScale& sc, const AiryColumns& P, const AiryColumns& S)
{
    const cplx I(0, 1);
    const cplx c = std::cbrt(eps) / (I * double(n));
    const cplx C = 1.0 / airy_wronskian_reference(sc);
    const cplx j = jroot;
    // V11 = C (j Ai'(js') Ai(s) - Ai'(s') Ai(js))
    ScaledComplex v11 = C * (j * (P.bp * S.a) - P.ap * S.b);
    // V21 = C c (j Ai'(js') Ai'(s) - j Ai'(s') Ai'(js))
    ScaledComplex v21 = (C * c) * (j * (P.bp * S.ap) - j * (P.ap * S.bp));
    // V12 = (C / c) (-Ai(js') Ai(s) + Ai(s') Ai(js))
    ScaledComplex v12 = (C / c) * (P.a * S.b - P.b * S.a);
    // V22 = -C (Ai(js') Ai'(s) - j Ai(s') Ai'(js))
    ScaledComplex v22 = (-C) * (P.b * S.ap - j * (P.a * S.bp));
    return assemble({v11, v12, v21, v22});
}

} // namespace prop_detail

// Phi(s) Phi(s')^{-1} with Phi columns (Ai_n(s), c Ai_n'(s)) and (Ai_n(js), c j Ai_n'(js)),
// c = eps^{1/3} / (i n), and the determinant constant (j-1) Ai_n(0) Ai_n'(0).
// No domain check; the public entry point enforces s < eps^{-2/3}.
inline ScaledMatrix airy_flow_any(int n, double gamma0, double eps, double s0, double s1)
{
    if (n == 0) return ScaledMatrix{};
    const AiryScale sc(n, gamma0);
    return prop_detail::airy_flow_from(n, eps, sc, prop_detail::airy_columns(sc, s0), prop_detail::airy_columns(sc, s1));
}

// exp(a B) for any ordering of s' and s.
inline ScaledMatrix smooth_flow_any(int n, double gamma0, double s0, double s1)
{
    return s0 <= s1 ? smooth_mode_propagator(n, gamma0, s0, s1) : smooth_mode_propagator(-n, gamma0, s1, s0);
}

inline ScaledMatrix airy_mode_propagator(int n, double gamma0, double eps, double s0, double s1)
{
    if (!(eps > 0 && eps < 1)) throw Error(ErrorCode::argument, "eps must lie in (0, 1)");
    if (!(gamma0 > 0)) throw Error(ErrorCode::argument, "gamma0 must be positive");
    if (s0 < 0 || s0 > s1) throw Error(ErrorCode::argument, "airy propagator needs 0 <= s' <= s");
    if (!(s1 < std::pow(eps, -2.0 / 3.0))) throw Error(ErrorCode::argument, "airy propagator needs s < eps^{-2/3}");
    return airy_flow_any(n, gamma0, eps, s0, s1);
}

struct ModePropagator {
    FlowCase kind = FlowCase::smooth;
    int n = 1;
    double gamma0 = 1;
    double eps = 1e-3;

    ScaledMatrix operator()(double s0, double s1) const
    {
        if (n == 0) {
            if (s0 > s1) throw Error(ErrorCode::argument, "propagator needs s' <= s");
            return ScaledMatrix{};
        }
        return kind == FlowCase::smooth ? smooth_mode_propagator(n, gamma0, s0, s1)
                                        : airy_mode_propagator(n, gamma0, eps, s0, s1);
    }

    CMat2 coefficient(double s) const
    {
        return kind == FlowCase::smooth ? smooth_mode_coefficient(n, gamma0, s)
                                        : airy_mode_coefficient(n, gamma0, eps, s);
    }

    // |n| times the integral of gamma-sharp from s0 to s1
    double exponent(double s0, double s1) const
    {
        if (kind == FlowCase::smooth) return std::abs(n) * gamma0 * (s1 * s1 - s0 * s0) / 2;
        return std::abs(n) * gamma0 * (2.0 / 3.0) * (std::pow(s1, 1.5) - std::pow(s0, 1.5));
    }
};

inline double gamma_sharp_integral(FlowCase c, double gamma0, double s0, double s1)
{
    return ModePropagator{c, 1, gamma0, 0.5}.exponent(s0, s1);
}

// det U(s', s). The Airy flow is Phi(s) adj Phi(s') C / c, so its determinant is
// W(s) W(s') / W(0)^2; the entrywise determinant would cancel e^{2g} against itself.
inline cplx flow_determinant(const ModePropagator& U, double s0, double s1)
{
    if (U.n == 0) return 1.0;
    if (U.kind == FlowCase::smooth) return U(s0, s1).det().value();
    const AiryScale sc(U.n, U.gamma0);
    const cplx w0 = airy_wronskian_reference(sc);
    return airy_wronskian(sc, s0) * airy_wronskian(sc, s1) / (w0 * w0);
}

struct GrowthSample {
    double s0 = 0;
    double s1 = 0;
    double log_abs = 0;
};

struct GrowthTrace {
    FlowCase kind = FlowCase::smooth;
    int n = 1;
    double gamma0 = 1;
    std::vector<GrowthSample> samples;
};

struct GrowthFit {
    double C = 0;
    double p = 0;
    double rate = 0;
    double rms = 0;
    std::size_t used = 0;
};

// Least squares of log|U| = log C + p log s + rate |n| int gamma-sharp over samples with s > 2.
inline GrowthFit growth_envelope(const GrowthTrace& tr)
{
    std::vector<const GrowthSample*> use;
    for (const auto& g : tr.samples)
        if (g.s1 > 2.0) use.push_back(&g);
    if (use.size() < 20) throw Error(ErrorCode::diagnostics, "growth fit needs at least 20 samples beyond s = 2");
    Eigen::MatrixXd X(use.size(), 3);
    Eigen::VectorXd y(use.size());
    for (std::size_t i = 0; i < use.size(); ++i) {
        X(i, 0) = 1;
        X(i, 1) = std::log(use[i]->s1);
        X(i, 2) = std::abs(tr.n) * gamma_sharp_integral(tr.kind, tr.gamma0, use[i]->s0, use[i]->s1);
        y(i) = use[i]->log_abs;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < 3) throw Error(ErrorCode::diagnostics, "degenerate growth fit");
    Eigen::VectorXd beta = qr.solve(y);
    GrowthFit f;
    f.C = std::exp(beta(0));
    f.p = beta(1);
    f.rate = beta(2);
    f.rms = std::sqrt((X * beta - y).squaredNorm() / static_cast<double>(use.size()));
    f.used = use.size();
    if (!std::isfinite(f.C) || !std::isfinite(f.p) || !std::isfinite(f.rate))
        throw Error(ErrorCode::diagnostics, "growth fit produced non-finite parameters");
    return f;
}

inline GrowthTrace sample_growth(const ModePropagator& U, double s0, const std::vector<double>& s_grid, int entry = -1)
{
    GrowthTrace tr{U.kind, U.n, U.gamma0, {}};
    for (double s : s_grid) {
        if (s < s0) continue;
        ScaledMatrix m = U(s0, s);
        double la = entry < 0 ? m.log_norm() : std::log(std::abs(m.m(entry / 2, entry % 2))) + m.lg;
        tr.samples.push_back({s0, s, la});
    }
    return tr;
}

using CVec2 = Eigen::Vector2cd;

struct FreeSolution {
    FlowCase kind = FlowCase::smooth;
    double eps = 1e-4;
    double delta = 0.2;
    double gamma0 = 1;
    double M = 0; // eps^{-delta}
    CVec2 e_plus;
    CVec2 e_minus;
    CVec2 h_plus; // mode +1 of the datum, mode -1 is its conjugate
    std::vector<double> s;
    std::vector<CVec2> f_plus; // mode +1 of f(s, .)

    // sup over theta of |f(s, theta)|_inf
    double amplitude(std::size_t i) const { return 2 * f_plus[i].cwiseAbs().maxCoeff(); }

    CVec2 value(std::size_t i, double theta) const
    {
        const cplx e = std::polar(1.0, theta);
        return CVec2(2 * (f_plus[i](0) * e).real(), 2 * (f_plus[i](1) * e).real());
    }
};

inline FreeSolution free_solution(FlowCase kind, double eps, double delta, double gamma0,
                                  const std::vector<double>& s_grid)
{
    if (!(eps > 0 && eps < 1)) throw Error(ErrorCode::argument, "eps must lie in (0, 1)");
    if (!(delta > 0 && delta < 1)) throw Error(ErrorCode::argument, "delta must lie in (0, 1)");
    FreeSolution f;
    f.kind = kind;
    f.eps = eps;
    f.delta = delta;
    f.gamma0 = gamma0;
    f.M = std::pow(eps, -delta);
    const cplx I(0, 1);
    if (kind == FlowCase::smooth) {
        f.e_plus = CVec2(1.0, -I * gamma0);
        f.e_minus = CVec2(1.0, I * gamma0);
    } else {
        const AiryScale sc(1, gamma0);
        const cplx a0 = airy_n(sc, 0.0), a1 = airy_n_deriv(sc, 0.0);
        const double e13 = std::cbrt(eps);
        f.e_plus = CVec2(a0, -I * e13 * jroot * a1);
        f.e_minus = CVec2(a0, I * e13 * jroot * a1);
    }
    // Re(e^{i theta} e+ + e^{-i theta} e-) has mode +1 equal to (e+ + conj e-) / 2
    f.h_plus = std::exp(-f.M) * 0.5 * (f.e_plus + f.e_minus.conjugate());
    ModePropagator U{kind, 1, gamma0, eps};
    for (double s : s_grid) {
        f.s.push_back(s);
        f.f_plus.push_back(U(0.0, s).value() * f.h_plus);
    }
    return f;
}

} // namespace gevrey
