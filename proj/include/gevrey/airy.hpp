#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <utility>

#include "gevrey/errors.hpp"

namespace gevrey {

using cplx = std::complex<double>;

inline const cplx jroot{-0.5, 0.8660254037844386}; // e^{2 i pi / 3}

// Value m * exp(lg). Used where the plain double would overflow.
struct ScaledComplex {
    cplx m{0.0, 0.0};
    double lg = 0;

    static ScaledComplex from(cplx v) { return {v, 0.0}; }

    double log_abs() const { return std::log(std::abs(m)) + lg; }

    bool representable() const
    {
        return m == cplx(0) || log_abs() < 709.0;
    }

    cplx value() const
    {
        if (m == cplx(0)) return m;
        if (!representable()) throw Error(ErrorCode::overflow, "Airy value exceeds double range; use the scaled form");
        return m * std::exp(lg);
    }

    ScaledComplex normalized() const
    {
        const double a = std::abs(m);
        if (a == 0 || !std::isfinite(a)) return *this;
        const double l = std::log(a);
        return {m / a, lg + l};
    }

    friend ScaledComplex operator*(const ScaledComplex& a, const ScaledComplex& b)
    {
        return ScaledComplex{a.m * b.m, a.lg + b.lg}.normalized();
    }

    friend ScaledComplex operator*(const ScaledComplex& a, cplx c) { return ScaledComplex{a.m * c, a.lg}.normalized(); }
    friend ScaledComplex operator*(cplx c, const ScaledComplex& a) { return a * c; }

    friend ScaledComplex operator+(const ScaledComplex& a, const ScaledComplex& b)
    {
        if (a.m == cplx(0)) return b;
        if (b.m == cplx(0)) return a;
        const double L = std::max(a.lg, b.lg);
        return ScaledComplex{a.m * std::exp(a.lg - L) + b.m * std::exp(b.lg - L), L}.normalized();
    }

    friend ScaledComplex operator-(const ScaledComplex& a) { return {-a.m, a.lg}; }
    friend ScaledComplex operator-(const ScaledComplex& a, const ScaledComplex& b) { return a + (-b); }

    ScaledComplex conj() const { return {std::conj(m), lg}; }
};

struct AiryPair {
    ScaledComplex ai;
    ScaledComplex aip;
};

namespace airy_detail {

using lcplx = std::complex<long double>;

constexpr long double ai0 = 0.355028053887817239260063186004183176L;
constexpr long double aip0 = -0.258819403792806798405183560189203963L;
constexpr double inner_radius = 2.0;
constexpr double outer_radius = 12.0;
constexpr double step = 0.25;

inline lcplx polar_l(long double r, long double phi) { return {r * std::cos(phi), r * std::sin(phi)}; }

inline std::pair<lcplx, lcplx> maclaurin(lcplx z)
{
    // a_{m+3} = a_m / ((m+3)(m+2)), a_0 = Ai(0), a_1 = Ai'(0), a_2 = 0
    lcplx y = ai0 + aip0 * z;
    lcplx yp = aip0;
    long double a[3] = {ai0, aip0, 0.0L};
    lcplx zp[3] = {1.0L, z, z * z};
    const lcplx z2 = z * z;
    const lcplx z3 = z2 * z;
    for (int m = 0; m < 400; m += 3) {
        bool small = true;
        for (int r = 0; r < 3; ++r) {
            const int k = m + r;
            a[r] = a[r] / ((k + 3.0L) * (k + 2.0L));
            const lcplx zk = zp[r] * z3; // z^{k+3}
            const lcplx term = a[r] * zk;
            y += term;
            yp += (k + 3.0L) * a[r] * zp[r] * z2;
            zp[r] = zk;
            if (std::abs(term) > 1e-24L * std::max(std::abs(y), 1e-300L)) small = false;
        }
        if (small) break;
    }
    return {y, yp};
}

// Taylor step of y'' = z y from z0 to z0 + h.
inline void taylor_step(lcplx z0, lcplx h, lcplx& y, lcplx& yp)
{
    lcplx b[4] = {y, yp * h, z0 * y * h * h / 2.0L, 0};
    lcplx sy = b[0] + b[1] + b[2];
    lcplx syp = b[1] + 2.0L * b[2];
    const lcplx h2 = h * h, h3 = h2 * h;
    // b_{k+2} = (z0 h^2 b_k + h^3 b_{k-1}) / ((k+2)(k+1))
    lcplx bkm1 = b[0], bk = b[1], bkp1 = b[2];
    const long double scale = std::max(std::abs(sy), std::abs(syp * h));
    for (int k = 1; k < 200; ++k) {
        const lcplx nb = (z0 * h2 * bk + h3 * bkm1) / ((k + 2.0L) * (k + 1.0L));
        sy += nb;
        syp += (k + 2.0L) * nb;
        bkm1 = bk;
        bk = bkp1;
        bkp1 = nb;
        if (k > 3 && std::abs(nb) * (k + 2) < 1e-22L * scale && std::abs(bk) * (k + 1) < 1e-22L * scale) break;
    }
    y = sy;
    yp = syp / h;
}

// Asymptotic expansion, valid for |phi| <= 2 pi / 3 and large r.
inline AiryPair asymptotic(double r, double phi)
{
    const long double rl = r;
    const long double r32 = std::pow(rl, 1.5L);
    const lcplx zeta = (2.0L / 3.0L) * polar_l(r32, 1.5L * phi);
    const lcplx z14 = polar_l(std::pow(rl, 0.25L), phi / 4.0L);
    lcplx su = 1.0L, sv = 1.0L;
    long double u = 1.0L;
    lcplx zk = 1.0L;
    long double last = INFINITY;
    for (int k = 1; k < 200; ++k) {
        u *= (6.0L * k - 5.0L) * (6.0L * k - 3.0L) * (6.0L * k - 1.0L) / ((2.0L * k - 1.0L) * 216.0L * k);
        const long double v = -(6.0L * k + 1.0L) / (6.0L * k - 1.0L) * u;
        zk *= -1.0L / zeta;
        const lcplx tu = u * zk, tv = v * zk;
        const long double mag = std::max(std::abs(tu), std::abs(tv));
        if (mag > last) break;
        su += tu;
        sv += tv;
        last = mag;
        if (mag < 1e-21L) break;
    }
    const long double sqpi = std::sqrt(std::numbers::pi_v<long double>);
    const lcplx phase = std::exp(lcplx(0.0L, -zeta.imag()));
    const lcplx mai = phase * su / (2.0L * sqpi * z14);
    const lcplx maip = -phase * z14 * sv / (2.0L * sqpi);
    const double lg = static_cast<double>(-zeta.real());
    return {ScaledComplex{cplx(mai), lg}.normalized(), ScaledComplex{cplx(maip), lg}.normalized()};
}

// Evaluation for 0 <= phi <= pi.
inline AiryPair upper_half(double r, double phi)
{
    using std::numbers::pi;
    if (r <= inner_radius) {
        auto [y, yp] = maclaurin(polar_l(r, phi));
        return {ScaledComplex::from(cplx(y)), ScaledComplex::from(cplx(yp))};
    }
    if (r >= outer_radius) {
        if (phi <= 2 * pi / 3 + 1e-13) return asymptotic(r, phi);
        AiryPair a = asymptotic(r, phi - 4 * pi / 3);
        AiryPair b = asymptotic(r, phi - 2 * pi / 3);
        const cplx j = jroot, j2 = jroot * jroot;
        return {-(j * a.ai) - j2 * b.ai, -(j2 * a.aip) - j * b.aip};
    }
    const lcplx dir = polar_l(1.0L, phi);
    lcplx y, yp;
    double lg = 0;
    double r0, r1;
    if (phi < pi / 3) {
        AiryPair anchor = asymptotic(outer_radius, phi);
        lg = anchor.ai.lg;
        y = lcplx(anchor.ai.m) * std::exp(static_cast<long double>(anchor.ai.lg - lg));
        yp = lcplx(anchor.aip.m) * std::exp(static_cast<long double>(anchor.aip.lg - lg));
        r0 = outer_radius;
        r1 = r;
    } else {
        auto p = maclaurin(polar_l(inner_radius, phi));
        y = p.first;
        yp = p.second;
        r0 = inner_radius;
        r1 = r;
    }
    const int nsteps = std::max(1, static_cast<int>(std::ceil(std::abs(r1 - r0) / step)));
    const long double dr = (static_cast<long double>(r1) - r0) / nsteps;
    for (int i = 0; i < nsteps; ++i) {
        const lcplx z0 = dir * (r0 + i * dr);
        taylor_step(z0, dir * dr, y, yp);
    }
    return {ScaledComplex{cplx(y), lg}.normalized(), ScaledComplex{cplx(yp), lg}.normalized()};
}

} // namespace airy_detail

// Ai and Ai' at z = r e^{i phi}. Passing the polar form keeps rays such as
// arg z = 2 pi / 3 exact.
inline AiryPair airy_ray(double r, double phi)
{
    using std::numbers::pi;
    if (!(r >= 0) || !std::isfinite(r)) throw Error(ErrorCode::argument, "Airy radius must be finite and nonnegative");
    while (phi > pi) phi -= 2 * pi;
    while (phi < -pi) phi += 2 * pi;
    if (phi < 0) {
        AiryPair p = airy_detail::upper_half(r, -phi);
        return {p.ai.conj(), p.aip.conj()};
    }
    return airy_detail::upper_half(r, phi);
}

inline AiryPair airy_scaled(cplx z) { return airy_ray(std::abs(z), std::arg(z)); }

inline cplx airy_std(cplx z) { return airy_scaled(z).ai.value(); }
inline cplx airy_std_deriv(cplx z) { return airy_scaled(z).aip.value(); }

struct AiryScale {
    int n = 1;
    double gamma0 = 1.0;

    AiryScale(int n_, double g) : n(n_), gamma0(g)
    {
        if (n == 0) throw Error(ErrorCode::argument, "Airy scale needs n != 0");
        if (!(gamma0 > 0)) throw Error(ErrorCode::argument, "Airy scale needs gamma0 > 0");
    }

    double lambda() const { return std::abs(n) * gamma0; }
    double mu() const { return std::cbrt(lambda() * lambda()); }
};

// Ai_n(z) = lambda^{-1/3} Ai(mu z), Ai_n'(z) = lambda^{1/3} Ai'(mu z), lambda = |n| gamma0.
inline AiryPair airy_n_ray(const AiryScale& sc, double r, double phi)
{
    AiryPair p = airy_ray(sc.mu() * r, phi);
    const double l3 = std::log(sc.lambda()) / 3.0;
    p.ai.lg -= l3;
    p.aip.lg += l3;
    return p;
}

inline AiryPair airy_n_scaled(const AiryScale& sc, cplx z) { return airy_n_ray(sc, std::abs(z), std::arg(z)); }

inline cplx airy_n(const AiryScale& sc, cplx z) { return airy_n_scaled(sc, z).ai.value(); }
inline cplx airy_n_deriv(const AiryScale& sc, cplx z) { return airy_n_scaled(sc, z).aip.value(); }

// Ai_n(s) j Ai_n'(js) - Ai_n(js) Ai_n'(s).
inline cplx airy_wronskian(const AiryScale& sc, double s)
{
    if (!(s >= 0)) throw Error(ErrorCode::argument, "Wronskian needs s >= 0");
    AiryPair a = airy_n_ray(sc, s, 0.0);
    AiryPair b = airy_n_ray(sc, s, 2 * std::numbers::pi / 3);
    return (a.ai * b.aip * jroot - b.ai * a.aip).value();
}

inline cplx airy_wronskian_reference(const AiryScale& sc)
{
    const double a0 = static_cast<double>(airy_detail::ai0), a1 = static_cast<double>(airy_detail::aip0);
    (void)sc; // lambda^{-1/3} lambda^{1/3} cancels
    return (jroot - 1.0) * a0 * a1;
}

// |Ai_n(s)|, |Ai_n(js)|, |Ai_n'(s)|, |Ai_n'(js)| divided by their envelopes.
inline std::array<double, 4> airy_asymptotic_ratio(const AiryScale& sc, double s)
{
    if (!(s >= 1)) throw Error(ErrorCode::argument, "asymptotic ratios need s >= 1");
    const double g = sc.lambda() * (2.0 / 3.0) * std::pow(s, 1.5);
    const double ln = std::log(std::abs(sc.n));
    const double ls = std::log(s);
    AiryPair a = airy_n_ray(sc, s, 0.0);
    AiryPair b = airy_n_ray(sc, s, 2 * std::numbers::pi / 3);
    const double e0 = -0.25 * ls - 0.5 * ln;
    const double e1 = 0.25 * ls + 0.5 * ln;
    return {std::exp(a.ai.log_abs() - (e0 - g)), std::exp(b.ai.log_abs() - (e0 + g)),
            std::exp(a.aip.log_abs() - (e1 - g)), std::exp(b.aip.log_abs() - (e1 + g))};
}

// Trapezoid quadrature of (2 pi)^{-1} int_{Im zeta = a} exp(lambda (i zeta^3/3 + i zeta z)) d zeta.
// Slow reference path only.
inline cplx airy_n_contour(const AiryScale& sc, cplx z, double a, int points = 40001)
{
    if (!(a > 0)) throw Error(ErrorCode::argument, "contour shift must be positive");
    const double lam = sc.lambda();
    // Re of the exponent is lam(-a xi^2 + a^3/3 - xi Im z - a Re z)
    const double center = -z.imag() / (2 * a);
    const double half = std::sqrt(80.0 / (lam * a)) + 1.0;
    const double h = 2 * half / (points - 1);
    cplx sum = 0;
    for (int i = 0; i < points; ++i) {
        const double xi = center - half + i * h;
        const cplx zeta(xi, a);
        const cplx ex = lam * (cplx(0, 1) * zeta * zeta * zeta / 3.0 + cplx(0, 1) * zeta * z);
        const double w = (i == 0 || i == points - 1) ? 0.5 : 1.0;
        sum += w * std::exp(ex);
    }
    return sum * h / (2 * std::numbers::pi);
}

} // namespace gevrey
