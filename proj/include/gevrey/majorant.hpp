#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "gevrey/errors.hpp"
#include "gevrey/propagator.hpp"
#include "gevrey/series.hpp"
#include "gevrey/symbol.hpp"

namespace gevrey {

// Largest c0 with sum_{i+j=k} c0^2/((i^2+1)(j^2+1)) <= c0/(k^2+1) for every k <= K.
// Rounded down by 1e-14 relative so the check survives double rounding.
inline double phi_constant(int K)
{
    if (K < 1) throw Error(ErrorCode::argument, "phi_constant needs K >= 1");
    long double best = 1.0L;
    for (int k = 0; k <= K; ++k) {
        long double s = 0;
        for (int i = 0; i <= k; ++i) {
            const long double a = static_cast<long double>(i) * i + 1, b = static_cast<long double>(k - i) * (k - i) + 1;
            s += 1.0L / (a * b);
        }
        const long double r = 1.0L / ((static_cast<long double>(k) * k + 1) * s);
        best = std::min(best, r);
    }
    return static_cast<double>(best) * (1 - 1e-14);
}

// Index k at which phi_constant(K) is attained.
inline int phi_binding_order(int K)
{
    long double best = 2;
    int arg = 0;
    for (int k = 0; k <= K; ++k) {
        long double s = 0;
        for (int i = 0; i <= k; ++i)
            s += 1.0L / ((static_cast<long double>(i) * i + 1) * (static_cast<long double>(k - i) * (k - i) + 1));
        const long double r = 1.0L / ((static_cast<long double>(k) * k + 1) * s);
        if (r < best) {
            best = r;
            arg = k;
        }
    }
    return arg;
}

// c1 = 1/(2 pi coth pi): the supremum over n of (n^2+1) sum_m 1/((m^2+1)((n-m)^2+1))
// is 2 pi coth pi, reached as |n| grows.
inline double default_c1()
{
    const double pi = std::numbers::pi;
    return std::tanh(pi) / (2 * pi);
}

struct PhiParams {
    double c0 = 0.2113350648835091;
    double c1 = 0.15856;
    double R = 1;
    double rho = 1;
    int K = 6;

    static PhiParams make(double R, double rho, int K)
    {
        return PhiParams{phi_constant(std::max(K, 200)), default_c1(), R, rho, K};
    }
};

// log Phi_k(t) with |k| = m, multinomial already folded for d = 1.
inline double log_phi_coeff(int m, double t, const PhiParams& pp, double log_multinomial_k = 0)
{
    if (m < 0) throw Error(ErrorCode::argument, "negative Taylor order");
    const double z = pp.rho * t;
    if (!(z < 1)) throw Error(ErrorCode::divergence, "Phi_k diverges for rho t >= 1");
    if (z < 0) throw Error(ErrorCode::argument, "negative time in Phi_k");
    // term_p = c0/((m+p)^2+1) C(m+p,p) z^p
    double sum = 0;
    double binom_z = 1; // C(m+p,p) z^p
    for (int p = 0; p < 100000; ++p) {
        const double mp = m + p;
        const double term = pp.c0 / (mp * mp + 1) * binom_z;
        sum += term;
        if (z == 0) break;
        if (term < 1e-17 * sum && (m + p + 1.0) / (p + 1.0) * z < 1) break;
        binom_z *= (m + p + 1.0) / (p + 1.0) * z;
    }
    return m * std::log(pp.R) + log_multinomial_k + std::log(sum);
}

// Phi_k(t) = R^{|k|} sum_p c0/((|k|+p)^2+1) multinom(|k|+p; k, p) (rho t)^p
inline double phi_coeff(const std::vector<int>& k, double t, const PhiParams& pp)
{
    int m = 0;
    double lm = 0;
    for (int v : k) {
        if (v < 0) throw Error(ErrorCode::argument, "negative multi-index");
        m += v;
        lm -= std::lgamma(v + 1.0);
    }
    lm += std::lgamma(m + 1.0);
    return std::exp(log_phi_coeff(m, t, pp, lm));
}

inline double phi_coeff(int k, double t, const PhiParams& pp) { return std::exp(log_phi_coeff(k, t, pp)); }

// |a_k| <= b_k on every stored coefficient
inline bool majorizes(const TaylorSeries& a, const TaylorSeries& b)
{
    if (!a.compatible(b)) throw Error(ErrorCode::argument, "majorizes needs series of the same shape");
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i]) > b[i]) return false;
    return true;
}

// One-variable reference series sum_k c0/(k^2+1) z^k truncated at K, stored in the t slot.
inline TaylorSeries phi_series(double c0, int K)
{
    TaylorSeries p(0, Truncation{K, 0, 0}, 0);
    for (int k = 0; k <= K; ++k) p.set({k}, c0 / (static_cast<double>(k) * k + 1));
    return p;
}

struct SpaceParams {
    double Mprime = 1;
    double beta = 0;
    double gamma0 = 1;
    double eta = 1;
    double delta = 0.2;
    double eps = 1e-4;
    double s1 = 0;      // growth time
    double s_final = 0; // min(s1, lifetime)

    double gamma_eta(double tau) const { return gamma0 * std::pow(tau, eta) + beta; }
    // integral of gamma_eta over [0, s]
    double Gamma(double s) const { return gamma0 * std::pow(s, 1 + eta) / (1 + eta) + beta * s; }
    double tscale() const { return std::pow(eps, 1 / (1 + eta)); }
    double uscale() const { return std::pow(eps, 2 / (1 + eta)); }
    FlowCase flow() const { return eta == 1.0 ? FlowCase::smooth : FlowCase::airy; }
};

// Coefficients u_{c,n,k}(s_i), d = 1, |n| <= nmax, k <= K.
class TrigTaylorField {
public:
    TrigTaylorField() = default;
    TrigTaylorField(int ncomp, int nmax, int K, std::vector<double> s)
        : ncomp_(ncomp), nmax_(nmax), K_(K), s_(std::move(s)),
          data_(static_cast<std::size_t>(ncomp) * (2 * nmax + 1) * (K + 1) * s_.size())
    {
        if (ncomp < 1 || nmax < 0 || K < 0 || s_.empty()) throw Error(ErrorCode::argument, "bad field shape");
    }

    TrigTaylorField zero_like(int ncomp = -1) const { return {ncomp < 0 ? ncomp_ : ncomp, nmax_, K_, s_}; }

    int ncomp() const { return ncomp_; }
    int nmax() const { return nmax_; }
    int K() const { return K_; }
    std::size_t ns() const { return s_.size(); }
    const std::vector<double>& s() const { return s_; }
    double s(std::size_t i) const { return s_[i]; }
    bool same_shape(const TrigTaylorField& o) const
    {
        return nmax_ == o.nmax_ && K_ == o.K_ && s_ == o.s_;
    }

    std::size_t idx(int c, int n, int k, std::size_t i) const
    {
        return ((static_cast<std::size_t>(c) * (2 * nmax_ + 1) + static_cast<std::size_t>(n + nmax_)) * (K_ + 1) +
                static_cast<std::size_t>(k)) *
                   s_.size() +
               i;
    }
    cplx& at(int c, int n, int k, std::size_t i) { return data_[idx(c, n, k, i)]; }
    const cplx& at(int c, int n, int k, std::size_t i) const { return data_[idx(c, n, k, i)]; }
    cplx get(int c, int n, int k, std::size_t i) const
    {
        if (std::abs(n) > nmax_ || k < 0 || k > K_) return 0.0;
        return at(c, n, k, i);
    }
    std::vector<cplx>& data() { return data_; }
    const std::vector<cplx>& data() const { return data_; }

    TrigTaylorField& operator+=(const TrigTaylorField& o)
    {
        check(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    TrigTaylorField& operator-=(const TrigTaylorField& o)
    {
        check(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    TrigTaylorField& operator*=(cplx a)
    {
        for (auto& v : data_) v *= a;
        return *this;
    }
    friend TrigTaylorField operator+(TrigTaylorField a, const TrigTaylorField& b) { return a += b; }
    friend TrigTaylorField operator-(TrigTaylorField a, const TrigTaylorField& b) { return a -= b; }
    friend TrigTaylorField operator*(TrigTaylorField a, cplx c) { return a *= c; }
    friend TrigTaylorField operator*(cplx c, TrigTaylorField a) { return a *= c; }

    // single component as a field of its own
    TrigTaylorField component(int c) const
    {
        TrigTaylorField r = zero_like(1);
        const std::size_t blk = r.data_.size();
        std::copy(data_.begin() + static_cast<std::ptrdiff_t>(c * blk),
                  data_.begin() + static_cast<std::ptrdiff_t>((c + 1) * blk), r.data_.begin());
        return r;
    }
    void set_component(int c, const TrigTaylorField& v)
    {
        const std::size_t blk = v.data_.size();
        std::copy(v.data_.begin(), v.data_.end(), data_.begin() + static_cast<std::ptrdiff_t>(c * blk));
    }

    // u(s_i, x, theta)
    cplx value(int c, std::size_t i, double x, double theta) const
    {
        cplx acc = 0;
        for (int n = -nmax_; n <= nmax_; ++n) {
            cplx poly = 0;
            for (int k = K_; k >= 0; --k) poly = poly * x + at(c, n, k, i);
            acc += poly * std::polar(1.0, n * theta);
        }
        return acc;
    }

    bool is_real(double tol = 0) const
    {
        for (int c = 0; c < ncomp_; ++c)
            for (int n = 0; n <= nmax_; ++n)
                for (int k = 0; k <= K_; ++k)
                    for (std::size_t i = 0; i < s_.size(); ++i)
                        if (std::abs(at(c, n, k, i) - std::conj(at(c, -n, k, i))) > tol) return false;
        return true;
    }

    double max_abs() const
    {
        double m = 0;
        for (const auto& v : data_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    void check(const TrigTaylorField& o) const
    {
        if (!same_shape(o) || ncomp_ != o.ncomp_) throw Error(ErrorCode::argument, "field shapes differ");
    }

    int ncomp_ = 1;
    int nmax_ = 0;
    int K_ = 0;
    std::vector<double> s_{0.0};
    std::vector<cplx> data_ = std::vector<cplx>(1);
};

// Convolution in n, Taylor product in k, pointwise in s. Component c of the result is a_c b_c;
// a single-component operand is broadcast.
inline TrigTaylorField field_product(const TrigTaylorField& a, const TrigTaylorField& b)
{
    if (!a.same_shape(b)) throw Error(ErrorCode::argument, "field shapes differ");
    const int nc = std::max(a.ncomp(), b.ncomp());
    if ((a.ncomp() != nc && a.ncomp() != 1) || (b.ncomp() != nc && b.ncomp() != 1))
        throw Error(ErrorCode::argument, "component counts do not broadcast");
    TrigTaylorField r = a.zero_like(nc);
    const int N = a.nmax(), K = a.K();
    const std::size_t S = a.ns();
    for (int c = 0; c < nc; ++c) {
        const int ca = a.ncomp() == 1 ? 0 : c, cb = b.ncomp() == 1 ? 0 : c;
        for (int n1 = -N; n1 <= N; ++n1)
            for (int k1 = 0; k1 <= K; ++k1) {
                const cplx* pa = &a.at(ca, n1, k1, 0);
                bool nz = false;
                for (std::size_t i = 0; i < S && !nz; ++i) nz = pa[i] != cplx(0);
                if (!nz) continue;
                for (int n2 = std::max(-N, -N - n1); n2 <= std::min(N, N - n1); ++n2)
                    for (int k2 = 0; k1 + k2 <= K; ++k2) {
                        const cplx* pb = &b.at(cb, n2, k2, 0);
                        cplx* pr = &r.at(c, n1 + n2, k1 + k2, 0);
                        for (std::size_t i = 0; i < S; ++i) pr[i] += pa[i] * pb[i];
                    }
            }
    }
    return r;
}

// (M v)_c = sum_c' M_{c c'} v_c' for a 2x2 matrix field (4 components, row-major) and a 2-vector field.
inline TrigTaylorField matvec(const TrigTaylorField& M, const TrigTaylorField& v)
{
    if (M.ncomp() != 4 || v.ncomp() != 2) throw Error(ErrorCode::argument, "matvec needs a 4-component and 2-component field");
    TrigTaylorField r = v.zero_like(2);
    for (int c = 0; c < 2; ++c) {
        TrigTaylorField acc = v.zero_like(1);
        for (int cp = 0; cp < 2; ++cp) acc += field_product(M.component(2 * c + cp), v.component(cp));
        r.set_component(c, acc);
    }
    return r;
}

// d/dtheta: multiply mode n by i n
inline TrigTaylorField dtheta(const TrigTaylorField& u)
{
    TrigTaylorField r = u;
    for (int c = 0; c < u.ncomp(); ++c)
        for (int n = -u.nmax(); n <= u.nmax(); ++n)
            for (int k = 0; k <= u.K(); ++k)
                for (std::size_t i = 0; i < u.ns(); ++i) r.at(c, n, k, i) *= cplx(0, n);
    return r;
}

// d/dx: (k+1) u_{k+1}
inline TrigTaylorField dx(const TrigTaylorField& u)
{
    TrigTaylorField r = u.zero_like();
    for (int c = 0; c < u.ncomp(); ++c)
        for (int n = -u.nmax(); n <= u.nmax(); ++n)
            for (int k = 0; k < u.K(); ++k)
                for (std::size_t i = 0; i < u.ns(); ++i) r.at(c, n, k, i) = (k + 1.0) * u.at(c, n, k + 1, i);
    return r;
}

namespace majorant_detail {

// log of c1/(n^2+1) e^{-(M' - Gamma(s))|n|} Phi_k(eps^{1/(1+eta)} s)
struct WeightTable {
    int nmax = 0, K = 0;
    std::vector<double> logw; // [n][k][i]
    std::size_t S = 0;

    WeightTable(const TrigTaylorField& f, const SpaceParams& sp, const PhiParams& pp)
        : nmax(f.nmax()), K(f.K()), logw(static_cast<std::size_t>(2 * f.nmax() + 1) * (f.K() + 1) * f.ns()), S(f.ns())
    {
        const double ts = sp.tscale();
        std::vector<double> lphi(static_cast<std::size_t>(K + 1) * S);
        for (int k = 0; k <= K; ++k)
            for (std::size_t i = 0; i < S; ++i) lphi[k * S + i] = log_phi_coeff(k, ts * f.s(i), pp);
        for (int n = -nmax; n <= nmax; ++n)
            for (int k = 0; k <= K; ++k)
                for (std::size_t i = 0; i < S; ++i) {
                    const double an = std::abs(n);
                    logw[((n + nmax) * (K + 1) + k) * S + i] =
                        std::log(pp.c1 / (an * an + 1)) - (sp.Mprime - sp.Gamma(f.s(i))) * an + lphi[k * S + i];
                }
    }
    double operator()(int n, int k, std::size_t i) const { return logw[((n + nmax) * (K + 1) + k) * S + i]; }
};

inline double slice_norm(const TrigTaylorField& v, int c, std::size_t i, const WeightTable& w)
{
    double best = 0;
    for (int n = -v.nmax(); n <= v.nmax(); ++n)
        for (int k = 0; k <= v.K(); ++k) {
            const double a = std::abs(v.at(c, n, k, i));
            if (a == 0) continue;
            best = std::max(best, std::exp(std::log(a) - w(n, k, i)));
        }
    return best;
}

} // namespace majorant_detail

// Smallest C with |v_{c,n,k}(s_i)| <= C c1/(n^2+1) e^{-(M'-Gamma(s_i))|n|} Phi_k(eps^{1/(1+eta)} s_i).
inline double es_norm(const TrigTaylorField& v, std::size_t i, const SpaceParams& sp, const PhiParams& pp)
{
    if (i >= v.ns()) throw Error(ErrorCode::argument, "time index outside the grid");
    const majorant_detail::WeightTable w(v, sp, pp);
    double best = 0;
    for (int c = 0; c < v.ncomp(); ++c) best = std::max(best, majorant_detail::slice_norm(v, c, i, w));
    return best;
}

inline std::vector<double> es_norms(const TrigTaylorField& v, const SpaceParams& sp, const PhiParams& pp)
{
    const majorant_detail::WeightTable w(v, sp, pp);
    std::vector<double> out(v.ns(), 0.0);
    for (std::size_t i = 0; i < v.ns(); ++i)
        for (int c = 0; c < v.ncomp(); ++c) out[i] = std::max(out[i], majorant_detail::slice_norm(v, c, i, w));
    return out;
}

inline double e_norm(const TrigTaylorField& v, const SpaceParams& sp, const PhiParams& pp)
{
    const auto n = es_norms(v, sp, pp);
    return *std::max_element(n.begin(), n.end());
}

// Matrix field (4 components): max over s of the largest row sum of entry norms.
inline double matrix_e_norm(const TrigTaylorField& M, const SpaceParams& sp, const PhiParams& pp)
{
    if (M.ncomp() != 4) throw Error(ErrorCode::argument, "matrix norm needs 4 components");
    const majorant_detail::WeightTable w(M, sp, pp);
    double best = 0;
    for (std::size_t i = 0; i < M.ns(); ++i)
        for (int r = 0; r < 2; ++r)
            best = std::max(best, majorant_detail::slice_norm(M, 2 * r, i, w) +
                                      majorant_detail::slice_norm(M, 2 * r + 1, i, w));
    return best;
}

// n = 0 field of a series in (t, x, z) with d = 1, t = eps^{1/(1+eta)} s, z = 0.
inline TrigTaylorField series_to_field(const TaylorSeries& a, const TrigTaylorField& shape, const SpaceParams& sp)
{
    if (a.dim() != 1) throw Error(ErrorCode::argument, "fields carry one space variable");
    TrigTaylorField r = shape.zero_like(1);
    const double ts = sp.tscale();
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double c = a[j];
        if (c == 0) continue;
        const int* e = a.exponents(j);
        bool zfree = true;
        for (int v = 2; v < a.nvars(); ++v) zfree = zfree && e[v] == 0;
        if (!zfree || e[1] > r.K()) continue;
        for (std::size_t i = 0; i < r.ns(); ++i) r.at(0, 0, e[1], i) += c * std::pow(ts * r.s(i), e[0]);
    }
    return r;
}

inline TrigTaylorField symbol_to_field(const TaylorSymbol& A, const TrigTaylorField& shape, const SpaceParams& sp)
{
    TrigTaylorField r = shape.zero_like(4);
    for (int e = 0; e < 4; ++e) r.set_component(e, series_to_field(A.e[e], shape, sp));
    return r;
}

struct Composition {
    TrigTaylorField value; // 4 components
    double bound = 0;      // majorant of the matrix E-norm
};

// H(eps^{1/(1+eta)} s, x, eps^{2/(1+eta)} u) for H given as Taylor data in (t, x, u): d = 1, the
// z group holds the two u variables.
inline Composition compose_analytic(const TaylorSymbol& H, const TrigTaylorField& u, const SpaceParams& sp,
                                   const PhiParams& pp, int max_u_degree = 8)
{
    if (H.dim() != 1 || H.e[0].nz() != 2) throw Error(ErrorCode::argument, "H must be given in (t, x, u1, u2)");
    if (u.ncomp() != 2) throw Error(ErrorCode::argument, "u must have two components");
    const int ucap = H.truncation().z;
    int udeg = 0;
    for (const auto& s : H.e)
        for (std::size_t j = 0; j < s.size(); ++j)
            if (s[j] != 0) udeg = std::max(udeg, s.exponents(j)[2] + s.exponents(j)[3]);
    if (udeg > max_u_degree) throw Error(ErrorCode::truncation, "composition exceeds the u-degree budget");

    const double us = sp.uscale();
    const double ts = sp.tscale();
    // scaled powers (eps^{2/(1+eta)} u_c)^p
    std::vector<std::vector<TrigTaylorField>> pw(2);
    for (int c = 0; c < 2; ++c) {
        TrigTaylorField one = u.zero_like(1);
        for (std::size_t i = 0; i < one.ns(); ++i) one.at(0, 0, 0, i) = 1.0;
        pw[c].push_back(one);
        TrigTaylorField base = u.component(c) * cplx(us);
        for (int p = 1; p <= ucap; ++p) pw[c].push_back(field_product(pw[c].back(), base));
    }
    const double nu = e_norm(u, sp, pp);
    // norms of the monomials t and x as n = 0 fields
    TrigTaylorField tf = u.zero_like(1), xf = u.zero_like(1), onef = u.zero_like(1);
    for (std::size_t i = 0; i < u.ns(); ++i) {
        tf.at(0, 0, 0, i) = ts * u.s(i);
        if (u.K() >= 1) xf.at(0, 0, 1, i) = 1.0;
        onef.at(0, 0, 0, i) = 1.0;
    }
    const double Nt = e_norm(tf, sp, pp), N1 = e_norm(onef, sp, pp);
    const double Nx = u.K() >= 1 ? e_norm(xf, sp, pp) : 0.0;

    Composition out{u.zero_like(4), 0.0};
    std::array<double, 4> entry_bound{};
    for (int e = 0; e < 4; ++e) {
        const TaylorSeries& h = H.e[e];
        TrigTaylorField acc = u.zero_like(1);
        for (std::size_t j = 0; j < h.size(); ++j) {
            const double c = h[j];
            if (c == 0) continue;
            const int* ex = h.exponents(j);
            const int a = ex[0], b = ex[1], p1 = ex[2], p2 = ex[3];
            if (b > u.K()) continue;
            TrigTaylorField term = field_product(pw[0][p1], pw[1][p2]);
            // multiply by c t^a x^b
            TrigTaylorField shifted = u.zero_like(1);
            for (int n = -u.nmax(); n <= u.nmax(); ++n)
                for (int k = 0; k + b <= u.K(); ++k)
                    for (std::size_t i = 0; i < u.ns(); ++i)
                        shifted.at(0, n, k + b, i) = c * std::pow(ts * u.s(i), a) * term.at(0, n, k, i);
            acc += shifted;
            if (a == 0 && b == 0 && p1 + p2 == 0)
                entry_bound[e] += std::abs(c) * N1;
            else
                entry_bound[e] += std::abs(c) * std::pow(Nt, a) * std::pow(Nx, b) * std::pow(us * nu, p1 + p2);
        }
        out.value.set_component(e, acc);
    }
    out.bound = std::max(entry_bound[0] + entry_bound[1], entry_bound[2] + entry_bound[3]);
    return out;
}

// Measured C(U): sup over 1 <= |n| <= nmax and grid pairs s' <= s of the row-sum norm of
// U_n(s', s) divided by e^{|n| int_{s'}^{s} gamma-sharp}.
inline double propagator_constant(FlowCase kind, double gamma0, double eps, const std::vector<double>& grid, int nmax)
{
    if (kind == FlowCase::smooth) return std::max(gamma0, 1 / gamma0);
    double best = 0;
    for (int n = 1; n <= nmax; ++n) {
        ModePropagator U{kind, n, gamma0, eps};
        for (std::size_t a = 0; a < grid.size(); ++a)
            for (std::size_t b = a; b < grid.size(); ++b) {
                ScaledMatrix m = U(grid[a], grid[b]);
                const double rs = std::max(std::abs(m.m(0, 0)) + std::abs(m.m(0, 1)),
                                           std::abs(m.m(1, 0)) + std::abs(m.m(1, 1)));
                best = std::max(best, std::log(rs) + m.lg - U.exponent(grid[a], grid[b]));
            }
    }
    return std::exp(best);
}

} // namespace gevrey
