#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gevrey/errors.hpp"
#include "gevrey/series.hpp"

namespace gevrey {

using Mat2 = std::array<std::array<double, 2>, 2>;

// 2x2 grid of series sharing one shape.
struct TaylorSymbol {
    std::array<TaylorSeries, 4> e; // row-major 11, 12, 21, 22

    TaylorSymbol() = default;

    TaylorSymbol(const TaylorSeries& a11, const TaylorSeries& a12, const TaylorSeries& a21,
                 const TaylorSeries& a22)
        : e{a11, a12, a21, a22}
    {
        for (const auto& s : e)
            if (!s.compatible(e[0])) throw Error(ErrorCode::argument, "symbol entries with mismatched shapes");
    }

    static TaylorSymbol zero(int d, Truncation tr, int nz = -1)
    {
        TaylorSeries z(d, tr, nz);
        return {z, z, z, z};
    }

    static TaylorSymbol identity(int d, Truncation tr, int nz = -1)
    {
        TaylorSeries z(d, tr, nz);
        TaylorSeries one = z.constant_like(1.0);
        return {one, z, z, one};
    }

    static TaylorSymbol constant(const Mat2& m, int d, Truncation tr, int nz = -1)
    {
        TaylorSeries z(d, tr, nz);
        return {z.constant_like(m[0][0]), z.constant_like(m[0][1]), z.constant_like(m[1][0]),
                z.constant_like(m[1][1])};
    }

    TaylorSeries& operator()(int i, int j) { return e[2 * i + j]; }
    const TaylorSeries& operator()(int i, int j) const { return e[2 * i + j]; }

    int dim() const { return e[0].dim(); }
    const Truncation& truncation() const { return e[0].truncation(); }

    TaylorSeries trace() const { return e[0] + e[3]; }
    TaylorSeries det() const { return e[0] * e[3] - e[1] * e[2]; }

    TaylorSymbol traceless() const
    {
        TaylorSeries h = trace() * 0.5;
        return {e[0] - h, e[1], e[2], e[3] - h};
    }

    TaylorSymbol& operator+=(const TaylorSymbol& o)
    {
        for (int i = 0; i < 4; ++i) e[i] += o.e[i];
        return *this;
    }

    TaylorSymbol& operator-=(const TaylorSymbol& o)
    {
        for (int i = 0; i < 4; ++i) e[i] -= o.e[i];
        return *this;
    }

    friend TaylorSymbol operator+(TaylorSymbol a, const TaylorSymbol& b) { return a += b; }
    friend TaylorSymbol operator-(TaylorSymbol a, const TaylorSymbol& b) { return a -= b; }

    friend TaylorSymbol operator*(const TaylorSymbol& a, const TaylorSymbol& b)
    {
        return {a.e[0] * b.e[0] + a.e[1] * b.e[2], a.e[0] * b.e[1] + a.e[1] * b.e[3],
                a.e[2] * b.e[0] + a.e[3] * b.e[2], a.e[2] * b.e[1] + a.e[3] * b.e[3]};
    }

    friend TaylorSymbol operator*(const TaylorSeries& s, const TaylorSymbol& a)
    {
        return {s * a.e[0], s * a.e[1], s * a.e[2], s * a.e[3]};
    }

    friend TaylorSymbol operator*(double s, TaylorSymbol a)
    {
        for (auto& v : a.e) v *= s;
        return a;
    }

    TaylorSymbol add_identity(const TaylorSeries& phi) const { return {e[0] + phi, e[1], e[2], e[3] + phi}; }

    Mat2 constant_matrix() const
    {
        return {{{e[0].constant_term(), e[1].constant_term()}, {e[2].constant_term(), e[3].constant_term()}}};
    }

    bool is_zero(double tol = 1e-12) const
    {
        return std::all_of(e.begin(), e.end(), [tol](const TaylorSeries& s) { return s.is_zero(tol); });
    }

    double max_abs() const
    {
        double m = 0;
        for (const auto& s : e) m = std::max(m, s.max_abs());
        return m;
    }

    double max_abs_diff(const TaylorSymbol& o, int tmax) const
    {
        double m = 0;
        for (int i = 0; i < 4; ++i) m = std::max(m, e[i].max_abs_diff(o.e[i], tmax));
        return m;
    }

    // Inverse by truncated Neumann series about the base point value.
    TaylorSymbol inverse() const
    {
        Mat2 m0 = constant_matrix();
        const double det0 = m0[0][0] * m0[1][1] - m0[0][1] * m0[1][0];
        if (std::abs(det0) < 1e-14) throw Error(ErrorCode::numeric, "singular matrix at the base point");
        Mat2 inv0 = {{{m0[1][1] / det0, -m0[0][1] / det0}, {-m0[1][0] / det0, m0[0][0] / det0}}};
        TaylorSymbol P = constant(inv0, dim(), truncation(), e[0].nz());
        TaylorSymbol H = P * *this;
        H(0, 0) = H(0, 0) - 1.0;
        H(1, 1) = H(1, 1) - 1.0;
        TaylorSymbol sum = identity(dim(), truncation(), e[0].nz());
        TaylorSymbol term = sum;
        const int n = e[0].total_cap();
        for (int k = 1; k <= n; ++k) {
            term = -1.0 * (term * H);
            if (term.max_abs() == 0) break;
            sum += term;
        }
        return sum * P;
    }
};

struct ValidityBox {
    double t = 1.0;
    double x = 1.0;
    double z = 1.0;
};

struct QuasilinearSystem {
    int d = 1;
    TaylorSymbol A;
    std::vector<TaylorSymbol> A_u; // one per state component
    TaylorSymbol F;                // zeroth-order part at u = 0
    std::vector<TaylorSymbol> F_u; // linear u-dependence of F
    ValidityBox box;
    bool has_nonlinearity = false;

    static constexpr int N = 2;

    static QuasilinearSystem from_symbol(const TaylorSymbol& A, ValidityBox box = {})
    {
        QuasilinearSystem s;
        s.d = A.dim();
        s.A = A;
        s.A_u.assign(N, TaylorSymbol::zero(A.dim(), A.truncation()));
        s.F = TaylorSymbol::zero(A.dim(), A.truncation());
        s.F_u.assign(N, TaylorSymbol::zero(A.dim(), A.truncation()));
        s.box = box;
        return s;
    }

    void validate() const
    {
        if (static_cast<int>(A_u.size()) != N) throw Error(ErrorCode::argument, "A_u must have N = 2 entries");
        if (!F_u.empty() && static_cast<int>(F_u.size()) != N)
            throw Error(ErrorCode::argument, "F_u must be empty or have N = 2 entries");
        auto same = [&](const TaylorSymbol& s) { return s.e[0].compatible(A.e[0]); };
        if (!same(F)) throw Error(ErrorCode::argument, "F truncation differs from A");
        for (const auto& s : A_u)
            if (!same(s)) throw Error(ErrorCode::argument, "A_u truncation differs from A");
        for (const auto& s : F_u)
            if (!same(s)) throw Error(ErrorCode::argument, "F_u truncation differs from A");
    }
};

inline Mat2 eval_symbol(const TaylorSymbol& sym, double t, const std::vector<double>& x,
                        const std::vector<double>& z, const ValidityBox& box = {})
{
    if (static_cast<int>(x.size()) != sym.dim() || static_cast<int>(z.size()) != sym.e[0].nz())
        throw Error(ErrorCode::argument, "evaluation point has wrong dimension");
    bool inside = std::abs(t) <= box.t;
    for (double v : x) inside = inside && std::abs(v) <= box.x;
    for (double v : z) inside = inside && std::abs(v) <= box.z;
    if (!inside) throw Error(ErrorCode::domain, "evaluation point outside the validity box");
    Mat2 m{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m[i][j] = sym(i, j).eval(t, x, z);
    return m;
}

// det - (Tr/2)^2 = -(a11 - a22)^2 / 4 - a12 a21.
inline TaylorSeries discriminant(const TaylorSymbol& sym)
{
    TaylorSeries h = (sym(0, 0) - sym(1, 1)) * 0.5;
    return -(h * h) - sym(0, 1) * sym(1, 0);
}

inline double discriminant_value(const Mat2& m)
{
    const double h = 0.5 * (m[0][0] - m[1][1]);
    return -h * h - m[0][1] * m[1][0];
}

// Numeric t-root of Delta at fixed (x, z), Newton from t = 0.
inline double transition_time(const TaylorSymbol& sym, const std::vector<double>& x, const std::vector<double>& z,
                              double tol = 1e-12)
{
    TaylorSeries D = discriminant(sym);
    const int deg = D.truncation().t;
    const double dt0 = D.slice_t(1).constant_term();
    if (!(dt0 > tol)) throw Error(ErrorCode::not_stiff, "d_t Delta at the base point is not above tolerance");
    std::vector<double> c(static_cast<std::size_t>(deg) + 1);
    for (int j = 0; j <= deg; ++j) c[j] = D.slice_t(j).eval(0.0, x, z);
    auto p = [&](double t) {
        double v = 0;
        for (int j = deg; j >= 0; --j) v = v * t + c[j];
        return v;
    };
    auto dp = [&](double t) {
        double v = 0;
        for (int j = deg; j >= 1; --j) v = v * t + j * c[j];
        return v;
    };
    double t = 0;
    bool ok = false;
    for (int it = 0; it < 50; ++it) {
        const double v = p(t);
        if (std::abs(v) < tol) {
            ok = true;
            break;
        }
        const double g = dp(t);
        if (g == 0) break;
        t -= v / g;
    }
    if (!ok && std::abs(p(t)) < tol) ok = true;
    if (!ok) throw Error(ErrorCode::numeric, "Newton iteration for the transition time did not converge");
    if (t < -tol) {
        std::ostringstream os;
        os << "transition time " << t << " is negative: initially elliptic";
        throw Error(ErrorCode::initially_elliptic, os.str());
    }
    return t;
}

enum class TransitionKind { no_transition, initially_elliptic, smooth, stiff };

inline const char* to_string(TransitionKind k)
{
    switch (k) {
    case TransitionKind::no_transition: return "NoTransition";
    case TransitionKind::initially_elliptic: return "InitiallyElliptic";
    case TransitionKind::smooth: return "Smooth";
    case TransitionKind::stiff: return "Stiff";
    }
    return "?";
}

struct Diagnostic {
    std::string name;
    bool passed = false;
    double value = 0;
    std::string note;
};

struct TransitionClassification {
    TransitionKind kind = TransitionKind::no_transition;
    double gamma0 = 0;
    std::optional<TaylorSeries> delta; // smooth
    std::optional<TaylorSeries> tstar; // stiff, free of t
    std::optional<TaylorSeries> e;     // stiff
    std::optional<int> k;              // stiff, empty when t* is flat within truncation
    bool in_scope = true;
    std::vector<Diagnostic> diagnostics;
};

namespace detail {

template <class F>
void scan_grid(int dims, const std::vector<double>& half, int pts, F&& f)
{
    std::vector<int> idx(static_cast<std::size_t>(dims), 0);
    std::vector<double> p(static_cast<std::size_t>(dims), 0.0);
    if (dims == 0) {
        f(p);
        return;
    }
    while (true) {
        for (int i = 0; i < dims; ++i)
            p[i] = -half[i] + 2.0 * half[i] * idx[i] / static_cast<double>(pts - 1);
        f(p);
        int i = 0;
        while (i < dims && ++idx[i] == pts) idx[i++] = 0;
        if (i == dims) break;
    }
}

// Lowest total x-order at which t* has a coefficient of size > tol, with the
// derivative factor alpha! included.
inline std::optional<int> degeneracy_order(const TaylorSeries& tstar, double tol)
{
    const int d = tstar.dim();
    std::optional<int> best;
    for (std::size_t i = 0; i < tstar.size(); ++i) {
        const int* ex = tstar.exponents(i);
        bool only_x = ex[0] == 0;
        for (int v = 1 + d; v < tstar.nvars(); ++v) only_x = only_x && ex[v] == 0;
        if (!only_x) continue;
        int order = 0;
        double fact = 1;
        for (int v = 1; v <= d; ++v) {
            order += ex[v];
            for (int q = 2; q <= ex[v]; ++q) fact *= q;
        }
        if (order == 0) continue;
        if (std::abs(tstar[i]) * fact > tol && (!best || order < *best)) best = order;
    }
    return best;
}

} // namespace detail

// Series root t*(x, z) of Delta by Newton in the series algebra.
inline TaylorSeries series_transition_time(const TaylorSeries& D, int max_iter = 64)
{
    TaylorSeries Dt = D.deriv(0);
    TaylorSeries tau = D.zero_like();
    for (int it = 0; it < max_iter; ++it) {
        TaylorSeries v = D.substitute_t(tau);
        if (v.is_zero(1e-13)) return tau;
        tau -= v * Dt.substitute_t(tau).inverse();
    }
    if (!D.substitute_t(tau).is_zero(1e-10))
        throw Error(ErrorCode::numeric, "series Newton for t* did not converge");
    return tau;
}

inline TransitionClassification classify_transition(const QuasilinearSystem& sys, double tol = 1e-9)
{
    if (sys.A.truncation().x < 5)
        throw Error(ErrorCode::argument, "classification needs truncation degree >= 5 in x");
    TransitionClassification out;
    TaylorSeries D = discriminant(sys.A);
    const int d = sys.A.dim();
    const int nz = sys.A.e[0].nz();

    // Initial hyperbolicity scan on t = 0.
    double worst = -INFINITY;
    std::vector<double> where;
    {
        std::vector<double> half;
        for (int i = 0; i < d; ++i) half.push_back(sys.box.x);
        for (int i = 0; i < nz; ++i) half.push_back(sys.box.z);
        const int dims = d + nz;
        const int pts = dims <= 4 ? 33 : 9;
        detail::scan_grid(dims, half, pts, [&](const std::vector<double>& p) {
            std::vector<double> full{0.0};
            full.insert(full.end(), p.begin(), p.end());
            const double v = D.eval(full);
            if (v > worst) {
                worst = v;
                where = p;
            }
        });
    }
    out.diagnostics.push_back({"initial_hyperbolicity", !(worst > tol), worst, "max of Delta(0, x, zeta) on the scan grid"});
    if (worst > tol) {
        out.kind = TransitionKind::initially_elliptic;
        return out;
    }

    const double D0 = D.constant_term();
    out.diagnostics.push_back({"branching", std::abs(D0) <= tol, D0, "Delta at the base point"});
    if (D0 < -tol) {
        out.kind = TransitionKind::no_transition;
        out.diagnostics.back().note = "strictly hyperbolic at the base point";
        return out;
    }
    if (D.is_zero(1e-12)) {
        out.kind = TransitionKind::no_transition;
        out.diagnostics.push_back({"discriminant_identically_zero", true, 0.0, "Delta vanishes identically"});
        return out;
    }

    // Smooth factorization Delta = (t delta)^2.
    {
        const bool flat0 = D.slice_t(0).is_zero(1e-12);
        const bool flat1 = D.slice_t(1).is_zero(1e-12);
        if (flat0 && flat1) {
            TaylorSeries d2 = D.shift_down(0, 2);
            const double g2 = d2.constant_term();
            if (g2 > 0 && std::sqrt(g2) > tol) {
                out.kind = TransitionKind::smooth;
                out.delta = d2.sqrt();
                out.gamma0 = std::sqrt(g2);
                out.diagnostics.push_back({"smooth_factorization", true, out.gamma0, "delta(0,0,xi0)"});
                return out;
            }
            out.diagnostics.push_back({"smooth_factorization", false, g2, "delta^2 at the base point not positive"});
        } else {
            out.diagnostics.push_back({"smooth_factorization", false, 0.0, "Delta not divisible by t^2"});
        }
    }

    const double dt0 = D.slice_t(1).constant_term();
    out.diagnostics.push_back({"stiff_dt_delta", dt0 > tol, dt0, "d_t Delta at the base point"});
    if (dt0 > tol) {
        out.kind = TransitionKind::stiff;
        TaylorSeries ts = series_transition_time(D);
        TaylorSeries rem = D.zero_like();
        TaylorSeries e = D.divide_t_minus(ts, &rem);
        out.tstar = ts;
        out.e = e;
        out.gamma0 = std::sqrt(e.constant_term());
        out.k = detail::degeneracy_order(ts, tol);
        out.diagnostics.push_back({"factor_remainder", rem.is_zero(1e-10), rem.max_abs(), "Delta(t*) after division"});
        if (out.k) {
            if (*out.k % 2 == 1) {
                std::ostringstream os;
                os << "leading order k = " << *out.k
                   << " of t* is odd, in contradiction with the assumption of non-negativity of t*";
                throw Error(ErrorCode::odd_degeneracy, os.str());
            }
            if (*out.k == 2) {
                out.in_scope = false;
                out.diagnostics.push_back({"degeneracy", false, 2.0, "k = 2 is outside the scope of the method"});
            } else {
                out.diagnostics.push_back({"degeneracy", true, static_cast<double>(*out.k), "k"});
            }
        } else {
            out.diagnostics.push_back({"degeneracy", true, 0.0, "t* is flat within truncation"});
        }
        return out;
    }

    std::ostringstream os;
    os << "inconclusive classification: Delta(0)=" << D0 << ", d_t Delta(0)=" << dt0
       << ", no t^2 factorization";
    throw Error(ErrorCode::inconclusive, os.str());
}

inline std::vector<Diagnostic> check_assumptions(const QuasilinearSystem& sys, double tol = 1e-9)
{
    std::vector<Diagnostic> rep;
    const int d = sys.A.dim();
    const Mat2 m0 = sys.A.constant_matrix();
    const double lambda0 = 0.5 * (m0[0][0] + m0[1][1]);
    rep.push_back({"lambda0", true, lambda0, "Tr A(0,0,xi0) / 2"});
    TaylorSeries D = discriminant(sys.A);
    const double D0 = D.constant_term();
    rep.push_back({"branching", std::abs(D0) <= tol, D0, "double root: Delta(0,0,xi0) = 0"});
    TaylorSymbol tl = sys.A.traceless();
    const Mat2 t0 = tl.constant_matrix();
    const double ss = std::max({std::abs(t0[0][0]), std::abs(t0[0][1]), std::abs(t0[1][0]), std::abs(t0[1][1])});
    rep.push_back({"semi_simple", ss <= tol, ss, "traceless part of A(0,0,xi0)"});

    // Pure x derivatives of Delta at the base point.
    for (int j = 1; j <= d; ++j) {
        TaylorSeries g = D;
        double fact = 1;
        for (int k = 0; k <= 4; ++k) {
            if (k > 0) {
                g = g.deriv(j);
                fact *= k;
            }
            const double v = g.constant_term();
            std::ostringstream name;
            name << "dx" << j << "^" << k << "_delta";
            if (k < 4)
                rep.push_back({name.str(), std::abs(v) <= tol, v, "must vanish"});
            else
                rep.push_back({name.str(), v < -tol, v, "must be negative"});
        }
    }
    const double dt = D.slice_t(1).constant_term();
    rep.push_back({"dt_delta", dt > tol, dt, "positive for a stiff transition"});
    if (sys.has_nonlinearity) {
        const double f0 = sys.F.max_abs();
        rep.push_back({"levi_zeroth_order", f0 <= 1e-12, f0, "F(t, x, 0) must vanish"});
    }
    return rep;
}

// Euler system with pressure derivative p'(u1) along u1 = uc + v t.
// Returns the symbol [[0, -1], [-p'(u1), 0]] as a series in t.
inline QuasilinearSystem vdw_system(const std::vector<double>& pprime, double uc, double v, Truncation tr = {},
                                    ValidityBox box = {})
{
    TaylorSeries tvar = TaylorSeries::variable(1, tr, 0);
    TaylorSeries u = tvar * v + uc;
    TaylorSeries p = tvar.zero_like();
    for (std::size_t i = pprime.size(); i-- > 0;) p = p * u + pprime[i];
    TaylorSeries z = tvar.zero_like();
    return QuasilinearSystem::from_symbol(TaylorSymbol(z, z.constant_like(-1.0), -p, z), box);
}

inline double poly_eval(const std::vector<double>& c, double u)
{
    double v = 0;
    for (std::size_t i = c.size(); i-- > 0;) v = v * u + c[i];
    return v;
}

} // namespace gevrey
