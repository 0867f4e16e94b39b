#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "gevrey/errors.hpp"
#include "gevrey/symbol.hpp"

namespace gevrey {

enum class NormalCase { smooth, stiff };

inline const char* to_string(NormalCase c) { return c == NormalCase::smooth ? "smooth" : "stiff"; }

struct NormalFormData {
    NormalCase kind = NormalCase::smooth;
    TaylorSymbol Q;
    TaylorSymbol Qinv;
    TaylorSeries half_trace;
    std::optional<TaylorSeries> delta2; // smooth: delta^2
    std::optional<TaylorSeries> tstar;  // stiff
    std::optional<TaylorSeries> e;      // stiff
    double gamma0 = 0;
    bool pivot_a21 = true;
    TaylorSymbol residual;
    int valid_t_degree = 0; // coefficients with t-degree above this are truncation noise
};

struct RemainderDecomposition {
    NormalCase kind = NormalCase::smooth;
    TaylorSymbol leading; // A^S or A^Ai in the original frame
    TaylorSymbol R;
    TaylorSymbol R_t;
    std::vector<TaylorSymbol> R_x;
    std::vector<TaylorSymbol> R_z;
    std::optional<TaylorSymbol> R_e;
    // scalar buckets of the normal-frame (2,1) entry
    TaylorSeries r_t;
    std::vector<TaylorSeries> r_x;
    std::vector<TaylorSeries> r_z;
    int valid_t_degree = 0;

    TaylorSymbol recompose(const std::optional<TaylorSeries>& tstar = std::nullopt) const
    {
        const TaylorSeries& proto = R_t.e[0];
        const int d = proto.dim();
        TaylorSymbol out = TaylorSymbol::zero(d, proto.truncation(), proto.nz());
        TaylorSeries t = TaylorSeries::variable(d, proto.truncation(), 0, proto.nz());
        out += (t * t) * R_t;
        for (int j = 0; j < d; ++j) {
            out += (t * TaylorSeries::variable(d, proto.truncation(), 1 + j, proto.nz())) * R_x[j];
            if (j < static_cast<int>(R_z.size()) && proto.nz() > j)
                out += (t * TaylorSeries::variable(d, proto.truncation(), 1 + d + j, proto.nz())) * R_z[j];
        }
        if (R_e && tstar) out += *tstar * *R_e;
        return out;
    }
};

namespace detail {

inline TaylorSymbol core_matrix(const TaylorSeries& top, const TaylorSeries& bottom)
{
    TaylorSeries z = top.zero_like();
    return {z, top, bottom, z};
}

// Basis (a e1, e1) when the pivot is a21, (a e2, e2) when it is a12.
inline TaylorSymbol pivot_basis(const TaylorSymbol& a, bool use_a21)
{
    TaylorSeries z = a(0, 0).zero_like();
    TaylorSeries one = z.constant_like(1.0);
    if (use_a21) return {a(0, 0), one, a(1, 0), z};
    return {a(0, 1), z, -a(0, 0), one};
}

inline bool choose_pivot(const TaylorSymbol& a, double tol)
{
    const double p21 = std::abs(a(1, 0).constant_term());
    const double p12 = std::abs(a(0, 1).constant_term());
    if (!(p21 > tol) && !(p12 > tol))
        throw Error(ErrorCode::degenerate_pivot, "both a21 and a12 vanish at the base point");
    if (!(p12 > tol)) return true;
    if (!(p21 > tol)) return false;
    return p21 >= p12;
}

} // namespace detail

inline NormalFormData normal_form(const QuasilinearSystem& sys, const TransitionClassification& cls,
                                  double tol = 1e-9)
{
    NormalFormData nf;
    const TaylorSymbol& A = sys.A;
    const Truncation tr = A.truncation();
    nf.half_trace = A.trace() * 0.5;
    TaylorSymbol Ap = A.traceless();
    TaylorSymbol target;

    if (cls.kind == TransitionKind::smooth) {
        nf.kind = NormalCase::smooth;
        TaylorSymbol at;
        for (int i = 0; i < 4; ++i) {
            double low = 0;
            at.e[i] = Ap.e[i].shift_down(0, 1, &low);
            if (low > 1e-12)
                throw Error(ErrorCode::decomposition, "traceless symbol is not divisible by t in the smooth case");
        }
        nf.pivot_a21 = detail::choose_pivot(at, tol);
        nf.Q = detail::pivot_basis(at, nf.pivot_a21);
        TaylorSeries d2 = discriminant(at);
        nf.delta2 = d2;
        nf.gamma0 = std::sqrt(std::max(0.0, d2.constant_term()));
        TaylorSeries t = TaylorSeries::variable(A.dim(), tr, 0, A.e[0].nz());
        target = detail::core_matrix(t, -(t * d2));
        nf.valid_t_degree = tr.t - 2;
    } else if (cls.kind == TransitionKind::stiff) {
        nf.kind = NormalCase::stiff;
        nf.pivot_a21 = detail::choose_pivot(Ap, tol);
        nf.Q = detail::pivot_basis(Ap, nf.pivot_a21);
        TaylorSeries D = discriminant(A);
        TaylorSeries ts = cls.tstar ? *cls.tstar : series_transition_time(D);
        TaylorSeries e = cls.e ? *cls.e : D.divide_t_minus(ts);
        nf.tstar = ts;
        nf.e = e;
        nf.gamma0 = std::sqrt(std::max(0.0, e.constant_term()));
        TaylorSeries t = TaylorSeries::variable(A.dim(), tr, 0, A.e[0].nz());
        target = detail::core_matrix(t.constant_like(1.0), -((t - ts) * e));
        nf.valid_t_degree = tr.t - 2;
    } else {
        throw Error(ErrorCode::precondition, "normal form needs a smooth or stiff classification");
    }

    nf.Qinv = nf.Q.inverse();
    nf.residual = nf.Qinv * Ap * nf.Q - target;
    return nf;
}

inline bool residual_is_zero(const NormalFormData& nf, double tol = 1e-10)
{
    const TaylorSymbol z = TaylorSymbol::zero(nf.residual.dim(), nf.residual.truncation(), nf.residual.e[0].nz());
    return nf.residual.max_abs_diff(z, nf.valid_t_degree) <= tol;
}

inline RemainderDecomposition remainder_expansion(const QuasilinearSystem& sys, const NormalFormData& nf,
                                                  double tol = 1e-10)
{
    RemainderDecomposition rd;
    rd.kind = nf.kind;
    const TaylorSymbol& A = sys.A;
    const int d = A.dim();
    const int nz = A.e[0].nz();
    const Truncation tr = A.truncation();
    TaylorSeries t = TaylorSeries::variable(d, tr, 0, nz);
    const double g2 = nf.gamma0 * nf.gamma0;
    rd.valid_t_degree = nf.valid_t_degree;

    TaylorSymbol lead_core;
    TaylorSeries scalar; // perturbation of delta^2 or e around its base value
    if (nf.kind == NormalCase::smooth) {
        lead_core = detail::core_matrix(t, t * (-g2));
        scalar = *nf.delta2 - g2;
    } else {
        lead_core = detail::core_matrix(t.constant_like(1.0), t * (-g2));
        scalar = *nf.e - g2;
    }
    rd.leading = (nf.Q * lead_core * nf.Qinv).add_identity(nf.half_trace);
    rd.R = A - rd.leading;

    rd.r_t = scalar.zero_like();
    rd.r_x.assign(static_cast<std::size_t>(d), scalar.zero_like());
    rd.r_z.assign(static_cast<std::size_t>(nz), scalar.zero_like());
    for (std::size_t i = 0; i < scalar.size(); ++i) {
        const double c = scalar[i];
        if (c == 0) continue;
        const int* ex = scalar.exponents(i);
        std::vector<int> e(ex, ex + scalar.nvars());
        int var = -1;
        for (int v = 0; v < scalar.nvars(); ++v)
            if (e[v] > 0) {
                var = v;
                break;
            }
        if (var < 0) {
            if (std::abs(c) > tol)
                throw Error(ErrorCode::decomposition, "constant remainder coefficient left unassigned");
            continue;
        }
        e[var] -= 1;
        if (var == 0)
            rd.r_t.add_to(e, c);
        else if (var <= d)
            rd.r_x[var - 1].add_to(e, c);
        else
            rd.r_z[var - 1 - d].add_to(e, c);
    }

    TaylorSeries z = t.zero_like();
    auto lift = [&](const TaylorSeries& r) { return nf.Q * detail::core_matrix(z, -r) * nf.Qinv; };
    rd.R_t = lift(rd.r_t);
    for (const auto& r : rd.r_x) rd.R_x.push_back(lift(r));
    for (const auto& r : rd.r_z) rd.R_z.push_back(lift(r));
    // stiff (2,1) slot is -t(e - e0) + t* e
    if (nf.kind == NormalCase::stiff) rd.R_e = lift(-*nf.e);

    TaylorSymbol back = rd.recompose(nf.tstar);
    if (back.max_abs_diff(rd.R, rd.valid_t_degree) > 1e-8)
        throw Error(ErrorCode::decomposition, "remainder does not recompose within truncation");
    return rd;
}

} // namespace gevrey
