#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "gevrey/errors.hpp"
#include "gevrey/majorant.hpp"

namespace gevrey {

using Rational = boost::multiprecision::cpp_rational;

inline Rational rat(long long p, long long q = 1) { return Rational(p) / Rational(q); }

inline std::string to_string(const Rational& r)
{
    return boost::multiprecision::denominator(r) == 1 ? boost::multiprecision::numerator(r).str() : r.str();
}

namespace planner_detail {

// decimal only: cpp_int would read a leading 0 as octal
inline boost::multiprecision::cpp_int parse_int(std::string s, bool allow_sign)
{
    bool neg = false;
    if (allow_sign && !s.empty() && (s[0] == '-' || s[0] == '+')) {
        neg = s[0] == '-';
        s.erase(0, 1);
    }
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        throw std::invalid_argument("not a decimal integer");
    const auto nz = s.find_first_not_of('0');
    const boost::multiprecision::cpp_int v = nz == std::string::npos ? 0 : boost::multiprecision::cpp_int(s.substr(nz));
    return neg ? -v : v;
}

} // namespace planner_detail

// "p/q", a decimal "0.25" or an integer
inline Rational parse_rational(const std::string& s)
{
    using planner_detail::parse_int;
    try {
        const auto slash = s.find('/');
        if (slash == std::string::npos) {
            const auto dot = s.find('.');
            if (dot == std::string::npos) return Rational(parse_int(s, true));
            const std::string frac = s.substr(dot + 1);
            const std::string whole = s.substr(0, dot);
            const bool neg = !whole.empty() && whole[0] == '-';
            const auto w = whole.empty() || whole == "-" || whole == "+" ? boost::multiprecision::cpp_int(0)
                                                                         : parse_int(whole, true);
            boost::multiprecision::cpp_int den = 1;
            for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
            const Rational f = Rational(parse_int(frac, false)) / Rational(den);
            return neg ? Rational(w) - f : Rational(w) + f;
        }
        const auto den = parse_int(s.substr(slash + 1), false);
        if (den == 0) throw std::invalid_argument("zero denominator");
        return Rational(parse_int(s.substr(0, slash), true)) / Rational(den);
    } catch (const std::exception&) {
        throw Error(ErrorCode::argument, "cannot parse rational '" + s + "'");
    }
}

// eps^a |ln eps|^log_power e^{m_sign M}
struct ExponentExpr {
    Rational a = 0;
    int log_power = 0;
    int m_sign = 0;

    double value(double eps, double M = 0) const
    {
        return std::pow(eps, static_cast<double>(a)) * std::pow(std::abs(std::log(eps)), log_power) *
               std::exp(m_sign * M);
    }

    friend ExponentExpr operator*(const ExponentExpr& x, const ExponentExpr& y)
    {
        const int ms = x.m_sign + y.m_sign;
        if (ms < -1 || ms > 1) throw Error(ErrorCode::argument, "e^{M} powers beyond one are not modelled");
        return {x.a + y.a, x.log_power + y.log_power, ms};
    }
};

// x << y as eps -> 0: e^{-M} beats any power, then larger exponent wins, then the log-smaller side.
inline bool much_less(const ExponentExpr& x, const ExponentExpr& y)
{
    if (x.m_sign != y.m_sign) return x.m_sign < y.m_sign;
    if (x.a != y.a) return x.a > y.a;
    return x.log_power < y.log_power;
}

// c0 + cd delta + cr r + cp p > 0 with R^{-1} = eps^r, rho^{-1} = eps^p
struct Constraint {
    std::string name;
    Rational c0, cd, cr, cp;
    std::set<std::string> origin;

    Rational eval(const Rational& d, const Rational& r, const Rational& p) const
    {
        return c0 + cd * d + cr * r + cp * p;
    }
};

enum class PlanCase { smooth, airy };

inline const char* to_string(PlanCase c) { return c == PlanCase::smooth ? "smooth" : "airy"; }

enum class WhatIf {
    none,
    drop_s2,        // remove the constraint driven by the s^2 bucket of the remainder
    zero_remainder, // remove every remainder bucket (t* kept in the Airy case)
    strict_airy     // keep the s^{1/4} weight in the R rho^{-1} constraint
};

inline const char* to_string(WhatIf w)
{
    switch (w) {
    case WhatIf::none: return "none";
    case WhatIf::drop_s2: return "drop_s2";
    case WhatIf::zero_remainder: return "zero_remainder";
    case WhatIf::strict_airy: return "strict_airy";
    }
    return "none";
}

inline std::vector<Constraint> constraint_chain(PlanCase c, int k = 4, WhatIf w = WhatIf::none)
{
    std::vector<Constraint> ch;
    auto add = [&](std::string n, Rational c0, Rational cd, Rational cr, Rational cp) {
        ch.push_back({n, c0, cd, cr, cp, {n}});
    };
    if (c == PlanCase::smooth) {
        // beta = eps^{delta/2}, s ~ eps^{-delta/2}, e^{M'-M} = eps
        if (w != WhatIf::zero_remainder && w != WhatIf::drop_s2) add("un", rat(1, 2), rat(-3, 2), 0, 0);
        if (w != WhatIf::zero_remainder) add("deux", 0, -1, 1, 0);
        add("trois", rat(3, 2), rat(-1, 2), 0, 0);
        add("quatre", 0, 0, -1, 1);
        add("cinq", rat(1, 2), rat(-1, 2), 0, -1);
    } else {
        if (k < 2 || k % 2) throw Error(ErrorCode::argument, "degeneracy order must be an even integer >= 2");
        // beta = eps^{2 delta/3}, s ~ eps^{-2 delta/3}, t*(R^{-1}) ~ R^{-k}
        if (w != WhatIf::zero_remainder && w != WhatIf::drop_s2) add("un", rat(2, 3), rat(-13, 6), 0, 0);
        if (w != WhatIf::zero_remainder) add("deux", 0, rat(-3, 2), 1, 0);
        add("trois", rat(-2, 3), rat(-5, 6), k, 0);
        add("quatre", rat(4, 3), rat(-5, 6), 0, 0);
        if (w == WhatIf::strict_airy)
            add("cinq", rat(-1, 3), rat(-1, 6), -1, 1);
        else
            add("cinq", rat(-1, 3), 0, -1, 1);
        add("six", rat(2, 3), rat(-2, 3), 0, -1);
    }
    add("R_large", 0, 0, 1, 0);
    add("rho_large", 0, 0, 0, 1);
    add("delta_pos", 0, 1, 0, 0);
    add("delta_lt_1", 1, -1, 0, 0);
    return ch;
}

namespace planner_detail {

// Fourier-Motzkin on a strict system: eliminate variable v (1 = r, 2 = p).
inline std::vector<Constraint> eliminate(const std::vector<Constraint>& in, int v)
{
    auto coef = [v](const Constraint& c) -> const Rational& { return v == 1 ? c.cr : c.cp; };
    std::vector<Constraint> pos, neg, out;
    for (const auto& c : in) {
        if (coef(c) > 0) pos.push_back(c);
        else if (coef(c) < 0) neg.push_back(c);
        else out.push_back(c);
    }
    for (const auto& a : pos)
        for (const auto& b : neg) {
            const Rational la = -coef(b), lb = coef(a);
            Constraint c;
            c.c0 = la * a.c0 + lb * b.c0;
            c.cd = la * a.cd + lb * b.cd;
            c.cr = la * a.cr + lb * b.cr;
            c.cp = la * a.cp + lb * b.cp;
            c.origin = a.origin;
            c.origin.insert(b.origin.begin(), b.origin.end());
            c.name = a.name + "+" + b.name;
            out.push_back(c);
        }
    return out;
}

inline std::string join(const std::set<std::string>& s)
{
    std::string r;
    for (const auto& x : s) r += (r.empty() ? "" : ",") + x;
    return r;
}

} // namespace planner_detail

// Bound on delta implied by the chain: delta < value, with the constraints that produce it.
struct DeltaBound {
    Rational value;
    std::set<std::string> origin;
};


// Eliminates r and p; returns the upper bounds on delta (lower bounds are dropped, delta > 0 is kept).
inline std::vector<DeltaBound> delta_bounds(const std::vector<Constraint>& chain)
{
    auto e = planner_detail::eliminate(planner_detail::eliminate(chain, 2), 1);
    std::vector<DeltaBound> out;
    for (const auto& c : e)
        if (c.cd < 0) out.push_back({-c.c0 / c.cd, c.origin});
    std::sort(out.begin(), out.end(), [](const DeltaBound& a, const DeltaBound& b) {
        return a.value != b.value ? a.value < b.value : a.origin.size() < b.origin.size();
    });
    return out;
}

struct ParamPlan {
    PlanCase kind = PlanCase::smooth;
    Rational delta;
    int k = 0;
    WhatIf what_if = WhatIf::none;
    bool feasible = false;
    ExponentExpr beta, R_inv, rho_inv, M_prime;
    ExponentExpr s1; // growth time scale
    ExponentExpr s_final;
    std::vector<std::string> binding;
    std::vector<Constraint> chain;
    std::vector<std::pair<std::string, Rational>> slack; // per constraint at the chosen assignment
    std::optional<Rational> branch_threshold;            // 4/(9k-5): where the t* bucket takes over
    std::optional<Rational> tstar_branch_limit;          // limit from the t* bucket alone
    std::string domain;                                  // Omega_{R, rho}
};

namespace planner_detail {

// open interval of values of variable v allowed by constraints that only involve v (others fixed)
inline std::pair<std::optional<Rational>, std::optional<Rational>> interval(const std::vector<Constraint>& cs, int v,
                                                                             const Rational& d, const Rational& r)
{
    std::optional<Rational> lo, hi;
    for (const auto& c : cs) {
        const Rational cv = v == 1 ? c.cr : c.cp;
        const Rational rest = c.c0 + c.cd * d + (v == 2 ? c.cr * r : Rational(0));
        if (cv == 0) continue;
        const Rational b = -rest / cv;
        if (cv > 0) lo = lo ? std::max(*lo, b) : b;
        else hi = hi ? std::min(*hi, b) : b;
    }
    return {lo, hi};
}

inline Rational pick(const std::optional<Rational>& lo, const std::optional<Rational>& hi)
{
    if (lo && hi) return (*lo + *hi) / 2;
    if (lo) return *lo + 1;
    if (hi) return *hi - 1;
    return 0;
}

} // namespace planner_detail

inline ParamPlan plan(PlanCase c, const Rational& delta, int k = 4, WhatIf w = WhatIf::none)
{
    if (!(delta > 0 && delta < 1)) throw Error(ErrorCode::argument, "delta must lie in (0, 1)");
    if (c == PlanCase::airy && (k < 2 || k % 2)) throw Error(ErrorCode::argument, "k must be an even integer >= 2");
    ParamPlan pl;
    pl.kind = c;
    pl.delta = delta;
    pl.k = c == PlanCase::airy ? k : 0;
    pl.what_if = w;
    pl.chain = constraint_chain(c, k, w);
    const Rational gap = c == PlanCase::smooth ? rat(1, 2) : rat(2, 3);
    const Rational life = c == PlanCase::smooth ? rat(1, 2) : rat(2, 3); // 1/(1+eta)
    pl.beta = {delta * gap, 0, 0};
    pl.s1 = {-delta * gap, 0, 0};
    pl.M_prime = {-delta, 0, 0};

    const auto rows = planner_detail::eliminate(planner_detail::eliminate(pl.chain, 2), 1);
    pl.feasible = true;
    for (const auto& row : rows)
        if (!(row.c0 + row.cd * delta > 0)) {
            pl.feasible = false;
            pl.binding.push_back(planner_detail::join(row.origin));
        }
    const auto ub = delta_bounds(pl.chain);
    if (pl.feasible && !ub.empty()) pl.binding.push_back(planner_detail::join(ub.front().origin));
    for (const auto& b : ub)
        if (b.origin.count("trois") && c == PlanCase::airy) {
            pl.tstar_branch_limit = b.value;
            break;
        }
    if (c == PlanCase::airy) {
        const Constraint *d2 = nullptr, *d3 = nullptr;
        for (const auto& x : pl.chain) {
            if (x.name == "deux") d2 = &x;
            if (x.name == "trois") d3 = &x;
        }
        if (d2 && d3) {
            // r > -(c0 + cd delta)/cr for both; equal where the two lower bounds cross
            const Rational a2 = -d2->cd / d2->cr, b2 = -d2->c0 / d2->cr;
            const Rational a3 = -d3->cd / d3->cr, b3 = -d3->c0 / d3->cr;
            if (a2 != a3) pl.branch_threshold = (b3 - b2) / (a2 - a3);
        }
    }

    if (pl.feasible) {
        Rational r, p;
        bool chosen = false;
        if (c == PlanCase::smooth && w == WhatIf::none) {
            r = rat(1, 6) + delta / 2;
            p = rat(1, 3);
            chosen = std::all_of(pl.chain.begin(), pl.chain.end(),
                                 [&](const Constraint& x) { return x.eval(delta, r, p) > 0; });
        }
        if (!chosen) {
            const auto only_r = planner_detail::eliminate(pl.chain, 2);
            auto [rlo, rhi] = planner_detail::interval(only_r, 1, delta, 0);
            r = planner_detail::pick(rlo, rhi);
            auto [plo, phi] = planner_detail::interval(pl.chain, 2, delta, r);
            p = planner_detail::pick(plo, phi);
        }
        pl.R_inv = {r, 0, 0};
        pl.rho_inv = {p, 0, 0};
        for (const auto& x : pl.chain) pl.slack.emplace_back(x.name, x.eval(delta, r, p));
        const Rational lifetime = p - life;
        pl.s_final = {std::max(pl.s1.a, lifetime), 0, 0};
        pl.domain = "R|x| + rho t < 1, R = eps^-" + to_string(r) + ", rho = eps^-" + to_string(p);
    }
    return pl;
}

// Simplest rational (smallest denominator) in the closed interval [lo, hi], 0 <= lo <= hi.
inline Rational simplest_between(Rational lo, Rational hi)
{
    using boost::multiprecision::cpp_int;
    // Stern-Brocot descent with run-length steps
    cpp_int pl = 0, ql = 1, ph = 1, qh = 0;
    for (int guard = 0; guard < 100000; ++guard) {
        const cpp_int pm = pl + ph, qm = ql + qh;
        const Rational m = Rational(pm) / Rational(qm);
        if (m < lo) {
            // move right: largest t with (pl + t ph)/(ql + t qh) < lo
            cpp_int t = 1;
            cpp_int step = 1;
            while (Rational(pl + (t + step) * ph) / Rational(ql + (t + step) * qh) < lo) {
                t += step;
                step *= 2;
            }
            while (step > 1) {
                step /= 2;
                if (Rational(pl + (t + step) * ph) / Rational(ql + (t + step) * qh) < lo) t += step;
            }
            pl += t * ph;
            ql += t * qh;
        } else if (m > hi) {
            cpp_int t = 1;
            cpp_int step = 1;
            auto ok = [&](const cpp_int& tt) {
                const cpp_int q = qh + tt * ql;
                return q > 0 && Rational(ph + tt * pl) / Rational(q) > hi;
            };
            while (ok(t + step)) {
                t += step;
                step *= 2;
            }
            while (step > 1) {
                step /= 2;
                if (ok(t + step)) t += step;
            }
            ph += t * pl;
            qh += t * ql;
        } else {
            return m;
        }
    }
    throw Error(ErrorCode::numeric, "Stern-Brocot search did not terminate");
}

// sup of feasible delta, by bisection over rationals through plan(); the simplest rational
// consistent with the final bracket is returned and re-checked.
inline Rational gevrey_index_limit(PlanCase c, int k = 4, WhatIf w = WhatIf::none, int steps = 80)
{
    Rational lo = 0, hi = 1;
    bool any = false;
    for (int i = 0; i < steps; ++i) {
        const Rational mid = (lo + hi) / 2;
        if (plan(c, mid, k, w).feasible) {
            lo = mid;
            any = true;
        } else {
            hi = mid;
        }
    }
    if (!any) return 0;
    const Rational cand = simplest_between(lo, hi);
    // feasibility is open at the limit: the candidate itself fails, just below it passes
    const Rational below = cand - (hi - lo);
    if (cand < 1 && (plan(c, cand, k, w).feasible || !(below > 0 && plan(c, below, k, w).feasible)))
        throw Error(ErrorCode::numeric, "threshold candidate failed verification");
    return cand;
}

struct GrowthTime {
    double s1 = 0;
    double s_final = 0;
    double asymptotic = 0; // M'^{1/(1+eta)}
};

// Solves M' = gamma0 s^{1+eta}/(1+eta) + beta s; s_final = min(s1, 1/(eps^{1/(1+eta)} rho)).
inline GrowthTime growth_time(const SpaceParams& sp, double rho = INFINITY)
{
    if (!(sp.Mprime > 0)) throw Error(ErrorCode::argument, "M' must be positive");
    GrowthTime g;
    const double M = sp.Mprime, b = sp.beta, c = sp.gamma0;
    if (sp.eta == 1.0) {
        g.s1 = c > 0 ? (2 * M) / (b + std::sqrt(b * b + 2 * c * M)) : M / b;
    } else if (sp.eta == 0.5) {
        // (2/3) c w^3 + b w^2 = M, w = sqrt(s)
        double w = std::cbrt(1.5 * M / std::max(c, 1e-300));
        if (b > 0) w = std::min(w, std::sqrt(M / b));
        for (int it = 0; it < 100; ++it) {
            const double f = (2.0 / 3.0) * c * w * w * w + b * w * w - M;
            const double df = 2 * c * w * w + 2 * b * w;
            const double dw = f / df;
            w -= dw;
            if (std::abs(dw) < 1e-16 * std::max(1.0, w)) break;
        }
        g.s1 = w * w;
    } else {
        double lo = 0, hi = 1;
        while (sp.Gamma(hi) < M) hi *= 2;
        for (int it = 0; it < 200; ++it) {
            const double mid = (lo + hi) / 2;
            (sp.Gamma(mid) < M ? lo : hi) = mid;
        }
        g.s1 = (lo + hi) / 2;
    }
    g.s_final = std::min(g.s1, 1 / (sp.tscale() * rho));
    g.asymptotic = std::pow(M, 1 / (1 + sp.eta));
    return g;
}

// log of sup_a eps^{2/(1+eta)} e^{-M} eps^{-a} c^{-a} a!^{-1/sigma}
inline double datum_gevrey_norm(double eps, double delta, double sigma, double c, double eta)
{
    if (!(sigma > 0 && sigma < 1) || !(c > 0)) throw Error(ErrorCode::argument, "need 0 < sigma < 1 and c > 0");
    const double L = -std::log(eps * c);
    auto term = [&](double a) { return a * L - std::lgamma(a + 1) / sigma; };
    // term(a+1) - term(a) = L - ln(a+1)/sigma >= 0 iff a+1 <= e^{sigma L}
    const double X = std::exp(sigma * L);
    double best = term(0);
    if (X >= 1) {
        const double a0 = std::floor(X);
        for (double a = std::max(0.0, a0 - 1); a <= a0 + 1; a += 1) best = std::max(best, term(a));
    }
    return (2 / (1 + eta)) * std::log(eps) - std::pow(eps, -delta) + best;
}

// Concrete numbers for an exponent plan at a given eps. M' = max(M - |ln eps|, M/2); rho is
// raised by c_rho so that the analyticity lifetime is at least kappa s1.
struct RealizedPlan {
    double eps = 0, delta = 0, M = 0, R = 0, rho = 0, c_rho = 1, kappa = 1.2;
    SpaceParams space;
    PhiParams phi;
};

inline RealizedPlan realize(const ParamPlan& pl, double eps, double gamma0 = 1, int K = 6, double kappa = 1.2)
{
    if (!pl.feasible) throw Error(ErrorCode::precondition, "cannot realize an infeasible plan");
    RealizedPlan rp;
    rp.eps = eps;
    rp.delta = static_cast<double>(pl.delta);
    rp.kappa = kappa;
    rp.M = std::pow(eps, -rp.delta);
    SpaceParams& sp = rp.space;
    sp.eta = pl.kind == PlanCase::smooth ? 1.0 : 0.5;
    sp.delta = rp.delta;
    sp.eps = eps;
    sp.gamma0 = gamma0;
    sp.beta = pl.beta.value(eps);
    sp.Mprime = std::max(rp.M - std::abs(std::log(eps)), rp.M / 2);
    rp.R = 1 / pl.R_inv.value(eps);
    const GrowthTime g0 = growth_time(sp);
    const double p = static_cast<double>(pl.rho_inv.a);
    rp.c_rho = std::max(1.0, std::pow(eps, p) / (sp.tscale() * kappa * g0.s1));
    rp.rho = rp.c_rho * std::pow(eps, -p);
    const GrowthTime g = growth_time(sp, rp.rho);
    sp.s1 = g.s1;
    sp.s_final = g.s_final;
    rp.phi = PhiParams::make(rp.R, rp.rho, K);
    return rp;
}

} // namespace gevrey
