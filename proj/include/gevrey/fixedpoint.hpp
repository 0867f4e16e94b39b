#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gevrey/errors.hpp"
#include "gevrey/majorant.hpp"
#include "gevrey/planner.hpp"
#include "gevrey/propagator.hpp"
#include "gevrey/symbol.hpp"

namespace gevrey {

struct SolveConfig {
    FlowCase kind = FlowCase::smooth;
    double eps = 1e-4;
    double delta = 0.2;
    SpaceParams space;
    PhiParams phi;
    int nmax = 4;
    int K = 6;
    int S = 257;
    int max_iter = 50;
    double tol = 1e-10;
    bool feasible = false; // planner verdict
    bool override_feasibility = false;

    double s_end() const { return std::min(space.s_final, 0.999 / (space.tscale() * phi.rho)); }

    std::vector<double> grid() const
    {
        std::vector<double> g(static_cast<std::size_t>(S));
        const double e = s_end();
        for (int i = 0; i < S; ++i) g[i] = e * i / (S - 1);
        return g;
    }
};

inline SolveConfig make_solve_config(const ParamPlan& pl, double eps, double gamma0 = 1, int nmax = 4, int K = 6,
                                     int S = 257)
{
    const RealizedPlan rp = realize(pl, eps, gamma0, K);
    SolveConfig c;
    c.kind = pl.kind == PlanCase::smooth ? FlowCase::smooth : FlowCase::airy;
    c.eps = eps;
    c.delta = rp.delta;
    c.space = rp.space;
    c.phi = rp.phi;
    c.nmax = nmax;
    c.K = K;
    c.S = S;
    c.feasible = pl.feasible;
    return c;
}

// Traceless leading part N^S = [[0, t], [-g^2 t, 0]] or N^Ai = [[0, 1], [-g^2 t, 0]].
inline TaylorSymbol leading_symbol(FlowCase kind, double gamma0, int d, Truncation tr, int nz = -1)
{
    TaylorSeries t = TaylorSeries::variable(d, tr, 0, nz);
    TaylorSeries z = t.zero_like();
    TaylorSeries top = kind == FlowCase::smooth ? t : t.constant_like(1.0);
    return TaylorSymbol(z, top, t * (-gamma0 * gamma0), z);
}

// A = [[0, t], [-t(1 + 0.02 t + 0.004 x), 0]] with small constant u- and F-couplings.
inline QuasilinearSystem toy_smooth_system(Truncation tr = {})
{
    TaylorSeries t = TaylorSeries::variable(1, tr, 0);
    TaylorSeries x = TaylorSeries::variable(1, tr, 1);
    TaylorSeries z = t.zero_like();
    TaylorSymbol A(z, t, -(t * (t * 0.02 + x * 0.004 + 1.0)), z);
    QuasilinearSystem s = QuasilinearSystem::from_symbol(A);
    s.A_u[0] = TaylorSymbol::constant({{{0.0, 0.0}, {0.1, 0.0}}}, 1, tr);
    s.A_u[1] = TaylorSymbol::constant({{{0.05, 0.0}, {0.0, -0.05}}}, 1, tr);
    s.F_u[0] = TaylorSymbol::constant({{{0.1, 0.0}, {0.0, 0.1}}}, 1, tr);
    s.F_u[1] = TaylorSymbol::constant({{{0.0, 0.1}, {0.0, 0.0}}}, 1, tr);
    s.has_nonlinearity = true;
    return s;
}

// A = [[0, 1], [-(t - x^k), 0]]
inline QuasilinearSystem toy_airy_system(int k = 4, Truncation tr = {})
{
    TaylorSeries t = TaylorSeries::variable(1, tr, 0);
    TaylorSeries x = TaylorSeries::variable(1, tr, 1);
    TaylorSeries z = t.zero_like();
    return QuasilinearSystem::from_symbol(TaylorSymbol(z, z.constant_like(1.0), -(t - x.pow(k)), z));
}

// Fields of the system data on the solver grid and the mode propagators U_n(s_j, s_i).
class DuhamelOperator {
public:
    DuhamelOperator(const QuasilinearSystem& sys, const SolveConfig& cfg)
        : cfg_(cfg), shape_(1, cfg.nmax, cfg.K, cfg.grid())
    {
        if (sys.d != 1) throw Error(ErrorCode::argument, "the solver handles one space variable");
        if (cfg.S < 5) throw Error(ErrorCode::argument, "the solver needs at least 5 grid points");
        sys.validate();
        const SpaceParams& sp = cfg.space;
        const Truncation tr = sys.A.truncation();
        const TaylorSymbol N = leading_symbol(cfg.kind, sp.gamma0, 1, tr, sys.A.e[0].nz());
        R_ = symbol_to_field(sys.A - N, shape_, sp);
        A_ = symbol_to_field(sys.A, shape_, sp);
        F_ = symbol_to_field(sys.F, shape_, sp);
        for (const auto& a : sys.A_u) Au_.push_back(symbol_to_field(a, shape_, sp));
        for (const auto& f : sys.F_u) Fu_.push_back(symbol_to_field(f, shape_, sp));
        build_weights();
        build_flows();
    }

    const SolveConfig& config() const { return cfg_; }
    const TrigTaylorField& shape() const { return shape_; }
    const TrigTaylorField& R_field() const { return R_; }
    const TrigTaylorField& A_field() const { return A_; }
    const TrigTaylorField& F_field() const { return F_; }

    // sum_j A_u[j] u_j as a matrix field
    TrigTaylorField Au_dot(const TrigTaylorField& u) const { return dot(Au_, u); }
    TrigTaylorField Fu_dot(const TrigTaylorField& u) const { return dot(Fu_, u); }

    double e_theta() const { return std::pow(cfg_.eps, -cfg_.space.eta / (1 + cfg_.space.eta)); }
    double e_quad() const { return std::pow(cfg_.eps, (2 - cfg_.space.eta) / (1 + cfg_.space.eta)); }

    TrigTaylorField source_theta(const TrigTaylorField& u) const
    {
        TrigTaylorField M = R_ * cplx(e_theta());
        M += Au_dot(u) * cplx(e_quad());
        return matvec(M, dtheta(u));
    }
    TrigTaylorField source_x(const TrigTaylorField& u) const
    {
        TrigTaylorField M = A_;
        M += Au_dot(u) * cplx(cfg_.space.uscale());
        return matvec(M, dx(u)) * cplx(cfg_.space.tscale());
    }
    TrigTaylorField source_u(const TrigTaylorField& u) const
    {
        TrigTaylorField M = F_;
        M += Fu_dot(u) * cplx(cfg_.space.uscale());
        return matvec(M, u) * cplx(cfg_.space.tscale());
    }

    // int_0^{s_i} U_n(s', s_i) G_n(s') ds'
    TrigTaylorField integrate(const TrigTaylorField& G) const
    {
        if (G.ncomp() != 2 || !G.same_shape(shape_)) throw Error(ErrorCode::argument, "source field has the wrong shape");
        TrigTaylorField out = G.zero_like();
        const std::size_t S = shape_.ns();
        for (int n = -cfg_.nmax; n <= cfg_.nmax; ++n)
            for (int k = 0; k <= cfg_.K; ++k) {
                const cplx* g0 = &G.at(0, n, k, 0);
                const cplx* g1 = &G.at(1, n, k, 0);
                bool any = false;
                for (std::size_t j = 0; j < S && !any; ++j) any = g0[j] != cplx(0) || g1[j] != cplx(0);
                if (!any) continue;
                for (std::size_t i = 1; i < S; ++i) {
                    cplx a0 = 0, a1 = 0;
                    for (const auto& [j, w] : weights_[i]) {
                        const CMat2 U = flow(n, j, i);
                        a0 += w * (U(0, 0) * g0[j] + U(0, 1) * g1[j]);
                        a1 += w * (U(1, 0) * g0[j] + U(1, 1) * g1[j]);
                    }
                    out.at(0, n, k, i) = a0;
                    out.at(1, n, k, i) = a1;
                }
            }
        return out;
    }

    CMat2 flow(int n, std::size_t j, std::size_t i) const
    {
        if (n == 0) return CMat2::Identity();
        const CMat2& m = flows_[(static_cast<std::size_t>(std::abs(n)) - 1) * S2() + j * shape_.ns() + i];
        return n > 0 ? m : CMat2(m.conjugate());
    }

    double propagator_constant() const { return C_U_; }

private:
    std::size_t S2() const { return shape_.ns() * shape_.ns(); }

    TrigTaylorField dot(const std::vector<TrigTaylorField>& M, const TrigTaylorField& u) const
    {
        TrigTaylorField r = shape_.zero_like(4);
        for (std::size_t j = 0; j < M.size() && j < 2; ++j) r += field_product(M[j], u.component(static_cast<int>(j)));
        return r;
    }

    // i = 1 uses the cubic through nodes 0..3; even i Simpson; odd i >= 3 three-eighths on the
    // first three intervals and Simpson on the rest.
    void build_weights()
    {
        const std::size_t S = shape_.ns();
        const double h = shape_.s(1) - shape_.s(0);
        weights_.assign(S, {});
        weights_[1] = {{0, 9 * h / 24}, {1, 19 * h / 24}, {2, -5 * h / 24}, {3, h / 24}};
        for (std::size_t i = 2; i < S; ++i) {
            std::vector<double> w(i + 1, 0.0);
            std::size_t start = 0;
            if (i % 2 == 1) {
                const double c = 3 * h / 8;
                w[0] += c;
                w[1] += 3 * c;
                w[2] += 3 * c;
                w[3] += c;
                start = 3;
            }
            for (std::size_t a = start; a + 2 <= i; a += 2) {
                w[a] += h / 3;
                w[a + 1] += 4 * h / 3;
                w[a + 2] += h / 3;
            }
            for (std::size_t j = 0; j <= i; ++j) weights_[i].push_back({j, w[j]});
        }
    }

    void build_flows()
    {
        const std::size_t S = shape_.ns();
        const auto& g = shape_.s();
        flows_.assign(static_cast<std::size_t>(cfg_.nmax) * S2(), CMat2::Identity());
        double cu = 0;
        for (int n = 1; n <= cfg_.nmax; ++n) {
            std::vector<prop_detail::AiryColumns> cols;
            std::optional<AiryScale> sc;
            if (cfg_.kind == FlowCase::airy) {
                sc.emplace(n, cfg_.space.gamma0);
                for (double s : g) cols.push_back(prop_detail::airy_columns(*sc, s));
            }
            ModePropagator U{cfg_.kind, n, cfg_.space.gamma0, cfg_.eps};
            for (std::size_t j = 0; j < S; ++j)
                for (std::size_t i = 0; i < S; ++i) {
                    if (i + 3 < j) continue; // only backward pairs used by the i = 1 rule
                    ScaledMatrix m = cfg_.kind == FlowCase::smooth
                                         ? smooth_flow_any(n, cfg_.space.gamma0, g[j], g[i])
                                         : prop_detail::airy_flow_from(n, cfg_.eps, *sc, cols[j], cols[i]);
                    flows_[(n - 1) * S2() + j * S + i] = m.value();
                    if (j <= i) {
                        const double rs = std::max(std::abs(m.m(0, 0)) + std::abs(m.m(0, 1)),
                                                   std::abs(m.m(1, 0)) + std::abs(m.m(1, 1)));
                        cu = std::max(cu, std::log(rs) + m.lg - U.exponent(g[j], g[i]));
                    }
                }
        }
        C_U_ = std::max(1.0, std::exp(cu));
        if (cfg_.kind == FlowCase::smooth)
            C_U_ = std::max(C_U_, std::max(cfg_.space.gamma0, 1 / cfg_.space.gamma0));
    }

    SolveConfig cfg_;
    TrigTaylorField shape_;
    TrigTaylorField R_, A_, F_;
    std::vector<TrigTaylorField> Au_, Fu_;
    std::vector<std::vector<std::pair<std::size_t, double>>> weights_;
    std::vector<CMat2> flows_;
    double C_U_ = 1;
};

inline TrigTaylorField apply_T_theta(const TrigTaylorField& u, const DuhamelOperator& op)
{
    return op.integrate(op.source_theta(u));
}
inline TrigTaylorField apply_T_x(const TrigTaylorField& u, const DuhamelOperator& op)
{
    return op.integrate(op.source_x(u));
}
inline TrigTaylorField apply_T_u(const TrigTaylorField& u, const DuhamelOperator& op)
{
    return op.integrate(op.source_u(u));
}
inline TrigTaylorField apply_T(const TrigTaylorField& u, const DuhamelOperator& op)
{
    TrigTaylorField g = op.source_theta(u);
    g += op.source_x(u);
    g += op.source_u(u);
    return op.integrate(g);
}

// Bounds on ||T^.(u)|| from the weighted-space estimates; the u-dependent coefficient norms are
// measured on the actual field.
struct OperatorBounds {
    double theta = 0;
    double x = 0;
    double u = 0;
};

inline OperatorBounds operator_bounds(const TrigTaylorField& u, const DuhamelOperator& op)
{
    const SolveConfig& c = op.config();
    const SpaceParams& sp = c.space;
    const PhiParams& pp = c.phi;
    const double CU = op.propagator_constant();
    const double nu = e_norm(u, sp, pp);
    const TrigTaylorField Auu = op.Au_dot(u);
    const double nR = op.e_theta() * matrix_e_norm(op.R_field(), sp, pp);
    const double nQ = op.e_quad() * matrix_e_norm(Auu, sp, pp);
    const double nQd = op.e_quad() * matrix_e_norm(dtheta(Auu), sp, pp);
    const double send = op.shape().s().back();
    OperatorBounds b;
    // |n2| <= |n| + |n1|: the |n| part is regularized by beta, the |n1| part lands on d_theta(A_u u)
    b.theta = CU * ((nR + nQ) / sp.beta + send * nQd) * nu;
    TrigTaylorField A = op.A_field();
    A += Auu * cplx(sp.uscale());
    b.x = 0.5 * CU * (pp.R / pp.rho) * matrix_e_norm(A, sp, pp) * nu;
    TrigTaylorField F = op.F_field();
    F += op.Fu_dot(u) * cplx(sp.uscale());
    b.u = CU * sp.tscale() * send * matrix_e_norm(F, sp, pp) * nu;
    return b;
}

// C(U) (beta^{-1} (eps^{-eta/(1+eta)} ||R|| + eps^{1/(1+eta)} ||f||) + R / rho)
inline double contraction_constant(const SolveConfig& c, double normR, double normf, double CU)
{
    const SpaceParams& sp = c.space;
    return CU * ((std::pow(c.eps, -sp.eta / (1 + sp.eta)) * normR + sp.tscale() * normf) / sp.beta + c.phi.R / c.phi.rho);
}

inline TrigTaylorField free_field(const FreeSolution& f, const TrigTaylorField& shape)
{
    TrigTaylorField u = shape.zero_like(2);
    if (f.s.size() != shape.ns()) throw Error(ErrorCode::argument, "free solution grid differs from the field grid");
    for (std::size_t i = 0; i < shape.ns(); ++i)
        for (int c = 0; c < 2; ++c) {
            u.at(c, 1, 0, i) = f.f_plus[i](c);
            u.at(c, -1, 0, i) = std::conj(f.f_plus[i](c));
        }
    return u;
}

struct GrowthRecord {
    double lower_factor = 0;     // min over s in [1, s_end] of |u(s,0,0)| / envelope
    double max_deviation = 0;    // max of max(r, 1/r)
    double smallness_ratio = 0;  // max |u - f|(s,0,0) / (K C(U) e^{s beta} envelope_gamma)
    bool lower_bound_ok = false; // lower_factor >= 1/2
    bool cube_inside = false;    // R eps + rho t_end < 1
    std::vector<double> s;
    std::vector<double> ratio;
};

struct SolveReport {
    bool converged = false;
    int iterations = 0;
    std::vector<double> distances;
    double contraction_measured = 0;
    double residual = 0;
    double K = 0;
    double C_U = 1;
    double norm_R = 0;
    double norm_f = 0;
    double norm_u_minus_f = 0;
    double solution_constant = 0; // ||u - f|| / (K ||f||)
    double s_end = 0;
    GrowthRecord growth;
};

inline double envelope(FlowCase kind, double gamma0, double M, double s)
{
    if (kind == FlowCase::smooth) return std::exp(-M + gamma0 * s * s / 2);
    return std::pow(s, -0.25) * std::exp(-M + gamma0 * (2.0 / 3.0) * std::pow(s, 1.5));
}

// |u(s, 0, 0)|: x = 0 keeps k = 0, theta = 0 sums the modes; max over components
inline double value_at_origin(const TrigTaylorField& u, std::size_t i)
{
    double m = 0;
    for (int c = 0; c < u.ncomp(); ++c) m = std::max(m, std::abs(u.value(c, i, 0.0, 0.0)));
    return m;
}

inline GrowthRecord growth_check(const TrigTaylorField& u, const TrigTaylorField& f, const SolveConfig& c, double K,
                                 double CU)
{
    GrowthRecord g;
    const double M = std::pow(c.eps, -c.delta);
    g.lower_factor = INFINITY;
    g.max_deviation = 1;
    for (std::size_t i = 0; i < u.ns(); ++i) {
        const double s = u.s(i);
        if (s < 1) continue;
        const double env = envelope(c.kind, c.space.gamma0, M, s);
        const double r = value_at_origin(u, i) / env;
        g.s.push_back(s);
        g.ratio.push_back(r);
        g.lower_factor = std::min(g.lower_factor, r);
        g.max_deviation = std::max(g.max_deviation, std::max(r, 1 / r));
        const double diff = value_at_origin(u - f, i);
        const double gs = std::exp(-M + c.space.Gamma(s) - c.space.beta * s);
        const double ref = K * CU * std::exp(s * c.space.beta) * gs;
        if (ref > 0) g.smallness_ratio = std::max(g.smallness_ratio, diff / ref);
    }
    if (g.s.empty()) g.lower_factor = 0;
    g.lower_bound_ok = !g.s.empty() && g.lower_factor >= 0.5;
    const double t_end = c.space.tscale() * u.s().back();
    g.cube_inside = c.phi.R * c.eps + c.phi.rho * t_end < 1;
    return g;
}

inline std::pair<TrigTaylorField, SolveReport> solve_fixed_point(const FreeSolution& fs, const DuhamelOperator& op,
                                                                 const TrigTaylorField* start = nullptr)
{
    const SolveConfig& c = op.config();
    if (!c.feasible && !c.override_feasibility)
        throw Error(ErrorCode::precondition, "parameters fail the planner check; set the override to proceed");
    const SpaceParams& sp = c.space;
    const PhiParams& pp = c.phi;
    SolveReport rep;
    rep.s_end = op.shape().s().back();
    rep.C_U = op.propagator_constant();
    const TrigTaylorField f = free_field(fs, op.shape());
    rep.norm_f = e_norm(f, sp, pp);
    rep.norm_R = matrix_e_norm(op.R_field(), sp, pp);
    rep.K = contraction_constant(c, rep.norm_R, rep.norm_f, rep.C_U);

    TrigTaylorField u = start ? *start : f;
    int growth_run = 0;
    for (int m = 0; m < c.max_iter; ++m) {
        TrigTaylorField next = f + apply_T(u, op);
        const double d = e_norm(next - u, sp, pp);
        rep.distances.push_back(d);
        u = std::move(next);
        rep.iterations = m + 1;
        if (rep.distances.size() >= 2) {
            const double prev = rep.distances[rep.distances.size() - 2];
            if (prev > 0) rep.contraction_measured = std::max(rep.contraction_measured, d / prev);
            growth_run = d > prev ? growth_run + 1 : 0;
            if (growth_run >= 3) {
                std::ostringstream os;
                os << "Picard iteration diverges; distances:";
                for (double x : rep.distances) os << ' ' << x;
                throw Error(ErrorCode::divergence, os.str());
            }
        }
        if (!std::isfinite(d)) throw Error(ErrorCode::divergence, "Picard iteration produced non-finite values");
        if (d < c.tol) {
            rep.converged = true;
            break;
        }
    }
    rep.residual = e_norm(u - f - apply_T(u, op), sp, pp);
    rep.norm_u_minus_f = e_norm(u - f, sp, pp);
    rep.solution_constant = rep.K > 0 && rep.norm_f > 0 ? rep.norm_u_minus_f / (rep.K * rep.norm_f) : 0;
    rep.growth = growth_check(u, f, c, rep.K, rep.C_U);
    return {std::move(u), rep};
}

// log ||u_eps||_{L^2(C_eps)} - alpha log ||h||, u_eps(t, x) = eps^{2/(1+eta)} u(t/eps^{1/(1+eta)}, x, x/eps),
// C_eps = {t_end - eps < t < t_end, |x| < eps}.
struct InstabilityRecord {
    double log_solution = 0;
    double log_datum = 0;
    double log_ratio = 0;
};

inline InstabilityRecord instability_ratio(const TrigTaylorField& u, const SolveReport& rep, const SolveConfig& c,
                                           double log_datum, double alpha = 1, int nt = 17, int nx = 65)
{
    if (!rep.converged) throw Error(ErrorCode::precondition, "instability ratio needs a converged solve");
    const double eps = c.eps;
    const double tau = c.space.tscale();
    const double s_end = u.s().back();
    const double s_lo = std::max(0.0, s_end - eps / tau);
    const double h = u.s(1) - u.s(0);
    auto at = [&](double s, double x) {
        const std::size_t i0 = std::min(static_cast<std::size_t>(s / h), u.ns() - 2);
        const double w = std::clamp((s - u.s(i0)) / h, 0.0, 1.0);
        double sq = 0;
        for (int comp = 0; comp < u.ncomp(); ++comp) {
            const cplx a = u.value(comp, i0, x, x / eps), b = u.value(comp, i0 + 1, x, x / eps);
            sq += std::norm((1 - w) * a + w * b);
        }
        return sq;
    };
    double acc = 0;
    for (int a = 0; a < nt; ++a) {
        const double wt = (a == 0 || a == nt - 1) ? 0.5 : 1.0;
        const double s = s_lo + (s_end - s_lo) * a / (nt - 1);
        for (int b = 0; b < nx; ++b) {
            const double wx = (b == 0 || b == nx - 1) ? 0.5 : 1.0;
            const double x = -eps + 2 * eps * b / (nx - 1);
            acc += wt * wx * at(s, x);
        }
    }
    const double dt = tau * (s_end - s_lo) / (nt - 1), dxs = 2 * eps / (nx - 1);
    InstabilityRecord r;
    r.log_solution = (2 / (1 + c.space.eta)) * std::log(eps) + 0.5 * std::log(acc * dt * dxs);
    r.log_datum = log_datum;
    r.log_ratio = r.log_solution - alpha * log_datum;
    return r;
}

} // namespace gevrey
