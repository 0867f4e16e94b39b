#include <catch_amalgamated.hpp>

#include <random>

#include "gevrey/fixedpoint.hpp"

using namespace gevrey;
using Catch::Approx;

namespace {

SolveConfig config(int S = 65, double eps = 1e-4)
{
    return make_solve_config(plan(PlanCase::smooth, rat(1, 5)), eps, 1.0, 4, 6, S);
}

TrigTaylorField random_unit_field(std::mt19937_64& rng, const TrigTaylorField& shape, const SolveConfig& c)
{
    std::uniform_real_distribution<double> u(0, 1);
    const SpaceParams& sp = c.space;
    TrigTaylorField f = shape.zero_like(2);
    for (int comp = 0; comp < 2; ++comp)
        for (int n = -f.nmax(); n <= f.nmax(); ++n)
            for (int k = 0; k <= f.K(); ++k)
                for (std::size_t i = 0; i < f.ns(); ++i) {
                    const double an = std::abs(n);
                    const double w = c.phi.c1 / (an * an + 1) * std::exp(-(sp.Mprime - sp.Gamma(f.s(i))) * an) *
                                     phi_coeff(k, sp.tscale() * f.s(i), c.phi);
                    f.at(comp, n, k, i) = std::polar(u(rng) * w, 2 * std::numbers::pi * u(rng));
                }
    return f;
}

QuasilinearSystem pure_normal_form()
{
    return QuasilinearSystem::from_symbol(leading_symbol(FlowCase::smooth, 1.0, 1, Truncation{}));
}

} // namespace

TEST_CASE("configuration from the planner")
{
    const auto c = config();
    CHECK(c.feasible);
    CHECK(c.kind == FlowCase::smooth);
    CHECK(c.s_end() <= c.space.s_final);
    CHECK(c.s_end() * c.space.tscale() * c.phi.rho < 1);
    const auto g = c.grid();
    CHECK(g.size() == 65);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == Approx(c.s_end()));
}

TEST_CASE("zero field maps to zero")
{
    const auto c = config();
    DuhamelOperator op(toy_smooth_system(), c);
    const auto z = op.shape().zero_like(2);
    CHECK(apply_T(z, op).max_abs() == 0.0);
}

TEST_CASE("Duhamel quadrature on the zero mode")
{
    const auto c = config(33);
    DuhamelOperator op(pure_normal_form(), c);
    TrigTaylorField G = op.shape().zero_like(2);
    for (std::size_t i = 0; i < G.ns(); ++i) {
        G.at(0, 0, 0, i) = 1.0;
        G.at(1, 0, 2, i) = G.s(i) * G.s(i);
    }
    const auto out = op.integrate(G);
    for (std::size_t i = 0; i < G.ns(); ++i) {
        const double s = G.s(i);
        CHECK(std::abs(out.at(0, 0, 0, i) - s) < 1e-13);
        CHECK(std::abs(out.at(1, 0, 2, i) - s * s * s / 3) < 1e-13);
    }
    CHECK_THROWS_AS(op.integrate(op.shape().zero_like(1)), Error);
}

TEST_CASE("Duhamel quadrature on a rotating mode")
{
    // n = 1 with the smooth flow: int_0^s U(s', s) e_1 ds' against the ODE-free closed form
    const auto c = config(129);
    DuhamelOperator op(pure_normal_form(), c);
    TrigTaylorField G = op.shape().zero_like(2);
    for (std::size_t i = 0; i < G.ns(); ++i) G.at(0, 1, 0, i) = 1.0;
    const auto out = op.integrate(G);
    // reference by fine trapezoid through the closed-form flow
    const std::size_t i = G.ns() - 1;
    const double s = G.s(i);
    cplx ref0 = 0, ref1 = 0;
    const int m = 20000;
    for (int j = 0; j <= m; ++j) {
        const double sp = s * j / m, w = (j == 0 || j == m) ? 0.5 : 1.0;
        const CMat2 U = smooth_mode_propagator(1, 1.0, sp, s).value();
        ref0 += w * U(0, 0);
        ref1 += w * U(1, 0);
    }
    ref0 *= s / m;
    ref1 *= s / m;
    CHECK(std::abs(out.at(0, 1, 0, i) - ref0) < 1e-6 * std::abs(ref0));
    CHECK(std::abs(out.at(1, 1, 0, i) - ref1) < 1e-6 * std::abs(ref1));
}

TEST_CASE("unperturbed system returns the free solution")
{
    const auto c = config();
    DuhamelOperator op(pure_normal_form(), c);
    const auto fs = free_solution(FlowCase::smooth, c.eps, c.delta, 1.0, c.grid());
    auto [u, rep] = solve_fixed_point(fs, op);
    CHECK(rep.converged);
    CHECK(rep.iterations == 1);
    CHECK(rep.norm_R == 0.0);
    CHECK((u - free_field(fs, op.shape())).max_abs() == 0.0);
}

TEST_CASE("toy system converges from two starts to the same field")
{
    const auto c = config(129);
    DuhamelOperator op(toy_smooth_system(), c);
    const auto fs = free_solution(FlowCase::smooth, c.eps, c.delta, 1.0, c.grid());
    auto [u, rep] = solve_fixed_point(fs, op);
    REQUIRE(rep.converged);
    CHECK(rep.iterations <= 30);
    CHECK(rep.residual <= 1e-8);
    CHECK(rep.contraction_measured <= rep.K);
    CHECK(rep.norm_u_minus_f <= 10 * rep.K * rep.norm_f);
    CHECK(u.is_real(1e-12 * u.max_abs()));
    const auto zero = op.shape().zero_like(2);
    auto [v, rep2] = solve_fixed_point(fs, op, &zero);
    REQUIRE(rep2.converged);
    CHECK(e_norm(u - v, c.space, c.phi) < 1e-9);
}

TEST_CASE("operator bounds hold on random fields")
{
    const auto c = config();
    DuhamelOperator op(toy_smooth_system(), c);
    std::mt19937_64 rng(41);
    for (int rep = 0; rep < 10; ++rep) {
        const auto u = random_unit_field(rng, op.shape(), c);
        const auto b = operator_bounds(u, op);
        CHECK(e_norm(apply_T_theta(u, op), c.space, c.phi) <= b.theta);
        CHECK(e_norm(apply_T_x(u, op), c.space, c.phi) <= b.x);
        CHECK(e_norm(apply_T_u(u, op), c.space, c.phi) <= b.u);
    }
}

TEST_CASE("the operator is linear without the quadratic couplings")
{
    const auto c = config();
    auto sys = toy_smooth_system();
    for (auto& a : sys.A_u) a = TaylorSymbol::constant({}, 1, sys.A.truncation());
    for (auto& f : sys.F_u) f = TaylorSymbol::constant({}, 1, sys.A.truncation());
    sys.F = TaylorSymbol::constant({{{0.0, 0.3}, {0.2, 0.0}}}, 1, sys.A.truncation());
    DuhamelOperator op(sys, c);
    std::mt19937_64 rng(8);
    const auto a = random_unit_field(rng, op.shape(), c), b = random_unit_field(rng, op.shape(), c);
    const auto lhs = apply_T(a + b * cplx(2.0), op);
    const auto rhs = apply_T(a, op) + apply_T(b, op) * cplx(2.0);
    CHECK(e_norm(lhs - rhs, c.space, c.phi) <= 1e-12 * e_norm(lhs, c.space, c.phi));
}

TEST_CASE("preconditions")
{
    auto c = config();
    c.feasible = false;
    DuhamelOperator op(toy_smooth_system(), c);
    const auto fs = free_solution(FlowCase::smooth, c.eps, c.delta, 1.0, c.grid());
    try {
        solve_fixed_point(fs, op);
        FAIL("expected a precondition failure");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::precondition);
    }
    c.override_feasibility = true;
    DuhamelOperator op2(toy_smooth_system(), c);
    auto [u, rep] = solve_fixed_point(fs, op2);
    CHECK(rep.converged);

    SolveReport unconverged;
    CHECK_THROWS_AS(instability_ratio(u, unconverged, c, 0.0), Error);

    auto small = config();
    small.S = 4;
    CHECK_THROWS_AS(DuhamelOperator(toy_smooth_system(), small), Error);
}

TEST_CASE("instability ratio is finite for sigma above delta")
{
    const auto c = config();
    DuhamelOperator op(toy_smooth_system(), c);
    const auto fs = free_solution(FlowCase::smooth, c.eps, c.delta, 1.0, c.grid());
    auto [u, rep] = solve_fixed_point(fs, op);
    REQUIRE(rep.converged);
    const double ld = datum_gevrey_norm(c.eps, c.delta, 0.5, 1.0, 1.0);
    const auto r = instability_ratio(u, rep, c, ld);
    CHECK(std::isfinite(r.log_ratio));
    CHECK(r.log_ratio == Approx(r.log_solution - ld));
}
