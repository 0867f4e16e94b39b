#include <catch_amalgamated.hpp>

#include <random>

#include "gevrey/majorant.hpp"

using namespace gevrey;
using Catch::Approx;

namespace {

SpaceParams space()
{
    SpaceParams sp;
    sp.Mprime = 3.0;
    sp.beta = 0.4;
    sp.eps = 1e-4;
    sp.s1 = sp.s_final = 2.0;
    return sp;
}

std::vector<double> grid(int S, double end)
{
    std::vector<double> g;
    for (int i = 0; i < S; ++i) g.push_back(end * i / (S - 1));
    return g;
}

// coefficients of modulus at most the weight, so the E_s norm is at most 1
TrigTaylorField random_unit_field(std::mt19937_64& rng, int ncomp, const SpaceParams& sp, const PhiParams& pp,
                                  double fill = 0.7)
{
    std::uniform_real_distribution<double> u(0, 1);
    TrigTaylorField f(ncomp, 4, 6, grid(9, sp.s_final));
    for (int c = 0; c < ncomp; ++c)
        for (int n = -f.nmax(); n <= f.nmax(); ++n)
            for (int k = 0; k <= f.K(); ++k)
                for (std::size_t i = 0; i < f.ns(); ++i) {
                    if (u(rng) > fill) continue;
                    const double an = std::abs(n);
                    const double w = pp.c1 / (an * an + 1) * std::exp(-(sp.Mprime - sp.Gamma(f.s(i))) * an) *
                                     phi_coeff(k, sp.tscale() * f.s(i), pp);
                    f.at(c, n, k, i) = std::polar(u(rng) * w, 2 * std::numbers::pi * u(rng));
                }
    return f;
}

} // namespace

TEST_CASE("phi_constant values")
{
    CHECK(phi_constant(1) == Approx(0.5).epsilon(1e-13));
    CHECK(phi_constant(2) == Approx(4.0 / 13.0).epsilon(1e-13));
    CHECK(phi_constant(3) == Approx(0.25).epsilon(1e-13));
    CHECK(std::abs(phi_constant(200) - phi_constant(100)) < 1e-6);
    CHECK(phi_constant(200) == Approx(0.2113350648835091).epsilon(1e-13));
    CHECK(phi_binding_order(200) == 9);
    for (int K = 1; K < 40; ++K) CHECK(phi_constant(K + 1) <= phi_constant(K));
    CHECK_THROWS_AS(phi_constant(0), Error);
    CHECK(default_c1() == Approx(0.15856162559495787).epsilon(1e-14));
}

TEST_CASE("phi squared is majorized by phi up to order 200")
{
    const double c0 = phi_constant(200);
    const auto p = phi_series(c0, 200);
    CHECK(majorizes(p * p, p));
    const auto q = phi_series(c0 * 1.001, 200);
    CHECK_FALSE(majorizes(q * q, q));
}

TEST_CASE("phi coefficients")
{
    PhiParams pp{0.25, 0.15, 2.0, 3.0, 6};
    // t = 0 keeps only p = 0
    CHECK(phi_coeff(0, 0.0, pp) == Approx(0.25));
    CHECK(phi_coeff(2, 0.0, pp) == Approx(4 * 0.25 / 5));
    // rho t = 0.3, k = 0: sum_p 0.25/(p^2+1) 0.3^p
    double ref = 0;
    for (int p = 0; p < 80; ++p) ref += 0.25 / (p * p + 1.0) * std::pow(0.3, p);
    CHECK(phi_coeff(0, 0.1, pp) == Approx(ref).epsilon(1e-13));
    // multi-index form folds the multinomial in
    CHECK(phi_coeff(std::vector<int>{1, 1}, 0.0, pp) == Approx(2 * 4 * 0.25 / 5));
    CHECK_THROWS_AS(phi_coeff(1, 0.4, pp), Error);
    CHECK_THROWS_AS(phi_coeff(-1, 0.1, pp), Error);
    for (int k = 0; k < 10; ++k) CHECK(phi_coeff(k, 0.2, pp) >= phi_coeff(k, 0.1, pp));
}

TEST_CASE("majorizes")
{
    Truncation tr{2, 2, 2};
    auto t = TaylorSeries::variable(1, tr, 0);
    auto a = t * -0.5 + 0.2;
    auto b = t * 0.5 + 0.3;
    CHECK(majorizes(a, b));
    CHECK_FALSE(majorizes(b * 2.0, b));
    CHECK_THROWS_AS(majorizes(a, TaylorSeries::variable(1, Truncation{3, 2, 2}, 0)), Error);
}

TEST_CASE("E_s norm of a single weighted coefficient")
{
    const auto sp = space();
    const auto pp = PhiParams::make(10.0, 30.0, 6);
    TrigTaylorField f(1, 4, 6, grid(5, 2.0));
    const std::size_t i = 3;
    const double w = pp.c1 / 5 * std::exp(-(sp.Mprime - sp.Gamma(f.s(i))) * 2) * phi_coeff(3, sp.tscale() * f.s(i), pp);
    f.at(0, -2, 3, i) = cplx(0, 2.5 * w);
    CHECK(es_norm(f, i, sp, pp) == Approx(2.5).epsilon(1e-12));
    CHECK(es_norm(f, 0, sp, pp) == 0.0);
    CHECK(e_norm(f * cplx(-3.0), sp, pp) == Approx(7.5).epsilon(1e-12));
    CHECK_THROWS_AS(es_norm(f, 9, sp, pp), Error);
}

TEST_CASE("submultiplicativity on seeded random pairs")
{
    const auto sp = space();
    const auto pp = PhiParams::make(10.0, 30.0, 6);
    std::mt19937_64 rng(2024);
    int violations = 0;
    for (int rep = 0; rep < 100; ++rep) {
        auto a = random_unit_field(rng, 1, sp, pp), b = random_unit_field(rng, 1, sp, pp);
        const auto na = es_norms(a, sp, pp), nb = es_norms(b, sp, pp);
        const auto nab = es_norms(field_product(a, b), sp, pp);
        for (std::size_t i = 0; i < na.size(); ++i)
            if (nab[i] > na[i] * nb[i] * (1 + 1e-12)) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("field algebra")
{
    TrigTaylorField a(1, 2, 3, {0.0, 1.0}), b(1, 2, 3, {0.0, 1.0});
    a.at(0, 1, 1, 1) = 2.0;
    b.at(0, -1, 2, 1) = 3.0;
    b.at(0, 2, 3, 1) = 1.0;
    auto p = field_product(a, b);
    CHECK(p.at(0, 0, 3, 1) == cplx(6.0));
    CHECK(p.max_abs() == 6.0); // (n=3, k=4) falls outside the box
    CHECK(dtheta(a).at(0, 1, 1, 1) == cplx(0, 2));
    CHECK(dx(a).at(0, 1, 0, 1) == cplx(2.0));
    CHECK(a.value(0, 1, 0.5, 0.0) == cplx(1.0));

    TrigTaylorField M(4, 2, 3, {0.0, 1.0}), v(2, 2, 3, {0.0, 1.0});
    for (std::size_t i = 0; i < 2; ++i) {
        M.at(1, 0, 0, i) = 1.0; // [[0, 1], [0, 0]]
        v.at(1, 0, 0, i) = 4.0;
    }
    auto mv = matvec(M, v);
    CHECK(mv.at(0, 0, 0, 1) == cplx(4.0));
    CHECK(mv.at(1, 0, 0, 1) == cplx(0.0));

    TrigTaylorField r(1, 1, 0, {0.0});
    r.at(0, 1, 0, 0) = cplx(1, 2);
    CHECK_FALSE(r.is_real());
    r.at(0, -1, 0, 0) = cplx(1, -2);
    CHECK(r.is_real());
    CHECK_THROWS_AS(a += TrigTaylorField(1, 1, 3, {0.0, 1.0}), Error);
}

TEST_CASE("analytic composition")
{
    auto sp = space();
    const auto pp = PhiParams::make(10.0, 30.0, 6);
    Truncation tr{3, 3, 3};
    const int d = 1, nz = 2;
    auto one = TaylorSeries::constant(d, tr, 1.0, nz);
    auto zero = one.zero_like();
    auto u1 = TaylorSeries::variable(d, tr, 2, nz);
    auto t = TaylorSeries::variable(d, tr, 0, nz);
    std::mt19937_64 rng(9);
    auto u = random_unit_field(rng, 2, sp, pp);

    auto c = compose_analytic(TaylorSymbol(one * 2.0, zero, zero, one * -1.0), u, sp, pp);
    CHECK(c.value.at(0, 0, 0, 4) == cplx(2.0));
    CHECK(c.value.at(3, 0, 0, 4) == cplx(-1.0));
    CHECK(c.bound >= matrix_e_norm(c.value, sp, pp) * (1 - 1e-12));

    // H = u1 + t: value eps^{2/(1+eta)} u1 + eps^{1/(1+eta)} s
    auto lin = compose_analytic(TaylorSymbol(u1 + t, zero, zero, zero), u, sp, pp);
    for (std::size_t i = 0; i < u.ns(); ++i) {
        CHECK(std::abs(lin.value.at(0, 1, 2, i) - sp.uscale() * u.at(0, 1, 2, i)) < 1e-18);
        CHECK(std::abs(lin.value.at(0, 0, 0, i) - (sp.uscale() * u.at(0, 0, 0, i) + sp.tscale() * u.s(i))) < 1e-15);
    }
    CHECK(lin.bound >= matrix_e_norm(lin.value, sp, pp) * (1 - 1e-12));

    auto quad = compose_analytic(TaylorSymbol(u1 * u1 * 5.0, zero, zero, t * u1), u * cplx(1e6), sp, pp);
    CHECK(quad.bound >= matrix_e_norm(quad.value, sp, pp) * (1 - 1e-12));

    CHECK_THROWS_AS(compose_analytic(TaylorSymbol(u1.pow(3), zero, zero, zero), u, sp, pp, 2), Error);
    CHECK_THROWS_AS(compose_analytic(TaylorSymbol::identity(1, tr), u, sp, pp), Error);
}

TEST_CASE("measured propagator constant")
{
    CHECK(propagator_constant(FlowCase::smooth, 2.0, 1e-4, {0.0, 1.0}, 4) == 2.0);
    CHECK(propagator_constant(FlowCase::smooth, 0.25, 1e-4, {0.0, 1.0}, 4) == 4.0);
    const double ca = propagator_constant(FlowCase::airy, 1.0, 1e-3, grid(9, 4.0), 2);
    CHECK(ca >= 1.0);
    CHECK(std::isfinite(ca));
    CHECK(ca < 10.0);
}
