#include <catch_amalgamated.hpp>

#include "gevrey/planner.hpp"

using namespace gevrey;
using Catch::Approx;

TEST_CASE("rational parsing and printing")
{
    CHECK(parse_rational("1/5") == rat(1, 5));
    CHECK(parse_rational("0.25") == rat(1, 4));
    CHECK(parse_rational("3") == rat(3));
    CHECK(to_string(rat(4, 31)) == "4/31");
    CHECK(to_string(rat(6, 3)) == "2");
    CHECK_THROWS_AS(parse_rational("a/b"), Error);
    CHECK(parse_rational("-0.05") == rat(-1, 20));
    CHECK(parse_rational("007/010") == rat(7, 10));
    CHECK_THROWS_AS(parse_rational(""), Error);
    CHECK_THROWS_AS(parse_rational("1/0"), Error);
    CHECK_THROWS_AS(parse_rational("0x10"), Error);
}

TEST_CASE("exact Gevrey index thresholds")
{
    CHECK(gevrey_index_limit(PlanCase::smooth) == rat(1, 3));
    CHECK(gevrey_index_limit(PlanCase::airy, 4) == rat(2, 13));
    CHECK(gevrey_index_limit(PlanCase::airy, 2) == 0);
    CHECK(gevrey_index_limit(PlanCase::airy, 4, WhatIf::drop_s2) == rat(2, 13));
    CHECK(gevrey_index_limit(PlanCase::airy, 4, WhatIf::zero_remainder) == rat(4, 21));
    CHECK(gevrey_index_limit(PlanCase::airy, 4, WhatIf::strict_airy) == rat(1, 7));
    CHECK(gevrey_index_limit(PlanCase::smooth, 0, WhatIf::zero_remainder) == 1);
}

TEST_CASE("branch thresholds are reported")
{
    const auto pl = plan(PlanCase::airy, rat(1, 10), 4);
    REQUIRE(pl.branch_threshold);
    CHECK(*pl.branch_threshold == rat(4, 31));
    REQUIRE(pl.tstar_branch_limit);
    CHECK(*pl.tstar_branch_limit == rat(4, 21));
    const auto p6 = plan(PlanCase::airy, rat(1, 20), 6);
    REQUIRE(p6.branch_threshold);
    CHECK(*p6.branch_threshold == rat(4, 49));
}

TEST_CASE("feasibility is monotone in delta")
{
    for (PlanCase c : {PlanCase::smooth, PlanCase::airy}) {
        bool seen_infeasible = false;
        for (int i = 1; i < 60; ++i) {
            const bool f = plan(c, rat(i, 120)).feasible;
            if (!f) seen_infeasible = true;
            CHECK_FALSE((f && seen_infeasible));
        }
        CHECK(seen_infeasible);
    }
    CHECK_FALSE(plan(PlanCase::smooth, rat(1, 3)).feasible);
    CHECK(plan(PlanCase::smooth, rat(1, 3) - rat(1, 1000000)).feasible);
    CHECK_FALSE(plan(PlanCase::airy, rat(2, 13)).feasible);
    CHECK(plan(PlanCase::airy, rat(2, 13) - rat(1, 1000000)).feasible);
}

TEST_CASE("smooth plan at delta = 1/5")
{
    const auto pl = plan(PlanCase::smooth, rat(1, 5));
    REQUIRE(pl.feasible);
    CHECK(pl.beta.a == rat(1, 10));
    CHECK(pl.M_prime.a == rat(-1, 5));
    CHECK(pl.s1.a == rat(-1, 10));
    CHECK(pl.R_inv.a == rat(4, 15));
    CHECK(pl.rho_inv.a == rat(1, 3));
    for (const auto& c : pl.chain) CHECK(c.eval(pl.delta, pl.R_inv.a, pl.rho_inv.a) > 0);
    for (const auto& [name, s] : pl.slack) CHECK(s > 0);
    CHECK_FALSE(pl.domain.empty());
}

TEST_CASE("invalid inputs")
{
    CHECK_THROWS_AS(plan(PlanCase::smooth, rat(3, 2)), Error);
    CHECK_THROWS_AS(plan(PlanCase::smooth, rat(0)), Error);
    CHECK_THROWS_AS(plan(PlanCase::airy, rat(1, 10), 3), Error);
    CHECK_THROWS_AS(constraint_chain(PlanCase::airy, 5), Error);
}

TEST_CASE("much_less ordering")
{
    const ExponentExpr em{0, 0, -1}, one{0, 0, 0}, e1{1, 0, 0}, lg{1, 1, 0};
    CHECK(much_less(em, e1));
    CHECK(much_less(e1, one));
    CHECK_FALSE(much_less(one, e1));
    CHECK(much_less(e1, lg));
    CHECK_FALSE(much_less(e1, e1));
    CHECK((e1 * lg).a == 2);
    CHECK_THROWS_AS(ExponentExpr({0, 0, 1}) * ExponentExpr({0, 0, 1}), Error);
    CHECK(lg.value(1e-2) == Approx(1e-2 * std::log(100.0)));
}

TEST_CASE("growth time")
{
    SpaceParams sp;
    sp.eta = 1;
    sp.Mprime = 2;
    sp.beta = 0;
    CHECK(growth_time(sp).s1 == Approx(2.0).epsilon(1e-14));
    sp.eta = 0.5;
    sp.Mprime = 2.0 / 3.0;
    CHECK(growth_time(sp).s1 == Approx(1.0).epsilon(1e-13));

    for (double eta : {1.0, 0.5, 0.75})
        for (double beta : {0.0, 0.3, 2.0}) {
            sp.eta = eta;
            sp.beta = beta;
            sp.Mprime = 3.7;
            const auto g = growth_time(sp);
            CHECK(sp.Gamma(g.s1) == Approx(3.7).epsilon(1e-12));
        }

    // linear regime: beta dominates
    sp.eta = 1;
    sp.gamma0 = 1e-8;
    sp.beta = 4;
    sp.Mprime = 2;
    CHECK(growth_time(sp).s1 == Approx(0.5).epsilon(1e-6));

    sp.gamma0 = 1;
    sp.beta = 0;
    sp.eps = 1e-4;
    const auto cut = growth_time(sp, 100.0);
    CHECK(cut.s1 == Approx(2.0));
    CHECK(cut.s_final == Approx(1.0).epsilon(1e-12));
    sp.Mprime = 0;
    CHECK_THROWS_AS(growth_time(sp), Error);
}

TEST_CASE("datum Gevrey norm")
{
    const double eps = 1e-4, delta = 0.2;
    const double base = std::log(eps) - std::pow(eps, -delta);
    double prev = -INFINITY;
    for (double c : {1.0, 0.1, 0.01, 0.001}) {
        const double v = datum_gevrey_norm(eps, delta, 0.05, c, 1.0);
        CHECK(v >= base);
        CHECK(v >= prev);
        prev = v;
    }
    CHECK(datum_gevrey_norm(eps, delta, 0.05, 1e6, 1.0) == Approx(base));
    CHECK_THROWS_AS(datum_gevrey_norm(eps, delta, 1.0, 1.0, 1.0), Error);
    CHECK_THROWS_AS(datum_gevrey_norm(eps, delta, 0.5, 0.0, 1.0), Error);
}

TEST_CASE("realized smooth plan")
{
    const auto pl = plan(PlanCase::smooth, rat(1, 5));
    const auto rp = realize(pl, 1e-4);
    CHECK(rp.M == Approx(std::pow(1e-4, -0.2)));
    CHECK(rp.space.Mprime == Approx(std::max(rp.M - std::log(1e4), rp.M / 2)));
    CHECK(rp.c_rho >= 1);
    CHECK(rp.space.s_final <= rp.space.s1);
    CHECK(rp.space.s_final * rp.space.tscale() * rp.rho < 1);
    CHECK(rp.space.Gamma(rp.space.s1) == Approx(rp.space.Mprime).epsilon(1e-12));
    CHECK_THROWS_AS(realize(plan(PlanCase::smooth, rat(1, 2)), 1e-4), Error);
}
