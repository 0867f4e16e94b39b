#include <catch_amalgamated.hpp>

#include <random>

#include "gevrey/ode.hpp"
#include "gevrey/propagator.hpp"

using namespace gevrey;
using Catch::Approx;

namespace {

double rel(const CMat2& a, const CMat2& b) { return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff(); }

CMat2 ode(const ModePropagator& U, double s0, double s1)
{
    return integrate_mode_ode([&](double s) { return U.coefficient(s); }, s0, s1, 1e-11);
}

std::vector<double> linspace(double a, double b, int n)
{
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1));
    return v;
}

} // namespace

TEST_CASE("identity at equal times")
{
    for (int n : {-3, 1, 4}) {
        CHECK(rel(smooth_mode_propagator(n, 1.0, 1.5, 1.5).value(), CMat2::Identity()) < 1e-15);
        CHECK(rel(airy_mode_propagator(n, 1.0, 1e-3, 2.5, 2.5).value(), CMat2::Identity()) < 1e-10);
    }
    CHECK(rel(ModePropagator{FlowCase::airy, 0, 1.0, 1e-3}(0.0, 3.0).value(), CMat2::Identity()) == 0);
}

TEST_CASE("smooth closed form at n = 1, s = 1")
{
    const CMat2 m = smooth_mode_propagator(1, 1.0, 0.0, 1.0).value();
    const cplx I(0, 1);
    CHECK(std::abs(m(0, 0) - 1.1276259652063807) < 1e-14);
    CHECK(std::abs(m(0, 1) - 0.5210953054937474 * I) < 1e-14);
    CHECK(std::abs(m(1, 0) + 0.5210953054937474 * I) < 1e-14);
    CHECK(std::abs(m(1, 1) - 1.1276259652063807) < 1e-14);
    CHECK_THROWS_AS(smooth_mode_propagator(1, 1.0, 2.0, 1.0), Error);
}

TEST_CASE("ODE oracle")
{
    const CMat2 zero = CMat2::Zero();
    CHECK(rel(integrate_mode_ode([&](double) { return zero; }, 0.0, 3.0), CMat2::Identity()) == 0);
    ModePropagator U{FlowCase::smooth, 3, 1.0, 0.5};
    for (double s : {0.5, 1.5, 3.0}) CHECK(rel(U(0.0, s).value(), ode(U, 0.0, s)) < 1e-8);
    ModePropagator A{FlowCase::airy, 1, 1.0, 1e-3};
    CHECK(rel(A(0.0, 5.0).value(), ode(A, 0.0, 5.0)) < 1e-6);
    ModePropagator B{FlowCase::airy, -3, 0.7, 1e-2};
    CHECK(rel(B(1.0, 4.0).value(), ode(B, 1.0, 4.0)) < 1e-6);
}

TEST_CASE("cocycle on random triples")
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0, 6);
    for (FlowCase k : {FlowCase::smooth, FlowCase::airy})
        for (int rep = 0; rep < 20; ++rep) {
            double a = u(rng), b = u(rng), c = u(rng);
            if (k == FlowCase::smooth) {
                a /= 2;
                b /= 2;
                c /= 2;
            }
            std::array<double, 3> v{a, b, c};
            std::sort(v.begin(), v.end());
            ModePropagator U{k, rep % 2 ? 2 : -1, 1.0, 1e-3};
            const CMat2 lhs = U(v[0], v[2]).value();
            const CMat2 rhs = U(v[1], v[2]).value() * U(v[0], v[1]).value();
            CHECK(rel(rhs, lhs) < 1e-8);
        }
}

TEST_CASE("determinant and conjugation symmetry")
{
    for (double s : {0.0, 1.0, 3.0, 8.0}) {
        ModePropagator A{FlowCase::airy, 3, 1.0, 1e-3};
        CHECK(std::abs(flow_determinant(A, 0.0, s) - 1.0) < 1e-8);
        ModePropagator S{FlowCase::smooth, 2, 1.0, 1e-3};
        if (s <= 3) CHECK(std::abs(flow_determinant(S, 0.0, s) - 1.0) < 1e-8);
        for (int n : {1, 2}) {
            ModePropagator P{FlowCase::airy, n, 1.0, 1e-3}, M{FlowCase::airy, -n, 1.0, 1e-3};
            CHECK(rel(M(0.5, s + 0.5).value(), CMat2(P(0.5, s + 0.5).value().conjugate())) < 1e-10);
        }
    }
}

TEST_CASE("smooth growth bound")
{
    for (int n = -8; n <= 8; ++n) {
        if (n == 0) continue;
        for (double s = 0.25; s <= 2.5; s += 0.25) {
            const ScaledMatrix m = smooth_mode_propagator(n, 1.0, 0.5, s + 0.5);
            const double ex = std::abs(n) * ((s + 0.5) * (s + 0.5) - 0.25) / 2;
            CHECK(m.log_norm() - ex <= std::log(2.0));
        }
    }
}

TEST_CASE("Airy eigen-relation")
{
    const double eps = 1e-3;
    const AiryScale sc(1, 1.0);
    const cplx I(0, 1);
    const double e13 = std::cbrt(eps);
    ModePropagator U{FlowCase::airy, 1, 1.0, eps};
    for (double s : {1.0, 4.0, 9.0}) {
        CVec2 v0(airy_n(sc, 0.0), -I * e13 * jroot * airy_n_deriv(sc, 0.0));
        CVec2 vs(airy_n(sc, jroot * s), -I * e13 * jroot * airy_n_deriv(sc, jroot * s));
        const CVec2 got = U(0.0, s).value() * v0;
        CHECK((got - vs).cwiseAbs().maxCoeff() / vs.cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("Gronwall inflation of a drifted flow")
{
    const double eps = 1e-4, c = 2.0;
    ModePropagator U{FlowCase::smooth, 2, 1.0, eps};
    CMat2 drift;
    drift << 0.6, 0.8, -0.8, 0.6;
    auto coef = [&](double s) -> CMat2 { return U.coefficient(s) + std::sqrt(eps) * c * drift; };
    for (double s : {1.0, 2.0, 3.0}) {
        const CMat2 V = integrate_mode_ode(coef, 0.0, s, 1e-11);
        const double bound = U.exponent(0.0, s) + std::sqrt(eps) * c * s;
        CHECK(std::log(V.cwiseAbs().maxCoeff()) <= bound + 1e-9);
    }
}

TEST_CASE("growth envelope fits")
{
    ModePropagator S{FlowCase::smooth, 2, 1.0, 1e-3};
    auto fs = growth_envelope(sample_growth(S, 0.0, linspace(0, 5, 121)));
    CHECK(fs.rate == Approx(1.0).margin(0.01));
    CHECK(std::abs(fs.p) < 0.05);

    ModePropagator A{FlowCase::airy, 1, 1.0, 1e-6};
    auto fa = growth_envelope(sample_growth(A, 0.0, linspace(0, 30, 121), 0));
    CHECK(fa.rate == Approx(1.0).margin(0.01));
    CHECK(fa.p == Approx(-0.25).margin(0.05));

    GrowthTrace syn{FlowCase::airy, 3, 0.5, {}};
    for (double s : linspace(2.5, 20, 40))
        syn.samples.push_back({0.0, s, std::log(1.7) - 0.3 * std::log(s) + 1.0 * 3 * gamma_sharp_integral(FlowCase::airy, 0.5, 0.0, s)});
    auto fz = growth_envelope(syn);
    CHECK(fz.C == Approx(1.7).epsilon(1e-9));
    CHECK(fz.p == Approx(-0.3).margin(1e-9));
    CHECK(fz.rate == Approx(1.0).epsilon(1e-9));

    GrowthTrace few{FlowCase::smooth, 1, 1.0, {{0.0, 3.0, 1.0}}};
    CHECK_THROWS_AS(growth_envelope(few), Error);
}

TEST_CASE("free solutions")
{
    const double eps = 1e-4, delta = 0.2;
    const double M = std::pow(eps, -delta);
    auto grid = linspace(0, 2.145, 101);
    auto f = free_solution(FlowCase::smooth, eps, delta, 1.0, grid);
    CHECK(f.M == Approx(M));
    CHECK(f.value(0, 0.0).cwiseAbs().maxCoeff() == Approx(2 * std::exp(-M)).epsilon(1e-12));
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < 1) continue;
        const double v = std::log(f.amplitude(i)) + M - grid[i] * grid[i] / 2;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(hi - lo < 0.2);

    auto ga = linspace(0, 30, 301);
    auto fa = free_solution(FlowCase::airy, 1e-6, 0.1, 1.0, ga);
    GrowthTrace tr{FlowCase::airy, 1, 1.0, {}};
    for (std::size_t i = 0; i < ga.size(); ++i) tr.samples.push_back({0.0, ga[i], std::log(fa.amplitude(i)) + fa.M});
    auto fit = growth_envelope(tr);
    CHECK(fit.p == Approx(-0.25).margin(0.05));
    CHECK(fit.rate == Approx(1.0).margin(0.01));
    CHECK_THROWS_AS(free_solution(FlowCase::smooth, 2.0, 0.2, 1.0, grid), Error);
}
