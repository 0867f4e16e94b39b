#include <catch_amalgamated.hpp>

#include <random>

#include "gevrey/series.hpp"

using namespace gevrey;
using Catch::Approx;

namespace {

TaylorSeries random_series(std::mt19937_64& rng, int d, Truncation tr)
{
    std::uniform_real_distribution<double> u(-1, 1);
    TaylorSeries s(d, tr);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = u(rng);
    return s;
}

} // namespace

TEST_CASE("constants and variables")
{
    Truncation tr{3, 3, 3};
    auto c = TaylorSeries::constant(1, tr, 2.5);
    CHECK(c.constant_term() == 2.5);
    CHECK(c.nvars() == 3);
    auto x = TaylorSeries::variable(1, tr, 1);
    CHECK(x.coef({0, 1, 0}) == 1.0);
    CHECK(x.eval(0.3, {0.7}, {0.1}) == Approx(0.7));
    CHECK_THROWS_AS(TaylorSeries::variable(1, tr, 3), Error);
}

TEST_CASE("products stay inside the truncation box")
{
    Truncation tr{2, 2, 2};
    auto t = TaylorSeries::variable(1, tr, 0);
    auto p = t.pow(3);
    CHECK(p.is_zero());
    auto q = (t + 1.0).pow(2);
    CHECK(q.coef({0, 0, 0}) == 1.0);
    CHECK(q.coef({1, 0, 0}) == 2.0);
    CHECK(q.coef({2, 0, 0}) == 1.0);
    CHECK_THROWS_AS(q.index({3, 0, 0}), Error);
}

TEST_CASE("ring identities on random series")
{
    std::mt19937_64 rng(11);
    Truncation tr{3, 2, 2};
    for (int rep = 0; rep < 20; ++rep) {
        auto a = random_series(rng, 1, tr), b = random_series(rng, 1, tr), c = random_series(rng, 1, tr);
        CHECK((a * b).max_abs_diff(b * a, 99) < 1e-14);
        CHECK(((a * b) * c).max_abs_diff(a * (b * c), 99) < 1e-12);
        CHECK((a * (b + c)).max_abs_diff(a * b + a * c, 99) < 1e-13);
    }
}

TEST_CASE("evaluation of truncated products matches pointwise products of the polynomials")
{
    Truncation tr{6, 6, 6};
    auto t = TaylorSeries::variable(1, tr, 0);
    auto x = TaylorSeries::variable(1, tr, 1);
    auto a = t * 2.0 + x * x - 1.0;
    auto b = t * x + 3.0;
    const double tv = 0.3, xv = -0.4;
    CHECK((a * b).eval(tv, {xv}, {0.0}) == Approx((2 * tv + xv * xv - 1) * (tv * xv + 3)).epsilon(1e-14));
}

TEST_CASE("derivative and shifts")
{
    Truncation tr{4, 4, 4};
    auto t = TaylorSeries::variable(1, tr, 0);
    auto x = TaylorSeries::variable(1, tr, 1);
    auto s = t.pow(3) * x + x * x;
    auto dt = s.deriv(0);
    CHECK(dt.coef({2, 1, 0}) == 3.0);
    CHECK(dt.coef({0, 2, 0}) == 0.0);
    auto up = x.shift_up(0, 2);
    CHECK(up.coef({2, 1, 0}) == 1.0);
    double low = 0;
    auto down = (s + 5.0).shift_down(0, 3, &low);
    CHECK(down.coef({0, 1, 0}) == 1.0);
    CHECK(low > 0);
    CHECK(s.slice_t(3).coef({0, 1, 0}) == 1.0);
    CHECK(s.depends_on(1));
    CHECK_FALSE(x.depends_on(0));
    CHECK(s.restrict_zero(1).is_zero());
}

TEST_CASE("inverse and square root")
{
    Truncation tr{5, 3, 3};
    auto t = TaylorSeries::variable(1, tr, 0);
    auto x = TaylorSeries::variable(1, tr, 1);
    auto a = t * 0.5 + x * 0.25 + 2.0;
    auto inv = a.inverse();
    CHECK((a * inv - a.constant_like(1.0)).max_abs() < 1e-13);
    auto sq = a.sqrt();
    CHECK((sq * sq - a).max_abs() < 1e-13);
    CHECK_THROWS_AS(t.inverse(), Error);
    CHECK_THROWS_AS((t - 1.0).sqrt(), Error);
}

TEST_CASE("substitution and synthetic division")
{
    Truncation tr{6, 6, 0};
    auto t = TaylorSeries::variable(1, tr, 0, 0);
    auto x = TaylorSeries::variable(1, tr, 1, 0);
    auto tau = x.pow(4);
    auto p = (t - tau) * (t + 1.0);
    TaylorSeries rem;
    auto q = p.divide_t_minus(tau, &rem);
    CHECK(rem.max_abs() < 1e-14);
    CHECK((q - (t + 1.0)).max_abs() < 1e-14);
    CHECK(p.substitute_t(tau).max_abs() < 1e-14);
}
