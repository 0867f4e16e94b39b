#include <catch_amalgamated.hpp>

#include <filesystem>

#include "gevrey/fixedpoint.hpp"
#include "gevrey/io.hpp"

using namespace gevrey;
using Catch::Approx;

TEST_CASE("system JSON round trip")
{
    const auto s = toy_smooth_system();
    const auto j = io::system_to_json(s);
    const auto back = io::system_from_json(j);
    CHECK((back.A - s.A).is_zero(0));
    CHECK((back.F - s.F).is_zero(0));
    for (int i = 0; i < 2; ++i) {
        CHECK((back.A_u[i] - s.A_u[i]).is_zero(0));
        CHECK((back.F_u[i] - s.F_u[i]).is_zero(0));
    }
    CHECK(back.has_nonlinearity);
    CHECK(io::system_to_json(back).dump() == j.dump());

    const auto path = (std::filesystem::temp_directory_path() / "gevrey_io_roundtrip.json").string();
    io::write_json(path, j);
    CHECK(io::system_to_json(io::load_system(path)).dump() == j.dump());
    std::filesystem::remove(path);
}

TEST_CASE("series JSON is sparse and validated")
{
    Truncation tr{2, 2, 2};
    auto t = TaylorSeries::variable(1, tr, 0);
    const auto j = io::series_to_json(t * 3.0 + 1.0);
    CHECK(j.size() == 2);
    CHECK(io::series_from_json(j, 1, tr).coef({1, 0, 0}) == 3.0);
    io::json bad = io::json::array({{{"exponents", {5, 0, 0}}, {"value", 1.0}}});
    CHECK_THROWS_AS(io::series_from_json(bad, 1, tr), Error);
    io::json short_e = io::json::array({{{"exponents", {1, 0}}, {"value", 1.0}}});
    CHECK_THROWS_AS(io::series_from_json(short_e, 1, tr), Error);
    io::json missing = io::json::array({{{"value", 1.0}}});
    CHECK_THROWS_AS(io::series_from_json(missing, 1, tr), Error);
}

TEST_CASE("malformed systems are rejected")
{
    CHECK_THROWS_AS(io::system_from_json(io::json::object()), Error);
    CHECK_THROWS_AS(io::system_from_json(io::json{{"d", 0}, {"A", io::json::object()}}), Error);
    auto j = io::system_to_json(toy_smooth_system());
    j["A_u"].erase(0);
    CHECK_THROWS_AS(io::system_from_json(j), Error);
    CHECK_THROWS_AS(io::read_json("/nonexistent/system.json"), Error);
}

TEST_CASE("CSV quoting and line endings")
{
    io::CsvWriter w({"name", "value"});
    w.row(std::vector<std::string>{"a,b", "say \"hi\""});
    w.row(std::vector<double>{0.1, -2.0});
    CHECK(w.str() == "name,value\r\n\"a,b\",\"say \"\"hi\"\"\"\r\n0.10000000000000001,-2\r\n");
    CHECK_THROWS_AS(w.row(std::vector<std::string>{"only one"}), Error);
    CHECK(io::format_double(1e300) == "1.0000000000000001e+300");
}

TEST_CASE("field snapshot")
{
    TrigTaylorField u(1, 1, 1, {0.0, 0.5});
    u.at(0, -1, 1, 1) = cplx(0.25, -1.5);
    CHECK(io::field_to_csv(u) == "c,n,k,s_index,s,re,im\r\n0,-1,1,1,0.5,0.25,-1.5\r\n");
    const auto j = io::field_to_json(u);
    REQUIRE(j.size() == 1);
    CHECK(j[0]["n"] == -1);
    CHECK(j[0]["im"] == -1.5);
}

TEST_CASE("plan JSON carries exact rationals")
{
    const auto j = io::plan_to_json(plan(PlanCase::airy, rat(1, 10), 4));
    CHECK(j.dump().find("4/31") != std::string::npos);
    CHECK(j.dump().find("4/21") != std::string::npos);
}
