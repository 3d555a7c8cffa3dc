#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"

#include "breather/action.hpp"
#include "breather/errors.hpp"
#include "breather/field_io.hpp"
#include "breather/grid.hpp"
#include "breather/special_functions.hpp"
#include "breather/units.hpp"

using namespace breather;
using std::numbers::pi;

namespace {

// CODATA electron values.
const UnitSystem kElectron{1.054571817e-34, 9.1093837015e-31, 299792458.0};

}  // namespace

TEST_CASE("unit system rejects non-positive or non-finite constants") {
    CHECK_THROWS_AS(UnitSystem(0.0, 1.0, 1.0), InvalidInput);
    CHECK_THROWS_AS(UnitSystem(1.0, -1.0, 1.0), InvalidInput);
    CHECK_THROWS_AS(UnitSystem(1.0, 1.0, INFINITY), InvalidInput);
    CHECK_THROWS_AS(UnitSystem(NAN, 1.0, 1.0), InvalidInput);
    CHECK(kElectron.compton_length() > 0.0);
    CHECK(kElectron.compton_time() > 0.0);
}

TEST_CASE("compton length and rest energy are the internal units") {
    const auto& u = kElectron;
    CHECK(to_internal(u.compton_length(), Dimension::length, u) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(to_internal(u.rest_energy(), Dimension::energy, u) == doctest::Approx(1.0).epsilon(1e-14));
    // One de Broglie clock period 2 pi hbar / (m c^2) is 2 pi internal time units.
    const double period = 2.0 * pi * u.hbar() / (u.mass() * u.c() * u.c());
    CHECK(to_internal(period, Dimension::time, u) == doctest::Approx(2.0 * pi).epsilon(1e-14));
}

TEST_CASE("dimension tags parse and unknown tags are rejected") {
    for (auto d : {Dimension::length, Dimension::time, Dimension::energy, Dimension::momentum, Dimension::frequency,
                   Dimension::action}) {
        CHECK(parse_dimension(to_string(d)) == d);
    }
    CHECK_THROWS_AS(parse_dimension("mass"), InvalidInput);
    CHECK_THROWS_AS(parse_dimension("Length"), InvalidInput);
}

TEST_CASE("unit round trip holds for random unit systems") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> logu(-40.0, 40.0);
    for (int k = 0; k < 200; ++k) {
        const UnitSystem u(std::pow(10.0, logu(rng)), std::pow(10.0, logu(rng)), std::pow(10.0, logu(rng) / 4.0));
        for (auto d : {Dimension::length, Dimension::time, Dimension::energy, Dimension::momentum,
                       Dimension::frequency, Dimension::action}) {
            const double q = std::pow(10.0, logu(rng));
            CHECK(from_internal(to_internal(q, d, u), d, u) == doctest::Approx(q).epsilon(1e-12));
        }
    }
}

TEST_CASE("natural units are the identity") {
    const auto u = UnitSystem::natural();
    CHECK(to_internal(3.5, Dimension::momentum, u) == 3.5);
    CHECK(unit_scale(Dimension::frequency, u) == 1.0);
}

TEST_CASE("grid coordinate map is affine, exact and monotone") {
    const Grid g({{Axis::t, 3, 2.0, 0.25}, {Axis::x, 7, -1.5, 0.5}});
    REQUIRE(g.rank() == 2);
    CHECK(g.stride(0) == 7);
    CHECK(g.size() == 21);
    std::array<std::size_t, 2> idx{};
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
        g.unravel(flat, idx);
        CHECK(g.ravel(idx) == flat);
        const auto p = g.point(flat);
        CHECK(p.t == 2.0 + static_cast<double>(idx[0]) * 0.25);
        CHECK(p.x == -1.5 + static_cast<double>(idx[1]) * 0.5);
        CHECK(p.y == 0.0);
    }
    for (std::size_t i = 1; i < 7; ++i) CHECK(g.axis(1).coord(i) > g.axis(1).coord(i - 1));
    CHECK(g.spatial_rank() == 1);
    CHECK_FALSE(g.has(Axis::z));
}

TEST_CASE("grid rejects bad axes") {
    CHECK_THROWS_AS(Grid({{Axis::x, 4, 0.0, 0.0}}), InvalidInput);
    CHECK_THROWS_AS(Grid({{Axis::x, 0, 0.0, 1.0}}), InvalidInput);
    CHECK_THROWS_AS(Grid({{Axis::x, 4, 0.0, 1.0}, {Axis::x, 4, 0.0, 1.0}}), InvalidInput);
    CHECK_THROWS_AS(Grid({{Axis::x, 4, 0.0, 1.0}, {Axis::t, 4, 0.0, 1.0}}), InvalidInput);
    CHECK_THROWS_AS(axis_from_label('w'), InvalidInput);
}

TEST_CASE("unsampled axes take their coordinate from the base point") {
    const Grid g({{Axis::y, 2, 0.0, 1.0}}, SpacetimePoint{3.0, 4.0, 0.0, 5.0});
    const auto p = g.point(std::size_t{1});
    CHECK(p.t == 3.0);
    CHECK(p.x == 4.0);
    CHECK(p.y == 1.0);
    CHECK(p.z == 5.0);
}

TEST_CASE("eval_on_grid examples") {
    SUBCASE("constant one") {
        const auto f = eval_on_grid([](const SpacetimePoint&) { return Complex(1.0, 0.0); },
                                    Grid::spatial_cube(-1.0, 1.0, 4));
        for (const auto& v : f.values) CHECK(v == Complex(1.0, 0.0));
    }
    SUBCASE("rest clock on two time samples") {
        const auto f = eval_on_grid([](const SpacetimePoint& p) { return std::exp(Complex(0.0, -p.t)); },
                                    Grid({{Axis::t, 2, 0.0, pi / 2.0}}));
        CHECK(std::abs(f[0] - Complex(1.0, 0.0)) < 1e-15);
        CHECK(std::abs(f[1] - Complex(0.0, -1.0)) < 1e-15);
    }
    SUBCASE("j0 on radial samples") {
        const auto f = eval_on_grid(
            [](const SpacetimePoint& p) { return Complex(spherical_bessel(0, std::sqrt(3.0) * p.x), 0.0); },
            Grid({{Axis::x, 2, 0.0, 1.0}}));
        CHECK(f[0].real() == 1.0);
        CHECK(f[1].real() == doctest::Approx(std::sin(std::sqrt(3.0)) / std::sqrt(3.0)).epsilon(1e-14));
        CHECK(f[1].real() == doctest::Approx(0.5697).epsilon(5e-4));  // quoted value is rounded: 0.56986
    }
}

TEST_CASE("eval_on_grid names the first non-finite coordinate") {
    const Grid g({{Axis::x, 5, 0.0, 1.0}});
    try {
        eval_on_grid([](const SpacetimePoint& p) { return Complex(1.0 / (p.x - 2.0), 0.0); }, g);
        FAIL("expected InvalidInput");
    } catch (const InvalidInput& e) {
        CHECK(std::string(e.what()).find("x=2") != std::string::npos);
    }
}

TEST_CASE("action value gauge: branch shifts leave psi unchanged") {
    const ActionValue a{{-1.3, 0.2}, 0};
    for (int k = -3; k <= 3; ++k) {
        const auto b = a.shifted(k);
        CHECK(b.branch == k);
        CHECK(std::abs(b.psi() - a.psi()) < 1e-14);
        CHECK(std::abs(b.principal() - a.value) < 1e-14);
    }
}

TEST_CASE("field dump round-trips bit for bit") {
    const Grid g({{Axis::t, 3, 0.5, 0.125}, {Axis::z, 4, -1.0, 0.5}});
    auto f = eval_on_grid([](const SpacetimePoint& p) { return Complex(std::sin(p.t * 3.0 + p.z), -p.z / 3.0); }, g);
    std::stringstream ss;
    write_field(ss, f);
    const std::string bytes = ss.str();
    CHECK(bytes.substr(0, 4) == "BRTH");
    CHECK(bytes.size() == 4 + 4 + 1 + 2 * (1 + 8 + 8 + 8) + 12 * 16);
    const auto back = read_field(ss);
    CHECK(back.grid == f.grid);
    CHECK(back.values == f.values);
}

TEST_CASE("field dump is little-endian") {
    const ComplexField f(Grid({{Axis::x, 1, 0.0, 1.0}}), {Complex(1.0, 0.0)});
    std::stringstream ss;
    write_field(ss, f);
    const std::string b = ss.str();
    CHECK(static_cast<unsigned char>(b[4]) == 1);  // version u32 = 1, low byte first
    CHECK(b[5] == 0);
    CHECK(static_cast<unsigned char>(b[8]) == 1);  // one axis
    CHECK(b[9] == 'x');
    // 1.0 = 0x3FF0000000000000: last byte of the re value is 0x3F.
    CHECK(static_cast<unsigned char>(b[b.size() - 9]) == 0x3F);
}

TEST_CASE("field dump rejects corrupt input") {
    const ComplexField f(Grid({{Axis::x, 2, 0.0, 1.0}}), {Complex(1.0, 0.0), Complex(2.0, 0.0)});
    std::stringstream ss;
    write_field(ss, f);
    std::string b = ss.str();
    SUBCASE("bad magic") {
        b[0] = 'X';
        std::stringstream in(b);
        CHECK_THROWS_AS(read_field(in), InvalidInput);
    }
    SUBCASE("unknown version") {
        b[4] = 9;
        std::stringstream in(b);
        CHECK_THROWS_AS(read_field(in), InvalidInput);
    }
    SUBCASE("truncated") {
        std::stringstream in(b.substr(0, b.size() - 3));
        CHECK_THROWS_AS(read_field(in), InvalidInput);
    }
}
