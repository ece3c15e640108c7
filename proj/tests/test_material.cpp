#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "thermoforge/material.hpp"

using namespace thermoforge;

TEST_CASE("property table interpolates and clamps") {
    const PropertyTable t({{0.0, 10.0}, {100.0, 20.0}, {200.0, 10.0}});
    CHECK(t(50.0) == doctest::Approx(15.0));
    CHECK(t(150.0) == doctest::Approx(15.0));
    CHECK(t(-40.0) == doctest::Approx(10.0));
    CHECK(t(500.0) == doctest::Approx(10.0));
    CHECK(t(100.0) == doctest::Approx(20.0));
    const PropertyTable c(42.0);
    CHECK(c(-1000.0) == 42.0);
    CHECK(c(3000.0) == 42.0);
    CHECK_THROWS_AS(PropertyTable(std::vector<std::pair<double, double>>{}),
                    std::invalid_argument);
}

TEST_CASE("combined coefficient at ambient equals the frozen value") {
    MaterialModel m; // defaults: eps 0.35, h_inf 15
    // independent evaluation of the radiation polynomial in kelvin
    const double Tk = 298.15;
    const double expected =
        15.0 + 0.35 * 5.670374419e-8 * 4.0 * Tk * Tk * Tk;
    const double got = h_c(25.0, m, 25.0);
    CHECK(got == doctest::Approx(expected).epsilon(1e-14));
    CHECK(got == doctest::Approx(17.10).epsilon(1e-3));
}

TEST_CASE("zero emissivity reduces h_c to the convection constant") {
    MaterialModel m;
    m.emissivity = 0.0;
    CHECK(h_c(25.0, m, 25.0) == 15.0);
    CHECK(h_c(1700.0, m, 25.0) == 15.0);
}

TEST_CASE("h_c grows monotonically with temperature") {
    MaterialModel m;
    double prev = h_c(25.0, m, 25.0);
    for (double T = 100.0; T <= 1750.0; T += 100.0) {
        const double cur = h_c(T, m, 25.0);
        CHECK(cur > prev);
        prev = cur;
    }
}

TEST_CASE("stable_dt reproduces the constant-property bound") {
    MaterialModel m; // rho 7850, c_p 600, k_p 45
    const double expected = 0.5 * 7850.0 * 600.0 * 0.002 * 0.002 / (6.0 * 45.0);
    CHECK(stable_dt(m, 2.0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(stable_dt(m, 2.0) == doctest::Approx(0.0349).epsilon(1e-2));
}

TEST_CASE("stable_dt scales with conductivity and element size") {
    MaterialModel m;
    MaterialModel m2 = m;
    m2.conductivity = PropertyTable(90.0);
    CHECK(stable_dt(m2, 2.0) == doctest::Approx(0.5 * stable_dt(m, 2.0)).epsilon(1e-12));
    CHECK(stable_dt(m, 4.0) == doctest::Approx(4.0 * stable_dt(m, 2.0)).epsilon(1e-12));
}

TEST_CASE("stable_dt takes the binding value over the temperature range") {
    MaterialModel m;
    // conductivity rises with T; the bound is smallest where k_p/(rho c_p) peaks
    m.conductivity = PropertyTable({{0.0, 30.0}, {1750.0, 60.0}});
    const double bound_hot = 0.5 * 7850.0 * 600.0 * 4e-6 / (6.0 * 60.0);
    CHECK(stable_dt(m, 2.0) == doctest::Approx(bound_hot).epsilon(1e-9));
}

TEST_CASE("thermal diffusivity of the default surrogate is near 9.6 mm^2/s") {
    MaterialModel m;
    CHECK(thermal_diffusivity_mm2s(m, 25.0) == doctest::Approx(9.554).epsilon(1e-3));
}

TEST_CASE("material validation enforces the temperature ordering") {
    MaterialModel m;
    m.solidus_T = 20.0; // below ambient
    CHECK_THROWS_AS(m.validate(25.0), std::invalid_argument);
    MaterialModel m2;
    m2.activation_T = 1000.0;
    m2.solidus_T = 1450.0;
    CHECK_THROWS_AS(m2.validate(25.0), std::invalid_argument);
    MaterialModel ok;
    CHECK_NOTHROW(ok.validate(25.0));
}
