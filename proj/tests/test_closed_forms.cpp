#include <doctest.h>

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "renorm/closed_forms.hpp"
#include "renorm/errors.hpp"
#include "renorm/geometry.hpp"
#include "renorm/renormalization.hpp"

using namespace renorm;

namespace {

const double kSqrt2 = std::sqrt(2.0);
const double kLn2 = std::log(2.0);
const double kPi3 = kPi * kPi * kPi;

template <class F>
double gk(F f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 25, 1e-14);
}

// Pointwise data of T_R at generating angle alpha (unit tube radius).
double area_element(double R, double a) { return 2.0 * kPi * (R + std::cos(a)); }
double delta_at(double R, double a) { return std::pow(R / (R + std::cos(a)), 2); }
double gauss_at(double R, double a) { return std::cos(a) / (R + std::cos(a)); }

/// E(R) in long double, written out independently of the library.
long double energy_ld(long double R) {
    const long double pi = 3.141592653589793238462643383279502884L;
    const long double ln2 = 0.693147180559945309417232121458176568L;
    return pi * pi * pi / (2.0L * std::sqrt(R * R - 1.0L)) * (R * R * (3.0L * ln2 - 1.0L) + 2.0L - 2.0L / (R * R));
}

} // namespace

TEST_CASE("torus energy: reference values") {
    CHECK(torus_energy_closed(kSqrt2) == doctest::Approx(kPi3 * (6.0 * kLn2 - 1.0) / 2.0).epsilon(1e-14));
    CHECK(torus_energy_closed(kSqrt2) == doctest::Approx(48.9724).epsilon(1e-5));
    CHECK(torus_energy_closed(2.0) == doctest::Approx(52.074).epsilon(1e-4));
    for (double R : {1.05, 1.2, 2.0, 3.0, 7.5})
        CHECK(torus_energy_closed(R) == doctest::Approx(static_cast<double>(energy_ld(R))).epsilon(1e-13));
    CHECK(torus_energy_closed(3.0) == doctest::Approx(62.99392239063836).epsilon(1e-12));
}

TEST_CASE("energy derivative matches finite differences and sign pattern") {
    for (double R : {1.1, 1.3, kSqrt2, 1.7, 2.0, 3.0}) {
        const long double h = 1e-3L * R;
        const double fd = static_cast<double>(
            (-energy_ld(R + 2 * h) + 8 * energy_ld(R + h) - 8 * energy_ld(R - h) + energy_ld(R - 2 * h)) / (12 * h));
        CHECK(std::abs(torus_energy_derivative(R) - fd) <= 1e-7 * std::max(1.0, std::abs(fd)));
    }
    CHECK(std::abs(torus_energy_derivative(kSqrt2)) < 1e-13);
    CHECK(torus_energy_derivative(2.0) == doctest::Approx(8.407).epsilon(1e-4));
    CHECK(torus_energy_derivative(1.2) < 0.0);
}

TEST_CASE("minimizer of the torus energy") {
    const double Estar = kPi3 * (6.0 * kLn2 - 1.0) / 2.0;
    for (auto [lo, hi] : {std::pair{1.1, 3.0}, std::pair{1.3, 1.5}}) {
        const TorusMinimum m = minimize_torus_energy(lo, hi, 1e-12);
        CHECK(std::abs(m.R - kSqrt2) < 1e-10);
        CHECK(std::abs(m.energy - Estar) < 1e-8);
    }
    CHECK_THROWS_AS(minimize_torus_energy(1.5, 3.0), DomainError);
    CHECK_THROWS_AS(minimize_torus_energy(0.9, 3.0), DomainError);
    CHECK_THROWS_AS(minimize_torus_energy(2.0, 1.2), DomainError);
}

TEST_CASE("pointwise potential") {
    CHECK(torus_potential_closed(kSqrt2, 0.0) == doctest::Approx(0.21283).epsilon(5e-5));
    CHECK(torus_potential_closed(2.0, kPi) == doctest::Approx(2.284631431208593).epsilon(1e-13));
    for (double a : {0.3, 1.0, 2.5})
        CHECK(torus_potential_closed(1.7, a) == doctest::Approx(torus_potential_closed(1.7, -a)).epsilon(1e-15));

    SUBCASE("integrates to the energy") {
        for (double R : {1.2, kSqrt2, 2.0, 3.0}) {
            const double e = gk([R](double a) { return torus_potential_closed(R, a) * area_element(R, a); }, 0.0, kTwoPi);
            CHECK(e == doctest::Approx(torus_energy_closed(R)).epsilon(1e-10));
        }
    }
}

TEST_CASE("cutoff display: counterterms and eps dependence") {
    for (double R : {kSqrt2, 2.0, 3.0}) {
        for (double a : {0.0, 1.1, kPi}) {
            const double D = delta_at(R, a);
            const double K = gauss_at(R, a);
            for (double eps : {0.2, 0.05, 1e-3}) {
                const double disp = torus_cutoff_potential_closed(R, a, eps);
                const double renormalized = disp - kPi / (eps * eps) + kPi * D / 16.0 * std::log(D * eps * eps) + kPi * K / 4.0;
                CHECK(renormalized == doctest::Approx(torus_potential_closed(R, a)).epsilon(1e-9).scale(1.0));
                const double jump = torus_cutoff_potential_closed(R, a, eps / 2.0) - disp;
                CHECK(jump == doctest::Approx(3.0 * kPi / (eps * eps) - kPi * D / 16.0 * std::log(0.25)).epsilon(1e-12));
            }
        }
    }
    CHECK_THROWS_AS(torus_cutoff_potential_closed(2.0, 0.0, 1.5), DomainError);
}

TEST_CASE("curvature integrals over T_R") {
    CHECK(delta_integral_closed(kSqrt2) == doctest::Approx(8.0 * kPi * kPi).epsilon(1e-14));
    CHECK(delta_integral_closed(2.0) == doctest::Approx(16.0 * kPi * kPi / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(torus_area(2.0) == doctest::Approx(8.0 * kPi * kPi).epsilon(1e-14));
    CHECK(delta_integral_closed(1e4) / (4.0 * kPi * kPi * 1e4) == doctest::Approx(1.0).epsilon(1e-7));
    for (double R : {1.2, kSqrt2, 2.0, 3.0}) {
        const double d = gk([R](double a) { return delta_at(R, a) * area_element(R, a); }, 0.0, kTwoPi);
        CHECK(delta_integral_closed(R) == doctest::Approx(d).epsilon(1e-12));
        const double dl = gk([R](double a) { const double D = delta_at(R, a); return D * std::log(D) * area_element(R, a); },
                             0.0, kTwoPi);
        CHECK(delta_log_delta_integral(R) == doctest::Approx(dl).epsilon(1e-10));
    }
}

TEST_CASE("Willmore functional of tori of revolution") {
    CHECK(std::abs(willmore_torus(kSqrt2) - 2.0 * kPi * kPi) < 1e-6);
    for (double R : {1.2, 2.0, 3.0})
        CHECK(willmore_torus(R) == doctest::Approx(kPi * kPi * R * R / std::sqrt(R * R - 1.0)).epsilon(1e-9));
    CHECK(willmore_torus(2.0) > 2.0 * kPi * kPi);
}

TEST_CASE("energy curve and grids") {
    const auto grid = linear_grid(1.1, 3.0, 20);
    REQUIRE(grid.size() == 20);
    CHECK(grid.front() == 1.1);
    CHECK(grid.back() == 3.0);
    const TorusEnergyCurve c = torus_energy_curve(grid);
    for (size_t i = 0; i < grid.size(); ++i) {
        CHECK(c.energy[i] == torus_energy_closed(grid[i]));
        CHECK(c.derivative[i] == torus_energy_derivative(grid[i]));
    }
    CHECK_THROWS_AS(linear_grid(1.0, 1.0, 5), DomainError);
}

TEST_CASE("tube around the unit circle") {
    const TubeReport t = tube_energy(0.5);
    const double display = kPi3 * 0.5 / (2.0 * std::sqrt(0.75)) * ((3.0 * kLn2 - 1.0) * 4.0 + 2.0 - 0.5);
    CHECK(t.display == doctest::Approx(display).epsilon(1e-14));
    CHECK(t.value == doctest::Approx(display).epsilon(1e-13));
    CHECK(tube_coefficient_inv() == doctest::Approx(kPi3 * (3.0 * kLn2 - 1.0) / 2.0).epsilon(1e-15));
    CHECK(tube_coefficient_linear() == doctest::Approx(39.37).epsilon(1e-3));
    CHECK(tube_coefficient_cubic() == doctest::Approx(-9.235).epsilon(1e-3));
    CHECK_THROWS_AS(tube_energy(1.0), DomainError);
    CHECK_THROWS_AS(tube_energy(0.0), DomainError);
}

TEST_CASE("closed forms reject R <= 1") {
    for (double R : {1.0, 0.5, -2.0}) {
        CHECK_THROWS_AS(torus_energy_closed(R), DomainError);
        CHECK_THROWS_AS(torus_energy_derivative(R), DomainError);
        CHECK_THROWS_AS(torus_potential_closed(R, 0.0), DomainError);
        CHECK_THROWS_AS(delta_integral_closed(R), DomainError);
        CHECK_THROWS_AS(willmore_torus(R), DomainError);
    }
}
