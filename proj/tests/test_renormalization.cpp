#include <doctest.h>

#include <cmath>

#include "renorm/closed_forms.hpp"
#include "renorm/errors.hpp"
#include "renorm/renormalization.hpp"

using namespace renorm;

namespace {
const double kSqrt2 = std::sqrt(2.0);
}

TEST_CASE("torus potentials agree with the closed form") {
    for (double R : {1.2, kSqrt2, 3.0}) {
        const ParamSurface S = make_torus_surface(RevolutionTorus(R));
        for (double a : {0.0, 1.0, kPi}) {
            const RenormPotentialResult p = surface_potential(S, a, 0.4);
            CHECK(p.value == doctest::Approx(torus_potential_closed(R, a)).epsilon(1e-6).scale(1.0));
            CHECK(p.samples.size() == 7);
        }
    }
}

TEST_CASE("potential is invariant along the rotation direction") {
    const ParamSurface S = make_torus_surface(RevolutionTorus(2.0));
    const double a = surface_potential(S, 0.8, 0.0).value;
    const double b = surface_potential(S, 0.8, 2.3).value;
    CHECK(std::abs(a - b) < 1e-9);
}

TEST_CASE("both exclusion routes give the same renormalized potential") {
    const ParamSurface S = make_torus_surface(RevolutionTorus(2.0));
    RenormConfig cfg;
    cfg.route = ExclusionRoute::ChartPreimage;
    CHECK(surface_potential(S, 2.0, 0.0, cfg).value == doctest::Approx(torus_potential_closed(2.0, 2.0)).epsilon(1e-6));
}

TEST_CASE("round spheres have zero potential and energy") {
    for (double r : {0.5, 3.0}) {
        const ParamSurface S = make_sphere(r, Vec3(0.3, -1.0, 2.0));
        CHECK(std::abs(surface_potential(S, 0.4, 1.0).value) < 1e-7 / (r * r));
        CHECK(std::abs(surface_energy(S).value) < 1e-7);
    }
}

TEST_CASE("numeric energy of T_2") {
    const EnergyReport e = surface_energy(make_torus_surface(RevolutionTorus(2.0)));
    CHECK(e.value == doctest::Approx(torus_energy_closed(2.0)).epsilon(1e-6));
    CHECK(e.method == EnergyMethod::NumericRenormalized);
    CHECK(e.config.contains("nodes_u"));
}

TEST_CASE("round circles have zero knot potential and energy") {
    for (double r : {1.0, 2.0, 5.0}) {
        const Curve K = make_circle(r, Vec3(1.0, 2.0, -0.5));
        CHECK(std::abs(knot_potential(K, 0.7, {}).value) < 1e-8 / r);
        CHECK(std::abs(knot_energy(K).value) < 1e-7);
    }
    RenormConfig arc;
    arc.curveCutoff = CurveCutoff::Arclength;
    // Arc-length cutoff on the unit circle: cot(eps/2) - 2/eps -> 0.
    CHECK(std::abs(knot_potential(make_circle(1.0), 0.3, arc).value) < 1e-8);
}

TEST_CASE("ellipses have positive knot energy") {
    const Curve K = make_ellipse(1.5, 1.0);
    RenormConfig fine;
    fine.curveLadderTop = 0.0025;
    fine.ladderCount = 8;
    for (double t : {0.0, 0.9, 2.0}) {
        const double v = knot_potential(K, t).value;
        CHECK(v == doctest::Approx(knot_potential(K, t, fine).value).epsilon(1e-7));
    }
    CHECK(knot_energy(K).value > 0.0);
}

TEST_CASE("torus cutoff energy expansion") {
    const ExpansionTarget M = TorusTarget{RevolutionTorus(kSqrt2)};
    const auto basis = default_expansion_basis(M);
    const ExpansionReport r = expansion_check(M, -4.0, basis);
    CHECK(r.fit.coefficient(BasisTerm::InvEps2) == doctest::Approx(4.0 * kPi * kPi * kPi * kSqrt2).epsilon(1e-3));
    CHECK(r.fit.coefficient(BasisTerm::LogEps) == doctest::Approx(-kPi * kPi * kPi).epsilon(5e-3));
    CHECK(r.fit.coefficient(BasisTerm::Const) == doctest::Approx(r.predicted.at("1")).epsilon(1e-2));
    CHECK_THROWS_AS(expansion_check(M, -2.0, basis), DomainError);
}

TEST_CASE("disk expansion recovers area and perimeter terms") {
    const ExpansionTarget M = PlanarDisk{1.0};
    const ExpansionReport r = expansion_check(M, -4.0, default_expansion_basis(M));
    CHECK(r.fit.coefficient(BasisTerm::InvEps2) == doctest::Approx(kPi * kPi).epsilon(5e-3));
    CHECK(r.fit.coefficient(BasisTerm::InvEps) == doctest::Approx(-4.0 * kPi).epsilon(5e-3));
}

TEST_CASE("config serialization round trip") {
    RenormConfig c;
    c.quad.relTol = 1e-10;
    c.ladder = {0.1, 0.05, 0.025, 0.0125, 0.00625};
    c.route = ExclusionRoute::ChartPreimage;
    c.curveCutoff = CurveCutoff::Arclength;
    c.outer.maxNodes = 128;
    c.logNormalization = 2.5;
    const nlohmann::json j = c;
    const RenormConfig back = j.get<RenormConfig>();
    CHECK(nlohmann::json(back) == j);
    CHECK(back.route == ExclusionRoute::ChartPreimage);
    CHECK(back.ladder == c.ladder);
}

TEST_CASE("config validation") {
    auto bad = [](auto mutate) {
        RenormConfig c;
        mutate(c);
        return c;
    };
    CHECK_THROWS_AS(bad([](RenormConfig& c) { c.ladderCount = 3; }).validate(), DomainError);
    CHECK_THROWS_AS(bad([](RenormConfig& c) { c.ladder = {0.1, 0.05}; }).validate(), DomainError);
    CHECK_THROWS_AS(bad([](RenormConfig& c) { c.surfaceLadderTop = 0.0; }).validate(), DomainError);
    CHECK_THROWS_AS(bad([](RenormConfig& c) { c.logNormalization = -1.0; }).validate(), DomainError);
    CHECK_THROWS_AS(bad([](RenormConfig& c) { c.threads = 0; }).validate(), DomainError);
    CHECK_THROWS_AS(energy_method_from_string("guess"), DomainError);
    CHECK(energy_method_from_string(to_string(EnergyMethod::CutoffFit)) == EnergyMethod::CutoffFit);
}

TEST_CASE("potential at a point off the surface is rejected") {
    const ParamSurface S = make_torus_surface(RevolutionTorus(2.0));
    CHECK_THROWS_AS(surface_potential(S, Vec3(10.0, 0.0, 0.0), 0.0, 0.0), DomainError);
    CHECK(surface_potential(S, S.point(0.5, 0.0), 0.5, 0.0).value ==
          doctest::Approx(torus_potential_closed(2.0, 0.5)).epsilon(1e-6));
}

TEST_CASE("a rejected remainder fit surfaces as a numeric failure") {
    RenormConfig c;
    // Rungs this coarse leave eps^3 terms in the remainder; the fit is rejected.
    c.ladder = {0.6, 0.45, 0.3, 0.15, 0.075};
    try {
        surface_potential(make_torus_surface(RevolutionTorus(2.0)), 0.0, 0.0, c);
        FAIL("expected a numeric failure");
    } catch (const NonConvergenceError& e) {
        CHECK(e.exit_code() == 3);
    }
}
