#include <doctest.h>

#include <cmath>
#include <random>

#include "renorm/errors.hpp"
#include "renorm/geometry.hpp"
#include "renorm/quadrature.hpp"

using namespace renorm;

namespace {
const double kSqrt2 = std::sqrt(2.0);
}

TEST_CASE("torus chart values") {
    const RevolutionTorus T2(2.0);
    CHECK((torus_chart(T2, 0.0, 0.0) - Vec3(3, 0, 0)).norm() < 1e-15);
    CHECK((torus_chart(T2, kPi, 0.0) - Vec3(1, 0, 0)).norm() < 1e-15);
    const Vec3 p = torus_chart(RevolutionTorus(kSqrt2, 2.0), 0.0, kPi / 2.0);
    CHECK((p - Vec3(0, 2.0 * (kSqrt2 + 1.0), 0)).norm() < 1e-14);
}

TEST_CASE("torus construction rejects R <= 1 and non-positive scale") {
    CHECK_THROWS_AS(RevolutionTorus(1.0), DomainError);
    CHECK_THROWS_AS(RevolutionTorus(0.5), DomainError);
    CHECK_THROWS_AS(RevolutionTorus(2.0, 0.0), DomainError);
}

TEST_CASE("squared chord distance: named values") {
    const RevolutionTorus T(2.0);
    CHECK(chord_dist_sq(T, 0.7, 0.7, 0.0) == doctest::Approx(0.0));
    CHECK(chord_dist_sq(T, 0.0, kPi, 0.0) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(chord_dist_sq(T, 0.0, 0.0, kPi) == doctest::Approx(36.0).epsilon(1e-14));
}

TEST_CASE("squared chord distance: the three forms and the chart agree") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> angle(-kPi, kPi), radius(1.05, 4.0);
    for (int i = 0; i < 200; ++i) {
        const RevolutionTorus T(radius(rng));
        const double alpha = angle(rng), du = angle(rng), v = angle(rng);
        const double u = alpha + du;
        const double direct = (torus_chart(T, u, v) - torus_chart(T, alpha, 0.0)).squaredNorm();
        const double trig = chord_dist_sq(T, alpha, u, v);
        const TorusTS ts = torus_ts(T, alpha, u, v);
        const TorusThetaPhi tp = torus_theta_phi(alpha, u, v);
        CHECK(trig == doctest::Approx(direct).epsilon(1e-12));
        CHECK(chord_dist_sq_ts(T, alpha, ts.t, ts.s) == doctest::Approx(direct).epsilon(1e-12));
        CHECK(chord_dist_sq_theta_phi(T, alpha, tp.theta, tp.phi) == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("offset chord keeps relative precision for tiny offsets") {
    const ParamSurface S = make_torus_surface(RevolutionTorus(2.0));
    const double u = 2.5, v = 4.0, du = 3e-9, dv = -2e-9;
    // First-order chord from the exact jet: |pu du + pv dv|^2.
    const ChartJet j = S.jet(u, v);
    const double linear = (j.pu * du + j.pv * dv).squaredNorm();
    CHECK(S.chord_sq_offset(u, v, du, dv) == doctest::Approx(linear).epsilon(1e-7));
    const Curve K = make_ellipse(1.5, 1.0);
    const double t = 2.0, dt = 1e-9;
    CHECK(K.chord_sq_offset(t, dt) == doctest::Approx(K.speed(t) * K.speed(t) * dt * dt).epsilon(1e-7));
}

TEST_CASE("closed-form torus curvature") {
    SUBCASE("R = 2, alpha = pi/2") {
        const SurfacePointData d = torus_curvature(RevolutionTorus(2.0), kPi / 2.0);
        CHECK(d.gauss == doctest::Approx(0.0));
        CHECK(d.delta == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("R = sqrt 2, alpha = 0") {
        const SurfacePointData d = torus_curvature(RevolutionTorus(kSqrt2), 0.0);
        CHECK(d.gauss == doctest::Approx(1.0 / (kSqrt2 + 1.0)).epsilon(1e-14));
        CHECK(d.delta == doctest::Approx(2.0 / ((kSqrt2 + 1.0) * (kSqrt2 + 1.0))).epsilon(1e-14));
        CHECK(d.delta == doctest::Approx(0.343146).epsilon(1e-6));
    }
    SUBCASE("R = 2, alpha = pi") {
        const SurfacePointData d = torus_curvature(RevolutionTorus(2.0), kPi);
        CHECK(d.gauss == doctest::Approx(-1.0).epsilon(1e-14));
        CHECK(d.delta == doctest::Approx(4.0).epsilon(1e-14));
    }
}

TEST_CASE("curvature invariants are consistent") {
    for (double alpha : {0.0, 0.9, 2.0, kPi}) {
        const SurfacePointData d = torus_curvature(RevolutionTorus(1.7), alpha);
        CHECK(d.gauss == doctest::Approx(d.kappa1 * d.kappa2).epsilon(1e-10));
        CHECK(d.delta == doctest::Approx((d.kappa1 - d.kappa2) * (d.kappa1 - d.kappa2)).epsilon(1e-10));
        CHECK(d.delta >= 0.0);
    }
}

TEST_CASE("numeric curvature matches closed forms") {
    const RevolutionTorus T(kSqrt2);
    const ParamSurface S = make_torus_surface(T);
    for (double alpha : {0.0, 1.0, 2.5, kPi}) {
        const SurfacePointData n = numeric_curvature(S, alpha, 0.3);
        const SurfacePointData c = torus_curvature(T, alpha);
        CHECK(n.gauss == doctest::Approx(c.gauss).epsilon(1e-7));
        CHECK(std::abs(n.delta - c.delta) < 1e-6);
        CHECK(n.areaDensity == doctest::Approx(c.areaDensity).epsilon(1e-9));
    }
    CHECK(std::abs(numeric_curvature(make_sphere(1.0), 1.0, 0.5).delta) < 1e-8);
    CHECK(std::abs(numeric_curvature(make_torus_surface(RevolutionTorus(2.0)), kPi / 2.0, 0.0).gauss) < 1e-8);
}

TEST_CASE("sphere is umbilic with K = 1/r^2") {
    for (double r : {0.5, 3.0}) {
        const ParamSurface S = make_sphere(r);
        const LocalizedChart lc = S.localize(0.2, 1.0);
        const SurfacePointData d = point_data(*lc.surface, lc.u, lc.v);
        CHECK(d.gauss == doctest::Approx(1.0 / (r * r)).epsilon(1e-10));
        CHECK(std::abs(d.delta) < 1e-12 / (r * r));
    }
}

TEST_CASE("periodic charts close up") {
    const ParamSurface S = make_torus_surface(RevolutionTorus(2.0));
    for (double t : {0.0, 1.0, 4.0}) {
        CHECK((S.point(0.0, t) - S.point(kTwoPi, t)).norm() < 1e-12 * S.diameter());
        CHECK((S.point(t, 0.0) - S.point(t, kTwoPi)).norm() < 1e-12 * S.diameter());
    }
}

TEST_CASE("chart integration: areas and the Delta integral") {
    QuadratureConfig q;
    q.relTol = 1e-12;
    const ParamSurface T2 = make_torus_surface(RevolutionTorus(2.0));
    CHECK(integrate_chart(T2, [](double, double) { return 1.0; }, q).value ==
          doctest::Approx(8.0 * kPi * kPi).epsilon(1e-10));
    CHECK(integrate_chart(make_sphere(1.0), [](double, double) { return 1.0; }, q).value ==
          doctest::Approx(4.0 * kPi).epsilon(1e-10));
    const RevolutionTorus Ts(kSqrt2);
    const ParamSurface S = make_torus_surface(Ts);
    const double intDelta =
        integrate_chart(S, [&](double u, double) { return torus_curvature(Ts, u).delta; }, q).value;
    // 4 pi^2 R^2 / sqrt(R^2 - 1) at R = sqrt 2.
    CHECK(intDelta == doctest::Approx(8.0 * kPi * kPi).epsilon(1e-10));
}
