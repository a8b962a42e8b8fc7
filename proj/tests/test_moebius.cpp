#include <doctest.h>

#include <cmath>
#include <random>

#include "renorm/closed_forms.hpp"
#include "renorm/errors.hpp"
#include "renorm/moebius.hpp"
#include "renorm/quadrature.hpp"

using namespace renorm;

namespace {

const double kSqrt2 = std::sqrt(2.0);

/// Settings for the inverted-surface energies: 2-D outer quadrature over
/// surfaces without rotational symmetry is expensive at full accuracy.
RenormConfig cheap() {
    RenormConfig c;
    c.quad.relTol = 1e-8;
    c.ladderCount = 5;
    c.outer.relTol = 1e-4;
    c.outer.minNodes = 16;
    c.outer.absTol = 1e-6;
    c.residualAbsTol = 1e-7;
    return c;
}

} // namespace

TEST_CASE("inversion maps points as prescribed") {
    const MoebiusMap m = MoebiusMap::inversion(Vec3(1.0, 0.0, 0.0), 2.0);
    CHECK((m.apply(Vec3(3.0, 0.0, 0.0)) - Vec3(3.0, 0.0, 0.0)).norm() < 1e-15);
    CHECK((m.apply(Vec3(2.0, 0.0, 0.0)) - Vec3(5.0, 0.0, 0.0)).norm() < 1e-14);
    CHECK((m.apply(Vec3(1.0, 1.0, 0.0)) - Vec3(1.0, 4.0, 0.0)).norm() < 1e-14);
    CHECK(m.conformal_factor(Vec3(1.0, 1.0, 0.0)) == doctest::Approx(4.0));
    CHECK_THROWS_AS(m.apply(Vec3(1.0, 0.0, 0.0)), SingularPointError);
    CHECK(m.kind() == "inversion");
    CHECK_FALSE(m.is_similarity());

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    for (int i = 0; i < 50; ++i) {
        const Vec3 p(U(rng), U(rng), U(rng));
        CHECK((m.apply(m.apply(p)) - p).norm() < 1e-12 * (1.0 + p.norm()));
    }
    CHECK_THROWS_AS(MoebiusMap::inversion(Vec3::Zero(), 0.0), DomainError);
}

TEST_CASE("inversions send spheres to spheres") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-2.0, 2.0), Rad(0.2, 1.5), Ang(0.0, kTwoPi), Cos(-1.0, 1.0);
    const Vec3 c0(0.1, -0.2, 0.3);
    const double k = 1.3;
    const MoebiusMap m = MoebiusMap::inversion(c0, k);
    int tested = 0;
    while (tested < 100) {
        const Vec3 C(U(rng), U(rng), U(rng));
        const double rho = Rad(rng);
        const double pw = C.squaredNorm() - rho * rho; // C is relative to the inversion center
        if (std::abs(pw) < 0.1) continue;
        const Vec3 imageCenter = c0 + k * k * C / pw;
        const double imageRadius = k * k * rho / std::abs(pw);
        for (int j = 0; j < 5; ++j) {
            const double z = Cos(rng), phi = Ang(rng), s = std::sqrt(1.0 - z * z);
            const Vec3 p = c0 + C + rho * Vec3(s * std::cos(phi), s * std::sin(phi), z);
            CHECK(std::abs((m.apply(p) - imageCenter).norm() - imageRadius) < 1e-11 * imageRadius);
        }
        ++tested;
    }
}

TEST_CASE("similarities and compositions") {
    Similarity s;
    s.scale = 2.0;
    s.rotation = Eigen::AngleAxisd(0.7, Vec3(1.0, 1.0, 0.0).normalized()).toRotationMatrix();
    s.translation = Vec3(1.0, 2.0, 3.0);
    const MoebiusMap m = MoebiusMap::similarity(s);
    const Vec3 p(0.3, -0.4, 0.5);
    CHECK((m.apply(p) - (2.0 * (s.rotation * p) + s.translation)).norm() < 1e-14);
    CHECK(m.is_similarity());
    CHECK(m.conformal_factor(p) == doctest::Approx(2.0));
    CHECK_THROWS_AS(MoebiusMap::scaling(0.0), DomainError);

    const MoebiusMap both = m.then(MoebiusMap::inversion(Vec3(5.0, 0.0, 0.0), 1.0));
    CHECK(both.kind() == "composition");
    CHECK(both.steps().size() == 2);
    CHECK((both.apply(p) - MoebiusMap::inversion(Vec3(5.0, 0.0, 0.0), 1.0).apply(m.apply(p))).norm() < 1e-14);
}

TEST_CASE("chord and displacement evaluators match direct differences") {
    const MoebiusMap m = MoebiusMap::scaling(1.5).then(MoebiusMap::inversion(Vec3(4.0, 1.0, -1.0), 2.0));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const Vec3 p(U(rng), U(rng), U(rng));
        const Vec3 d = 0.3 * Vec3(U(rng), U(rng), U(rng));
        const Vec3 direct = m.apply(p + d) - m.apply(p);
        CHECK((m.displace(p, d) - direct).norm() < 1e-13);
        CHECK(m.chord_sq(p, p + d, d.squaredNorm()) == doctest::Approx(direct.squaredNorm()).epsilon(1e-12));
    }
    // Tiny offsets keep full relative precision.
    const Vec3 p(0.2, 0.1, 0.4), d(1e-9, -2e-9, 3e-9);
    const double f = m.conformal_factor(p);
    CHECK(m.displace(p, d).norm() == doctest::Approx(f * d.norm()).epsilon(1e-8));
}

TEST_CASE("composed surfaces") {
    const ParamSurface T = make_torus_surface(RevolutionTorus(2.0));
    SUBCASE("identity leaves the surface unchanged") {
        const ParamSurface S = compose_surface(T, MoebiusMap::identity());
        for (double u : {0.0, 1.3, 4.0})
            CHECK((S.point(u, 0.7) - T.point(u, 0.7)).norm() < 1e-15);
        CHECK(S.revolution());
    }
    SUBCASE("scaling multiplies area by the square") {
        const ParamSurface S = compose_surface(T, MoebiusMap::scaling(3.0));
        const Estimate a = integrate_chart(S, [](double, double) { return 1.0; });
        CHECK(a.value == doctest::Approx(9.0 * 8.0 * kPi * kPi).epsilon(1e-8));
        const SurfacePointData d = point_data(S, 1.0, 0.0);
        CHECK(d.delta == doctest::Approx(torus_curvature(RevolutionTorus(2.0), 1.0).delta / 9.0).epsilon(1e-10));
    }
    SUBCASE("inverted surface keeps Delta dA") {
        const MoebiusMap inv = MoebiusMap::inversion(Vec3(6.0, 1.0, 2.0), 3.0);
        const ParamSurface S = compose_surface(T, inv);
        CHECK_FALSE(S.revolution());
        for (double u : {0.3, 2.0, 4.5}) {
            const SurfacePointData a = point_data(T, u, 1.1), b = point_data(S, u, 1.1);
            CHECK(b.delta * b.areaDensity == doctest::Approx(a.delta * a.areaDensity).epsilon(1e-6));
        }
    }
    SUBCASE("inversion center on the surface is rejected") {
        CHECK_THROWS_AS(compose_surface(T, MoebiusMap::inversion(T.point(0.5, 0.5), 1.0)), DomainError);
    }
}

TEST_CASE("Clifford torus projections are T_sqrt2 up to similarity") {
    const TorusFit f = clifford_image();
    CHECK(f.ratio == doctest::Approx(kSqrt2).epsilon(1e-9));
    CHECK(f.maxResidual < 1e-8);
    const TorusFit g = clifford_image(Eigen::Vector4d(0.0, 0.0, std::sin(0.7), std::cos(0.7)), 32);
    CHECK(g.ratio == doctest::Approx(kSqrt2).epsilon(1e-9));
    CHECK_THROWS_AS(clifford_image(Eigen::Vector4d(std::sqrt(0.5), 0.0, std::sqrt(0.5), 0.0)), DomainError);
    CHECK_THROWS_AS(clifford_image(Eigen::Vector4d(0.0, 0.0, 0.0, 2.0)), DomainError);
    CHECK_THROWS_AS(clifford_image(Eigen::Vector4d(0.0, 0.0, 0.0, 1.0), 4), DomainError);

    const ParamSurface C = make_clifford_surface();
    CHECK(C.reach() == doctest::Approx(kSqrt2 - 1.0));
    CHECK(C.revolution());
}

TEST_CASE("torus fitter recovers a known torus") {
    const RevolutionTorus T(2.0, 1.7);
    const Mat3 Q = Eigen::AngleAxisd(0.4, Vec3(0.2, 1.0, -0.3).normalized()).toRotationMatrix();
    const Vec3 shift(1.0, -2.0, 0.5);
    std::vector<Vec3> pts;
    for (int i = 0; i < 24; ++i)
        for (int j = 0; j < 24; ++j)
            pts.push_back(Q * torus_chart(T, kTwoPi * i / 24.0, kTwoPi * j / 24.0) + shift);
    const TorusFit f = fit_torus(pts);
    CHECK(f.ratio == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(f.tubeRadius == doctest::Approx(1.7).epsilon(1e-9));
    CHECK((f.center - shift).norm() < 1e-8);
    CHECK(std::abs(std::abs(f.axis.dot(Q * Vec3::UnitZ())) - 1.0) < 1e-10);
    CHECK_THROWS_AS(fit_torus(std::vector<Vec3>(pts.begin(), pts.begin() + 10)), DomainError);
}

TEST_CASE("energy of the projected Clifford torus") {
    CHECK(surface_energy(make_clifford_surface()).value == doctest::Approx(torus_energy_closed(kSqrt2)).epsilon(1e-6));
}

TEST_CASE("inverted sphere is a sphere and has zero energy") {
    const ParamSurface S = compose_surface(make_sphere(1.0), MoebiusMap::inversion(Vec3(3.0, 0.0, 0.0), 2.0));
    CHECK(std::abs(surface_energy(S, cheap()).value) < 1e-4);
}

TEST_CASE("similarity invariance of the numeric energy") {
    const InvarianceReport r = invariance_experiment(make_torus_surface(RevolutionTorus(2.0)), MoebiusMap::scaling(2.5));
    CHECK(r.deviation < 1e-6);
    CHECK(r.after == doctest::Approx(torus_energy_closed(2.0)).epsilon(1e-6));
}
