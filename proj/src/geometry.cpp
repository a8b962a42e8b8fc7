#include "renorm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "renorm/errors.hpp"

namespace renorm {

namespace {

double wrap_periodic(double x, double lo, double hi) {
    const double period = hi - lo;
    double r = std::fmod(x - lo, period);
    if (r < 0.0) r += period;
    return lo + r;
}

double sq(double x) { return x * x; }

} // namespace

// ---------------------------------------------------------------------------
// ParamSurface

ParamSurface::ParamSurface(ChartDomain domain, ChartFn chart) : domain_(domain), chart_(std::move(chart)) {
    if (!(domain_.u1 > domain_.u0) || !(domain_.v1 > domain_.v0))
        throw DomainError("chart domain must be a non-empty rectangle");
    if (!chart_) throw DomainError("chart function is required");
}

ParamSurface& ParamSurface::with_jet(JetFn fn) {
    jet_ = std::move(fn);
    return *this;
}
ParamSurface& ParamSurface::with_area_density(DensityFn fn) {
    density_ = std::move(fn);
    return *this;
}
ParamSurface& ParamSurface::with_chord_sq(ChordSqFn fn) {
    chordSq_ = std::move(fn);
    return *this;
}
ParamSurface& ParamSurface::with_displacement(DisplacementFn fn) {
    displacement_ = std::move(fn);
    return *this;
}
ParamSurface& ParamSurface::with_localizer(LocalizeFn fn) {
    localize_ = std::move(fn);
    return *this;
}
ParamSurface& ParamSurface::with_reach(double reach) {
    reach_ = reach;
    return *this;
}
ParamSurface& ParamSurface::with_diameter(double diameter) {
    diameter_ = diameter;
    return *this;
}
ParamSurface& ParamSurface::with_revolution(bool rotationallySymmetric) {
    revolution_ = rotationallySymmetric;
    return *this;
}
ParamSurface& ParamSurface::with_normal_sign(double sign) {
    normalSign_ = sign < 0.0 ? -1.0 : 1.0;
    return *this;
}
ParamSurface& ParamSurface::with_descriptor(nlohmann::json descriptor) {
    descriptor_ = std::move(descriptor);
    return *this;
}

double ParamSurface::wrap_u(double u) const {
    return domain_.periodicU ? wrap_periodic(u, domain_.u0, domain_.u1) : u;
}
double ParamSurface::wrap_v(double v) const {
    return domain_.periodicV ? wrap_periodic(v, domain_.v0, domain_.v1) : v;
}

Vec3 ParamSurface::point(double u, double v) const { return chart_(wrap_u(u), wrap_v(v)); }

ChartJet ParamSurface::jet(double u, double v) const {
    if (jet_) return jet_(wrap_u(u), wrap_v(v));
    return numeric_jet(*this, u, v);
}

double ParamSurface::area_density(double u, double v) const {
    if (density_) return density_(wrap_u(u), wrap_v(v));
    const ChartJet j = jet(u, v);
    return j.pu.cross(j.pv).norm();
}

double ParamSurface::chord_sq(double u1, double v1, double u2, double v2) const {
    return chord_sq_offset(u2, v2, u1 - u2, v1 - v2);
}

double ParamSurface::chord_sq_offset(double u, double v, double du, double dv) const {
    if (chordSq_) return chordSq_(wrap_u(u), wrap_v(v), du, dv);
    return displacement(u, v, du, dv).squaredNorm();
}

Vec3 ParamSurface::displacement(double u, double v, double du, double dv) const {
    if (displacement_) return displacement_(wrap_u(u), wrap_v(v), du, dv);
    return point(u + du, v + dv) - point(u, v);
}

LocalizedChart ParamSurface::localize(double u, double v) const {
    if (localize_) return localize_(wrap_u(u), wrap_v(v));
    return {std::make_shared<const ParamSurface>(*this), wrap_u(u), wrap_v(v)};
}

// ---------------------------------------------------------------------------
// Curve

Curve::Curve(double t0, double t1, ChartFn chart, ChartFn derivative)
    : t0_(t0), t1_(t1), chart_(std::move(chart)), derivative_(std::move(derivative)) {
    if (!(t1_ > t0_)) throw DomainError("curve parameter interval must be non-empty");
    if (!chart_ || !derivative_) throw DomainError("curve needs a chart and its derivative");
}

Curve& Curve::with_chord_sq(ChordSqFn fn) {
    chordSq_ = std::move(fn);
    return *this;
}
Curve& Curve::with_length_scale(double scale) {
    lengthScale_ = scale;
    return *this;
}
Curve& Curve::with_descriptor(nlohmann::json descriptor) {
    descriptor_ = std::move(descriptor);
    return *this;
}

double Curve::wrap(double t) const { return wrap_periodic(t, t0_, t1_); }

Vec3 Curve::point(double t) const { return chart_(wrap(t)); }

double Curve::speed(double t) const {
    const double s = derivative_(wrap(t)).norm();
    if (!(s > 0.0)) throw DomainError("curve is not regular");
    return s;
}

double Curve::chord_sq(double ta, double tb) const { return chord_sq_offset(tb, ta - tb); }

double Curve::chord_sq_offset(double t, double dt) const {
    if (chordSq_) return chordSq_(wrap(t), dt);
    return (point(t + dt) - point(t)).squaredNorm();
}

// ---------------------------------------------------------------------------
// Torus of revolution

RevolutionTorus::RevolutionTorus(double R, double scale) : R_(R), scale_(scale) {
    if (!(R > 1.0)) throw DomainError("torus of revolution needs R > 1");
    if (!(scale > 0.0)) throw DomainError("torus scale must be positive");
}

Vec3 torus_chart(const RevolutionTorus& T, double u, double v) {
    const double rho = T.R() + std::cos(u);
    return T.scale() * Vec3(rho * std::cos(v), rho * std::sin(v), std::sin(u));
}

double chord_dist_sq(const RevolutionTorus& T, double alpha, double u, double v) {
    const double R = T.R();
    const double d = 2.0 * R * R + 2.0 + 2.0 * R * (std::cos(alpha) + std::cos(u)) -
                     2.0 * std::sin(alpha) * std::sin(u) -
                     2.0 * (R + std::cos(alpha)) * (R + std::cos(u)) * std::cos(v);
    return sq(T.scale()) * d;
}

TorusTS torus_ts(const RevolutionTorus& T, double alpha, double u, double v) {
    return {2.0 * std::sin((u - alpha) / 2.0), 2.0 * (T.R() + std::cos(alpha)) * std::sin(v / 2.0)};
}

double chord_dist_sq_ts(const RevolutionTorus& T, double alpha, double t, double s) {
    const double c = T.R() + std::cos(alpha);
    const double t2 = t * t, s2 = s * s;
    const double d = t2 + s2 - std::cos(alpha) / (2.0 * c) * t2 * s2 -
                     std::sin(alpha) / (2.0 * c) * s2 * t * std::sqrt(std::max(0.0, 4.0 - t2));
    return sq(T.scale()) * d;
}

TorusThetaPhi torus_theta_phi(double alpha, double u, double v) {
    return {(kPi + alpha - u) / 2.0, (kPi - v) / 2.0};
}

double chord_dist_sq_theta_phi(const RevolutionTorus& T, double alpha, double theta, double phi) {
    const double c = T.R() + std::cos(alpha);
    const double ct = std::cos(theta);
    const double d = sq(ct) + c * (c - 2.0 * std::cos(alpha) * sq(ct) -
                                   2.0 * std::sin(alpha) * std::abs(std::sin(theta)) * ct) *
                                  sq(std::cos(phi));
    return 4.0 * sq(T.scale()) * d;
}

SurfacePointData torus_curvature(const RevolutionTorus& T, double alpha) {
    const double s = T.scale();
    const double c = T.R() + std::cos(alpha);
    SurfacePointData d;
    d.u = alpha;
    d.v = 0.0;
    d.position = torus_chart(T, alpha, 0.0);
    d.normal = Vec3(std::cos(alpha), 0.0, std::sin(alpha));
    d.kappa1 = 1.0 / s;
    d.kappa2 = std::cos(alpha) / (c * s);
    d.gauss = std::cos(alpha) / (c * s * s);
    d.delta = sq(T.R() / c) / (s * s);
    d.areaDensity = s * s * c;
    return d;
}

// ---------------------------------------------------------------------------
// Curvature

SurfacePointData curvature_from_jet(const ChartJet& jet, double u, double v, double normalSign) {
    const Vec3 cross = jet.pu.cross(jet.pv);
    const double density = cross.norm();
    if (!(density > 1e-12)) {
        std::ostringstream msg;
        msg << "degenerate chart at (" << u << ", " << v << "): area density " << density;
        throw DomainError(msg.str());
    }
    const Vec3 n = normalSign * cross / density;

    const double E = jet.pu.dot(jet.pu), F = jet.pu.dot(jet.pv), G = jet.pv.dot(jet.pv);
    // Second fundamental form with the sign that makes an outward-oriented
    // sphere positively curved.
    const double e = -jet.puu.dot(n), f = -jet.puv.dot(n), g = -jet.pvv.dot(n);
    const double det = E * G - F * F;

    const double K = (e * g - f * f) / det;
    const double H = (e * G - 2.0 * f * F + g * E) / (2.0 * det);
    const double disc = std::max(0.0, H * H - K);
    const double root = std::sqrt(disc);

    SurfacePointData d;
    d.u = u;
    d.v = v;
    d.position = jet.p;
    d.normal = n;
    d.kappa1 = H + root;
    d.kappa2 = H - root;
    d.gauss = d.kappa1 * d.kappa2;
    d.delta = 4.0 * disc;
    d.areaDensity = density;
    return d;
}

SurfacePointData point_data(const ParamSurface& S, double u, double v) {
    const double uw = S.wrap_u(u), vw = S.wrap_v(v);
    return curvature_from_jet(S.jet(uw, vw), uw, vw, S.normal_sign());
}

ChartJet numeric_jet(const ParamSurface& S, double u, double v, double step) {
    if (!(step > 0.0) || step > 1e-2) throw DomainError("numeric curvature step must lie in (0, 1e-2]");
    const auto& dom = S.domain();
    const double hu0 = step * dom.span_u();
    const double hv0 = step * dom.span_v();
    // Differences of displacements from p, so that large coordinates do not
    // swamp the second differences.
    auto f = [&](double du, double dv) { return S.displacement(u, v, du, dv); };

    const Vec3 p = S.point(u, v);
    struct Diffs {
        Vec3 pu, pv, puu, puv, pvv;
    };
    auto diffs = [&](double hu, double hv) {
        const Vec3 up = f(hu, 0.0), um = f(-hu, 0.0);
        const Vec3 vp = f(0.0, hv), vm = f(0.0, -hv);
        Diffs d;
        d.pu = (up - um) / (2.0 * hu);
        d.pv = (vp - vm) / (2.0 * hv);
        d.puu = (up + um) / (hu * hu);
        d.pvv = (vp + vm) / (hv * hv);
        d.puv = (f(hu, hv) - f(hu, -hv) - f(-hu, hv) + f(-hu, -hv)) / (4.0 * hu * hv);
        return d;
    };
    const Diffs coarse = diffs(hu0, hv0);
    const Diffs fine = diffs(hu0 / 2.0, hv0 / 2.0);
    auto rich = [](const Vec3& c, const Vec3& fn) -> Vec3 { return (4.0 * fn - c) / 3.0; };

    ChartJet j;
    j.p = p;
    j.pu = rich(coarse.pu, fine.pu);
    j.pv = rich(coarse.pv, fine.pv);
    j.puu = rich(coarse.puu, fine.puu);
    j.puv = rich(coarse.puv, fine.puv);
    j.pvv = rich(coarse.pvv, fine.pvv);
    return j;
}

SurfacePointData numeric_curvature(const ParamSurface& S, double u, double v, double step) {
    const double uw = S.wrap_u(u), vw = S.wrap_v(v);
    return curvature_from_jet(numeric_jet(S, uw, vw, step), uw, vw, S.normal_sign());
}

// ---------------------------------------------------------------------------
// Concrete surfaces and curves

ParamSurface make_torus_surface(const RevolutionTorus& T) {
    const double R = T.R(), s = T.scale();
    ParamSurface S(ChartDomain{}, [T](double u, double v) { return torus_chart(T, u, v); });
    S.with_jet([R, s](double u, double v) {
         const double cu = std::cos(u), su = std::sin(u), cv = std::cos(v), sv = std::sin(v);
         const double rho = R + cu;
         ChartJet j;
         j.p = s * Vec3(rho * cv, rho * sv, su);
         j.pu = s * Vec3(-su * cv, -su * sv, cu);
         j.pv = s * Vec3(-rho * sv, rho * cv, 0.0);
         j.puu = s * Vec3(-cu * cv, -cu * sv, -su);
         j.puv = s * Vec3(su * sv, -su * cv, 0.0);
         j.pvv = s * Vec3(-rho * cv, -rho * sv, 0.0);
         return j;
     })
        .with_area_density([R, s](double u, double) { return s * s * (R + std::cos(u)); })
        // 4 sin^2(du/2) + 4 rho1 rho2 sin^2(dv/2): no cancellation for nearby points.
        .with_chord_sq([R, s](double u, double, double du, double dv) {
            const double a = std::sin(du / 2.0);
            const double b = std::sin(dv / 2.0);
            return 4.0 * s * s * (a * a + (R + std::cos(u + du)) * (R + std::cos(u)) * b * b);
        })
        .with_reach(s * std::min(1.0, R - 1.0))
        .with_diameter(2.0 * s * (R + 1.0))
        .with_revolution(true)
        .with_normal_sign(-1.0)
        .with_descriptor({{"type", "torus"}, {"R", R}, {"scale", s}});
    return S;
}

namespace {

Vec3 unit_dir(double theta, double phi) {
    return Vec3(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
}

Mat3 rot_y(double a) {
    Mat3 m;
    m << std::cos(a), 0.0, std::sin(a), 0.0, 1.0, 0.0, -std::sin(a), 0.0, std::cos(a);
    return m;
}

Mat3 rot_z(double a) {
    Mat3 m;
    m << std::cos(a), -std::sin(a), 0.0, std::sin(a), std::cos(a), 0.0, 0.0, 0.0, 1.0;
    return m;
}

} // namespace

ParamSurface make_sphere(double radius, const Vec3& center, const Mat3& rotation) {
    if (!(radius > 0.0)) throw DomainError("sphere radius must be positive");
    ChartDomain dom{0.0, kPi, 0.0, kTwoPi, false, true};
    ParamSurface S(dom, [=](double u, double v) -> Vec3 { return center + radius * (rotation * unit_dir(u, v)); });
    S.with_jet([=](double u, double v) {
         const double cu = std::cos(u), su = std::sin(u), cv = std::cos(v), sv = std::sin(v);
         ChartJet j;
         j.p = center + radius * (rotation * Vec3(su * cv, su * sv, cu));
         j.pu = radius * (rotation * Vec3(cu * cv, cu * sv, -su));
         j.pv = radius * (rotation * Vec3(-su * sv, su * cv, 0.0));
         j.puu = radius * (rotation * Vec3(-su * cv, -su * sv, -cu));
         j.puv = radius * (rotation * Vec3(-cu * sv, cu * cv, 0.0));
         j.pvv = radius * (rotation * Vec3(-su * cv, -su * sv, 0.0));
         return j;
     })
        .with_area_density([radius](double u, double) { return radius * radius * std::sin(u); })
        // Haversine form of the chord.
        .with_chord_sq([radius](double u, double, double du, double dv) {
            const double a = std::sin(du / 2.0);
            const double b = std::sin(dv / 2.0);
            return 4.0 * radius * radius * (a * a + std::sin(u + du) * std::sin(u) * b * b);
        })
        // Rotate so that the requested point sits on the equator at v = 0,
        // far from the chart's poles.
        .with_localizer([=](double u, double v) {
            const Mat3 q = rotation * rot_z(v) * rot_y(u - kPi / 2.0);
            return LocalizedChart{std::make_shared<const ParamSurface>(make_sphere(radius, center, q)), kPi / 2.0,
                                  0.0};
        })
        .with_reach(radius)
        .with_diameter(2.0 * radius)
        .with_revolution(true)
        .with_normal_sign(1.0)
        .with_descriptor({{"type", "sphere"}, {"radius", radius}});
    return S;
}

ParamSurface make_plane_patch(double halfWidth) {
    if (!(halfWidth > 0.0)) throw DomainError("plane patch half width must be positive");
    ChartDomain dom{-halfWidth, halfWidth, -halfWidth, halfWidth, false, false};
    ParamSurface S(dom, [](double u, double v) { return Vec3(u, v, 0.0); });
    S.with_jet([](double u, double v) {
         ChartJet j;
         j.p = Vec3(u, v, 0.0);
         j.pu = Vec3::UnitX();
         j.pv = Vec3::UnitY();
         j.puu = j.puv = j.pvv = Vec3::Zero();
         return j;
     })
        .with_area_density([](double, double) { return 1.0; })
        .with_reach(halfWidth)
        .with_diameter(2.0 * std::sqrt(2.0) * halfWidth)
        .with_descriptor({{"type", "plane_patch"}, {"half_width", halfWidth}});
    return S;
}

Curve make_circle(double radius, const Vec3& center) {
    if (!(radius > 0.0)) throw DomainError("circle radius must be positive");
    Curve c(
        0.0, kTwoPi, [=](double t) -> Vec3 { return center + radius * Vec3(std::cos(t), std::sin(t), 0.0); },
        [=](double t) -> Vec3 { return radius * Vec3(-std::sin(t), std::cos(t), 0.0); });
    c.with_chord_sq([radius](double, double dt) {
         const double s = 2.0 * radius * std::sin(dt / 2.0);
         return s * s;
     })
        .with_length_scale(radius)
        .with_descriptor({{"type", "circle"}, {"radius", radius}});
    return c;
}

Curve make_ellipse(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("ellipse semi-axes must be positive");
    Curve c(
        0.0, kTwoPi, [=](double t) -> Vec3 { return Vec3(a * std::cos(t), b * std::sin(t), 0.0); },
        [=](double t) -> Vec3 { return Vec3(-a * std::sin(t), b * std::cos(t), 0.0); });
    // (a cos t1 - a cos t2, b sin t1 - b sin t2) written with half-angle products.
    c.with_chord_sq([a, b](double t, double dt) {
         const double h = std::sin(dt / 2.0);
         const double m1 = std::sin(t + dt / 2.0), m2 = std::cos(t + dt / 2.0);
         return 4.0 * h * h * (a * a * m1 * m1 + b * b * m2 * m2);
     })
        .with_length_scale(std::min(a, b) * std::min(a, b) / std::max(a, b))
        .with_descriptor({{"type", "ellipse"}, {"a", a}, {"b", b}});
    return c;
}

} // namespace renorm
