#pragma once

#include <functional>
#include <memory>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

namespace renorm {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kTwoPi = 2.0 * kPi;

/// Parameter rectangle of a chart. Periodic axes wrap; the other axes are
/// closed intervals.
struct ChartDomain {
    double u0 = 0.0, u1 = kTwoPi;
    double v0 = 0.0, v1 = kTwoPi;
    bool periodicU = true;
    bool periodicV = true;

    double span_u() const { return u1 - u0; }
    double span_v() const { return v1 - v0; }
};

/// Position and first/second partial derivatives of a chart at one point.
struct ChartJet {
    Vec3 p, pu, pv, puu, puv, pvv;
};

/// Everything the energy needs to know about a surface at one point.
/// Curvatures are in 1/length, `areaDensity` is |p_u x p_v|.
struct SurfacePointData {
    double u = 0.0, v = 0.0;
    Vec3 position = Vec3::Zero();
    Vec3 normal = Vec3::Zero();
    double kappa1 = 0.0, kappa2 = 0.0;
    double gauss = 0.0;
    double delta = 0.0;
    double areaDensity = 0.0;
};

class ParamSurface;

/// A chart of the same surface, re-centred so that it is regular around the
/// point (u, v).
struct LocalizedChart {
    std::shared_ptr<const ParamSurface> surface;
    double u = 0.0, v = 0.0;
};

/// A surface given by a single chart (u,v) -> R^3 over a rectangle.
///
/// Only `chart` is required. The optional evaluators let concrete surfaces
/// supply exact derivatives, an exact area density, a cancellation-free chord
/// length and a re-centring hook for charts with coordinate singularities
/// (sphere poles). Evaluators see periodic parameters reduced to the domain.
/// The chord evaluator takes a base point and parameter offsets, so that short
/// chords keep full relative precision.
class ParamSurface {
public:
    using ChartFn = std::function<Vec3(double, double)>;
    using JetFn = std::function<ChartJet(double, double)>;
    using DensityFn = std::function<double(double, double)>;
    using ChordSqFn = std::function<double(double, double, double, double)>;
    using LocalizeFn = std::function<LocalizedChart(double, double)>;
    using DisplacementFn = std::function<Vec3(double, double, double, double)>;

    ParamSurface(ChartDomain domain, ChartFn chart);

    ParamSurface& with_jet(JetFn fn);
    ParamSurface& with_area_density(DensityFn fn);
    ParamSurface& with_chord_sq(ChordSqFn fn);
    ParamSurface& with_localizer(LocalizeFn fn);
    ParamSurface& with_displacement(DisplacementFn fn);
    ParamSurface& with_reach(double reach);
    ParamSurface& with_diameter(double diameter);
    ParamSurface& with_revolution(bool rotationallySymmetric);
    ParamSurface& with_normal_sign(double sign);
    ParamSurface& with_descriptor(nlohmann::json descriptor);

    const ChartDomain& domain() const { return domain_; }

    Vec3 point(double u, double v) const;
    ChartJet jet(double u, double v) const;
    double area_density(double u, double v) const;
    double chord_sq(double u1, double v1, double u2, double v2) const;
    /// |p(u + du, v + dv) - p(u, v)|^2, exact in the offsets.
    double chord_sq_offset(double u, double v, double du, double dv) const;
    /// p(u + du, v + dv) - p(u, v), exact in the offsets when supplied.
    Vec3 displacement(double u, double v, double du, double dv) const;
    LocalizedChart localize(double u, double v) const;

    /// Length below which every chord ball meets the surface in one disc.
    double reach() const { return reach_; }
    double diameter() const { return diameter_; }
    /// True when the surface is invariant under rotation in the v parameter,
    /// so pointwise quantities depend on u alone.
    bool revolution() const { return revolution_; }
    /// +1 when p_u x p_v points outward, -1 otherwise.
    double normal_sign() const { return normalSign_; }
    bool has_exact_jet() const { return static_cast<bool>(jet_); }
    bool has_localizer() const { return static_cast<bool>(localize_); }
    const nlohmann::json& descriptor() const { return descriptor_; }

    double wrap_u(double u) const;
    double wrap_v(double v) const;

    const ChartFn& chart_fn() const { return chart_; }

private:
    ChartDomain domain_;
    ChartFn chart_;
    JetFn jet_;
    DensityFn density_;
    ChordSqFn chordSq_;
    LocalizeFn localize_;
    DisplacementFn displacement_;
    double reach_ = 1.0;
    double diameter_ = 1.0;
    bool revolution_ = false;
    double normalSign_ = 1.0;
    nlohmann::json descriptor_ = nlohmann::json::object();
};

/// Closed regular curve t -> R^3 over a periodic interval.
class Curve {
public:
    using ChartFn = std::function<Vec3(double)>;
    using ChordSqFn = std::function<double(double, double)>;

    Curve(double t0, double t1, ChartFn chart, ChartFn derivative);

    Curve& with_chord_sq(ChordSqFn fn);
    Curve& with_length_scale(double scale);
    Curve& with_descriptor(nlohmann::json descriptor);

    double t0() const { return t0_; }
    double t1() const { return t1_; }
    double period() const { return t1_ - t0_; }

    Vec3 point(double t) const;
    double speed(double t) const;
    double chord_sq(double ta, double tb) const;
    /// |K(t + dt) - K(t)|^2, exact in the offset.
    double chord_sq_offset(double t, double dt) const;
    /// Curvature radius scale used to size cutoff ladders.
    double length_scale() const { return lengthScale_; }
    const nlohmann::json& descriptor() const { return descriptor_; }

private:
    double wrap(double t) const;

    double t0_, t1_;
    ChartFn chart_;
    ChartFn derivative_;
    ChordSqFn chordSq_;
    double lengthScale_ = 1.0;
    nlohmann::json descriptor_ = nlohmann::json::object();
};

/// Torus of revolution T_R: unit generating circle whose centre is at
/// distance R from the axis, optionally scaled by a similarity factor.
class RevolutionTorus {
public:
    explicit RevolutionTorus(double R, double scale = 1.0);

    double R() const { return R_; }
    double scale() const { return scale_; }

private:
    double R_;
    double scale_;
};

Vec3 torus_chart(const RevolutionTorus& T, double u, double v);

/// |torus_chart(u,v) - torus_chart(alpha,0)|^2 in the expanded trigonometric form.
double chord_dist_sq(const RevolutionTorus& T, double alpha, double u, double v);

/// Substituted coordinates t = 2 sin((u-alpha)/2), s = 2(R+cos alpha) sin(v/2).
struct TorusTS {
    double t, s;
};
TorusTS torus_ts(const RevolutionTorus& T, double alpha, double u, double v);
/// Dist^2 as a polynomial-like expression in (t, s); valid for |u - alpha| <= pi.
double chord_dist_sq_ts(const RevolutionTorus& T, double alpha, double t, double s);

/// Angular coordinates theta = (pi + alpha - u)/2, phi = (pi - v)/2.
struct TorusThetaPhi {
    double theta, phi;
};
TorusThetaPhi torus_theta_phi(double alpha, double u, double v);
/// Dist^2 in (theta, phi); valid for |u - alpha| <= pi.
double chord_dist_sq_theta_phi(const RevolutionTorus& T, double alpha, double theta, double phi);

/// Closed-form curvature data at p(alpha, 0); outward normal.
SurfacePointData torus_curvature(const RevolutionTorus& T, double alpha);

/// Curvature data from a chart jet (shape operator of the two fundamental forms).
SurfacePointData curvature_from_jet(const ChartJet& jet, double u, double v, double normalSign);

/// Curvature data from the surface's own jet (exact when available).
SurfacePointData point_data(const ParamSurface& S, double u, double v);

/// Central-difference jet with one Richardson level. `step` is relative to the
/// domain span of each axis.
ChartJet numeric_jet(const ParamSurface& S, double u, double v, double step = 1e-4);

/// Curvature data from finite differences of the chart, ignoring any exact jet.
SurfacePointData numeric_curvature(const ParamSurface& S, double u, double v, double step = 1e-4);

ParamSurface make_torus_surface(const RevolutionTorus& T);

/// Sphere of radius r. The polar axis is `rotation * e_z`.
ParamSurface make_sphere(double radius, const Vec3& center = Vec3::Zero(),
                         const Mat3& rotation = Mat3::Identity());

/// Flat square [-halfWidth, halfWidth]^2 in the z = 0 plane.
ParamSurface make_plane_patch(double halfWidth);

Curve make_circle(double radius, const Vec3& center = Vec3::Zero());
Curve make_ellipse(double a, double b);

} // namespace renorm
