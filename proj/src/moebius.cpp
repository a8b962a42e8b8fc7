#include "renorm/moebius.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "renorm/errors.hpp"

namespace renorm {

// ---------------------------------------------------------------------------
// MoebiusMap

MoebiusMap MoebiusMap::identity() { return similarity(Similarity{}); }

MoebiusMap MoebiusMap::similarity(const Similarity& s) {
    if (!(s.scale > 0.0)) throw DomainError("similarity scale must be positive");
    MoebiusMap m;
    m.steps_.push_back(s);
    return m;
}

MoebiusMap MoebiusMap::scaling(double factor) {
    Similarity s;
    s.scale = factor;
    return similarity(s);
}

MoebiusMap MoebiusMap::inversion(const Vec3& center, double radius) {
    if (!(radius > 0.0)) throw DomainError("inversion radius must be positive");
    MoebiusMap m;
    m.steps_.push_back(Inversion{center, radius});
    return m;
}

MoebiusMap MoebiusMap::then(const MoebiusMap& next) const {
    MoebiusMap m = *this;
    m.steps_.insert(m.steps_.end(), next.steps_.begin(), next.steps_.end());
    return m;
}

std::string MoebiusMap::kind() const {
    if (steps_.size() > 1) return "composition";
    return std::holds_alternative<Similarity>(steps_.front()) ? "similarity" : "inversion";
}

bool MoebiusMap::is_similarity() const {
    return std::all_of(steps_.begin(), steps_.end(), [](const Step& s) { return std::holds_alternative<Similarity>(s); });
}

namespace {

Vec3 invert(const Inversion& inv, const Vec3& p) {
    const Vec3 d = p - inv.center;
    const double d2 = d.squaredNorm();
    if (!(d2 > 1e-24 * inv.radius * inv.radius)) throw SingularPointError("point at an inversion center");
    return inv.center + (inv.radius * inv.radius / d2) * d;
}

Vec3 step_apply(const MoebiusMap::Step& s, const Vec3& p) {
    if (const auto* sim = std::get_if<Similarity>(&s)) return sim->scale * (sim->rotation * p) + sim->translation;
    return invert(std::get<Inversion>(s), p);
}

} // namespace

Vec3 MoebiusMap::apply(const Vec3& p) const {
    Vec3 x = p;
    for (const auto& s : steps_) x = step_apply(s, x);
    return x;
}

double MoebiusMap::conformal_factor(const Vec3& p) const {
    Vec3 x = p;
    double f = 1.0;
    for (const auto& s : steps_) {
        if (const auto* sim = std::get_if<Similarity>(&s))
            f *= sim->scale;
        else {
            const auto& inv = std::get<Inversion>(s);
            f *= inv.radius * inv.radius / (x - inv.center).squaredNorm();
        }
        x = step_apply(s, x);
    }
    return f;
}

double MoebiusMap::chord_sq(const Vec3& p, const Vec3& q, double baseChordSq) const {
    Vec3 a = p, b = q;
    double d2 = baseChordSq;
    for (const auto& s : steps_) {
        if (const auto* sim = std::get_if<Similarity>(&s)) {
            d2 *= sim->scale * sim->scale;
        } else {
            const auto& inv = std::get<Inversion>(s);
            const double r2 = inv.radius * inv.radius;
            d2 *= (r2 / (a - inv.center).squaredNorm()) * (r2 / (b - inv.center).squaredNorm());
        }
        a = step_apply(s, a);
        b = step_apply(s, b);
    }
    return d2;
}

Vec3 MoebiusMap::displace(const Vec3& p, const Vec3& d) const {
    Vec3 x = p, dx = d;
    for (const auto& s : steps_) {
        if (const auto* sim = std::get_if<Similarity>(&s)) {
            dx = sim->scale * (sim->rotation * dx);
        } else {
            // b/|b|^2 - a/|a|^2 = (|a|^2 d - a (2 a.d + |d|^2)) / (|a|^2 |b|^2), b = a + d.
            const auto& inv = std::get<Inversion>(s);
            const Vec3 a = x - inv.center;
            const Vec3 b = a + dx;
            const double a2 = a.squaredNorm(), b2 = b.squaredNorm();
            const double grow = 2.0 * a.dot(dx) + dx.squaredNorm();
            dx = inv.radius * inv.radius * (a2 * dx - grow * a) / (a2 * b2);
        }
        x = step_apply(s, x);
    }
    return dx;
}

void to_json(nlohmann::json& j, const MoebiusMap& m) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : m.steps()) {
        if (const auto* sim = std::get_if<Similarity>(&s)) {
            std::vector<double> rot(sim->rotation.data(), sim->rotation.data() + 9);
            steps.push_back({{"type", "similarity"},
                             {"scale", sim->scale},
                             {"rotation_col_major", rot},
                             {"translation", {sim->translation.x(), sim->translation.y(), sim->translation.z()}}});
        } else {
            const auto& inv = std::get<Inversion>(s);
            steps.push_back({{"type", "inversion"},
                             {"center", {inv.center.x(), inv.center.y(), inv.center.z()}},
                             {"radius", inv.radius}});
        }
    }
    j = {{"kind", m.kind()}, {"steps", steps}};
}

// ---------------------------------------------------------------------------
// Composed surfaces

namespace {

constexpr int kSampleGrid = 96;

std::vector<Vec3> sample_surface(const ParamSurface& S) {
    const ChartDomain& d = S.domain();
    std::vector<Vec3> pts;
    pts.reserve(kSampleGrid * kSampleGrid);
    for (int i = 0; i < kSampleGrid; ++i)
        for (int k = 0; k < kSampleGrid; ++k) {
            const double u = d.u0 + d.span_u() * (d.periodicU ? i : i + 0.5) / kSampleGrid;
            const double v = d.v0 + d.span_v() * (d.periodicV ? k : k + 0.5) / kSampleGrid;
            pts.push_back(S.point(u, v));
        }
    return pts;
}

double bbox_diagonal(const std::vector<Vec3>& pts) {
    Vec3 lo = pts.front(), hi = pts.front();
    for (const auto& p : pts) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return (hi - lo).norm();
}

struct CompositionGeometry {
    double minFactor = 1.0;
    double diameter = 1.0;
};

/// Distance from c to the surface x -> prefix(S(u, v)): nearest grid sample,
/// then a shrinking local grid search around it.
double distance_to_image(const ParamSurface& S, const std::vector<Vec3>& pts, const MoebiusMap::Step* first,
                         const MoebiusMap::Step* last, const Vec3& c) {
    const ChartDomain& d = S.domain();
    auto image = [&](double u, double v) {
        Vec3 x = S.point(u, v);
        for (const auto* s = first; s != last; ++s) x = step_apply(*s, x);
        return x;
    };
    std::size_t best = 0;
    for (std::size_t m = 1; m < pts.size(); ++m)
        if ((pts[m] - c).squaredNorm() < (pts[best] - c).squaredNorm()) best = m;
    const int bi = static_cast<int>(best) / kSampleGrid, bk = static_cast<int>(best) % kSampleGrid;
    double u = d.u0 + d.span_u() * (d.periodicU ? bi : bi + 0.5) / kSampleGrid;
    double v = d.v0 + d.span_v() * (d.periodicV ? bk : bk + 0.5) / kSampleGrid;
    double hu = d.span_u() / kSampleGrid, hv = d.span_v() / kSampleGrid;
    double dist = (pts[best] - c).norm();
    for (int iter = 0; iter < 30; ++iter) {
        double bu = u, bv = v;
        for (int i = -4; i <= 4; ++i)
            for (int k = -4; k <= 4; ++k) {
                double uu = u + hu * i / 4.0, vv = v + hv * k / 4.0;
                if (!d.periodicU) uu = std::clamp(uu, d.u0, d.u1);
                if (!d.periodicV) vv = std::clamp(vv, d.v0, d.v1);
                const double r = (image(uu, vv) - c).norm();
                if (r < dist) {
                    dist = r;
                    bu = uu;
                    bv = vv;
                }
            }
        u = bu;
        v = bv;
        hu /= 2.0;
        hv /= 2.0;
    }
    return dist;
}

/// Checks every inversion center against the image of S under the preceding
/// steps and measures the conformal factor range on a sample grid.
CompositionGeometry inspect(const ParamSurface& S, const MoebiusMap& map) {
    std::vector<Vec3> pts = sample_surface(S);
    const auto& steps = map.steps();
    for (std::size_t n = 0; n < steps.size(); ++n) {
        const auto& step = steps[n];
        if (const auto* inv = std::get_if<Inversion>(&step)) {
            const double diam = bbox_diagonal(pts);
            const double closest = distance_to_image(S, pts, steps.data(), steps.data() + n, inv->center);
            if (!(closest >= 1e-3 * diam)) {
                std::ostringstream msg;
                msg << "inversion center lies within " << closest << " of the surface (diameter " << diam << ")";
                throw DomainError(msg.str());
            }
        }
        for (auto& p : pts) p = step_apply(step, p);
    }
    CompositionGeometry g;
    g.diameter = bbox_diagonal(pts);
    const std::vector<Vec3> base = sample_surface(S);
    g.minFactor = std::numeric_limits<double>::infinity();
    for (const auto& p : base) g.minFactor = std::min(g.minFactor, map.conformal_factor(p));
    return g;
}

ParamSurface compose_unchecked(const ParamSurface& S, const MoebiusMap& map, const CompositionGeometry& g) {
    auto base = std::make_shared<const ParamSurface>(S);
    ParamSurface out(S.domain(), [base, map](double u, double v) { return map.apply(base->point(u, v)); });
    out.with_area_density([base, map](double u, double v) {
           const double f = map.conformal_factor(base->point(u, v));
           return base->area_density(u, v) * f * f;
       })
        .with_displacement([base, map](double u, double v, double du, double dv) {
            return map.displace(base->point(u, v), base->displacement(u, v, du, dv));
        })
        .with_chord_sq([base, map](double u, double v, double du, double dv) {
            const Vec3 p = base->point(u + du, v + dv), q = base->point(u, v);
            return map.chord_sq(p, q, base->chord_sq_offset(u, v, du, dv));
        })
        // Half the scaled base reach: the image curvature can exceed the
        // scaled base curvature where the factor varies.
        .with_reach(0.5 * S.reach() * g.minFactor)
        .with_diameter(g.diameter)
        .with_revolution(S.revolution() && map.is_similarity());

    int flips = 0;
    for (const auto& s : map.steps()) {
        if (std::holds_alternative<Inversion>(s))
            ++flips;
        else if (std::get<Similarity>(s).rotation.determinant() < 0.0)
            ++flips;
    }
    out.with_normal_sign(flips % 2 == 0 ? S.normal_sign() : -S.normal_sign());
    out.with_descriptor({{"type", "moebius_image"}, {"base", S.descriptor()}, {"map", map}});

    if (map.is_similarity() && S.has_exact_jet()) {
        // Similarities are linear, so the jet maps directly.
        const auto& sim = std::get<Similarity>(map.steps().front());
        if (map.steps().size() == 1) {
            out.with_jet([base, sim](double u, double v) {
                ChartJet j = base->jet(u, v);
                const Mat3 A = sim.scale * sim.rotation;
                j.p = A * j.p + sim.translation;
                j.pu = A * j.pu;
                j.pv = A * j.pv;
                j.puu = A * j.puu;
                j.puv = A * j.puv;
                j.pvv = A * j.pvv;
                return j;
            });
        }
    }

    // Re-centre through the base chart when it has coordinate singularities.
    if (S.has_localizer())
        out.with_localizer([base, map, g](double u, double v) {
        const LocalizedChart lc = base->localize(u, v);
        return LocalizedChart{std::make_shared<const ParamSurface>(compose_unchecked(*lc.surface, map, g)), lc.u,
                              lc.v};
    });
    return out;
}

} // namespace

ParamSurface compose_surface(const ParamSurface& S, const MoebiusMap& map) {
    return compose_unchecked(S, map, inspect(S, map));
}

// ---------------------------------------------------------------------------
// Torus fitting and the Clifford torus

void to_json(nlohmann::json& j, const TorusFit& f) {
    j = {{"center", {f.center.x(), f.center.y(), f.center.z()}},
         {"axis", {f.axis.x(), f.axis.y(), f.axis.z()}},
         {"center_distance", f.centerDistance},
         {"tube_radius", f.tubeRadius},
         {"ratio", f.ratio},
         {"max_residual", f.maxResidual},
         {"iterations", f.iterations}};
}

namespace {

Vec3 axis_from_angles(double theta, double phi) {
    return Vec3(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
}

/// Residuals sqrt((rho - Rc)^2 + h^2) - r; parameters (c, theta, phi, Rc, r).
struct TorusResidual {
    using Scalar = double;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;

    const std::vector<Vec3>* pts;
    int inputs() const { return 7; }
    int values() const { return static_cast<int>(pts->size()); }

    int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
        const Vec3 c(x(0), x(1), x(2));
        const Vec3 n = axis_from_angles(x(3), x(4));
        for (std::size_t i = 0; i < pts->size(); ++i) {
            const Vec3 q = (*pts)[i] - c;
            const double h = q.dot(n);
            const double rho = (q - h * n).norm();
            f(static_cast<Eigen::Index>(i)) = std::hypot(rho - x(5), h) - x(6);
        }
        return 0;
    }
};

} // namespace

TorusFit fit_torus(const std::vector<Vec3>& raw) {
    if (raw.size() < 16) throw DomainError("torus fit needs at least 16 points");
    // Normalise for conditioning.
    Vec3 centroid = Vec3::Zero();
    for (const auto& p : raw) centroid += p;
    centroid /= static_cast<double>(raw.size());
    double scale = 0.0;
    for (const auto& p : raw) scale += (p - centroid).squaredNorm();
    scale = std::sqrt(scale / static_cast<double>(raw.size()));
    std::vector<Vec3> pts;
    pts.reserve(raw.size());
    for (const auto& p : raw) pts.push_back((p - centroid) / scale);

    // Initial guess: the axis is the direction of least spread.
    Mat3 cov = Mat3::Zero();
    for (const auto& p : pts) cov += p * p.transpose();
    Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
    const Vec3 n0 = es.eigenvectors().col(0);
    double Rc0 = 0.0;
    for (const auto& p : pts) Rc0 += (p - p.dot(n0) * n0).norm();
    Rc0 /= static_cast<double>(pts.size());
    double r0 = 0.0;
    for (const auto& p : pts) r0 += std::hypot((p - p.dot(n0) * n0).norm() - Rc0, p.dot(n0));
    r0 /= static_cast<double>(pts.size());

    Eigen::VectorXd x(7);
    x << 0.0, 0.0, 0.0, std::acos(std::clamp(n0.z(), -1.0, 1.0)), std::atan2(n0.y(), n0.x()), Rc0, r0;

    TorusResidual fn{&pts};
    Eigen::NumericalDiff<TorusResidual, Eigen::Central> nd(fn);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<TorusResidual, Eigen::Central>> lm(nd);
    lm.parameters.ftol = 1e-15;
    lm.parameters.xtol = 1e-15;
    lm.parameters.maxfev = 20000;
    lm.minimize(x);

    Eigen::VectorXd f(static_cast<Eigen::Index>(pts.size()));
    fn(x, f);

    TorusFit out;
    out.center = centroid + scale * Vec3(x(0), x(1), x(2));
    out.axis = axis_from_angles(x(3), x(4));
    if (out.axis.z() < 0.0) out.axis = -out.axis;
    out.centerDistance = std::abs(x(5)) * scale;
    out.tubeRadius = std::abs(x(6)) * scale;
    out.ratio = out.centerDistance / out.tubeRadius;
    out.maxResidual = f.cwiseAbs().maxCoeff() / std::abs(x(6));
    out.iterations = static_cast<int>(lm.iter);
    return out;
}

std::vector<Vec3> clifford_projection(const Eigen::Vector4d& pole, int n) {
    const double norm = pole.norm();
    if (!(std::abs(norm - 1.0) < 1e-12)) throw DomainError("projection pole must be a unit vector of R^4");
    const double a = pole(0) * pole(0) + pole(1) * pole(1);
    if (std::abs(a - 0.5) < 1e-9) throw DomainError("projection pole lies on the Clifford torus");
    if (n < 8) throw DomainError("need at least 8 samples per angle");

    // Orthonormal basis of the tangent space at the pole.
    Eigen::Matrix4d M = Eigen::Matrix4d::Identity();
    M.col(0) = pole;
    const Eigen::Matrix4d Q = Eigen::HouseholderQR<Eigen::Matrix4d>(M).householderQ();
    const Eigen::Matrix<double, 4, 3> B = Q.rightCols<3>();

    std::vector<Vec3> pts;
    pts.reserve(static_cast<std::size_t>(n) * n);
    const double s = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const double th = kTwoPi * i / n, ph = kTwoPi * k / n;
            const Eigen::Vector4d x(s * std::cos(th), s * std::sin(th), s * std::cos(ph), s * std::sin(ph));
            const double t = x.dot(pole);
            const Eigen::Vector4d y = (x - t * pole) / (1.0 - t);
            pts.push_back(B.transpose() * y);
        }
    return pts;
}

TorusFit clifford_image(const Eigen::Vector4d& pole, int n) { return fit_torus(clifford_projection(pole, n)); }

ParamSurface make_clifford_surface() {
    const double s = 1.0 / std::sqrt(2.0);
    // u moves (x3, x4) and v rotates (x1, x2), which is a rotation of the image.
    ParamSurface S(ChartDomain{}, [s](double u, double v) -> Vec3 {
        const double w = 1.0 - s * std::sin(u);
        return Vec3(s * std::cos(v), s * std::sin(v), s * std::cos(u)) / w;
    });
    // Conformal factor 1/w of the projection times the flat metric s^2 (du^2 + dv^2).
    S.with_area_density([s](double u, double) {
        const double w = 1.0 - s * std::sin(u);
        return s * s / (w * w);
    });
    // Differences of sines and cosines in half-angle form, exact in the offsets.
    S.with_displacement([s](double u, double v, double du, double dv) -> Vec3 {
        const double w = 1.0 - s * std::sin(u), w2 = 1.0 - s * std::sin(u + du);
        const double su = 2.0 * std::sin(du / 2.0), sv = 2.0 * std::sin(dv / 2.0);
        const double dInvW = s * su * std::cos(u + du / 2.0) / (w * w2);
        return s * Vec3(-sv * std::sin(v + dv / 2.0) / w2 + std::cos(v) * dInvW,
                        sv * std::cos(v + dv / 2.0) / w2 + std::sin(v) * dInvW,
                        -su * std::sin(u + du / 2.0) / w2 + std::cos(u) * dInvW);
    });
    const double reach = std::sqrt(2.0) - 1.0;
    S.with_reach(reach)
        .with_diameter(2.0 * (std::sqrt(2.0) + 1.0))
        .with_revolution(true)
        .with_descriptor({{"type", "clifford_projection"}, {"pole", {0.0, 0.0, 0.0, 1.0}}});
    return S;
}

void to_json(nlohmann::json& j, const InvarianceReport& r) {
    j = {{"before", r.before},
         {"after", r.after},
         {"deviation", r.deviation},
         {"err_before", r.errBefore},
         {"err_after", r.errAfter}};
}

InvarianceReport invariance_experiment(const ParamSurface& S, const MoebiusMap& map, const RenormConfig& cfg) {
    const ParamSurface image = compose_surface(S, map);
    const EnergyReport a = surface_energy(S, cfg);
    const EnergyReport b = surface_energy(image, cfg);
    InvarianceReport r;
    r.before = a.value;
    r.after = b.value;
    r.errBefore = a.errEst;
    r.errAfter = b.errEst;
    // Relative to the energy, or absolute when the energy is below one (spheres).
    r.deviation = std::abs(b.value - a.value) / std::max(1.0, std::abs(a.value));
    return r;
}

} // namespace renorm
