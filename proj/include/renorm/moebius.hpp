#pragma once

#include <variant>
#include <vector>

#include <json.hpp>

#include "renorm/geometry.hpp"
#include "renorm/renormalization.hpp"

namespace renorm {

/// x -> scale * rotation * x + translation.
struct Similarity {
    Mat3 rotation = Mat3::Identity();
    double scale = 1.0;
    Vec3 translation = Vec3::Zero();
};

/// x -> center + radius^2 (x - center) / |x - center|^2.
struct Inversion {
    Vec3 center = Vec3::Zero();
    double radius = 1.0;
};

/// A Moebius transformation of R^3 stored as a list of elementary maps,
/// applied first to last.
class MoebiusMap {
public:
    using Step = std::variant<Similarity, Inversion>;

    static MoebiusMap identity();
    static MoebiusMap similarity(const Similarity& s);
    static MoebiusMap scaling(double factor);
    static MoebiusMap inversion(const Vec3& center, double radius);

    /// This map followed by `next`.
    MoebiusMap then(const MoebiusMap& next) const;

    /// "similarity", "inversion" or "composition".
    std::string kind() const;
    const std::vector<Step>& steps() const { return steps_; }
    bool is_similarity() const;

    Vec3 apply(const Vec3& p) const;
    /// Local length magnification |dM(p)|.
    double conformal_factor(const Vec3& p) const;
    /// |M(p) - M(q)|^2 given |p - q|^2, without forming the image difference.
    double chord_sq(const Vec3& p, const Vec3& q, double baseChordSq) const;
    /// M(p + d) - M(p), computed from d without cancellation.
    Vec3 displace(const Vec3& p, const Vec3& d) const;

private:
    std::vector<Step> steps_;
};

void to_json(nlohmann::json& j, const MoebiusMap& m);

/// Surface M o S. Throws DomainError when an inversion center comes within
/// 1e-3 diameters of the surface it is applied to.
ParamSurface compose_surface(const ParamSurface& S, const MoebiusMap& map);

/// Least-squares torus of revolution through a point cloud.
struct TorusFit {
    Vec3 center = Vec3::Zero();
    Vec3 axis = Vec3::UnitZ();
    double centerDistance = 0.0;
    double tubeRadius = 0.0;
    double ratio = 0.0;
    /// Largest |distance to the fitted torus| relative to the tube radius.
    double maxResidual = 0.0;
    int iterations = 0;
};

void to_json(nlohmann::json& j, const TorusFit& f);

TorusFit fit_torus(const std::vector<Vec3>& points);

/// Stereographic projection from `pole` (a unit vector of R^4) of the
/// Clifford torus |z1| = |z2| = 1/sqrt 2, sampled on an n x n grid.
std::vector<Vec3> clifford_projection(const Eigen::Vector4d& pole, int n = 48);

/// Torus fit of the projected Clifford torus. The pole must be off the torus.
TorusFit clifford_image(const Eigen::Vector4d& pole = Eigen::Vector4d(0.0, 0.0, 0.0, 1.0), int n = 48);

/// Stereographic image of the Clifford torus from (0,0,0,1) as a surface,
/// charted by the two torus angles.
ParamSurface make_clifford_surface();

struct InvarianceReport {
    double before = 0.0;
    double after = 0.0;
    double deviation = 0.0;
    double errBefore = 0.0;
    double errAfter = 0.0;
};

void to_json(nlohmann::json& j, const InvarianceReport& r);

/// Numeric renormalized energies of S and map(S) and their relative deviation.
InvarianceReport invariance_experiment(const ParamSurface& S, const MoebiusMap& map, const RenormConfig& cfg = {});

} // namespace renorm
