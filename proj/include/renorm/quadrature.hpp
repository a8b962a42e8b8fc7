#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "renorm/gauss_kronrod.hpp"
#include "renorm/geometry.hpp"

namespace renorm {

struct QuadratureConfig {
    double relTol = 1e-9;
    int maxDepth = 30;
    /// Extra radial panels inside the annulus eps <= |x - y| <= 4 eps.
    int ringRefinement = 6;
    /// Seed panels per chart axis.
    int seedGrid = 64;
    /// Worker cap for the outer loops; results do not depend on it.
    int threads = 1;

    void validate() const;
};

void to_json(nlohmann::json& j, const QuadratureConfig& c);
void from_json(const nlohmann::json& j, QuadratureConfig& c);

/// One cutoff integral E(eps) together with its quadrature error.
struct CutoffSample {
    double eps = 0.0;
    double value = 0.0;
    double errEst = 0.0;
};

/// How the excluded chord ball is carved out of the chart.
enum class ExclusionRoute {
    /// Metric-normalised polar coordinates around x; the ball boundary is found
    /// along each ray by root finding on the chord distance.
    Polar,
    /// Iterated u-then-v integration; each v line drops the chart preimage of
    /// the ball, found as an interval in v.
    ChartPreimage,
};

/// Cutoff used for curves: chord length |x - y| or arc length along the curve.
enum class CurveCutoff { Chord, Arclength };

/// Adaptive 2-D quadrature of f(u,v) against the area element of S.
/// Throws ToleranceNotMetError (carrying the best value) when the depth budget
/// is exhausted.
Estimate integrate_chart(const ParamSurface& S, const std::function<double(double, double)>& f,
                         const QuadratureConfig& cfg = {});

/// Integral of |x - y|^lambda d^2y over points y of S with |x - y| >= eps,
/// where x = S(u, v).
CutoffSample cutoff_potential_integral(const ParamSurface& S, double u, double v, double eps, double lambda,
                                       const QuadratureConfig& cfg = {},
                                       ExclusionRoute route = ExclusionRoute::Polar);

/// Integral of |x - y|^lambda dy over the curve with the eps-neighbourhood of
/// x = K(t) removed.
CutoffSample cutoff_curve_potential(const Curve& K, double t, double eps, double lambda,
                                    const QuadratureConfig& cfg = {}, CurveCutoff cutoff = CurveCutoff::Chord);

/// Arc length of K between parameters ta <= tb.
double arc_length(const Curve& K, double ta, double tb);

/// Planar disk of the given radius in the z = 0 plane.
struct PlanarDisk {
    double radius = 1.0;
};

/// Symmetric double integrals over pairs at chord distance >= eps.
CutoffSample cutoff_energy_integral(const ParamSurface& S, double eps, double lambda, const QuadratureConfig& cfg = {});
CutoffSample cutoff_energy_integral(const Curve& K, double eps, double lambda, const QuadratureConfig& cfg = {},
                                    CurveCutoff cutoff = CurveCutoff::Chord);
CutoffSample cutoff_energy_integral(const PlanarDisk& D, double eps, double lambda, const QuadratureConfig& cfg = {});

/// Nested-rule integration of pointwise values against the area element.
/// Periodic axes use the trapezoid rule, bounded axes Clenshaw-Curtis; the
/// node count doubles until two successive levels agree to relTol. Surfaces
/// of revolution are integrated along u only.
struct OuterConfig {
    int minNodes = 16;
    int maxNodes = 512;
    double relTol = 1e-8;
    double absTol = 1e-12;
};

void to_json(nlohmann::json& j, const OuterConfig& c);
void from_json(const nlohmann::json& j, OuterConfig& c);

/// A pointwise value and its own error estimate.
struct PointValue {
    double value = 0.0;
    double error = 0.0;
};

struct OuterResult {
    Estimate estimate;
    int nodesU = 0;
    int nodesV = 0;
};

/// Integral of value(u, v) * areaDensity(u, v) over the chart. `value` is not
/// called where the area density vanishes.
OuterResult integrate_surface_nodes(const ParamSurface& S, const std::function<PointValue(double, double)>& value,
                                    const OuterConfig& cfg, int threads);

/// Integral of value(t) * speed(t) over a closed curve.
OuterResult integrate_curve_nodes(const Curve& K, const std::function<PointValue(double)>& value,
                                  const OuterConfig& cfg, int threads);

/// Geometric ladder eps_k = top * 2^-k, k = 0..count-1.
std::vector<double> geometric_ladder(double top, int count);

// ---------------------------------------------------------------------------
// Asymptotic series fitting

enum class BasisTerm { InvEps2 = 0, InvEps = 1, LogEps = 2, Const = 3, Eps = 4, Eps2 = 5 };
inline constexpr int kBasisSize = 6;

std::string to_string(BasisTerm t);
BasisTerm basis_term_from_string(const std::string& s);
double basis_value(BasisTerm t, double eps);

struct AsymptoticFit {
    std::vector<BasisTerm> basis;
    /// Indexed by BasisTerm; zero for terms outside the basis.
    std::array<double, kBasisSize> coefficients{};
    /// Root-mean-square and maximum absolute residual of the samples.
    double residual = 0.0;
    double maxResidual = 0.0;
    /// 2-norm condition number of the column-equilibrated design matrix.
    double condition = 0.0;
    int samples = 0;

    double coefficient(BasisTerm t) const { return coefficients[static_cast<int>(t)]; }
};

void to_json(nlohmann::json& j, const AsymptoticFit& f);

/// Least-squares fit of samples to the given subset of
/// {eps^-2, eps^-1, log eps, 1, eps, eps^2}.
AsymptoticFit fit_asymptotics(std::span<const CutoffSample> samples, std::span<const BasisTerm> basis);

} // namespace renorm
