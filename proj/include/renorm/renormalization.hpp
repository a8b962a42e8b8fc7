#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "renorm/geometry.hpp"
#include "renorm/quadrature.hpp"

namespace renorm {

/// Settings shared by every renormalized computation.
struct RenormConfig {
    QuadratureConfig quad = [] {
        QuadratureConfig q;
        q.relTol = 1e-12;
        return q;
    }();
    /// Top of the cutoff ladder as a fraction of the local length scale
    /// min(reach, 1/|kappa|max). Used when `ladder` is empty.
    double surfaceLadderTop = 0.1;
    double curveLadderTop = 0.005;
    int ladderCount = 7;
    /// Absolute cutoff radii; overrides the scaled ladder when non-empty.
    std::vector<double> ladder;
    /// Delta is replaced by c * Delta inside the logarithmic counterterm.
    double logNormalization = 1.0;
    /// A fit is accepted when its max residual is below rel * |value| + abs.
    double residualRelTol = 1e-6;
    double residualAbsTol = 1e-9;
    ExclusionRoute route = ExclusionRoute::Polar;
    CurveCutoff curveCutoff = CurveCutoff::Chord;
    OuterConfig outer = [] {
        OuterConfig o;
        o.minNodes = 16;
        o.maxNodes = 256;
        o.relTol = 1e-7;
        o.absTol = 1e-9;
        return o;
    }();
    int threads = 1;

    void validate() const;
};

void to_json(nlohmann::json& j, const RenormConfig& c);
void from_json(const nlohmann::json& j, RenormConfig& c);

/// Counterterms removed from each cutoff sample I(eps): the fitted remainder is
/// I - leading * eps^leadingPower + logCoeff * log(c Delta eps^2) + shift.
struct Counterterms {
    int leadingPower = -2;
    double leading = 0.0;
    double logCoeff = 0.0;
    double shift = 0.0;
};

struct RenormPotentialResult {
    double value = 0.0;
    AsymptoticFit fit;
    Counterterms counterterms;
    std::vector<CutoffSample> samples;
};

void to_json(nlohmann::json& j, const RenormPotentialResult& r);

enum class EnergyMethod { ClosedForm, NumericRenormalized, CutoffFit };
std::string to_string(EnergyMethod m);
EnergyMethod energy_method_from_string(const std::string& s);

struct EnergyReport {
    double value = 0.0;
    EnergyMethod method = EnergyMethod::NumericRenormalized;
    double errEst = 0.0;
    nlohmann::json surface = nlohmann::json::object();
    nlohmann::json config = nlohmann::json::object();
};

void to_json(nlohmann::json& j, const EnergyReport& r);

/// Ladder used at a point with the given local length scale.
std::vector<double> cutoff_ladder(const RenormConfig& cfg, double localLength, double top);

/// Renormalized r^-4 potential at S(u, v).
RenormPotentialResult surface_potential(const ParamSurface& S, double u, double v, const RenormConfig& cfg = {});

/// Same, for a caller-supplied point x that must coincide with S(u, v).
RenormPotentialResult surface_potential(const ParamSurface& S, const Vec3& x, double u, double v,
                                        const RenormConfig& cfg = {});

/// Integral of the renormalized potential over a closed surface.
EnergyReport surface_energy(const ParamSurface& S, const RenormConfig& cfg = {});

/// Renormalized r^-2 potential of a closed curve at K(t).
RenormPotentialResult knot_potential(const Curve& K, double t, const RenormConfig& cfg = {});

EnergyReport knot_energy(const Curve& K, const RenormConfig& cfg = {});

/// Fitted cutoff-energy expansion together with the predicted coefficients.
struct ExpansionReport {
    std::string target;
    double lambda = 0.0;
    AsymptoticFit fit;
    std::vector<CutoffSample> samples;
    /// Predicted coefficient per basis term name.
    std::map<std::string, double> predicted;
};

void to_json(nlohmann::json& j, const ExpansionReport& r);

/// Torus of revolution as an expansion target.
struct TorusTarget {
    RevolutionTorus torus;
};

using ExpansionTarget = std::variant<Curve, TorusTarget, PlanarDisk>;

/// Basis used when none is given: {eps^-1, 1, eps, eps^2} for curves,
/// {eps^-2, log eps, 1, eps^2} for tori and {eps^-2, eps^-1, 1, eps} for the disk.
std::vector<BasisTerm> default_expansion_basis(const ExpansionTarget& M);

/// Cutoff energies on `ladder` (or a default ladder when empty), fitted in
/// `basis`. Supported: a circle (lambda = -2), a torus T_R and the disk
/// (lambda = -4).
ExpansionReport expansion_check(const ExpansionTarget& M, double lambda, std::span<const BasisTerm> basis,
                                const RenormConfig& cfg = {});

/// Energy of the boundary of the eps-tube around the unit circle and the
/// remainder of its small-eps series.
struct TubeReport {
    double epsTube = 0.0;
    double value = 0.0;
    /// The tube display evaluated term by term, as an independent check of
    /// the similarity to T_{1/eps}.
    double display = 0.0;
    /// value - c_{-1}/eps - c_1 eps
    double seriesResidual = 0.0;
};

void to_json(nlohmann::json& j, const TubeReport& r);

TubeReport tube_energy(double epsTube);

/// Leading tube-series coefficients.
double tube_coefficient_inv();   // pi^3 (3 log 2 - 1) / 2
double tube_coefficient_linear(); // 3 pi^3 (log 2 + 1) / 4
double tube_coefficient_cubic();  // pi^3 (9 log 2 - 11) / 16

} // namespace renorm
