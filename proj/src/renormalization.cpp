#include "renorm/renormalization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "renorm/closed_forms.hpp"
#include "renorm/errors.hpp"

namespace renorm {

namespace {

const double kLog2 = std::log(2.0);

std::string route_name(ExclusionRoute r) { return r == ExclusionRoute::Polar ? "polar" : "chart_preimage"; }
ExclusionRoute route_from(const std::string& s) {
    if (s == "polar") return ExclusionRoute::Polar;
    if (s == "chart_preimage") return ExclusionRoute::ChartPreimage;
    throw DomainError("unknown exclusion route '" + s + "'");
}
std::string cutoff_name(CurveCutoff c) { return c == CurveCutoff::Chord ? "chord" : "arclength"; }
CurveCutoff cutoff_from(const std::string& s) {
    if (s == "chord") return CurveCutoff::Chord;
    if (s == "arclength") return CurveCutoff::Arclength;
    throw DomainError("unknown curve cutoff '" + s + "'");
}

void check_fit(const RenormConfig& cfg, const AsymptoticFit& fit, double value, const char* what) {
    const double allowed = cfg.residualRelTol * std::abs(value) + cfg.residualAbsTol;
    if (!(fit.maxResidual <= allowed)) {
        std::ostringstream msg;
        msg << what << ": fit residual " << fit.maxResidual << " exceeds " << allowed << " (condition "
            << fit.condition << ")";
        throw NonConvergenceError(msg.str(), value, fit.maxResidual);
    }
}

constexpr BasisTerm kRemainderBasis[3] = {BasisTerm::Const, BasisTerm::Eps, BasisTerm::Eps2};

double sample_error(const std::vector<CutoffSample>& s) {
    double e = 0.0;
    for (const auto& c : s) e = std::max(e, c.errEst);
    return e;
}

} // namespace

void RenormConfig::validate() const {
    quad.validate();
    if (!(surfaceLadderTop > 0.0 && surfaceLadderTop < 1.0)) throw DomainError("surface ladder top must lie in (0, 1)");
    if (!(curveLadderTop > 0.0 && curveLadderTop < 1.0)) throw DomainError("curve ladder top must lie in (0, 1)");
    if (ladder.empty() && ladderCount < 5) throw DomainError("ladder needs at least 5 rungs");
    if (!ladder.empty() && ladder.size() < 5) throw DomainError("explicit ladder needs at least 5 radii");
    for (double e : ladder)
        if (!(e > 0.0)) throw DomainError("ladder radii must be positive");
    if (!(logNormalization > 0.0)) throw DomainError("log normalization must be positive");
    if (!(residualRelTol >= 0.0 && residualAbsTol >= 0.0)) throw DomainError("residual tolerances must be >= 0");
    if (outer.minNodes < 2 || outer.maxNodes < outer.minNodes) throw DomainError("invalid outer node budget");
    if (threads < 1) throw DomainError("threads must be positive");
}

void to_json(nlohmann::json& j, const RenormConfig& c) {
    // Worker count is left out on purpose: it never changes a result.
    j = {{"quadrature", c.quad},
         {"surface_ladder_top", c.surfaceLadderTop},
         {"curve_ladder_top", c.curveLadderTop},
         {"ladder_count", c.ladderCount},
         {"ladder", c.ladder},
         {"log_normalization", c.logNormalization},
         {"residual_rel_tol", c.residualRelTol},
         {"residual_abs_tol", c.residualAbsTol},
         {"route", route_name(c.route)},
         {"curve_cutoff", cutoff_name(c.curveCutoff)},
         {"outer", c.outer}};
}

void from_json(const nlohmann::json& j, RenormConfig& c) {
    if (j.contains("quadrature")) j.at("quadrature").get_to(c.quad);
    c.surfaceLadderTop = j.value("surface_ladder_top", c.surfaceLadderTop);
    c.curveLadderTop = j.value("curve_ladder_top", c.curveLadderTop);
    c.ladderCount = j.value("ladder_count", c.ladderCount);
    c.ladder = j.value("ladder", c.ladder);
    c.logNormalization = j.value("log_normalization", c.logNormalization);
    c.residualRelTol = j.value("residual_rel_tol", c.residualRelTol);
    c.residualAbsTol = j.value("residual_abs_tol", c.residualAbsTol);
    if (j.contains("route")) c.route = route_from(j.at("route").get<std::string>());
    if (j.contains("curve_cutoff")) c.curveCutoff = cutoff_from(j.at("curve_cutoff").get<std::string>());
    if (j.contains("outer")) j.at("outer").get_to(c.outer);
}

void to_json(nlohmann::json& j, const RenormPotentialResult& r) {
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& s : r.samples) samples.push_back({{"eps", s.eps}, {"remainder", s.value}, {"err_est", s.errEst}});
    j = {{"value", r.value},
         {"fit", r.fit},
         {"counterterms",
          {{"leading_power", r.counterterms.leadingPower},
           {"leading", r.counterterms.leading},
           {"log_coeff", r.counterterms.logCoeff},
           {"shift", r.counterterms.shift}}},
         {"samples", samples}};
}

std::string to_string(EnergyMethod m) {
    switch (m) {
    case EnergyMethod::ClosedForm: return "closed-form";
    case EnergyMethod::NumericRenormalized: return "numeric-renormalized";
    case EnergyMethod::CutoffFit: return "cutoff-fit";
    }
    return "?";
}

EnergyMethod energy_method_from_string(const std::string& s) {
    if (s == "closed-form") return EnergyMethod::ClosedForm;
    if (s == "numeric-renormalized") return EnergyMethod::NumericRenormalized;
    if (s == "cutoff-fit") return EnergyMethod::CutoffFit;
    throw DomainError("unknown energy method '" + s + "'");
}

void to_json(nlohmann::json& j, const EnergyReport& r) {
    j = {{"value", r.value},
         {"method", to_string(r.method)},
         {"err_est", r.errEst},
         {"surface", r.surface},
         {"config", r.config}};
}

std::vector<double> cutoff_ladder(const RenormConfig& cfg, double localLength, double top) {
    if (!cfg.ladder.empty()) return cfg.ladder;
    if (!(localLength > 0.0) || !std::isfinite(localLength)) throw DomainError("local length scale must be positive");
    return geometric_ladder(top * localLength, cfg.ladderCount);
}

RenormPotentialResult surface_potential(const ParamSurface& S, double u, double v, const RenormConfig& cfg) {
    cfg.validate();
    const LocalizedChart lc = S.localize(u, v);
    const ParamSurface& L = *lc.surface;
    const SurfacePointData d = point_data(L, lc.u, lc.v);

    const double kmax = std::max(std::abs(d.kappa1), std::abs(d.kappa2));
    const double ell = std::min(S.reach(), kmax > 0.0 ? 1.0 / kmax : std::numeric_limits<double>::infinity());

    RenormPotentialResult out;
    out.counterterms.leadingPower = -2;
    out.counterterms.leading = kPi;
    out.counterterms.logCoeff = kPi * d.delta / 16.0;
    out.counterterms.shift = kPi * d.gauss / 4.0;
    const double cDelta = cfg.logNormalization * d.delta;

    for (double eps : cutoff_ladder(cfg, ell, cfg.surfaceLadderTop)) {
        CutoffSample c = cutoff_potential_integral(L, lc.u, lc.v, eps, -4.0, cfg.quad, cfg.route);
        // Delta log(Delta eps^2) -> 0 as Delta -> 0: umbilic points get no log term.
        const double logTerm = d.delta > 0.0 ? out.counterterms.logCoeff * std::log(cDelta * eps * eps) : 0.0;
        c.value = c.value - kPi / (eps * eps) + logTerm + out.counterterms.shift;
        out.samples.push_back(c);
    }
    out.fit = fit_asymptotics(out.samples, kRemainderBasis);
    out.value = out.fit.coefficient(BasisTerm::Const);
    check_fit(cfg, out.fit, out.value, "surface potential");
    return out;
}

RenormPotentialResult surface_potential(const ParamSurface& S, const Vec3& x, double u, double v,
                                        const RenormConfig& cfg) {
    const double miss = (S.point(u, v) - x).norm();
    if (!(miss <= 1e-9 * std::max(1.0, S.diameter()))) {
        std::ostringstream msg;
        msg << "point is not on the surface at the given parameters (off by " << miss << ")";
        throw DomainError(msg.str());
    }
    return surface_potential(S, u, v, cfg);
}

EnergyReport surface_energy(const ParamSurface& S, const RenormConfig& cfg) {
    cfg.validate();
    const OuterResult r = integrate_surface_nodes(
        S,
        [&](double u, double v) {
            const RenormPotentialResult p = surface_potential(S, u, v, cfg);
            return PointValue{p.value, p.fit.maxResidual + sample_error(p.samples)};
        },
        cfg.outer, cfg.threads);
    if (!r.estimate.converged)
        throw NonConvergenceError("surface energy outer quadrature did not converge", r.estimate.value,
                                  r.estimate.error);
    EnergyReport rep;
    rep.value = r.estimate.value;
    rep.method = EnergyMethod::NumericRenormalized;
    rep.errEst = r.estimate.error;
    rep.surface = S.descriptor();
    rep.config = cfg;
    rep.config["nodes_u"] = r.nodesU;
    rep.config["nodes_v"] = r.nodesV;
    return rep;
}

RenormPotentialResult knot_potential(const Curve& K, double t, const RenormConfig& cfg) {
    cfg.validate();
    RenormPotentialResult out;
    out.counterterms.leadingPower = -1;
    out.counterterms.leading = 2.0;
    for (double eps : cutoff_ladder(cfg, K.length_scale(), cfg.curveLadderTop)) {
        CutoffSample c = cutoff_curve_potential(K, t, eps, -2.0, cfg.quad, cfg.curveCutoff);
        c.value -= 2.0 / eps;
        out.samples.push_back(c);
    }
    out.fit = fit_asymptotics(out.samples, kRemainderBasis);
    out.value = out.fit.coefficient(BasisTerm::Const);
    check_fit(cfg, out.fit, out.value, "knot potential");
    return out;
}

EnergyReport knot_energy(const Curve& K, const RenormConfig& cfg) {
    cfg.validate();
    const OuterResult r = integrate_curve_nodes(
        K,
        [&](double t) {
            const RenormPotentialResult p = knot_potential(K, t, cfg);
            return PointValue{p.value, p.fit.maxResidual + sample_error(p.samples)};
        },
        cfg.outer, cfg.threads);
    if (!r.estimate.converged)
        throw NonConvergenceError("knot energy outer quadrature did not converge", r.estimate.value,
                                  r.estimate.error);
    EnergyReport rep;
    rep.value = r.estimate.value;
    rep.method = EnergyMethod::NumericRenormalized;
    rep.errEst = r.estimate.error;
    rep.surface = K.descriptor();
    rep.config = cfg;
    rep.config["nodes_u"] = r.nodesU;
    return rep;
}

void to_json(nlohmann::json& j, const ExpansionReport& r) {
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& s : r.samples) samples.push_back({{"eps", s.eps}, {"value", s.value}, {"err_est", s.errEst}});
    nlohmann::json pred = nlohmann::json::object();
    for (const auto& [k, v] : r.predicted) pred[k] = v;
    j = {{"target", r.target}, {"lambda", r.lambda}, {"fit", r.fit}, {"predicted", pred}, {"samples", samples}};
}

std::vector<BasisTerm> default_expansion_basis(const ExpansionTarget& M) {
    using B = BasisTerm;
    if (std::holds_alternative<Curve>(M)) return {B::InvEps, B::Const, B::Eps, B::Eps2};
    if (std::holds_alternative<TorusTarget>(M)) return {B::InvEps2, B::LogEps, B::Const, B::Eps2};
    return {B::InvEps2, B::InvEps, B::Const, B::Eps};
}

ExpansionReport expansion_check(const ExpansionTarget& M, double lambda, std::span<const BasisTerm> basis,
                                const RenormConfig& cfg) {
    cfg.validate();
    ExpansionReport rep;
    rep.lambda = lambda;
    auto ladder_or = [&](double top) { return cfg.ladder.empty() ? geometric_ladder(top, cfg.ladderCount) : cfg.ladder; };

    if (const auto* K = std::get_if<Curve>(&M)) {
        if (lambda != -2.0) throw DomainError("curve expansions are defined for lambda = -2");
        rep.target = K->descriptor().value("type", std::string("curve"));
        for (double eps : ladder_or(cfg.curveLadderTop * K->length_scale()))
            rep.samples.push_back(cutoff_energy_integral(*K, eps, lambda, cfg.quad, cfg.curveCutoff));
        rep.predicted["eps^-1"] = 2.0 * arc_length(*K, K->t0(), K->t1());
        rep.predicted["1"] = knot_energy(*K, cfg).value;
    } else if (const auto* T = std::get_if<TorusTarget>(&M)) {
        if (lambda != -4.0) throw DomainError("surface expansions are defined for lambda = -4");
        const double R = T->torus.R(), s = T->torus.scale();
        const ParamSurface S = make_torus_surface(T->torus);
        rep.target = "torus";
        QuadratureConfig q = cfg.quad;
        q.threads = cfg.threads;
        for (double eps : ladder_or(0.2 * S.reach())) rep.samples.push_back(cutoff_energy_integral(S, eps, lambda, q));
        // Delta scales as 1/s^2 and area as s^2: the integral of Delta is
        // scale free, the log Delta term picks up -2 log s.
        const double intDelta = delta_integral_closed(R);
        constexpr double eulerChi = 0.0;
        rep.predicted["eps^-2"] = kPi * torus_area(R) * s * s;
        rep.predicted["log_eps"] = -kPi / 8.0 * intDelta;
        rep.predicted["1"] = torus_energy_closed(R) -
                             kPi / 16.0 * (delta_log_delta_integral(R) - 2.0 * std::log(s) * intDelta) -
                             kPi * kPi / 2.0 * eulerChi;
    } else {
        const auto& D = std::get<PlanarDisk>(M);
        if (lambda != -4.0) throw DomainError("planar expansions are defined for lambda = -4");
        rep.target = "disk";
        for (double eps : ladder_or(0.4 * D.radius)) rep.samples.push_back(cutoff_energy_integral(D, eps, lambda, cfg.quad));
        rep.predicted["eps^-2"] = kPi * kPi * D.radius * D.radius;
        rep.predicted["eps^-1"] = -2.0 * kTwoPi * D.radius;
    }
    rep.fit = fit_asymptotics(rep.samples, basis);
    return rep;
}

void to_json(nlohmann::json& j, const TubeReport& r) {
    j = {{"eps_tube", r.epsTube}, {"value", r.value}, {"display", r.display}, {"series_residual", r.seriesResidual}};
}

double tube_coefficient_inv() { return kPi * kPi * kPi * (3.0 * kLog2 - 1.0) / 2.0; }
double tube_coefficient_linear() { return 3.0 * kPi * kPi * kPi * (kLog2 + 1.0) / 4.0; }
double tube_coefficient_cubic() { return kPi * kPi * kPi * (9.0 * kLog2 - 11.0) / 16.0; }

TubeReport tube_energy(double epsTube) {
    if (!(epsTube > 0.0 && epsTube < 1.0)) throw DomainError("tube radius must lie in (0, 1); the tube degenerates");
    TubeReport r;
    r.epsTube = epsTube;
    // The tube boundary is T_{1/eps} scaled by eps, and the energy is scale free.
    r.value = torus_energy_closed(1.0 / epsTube);
    const double e = epsTube;
    r.display = kPi * kPi * kPi * e / (2.0 * std::sqrt((1.0 - e) * (1.0 + e))) *
                ((3.0 * kLog2 - 1.0) / (e * e) + 2.0 - 2.0 * e * e);
    r.seriesResidual = r.value - tube_coefficient_inv() / e - tube_coefficient_linear() * e;
    return r;
}

} // namespace renorm
