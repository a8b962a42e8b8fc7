#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "renorm/errors.hpp"
#include "renorm/quadrature.hpp"

namespace renorm {

namespace {

/// d^lambda given d^2.
inline double chord_power(double d2, double lambda) {
    if (lambda == -4.0) return 1.0 / (d2 * d2);
    if (lambda == -2.0) return 1.0 / d2;
    if (lambda == 0.0) return 1.0;
    return std::pow(d2, 0.5 * lambda);
}

/// First root of f on (lo, hi] where f(lo) < 0 <= f(hi).
template <class F>
double bracketed_root(F&& f, double lo, double hi) {
    boost::math::tools::eps_tolerance<double> tol(std::numeric_limits<double>::digits - 2);
    std::uintmax_t iters = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, tol, iters);
    return 0.5 * (a + b);
}

/// Chart neighbourhood of x = S(uc, vc): the parameter box around the point and
/// the metric normalisation L = G^{-1/2}, so |x - S(uc + L w)| ~ |w| near x.
struct LocalFrame {
    const ParamSurface* S = nullptr;
    double uc = 0.0, vc = 0.0;
    Eigen::Matrix2d L, Linv;
    double detL = 1.0;
    double duLo = 0.0, duHi = 0.0, dvLo = 0.0, dvHi = 0.0;
    double nu = 1.0, nv = 1.0; // |p_u|, |p_v|

    double chord_sq(double du, double dv) const { return S->chord_sq_offset(uc, vc, du, dv); }
    double density(double du, double dv) const { return S->area_density(uc + du, vc + dv); }
};

LocalFrame make_frame(const ParamSurface& S, double uc, double vc) {
    LocalFrame f;
    f.S = &S;
    f.uc = uc;
    f.vc = vc;
    const ChartJet j = S.jet(uc, vc);
    Eigen::Matrix2d G;
    G << j.pu.dot(j.pu), j.pu.dot(j.pv), j.pu.dot(j.pv), j.pv.dot(j.pv);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(G);
    const Eigen::Vector2d lam = es.eigenvalues();
    if (!(lam.minCoeff() > 0.0)) throw DomainError("chart is not an immersion at the evaluation point");
    const Eigen::Matrix2d V = es.eigenvectors();
    f.L = V * lam.cwiseSqrt().cwiseInverse().asDiagonal() * V.transpose();
    f.Linv = V * lam.cwiseSqrt().asDiagonal() * V.transpose();
    f.detL = f.L.determinant();
    f.nu = j.pu.norm();
    f.nv = j.pv.norm();

    const ChartDomain& d = S.domain();
    if (d.periodicU) {
        f.duLo = -0.5 * d.span_u();
        f.duHi = 0.5 * d.span_u();
    } else {
        f.duLo = d.u0 - uc;
        f.duHi = d.u1 - uc;
    }
    if (d.periodicV) {
        f.dvLo = -0.5 * d.span_v();
        f.dvHi = 0.5 * d.span_v();
    } else {
        f.dvLo = d.v0 - vc;
        f.dvHi = d.v1 - vc;
    }
    if (!(f.duLo < 0.0 && f.duHi > 0.0 && f.dvLo < 0.0 && f.dvHi > 0.0))
        throw DomainError("cutoff integrals need the point in the chart interior");
    return f;
}

void check_eps(const ParamSurface& S, double eps) {
    if (!(eps > 0.0)) throw DomainError("cutoff radius must be positive");
    if (!(eps < S.reach())) {
        std::ostringstream msg;
        msg << "cutoff radius " << eps << " is not below the surface reach " << S.reach();
        throw DomainError(msg.str());
    }
}

// ---------------------------------------------------------------------------
// Polar route

CutoffSample polar_route(const LocalFrame& fr, double eps, double lambda, const QuadratureConfig& cfg) {
    const double eps2 = eps * eps;

    auto direction = [&](double phi) -> Eigen::Vector2d { return fr.L * Eigen::Vector2d(std::cos(phi), std::sin(phi)); };
    auto rho_max = [&](const Eigen::Vector2d& w) {
        double r = std::numeric_limits<double>::infinity();
        if (w(0) > 0.0) r = std::min(r, fr.duHi / w(0));
        if (w(0) < 0.0) r = std::min(r, fr.duLo / w(0));
        if (w(1) > 0.0) r = std::min(r, fr.dvHi / w(1));
        if (w(1) < 0.0) r = std::min(r, fr.dvLo / w(1));
        return r;
    };

    // Sector boundaries: rays through the corners of the parameter box.
    std::vector<double> corners;
    for (double du : {fr.duLo, fr.duHi})
        for (double dv : {fr.dvLo, fr.dvHi}) {
            const Eigen::Vector2d z = fr.Linv * Eigen::Vector2d(du, dv);
            double a = std::atan2(z(1), z(0));
            if (a < 0.0) a += kTwoPi;
            corners.push_back(a);
        }
    std::sort(corners.begin(), corners.end());
    std::vector<double> phiBreaks;
    constexpr double maxSeed = kPi / 4.0;
    for (std::size_t k = 0; k < corners.size(); ++k) {
        const double a = corners[k];
        const double b = (k + 1 < corners.size()) ? corners[k + 1] : corners[0] + kTwoPi;
        const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / maxSeed)));
        for (int p = 0; p < pieces; ++p) phiBreaks.push_back(a + (b - a) * p / pieces);
    }
    phiBreaks.push_back(corners[0] + kTwoPi);

    const double ringWidth = std::log(4.0);
    const int ring = std::max(1, cfg.ringRefinement);
    bool innerOk = true;
    double innerErrSum = 0.0;

    auto radial = [&](double phi) {
        const Eigen::Vector2d w = direction(phi);
        const double rmax = rho_max(w);
        auto gap = [&](double rho) { return fr.chord_sq(rho * w(0), rho * w(1)) - eps2; };

        // Bracket the boundary of the excluded ball along the ray.
        double lo = 0.0, hi = std::min(eps, rmax);
        while (gap(hi) < 0.0) {
            if (hi >= rmax) throw DomainError("cutoff ball reaches the edge of the chart; eps too large");
            lo = hi;
            hi = std::min(1.5 * hi, rmax);
        }
        const double rhoEps = bracketed_root(gap, lo, hi);
        const double span = std::log(rmax / rhoEps);

        std::vector<double> breaks{0.0};
        const double ringEnd = std::min(ringWidth, span);
        for (int k = 1; k <= ring; ++k) breaks.push_back(ringEnd * k / ring);
        if (span > ringEnd) {
            const int rest = std::max(1, static_cast<int>(std::ceil(span - ringEnd)));
            for (int k = 1; k <= rest; ++k) breaks.push_back(ringEnd + (span - ringEnd) * k / rest);
        }
        // Flat model rho^(lambda+2) / detL of the integrand, integrated exactly;
        // only the remainder, smaller by a factor ~ rho * curvature, goes to
        // the quadrature.
        const double p = lambda + 2.0;
        const double model = p == 0.0 ? span : std::pow(rhoEps, p) * std::expm1(p * span) / p;
        auto h = [&](double s) {
            const double rho = rhoEps * std::exp(s);
            const double du = rho * w(0), dv = rho * w(1);
            const double flat = (p == 0.0 ? 1.0 : std::pow(rho, p)) / fr.detL;
            const double full = chord_power(fr.chord_sq(du, dv), lambda) * fr.density(du, dv) * rho * rho;
            return Sample{full - flat, std::abs(full)};
        };
        const Estimate e = adaptive_gk(h, breaks, 0.1 * cfg.relTol * std::abs(model) / fr.detL, 0.1 * cfg.relTol,
                                       cfg.maxDepth);
        innerOk = innerOk && e.converged;
        innerErrSum += e.error;
        return e.value * fr.detL + model;
    };

    const Estimate outer = adaptive_gk(radial, phiBreaks, 0.0, cfg.relTol, cfg.maxDepth);
    if (!outer.converged || !innerOk)
        throw ToleranceNotMetError("cutoff potential quadrature did not converge", outer.value, outer.error);
    // Inner errors enter once per outer node; scale by the mean node weight.
    const double innerErr = innerErrSum * fr.detL * kTwoPi / std::max<long>(1, outer.evaluations);
    return {eps, outer.value, outer.error + innerErr};
}

// ---------------------------------------------------------------------------
// Chart-preimage route

CutoffSample preimage_route(const LocalFrame& fr, double eps, double lambda, const QuadratureConfig& cfg) {
    const double eps2 = eps * eps;
    auto g = [&](double a, double b) { return chord_power(fr.chord_sq(a, b), lambda) * fr.density(a, b); };

    // Position and value of the minimum of the chord along the v line at a.
    auto line_min = [&](double a) {
        const double w = std::min(0.5 * (fr.dvHi - fr.dvLo), 8.0 * (eps + std::abs(a) * fr.nu) / fr.nv);
        const double lo = std::max(fr.dvLo, -w), hi = std::min(fr.dvHi, w);
        const auto r = boost::math::tools::brent_find_minima([&](double b) { return fr.chord_sq(a, b); }, lo, hi,
                                                             std::numeric_limits<double>::digits);
        return std::pair<double, double>{r.first, r.second};
    };

    // u extent of the excluded set.
    auto extent = [&](double sign) {
        auto gap = [&](double a) { return line_min(sign * a).second - eps2; };
        double lo = 0.0, hi = eps / fr.nu;
        const double lim = sign > 0 ? fr.duHi : -fr.duLo;
        while (gap(hi) < 0.0) {
            if (hi >= lim) throw DomainError("cutoff ball reaches the edge of the chart; eps too large");
            lo = hi;
            hi = std::min(1.5 * hi, lim);
        }
        return sign * bracketed_root(gap, lo, hi);
    };
    const double aMinus = extent(-1.0), aPlus = extent(1.0);

    bool innerOk = true;
    auto inner = [&](double a) {
        const auto [bStar, m] = line_min(a);
        double value = 0.0;
        auto piece = [&](double start, double end, double width) {
            // b = start + dir * width * (e^s - 1), s in [0, S]
            const double dir = end > start ? 1.0 : -1.0;
            const double len = std::abs(end - start);
            if (len <= 0.0) return 0.0;
            const double S = std::log1p(len / width);
            std::vector<double> br{0.0};
            const int pieces = std::max(2, static_cast<int>(std::ceil(S)));
            for (int k = 1; k <= pieces; ++k) br.push_back(S * k / pieces);
            auto h = [&](double s) {
                const double b = start + dir * width * std::expm1(s);
                return g(a, b) * width * std::exp(s);
            };
            const Estimate e = adaptive_gk(h, br, 0.0, 0.1 * cfg.relTol, cfg.maxDepth);
            innerOk = innerOk && e.converged;
            return e.value;
        };
        if (m < eps2) {
            auto gap = [&](double b) { return fr.chord_sq(a, b) - eps2; };
            auto side = [&](double dir) {
                double lo = 0.0, hi = eps / fr.nv;
                const double lim = dir > 0 ? fr.dvHi - bStar : bStar - fr.dvLo;
                while (gap(bStar + dir * hi) < 0.0) {
                    if (hi >= lim) throw DomainError("cutoff ball reaches the edge of the chart; eps too large");
                    lo = hi;
                    hi = std::min(1.5 * hi, lim);
                }
                return bStar + dir * bracketed_root([&](double t) { return gap(bStar + dir * t); }, lo, hi);
            };
            const double bMinus = side(-1.0), bPlus = side(1.0);
            const double width = eps / fr.nv;
            value = piece(bPlus, fr.dvHi, width) + piece(bMinus, fr.dvLo, width);
        } else {
            const double width = std::max(std::sqrt(m), 1e-300) / fr.nv;
            value = piece(bStar, fr.dvHi, width) + piece(bStar, fr.dvLo, width);
        }
        return value;
    };

    const double aWidth = eps / fr.nu;
    auto outer_tail = [&](double start, double end) {
        const double dir = end > start ? 1.0 : -1.0;
        const double len = std::abs(end - start);
        const double S = std::log1p(len / aWidth);
        std::vector<double> br{0.0};
        const int pieces = std::max(2, static_cast<int>(std::ceil(S)));
        for (int k = 1; k <= pieces; ++k) br.push_back(S * k / pieces);
        return adaptive_gk(
            [&](double s) { return inner(start + dir * aWidth * std::expm1(s)) * aWidth * std::exp(s); }, br, 0.0,
            cfg.relTol, cfg.maxDepth);
    };
    const double mid = 0.5 * (aPlus + aMinus), half = 0.5 * (aPlus - aMinus);
    const double coreBreaks[5] = {-kPi / 2, -kPi / 4, 0.0, kPi / 4, kPi / 2};
    const Estimate core = adaptive_gk(
        [&](double psi) { return inner(mid + half * std::sin(psi)) * half * std::cos(psi); },
        std::span<const double>(coreBreaks, 5), 0.0, cfg.relTol, cfg.maxDepth);
    const Estimate right = outer_tail(aPlus, fr.duHi);
    const Estimate left = outer_tail(aMinus, fr.duLo);
    const bool ok = core.converged && right.converged && left.converged && innerOk;
    CompensatedSum total;
    total.add(core.value);
    total.add(right.value);
    total.add(left.value);
    const double err = core.error + right.error + left.error;
    if (!ok) throw ToleranceNotMetError("chart-preimage cutoff quadrature did not converge", total.value(), err);
    return {eps, total.value(), err};
}

} // namespace

CutoffSample cutoff_potential_integral(const ParamSurface& S, double u, double v, double eps, double lambda,
                                       const QuadratureConfig& cfg, ExclusionRoute route) {
    cfg.validate();
    check_eps(S, eps);
    const LocalizedChart lc = S.localize(u, v);
    const LocalFrame fr = make_frame(*lc.surface, lc.u, lc.v);
    return route == ExclusionRoute::Polar ? polar_route(fr, eps, lambda, cfg) : preimage_route(fr, eps, lambda, cfg);
}

CutoffSample cutoff_energy_integral(const ParamSurface& S, double eps, double lambda, const QuadratureConfig& cfg) {
    cfg.validate();
    check_eps(S, eps);
    OuterConfig outer;
    outer.relTol = std::max(cfg.relTol, 1e-10);
    const OuterResult r = integrate_surface_nodes(
        S,
        [&](double u, double v) {
            const CutoffSample c = cutoff_potential_integral(S, u, v, eps, lambda, cfg);
            return PointValue{c.value, c.errEst};
        },
        outer, cfg.threads);
    if (!r.estimate.converged)
        throw ToleranceNotMetError("cutoff energy outer quadrature did not converge", r.estimate.value,
                                   r.estimate.error);
    return {eps, r.estimate.value, r.estimate.error};
}

} // namespace renorm
