#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "renorm/errors.hpp"
#include "renorm/quadrature.hpp"

namespace renorm {

namespace {

double chord_power(double d2, double lambda) {
    if (lambda == -2.0) return 1.0 / d2;
    if (lambda == -4.0) return 1.0 / (d2 * d2);
    return std::pow(d2, 0.5 * lambda);
}

/// Parameter offset h > 0 with g(h) = 0, where g < 0 near 0 and grows.
template <class G>
double offset_root(G&& g, double guess, double limit) {
    double lo = 0.0, hi = std::min(guess, limit);
    while (g(hi) < 0.0) {
        if (hi >= limit) throw DomainError("cutoff neighbourhood covers the whole curve; eps too large");
        lo = hi;
        hi = std::min(1.5 * hi, limit);
    }
    boost::math::tools::eps_tolerance<double> tol(std::numeric_limits<double>::digits - 2);
    std::uintmax_t iters = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, tol, iters);
    return 0.5 * (a + b);
}

/// Arc length from t to t + h (h may be negative), exact in the offset.
double arc_offset(const Curve& K, double t, double h) {
    const double sign = h < 0.0 ? -1.0 : 1.0;
    const double len = std::abs(h);
    if (len == 0.0) return 0.0;
    const int pieces = std::max(1, static_cast<int>(std::ceil(16.0 * len / K.period())));
    std::vector<double> br(static_cast<std::size_t>(pieces) + 1);
    for (int k = 0; k <= pieces; ++k) br[k] = len * k / pieces;
    return adaptive_gk([&](double s) { return K.speed(t + sign * s); }, br, 0.0, 1e-14).value;
}

} // namespace

double arc_length(const Curve& K, double ta, double tb) {
    if (tb < ta) return -arc_length(K, tb, ta);
    if (tb == ta) return 0.0;
    const int pieces = std::max(1, static_cast<int>(std::ceil(16.0 * (tb - ta) / K.period())));
    std::vector<double> br(static_cast<std::size_t>(pieces) + 1);
    for (int k = 0; k <= pieces; ++k) br[k] = ta + (tb - ta) * k / pieces;
    const Estimate e = adaptive_gk([&](double t) { return K.speed(t); }, br, 0.0, 1e-14);
    return e.value;
}

CutoffSample cutoff_curve_potential(const Curve& K, double t, double eps, double lambda, const QuadratureConfig& cfg,
                                    CurveCutoff cutoff) {
    cfg.validate();
    if (!(eps > 0.0)) throw DomainError("cutoff radius must be positive");
    if (!(eps < K.length_scale())) throw DomainError("cutoff radius must be below the curve's curvature scale");

    const double half = 0.5 * K.period();
    const double guess = eps / K.speed(t);
    double hPlus = 0.0, hMinus = 0.0;
    if (cutoff == CurveCutoff::Chord) {
        hPlus = offset_root([&](double h) { return K.chord_sq_offset(t, h) - eps * eps; }, guess, half);
        hMinus = offset_root([&](double h) { return K.chord_sq_offset(t, -h) - eps * eps; }, guess, half);
    } else {
        hPlus = offset_root([&](double h) { return arc_offset(K, t, h) - eps; }, guess, half);
        hMinus = offset_root([&](double h) { return arc_offset(K, t, -h) - eps; }, guess, half);
    }

    // Integrate over offsets [hPlus, period - hMinus] from both ends inward,
    // with a logarithmic stretch of width ~eps at each end. The straight-line
    // model v^(lambda+1) |dt|^lambda is subtracted and integrated exactly, so
    // the quadrature only sees the bounded curvature correction.
    const double a = hPlus, b = K.period() - hMinus;
    const double mid = 0.5 * (a + b);
    const double v = K.speed(t);
    const bool model = lambda < -1.0;
    const double vpow = std::pow(v, lambda + 1.0);
    auto flat = [&](double adt) { return model ? vpow * std::pow(adt, lambda) : 0.0; };
    auto flat_integral = [&](double h0, double h1) {
        if (!model) return 0.0;
        return vpow * (std::pow(h1, lambda + 1.0) - std::pow(h0, lambda + 1.0)) / (lambda + 1.0);
    };
    auto side = [&](double start, double end, double width, double modelIntegral) {
        const double dir = end > start ? 1.0 : -1.0;
        const double S = std::log1p(std::abs(end - start) / width);
        std::vector<double> br{0.0};
        const int pieces = std::max(cfg.ringRefinement, static_cast<int>(std::ceil(2.0 * S)));
        for (int k = 1; k <= pieces; ++k) br.push_back(S * k / pieces);
        return adaptive_gk(
            [&](double s) {
                const double jac = width * std::exp(s);
                const double y = start + dir * width * std::expm1(s);
                const double dt = y > half ? y - K.period() : y;
                const double full = chord_power(K.chord_sq_offset(t, dt), lambda) * K.speed(t + dt) * jac;
                const double m = flat(std::abs(dt)) * jac;
                return Sample{full - m, std::max(std::abs(full), std::abs(m))};
            },
            br, 0.1 * cfg.relTol * std::abs(modelIntegral), cfg.relTol, cfg.maxDepth);
    };
    const double modelRight = flat_integral(hPlus, mid), modelLeft = flat_integral(hMinus, K.period() - mid);
    Estimate right = side(a, mid, hPlus, modelRight);
    Estimate left = side(b, mid, hMinus, modelLeft);
    right.value += modelRight;
    left.value += modelLeft;
    const double value = right.value + left.value;
    const double err = right.error + left.error;
    if (!right.converged || !left.converged)
        throw ToleranceNotMetError("curve cutoff quadrature did not converge", value, err);
    return {eps, value, err};
}

CutoffSample cutoff_energy_integral(const Curve& K, double eps, double lambda, const QuadratureConfig& cfg,
                                    CurveCutoff cutoff) {
    cfg.validate();
    OuterConfig outer;
    outer.relTol = std::max(cfg.relTol, 1e-12);
    const OuterResult r = integrate_curve_nodes(
        K,
        [&](double t) {
            const CutoffSample c = cutoff_curve_potential(K, t, eps, lambda, cfg, cutoff);
            return PointValue{c.value, c.errEst};
        },
        outer, cfg.threads);
    if (!r.estimate.converged)
        throw ToleranceNotMetError("curve cutoff energy did not converge", r.estimate.value, r.estimate.error);
    return {eps, r.estimate.value, r.estimate.error};
}

} // namespace renorm
