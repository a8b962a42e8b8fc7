#include <algorithm>
#include <cmath>

#include "renorm/errors.hpp"
#include "renorm/quadrature.hpp"

namespace renorm {

// For x at distance a from the centre, the inner integral is done in polar
// coordinates around x. The radial part is exact, leaving one angle integral
// over rays whose exit distance rho(theta) exceeds eps.
CutoffSample cutoff_energy_integral(const PlanarDisk& D, double eps, double lambda, const QuadratureConfig& cfg) {
    cfg.validate();
    const double R = D.radius;
    if (!(R > 0.0)) throw DomainError("disk radius must be positive");
    if (!(eps > 0.0 && eps < R)) throw DomainError("cutoff radius must lie in (0, disk radius)");

    const double p = lambda + 2.0;
    auto radial = [&](double rho) {
        if (p == 0.0) return std::log(rho / eps);
        return (std::pow(rho, p) - std::pow(eps, p)) / p;
    };
    auto exit_distance = [&](double a, double theta) {
        const double s = a * std::sin(theta);
        return -a * std::cos(theta) + std::sqrt(std::max(0.0, R * R - s * s));
    };

    bool ok = true;
    auto inner = [&](double a) {
        double lo = 0.0;
        if (a > R - eps) lo = std::acos(std::clamp((R * R - a * a - eps * eps) / (2.0 * a * eps), -1.0, 1.0));
        const Estimate e = adaptive_gk([&](double th) { return radial(exit_distance(a, th)); }, lo, kPi, 0.0,
                                       0.1 * cfg.relTol, cfg.maxDepth);
        ok = ok && e.converged;
        return 2.0 * e.value;
    };

    const double br[4] = {0.0, 0.5 * (R - eps), R - eps, R};
    const Estimate outer =
        adaptive_gk([&](double a) { return kTwoPi * a * inner(a); }, std::span<const double>(br, 4), 0.0, cfg.relTol,
                    cfg.maxDepth);
    if (!outer.converged || !ok)
        throw ToleranceNotMetError("disk cutoff energy did not converge", outer.value, outer.error);
    return {eps, outer.value, outer.error};
}

} // namespace renorm
