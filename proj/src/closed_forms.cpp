#include "renorm/closed_forms.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "renorm/errors.hpp"
#include "renorm/geometry.hpp"
#include "renorm/quadrature.hpp"

namespace renorm {

namespace {

const double kLog2 = std::log(2.0);

void check_R(double R) {
    if (!(R >= kMinTorusR) || !std::isfinite(R)) {
        std::ostringstream msg;
        msg << "torus needs R > 1 (and R >= 1 + 1e-8 for closed forms), got " << R;
        throw DomainError(msg.str());
    }
}

/// sqrt(R^2 - 1) without cancellation near R = 1.
double root_r2m1(double R) { return std::sqrt((R - 1.0) * (R + 1.0)); }

} // namespace

double torus_energy_closed(double R) {
    check_R(R);
    const double pi3 = kPi * kPi * kPi;
    return pi3 / (2.0 * root_r2m1(R)) * (R * R * (3.0 * kLog2 - 1.0) + 2.0 - 2.0 / (R * R));
}

double torus_energy_derivative(double R) {
    check_R(R);
    const double pi3 = kPi * kPi * kPi;
    const double R2 = R * R;
    const double a = R2 - 2.0;
    const double m = root_r2m1(R);
    return pi3 * a * (a * a + 3.0 * R2 * R2 * (2.0 * kLog2 - 1.0)) / (4.0 * R2 * R * m * m * m);
}

void to_json(nlohmann::json& j, const TorusMinimum& m) {
    j = {{"R_star", m.R}, {"E_star", m.energy}, {"iterations", m.iterations}};
}

TorusMinimum minimize_torus_energy(double Rlo, double Rhi, double tol) {
    if (!(Rlo > 1.0 && Rhi > Rlo)) throw DomainError("minimize bracket needs 1 < Rlo < Rhi");
    if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
    check_R(Rlo);
    const double flo = torus_energy_derivative(Rlo), fhi = torus_energy_derivative(Rhi);
    if (!(flo < 0.0 && fhi > 0.0)) throw DomainError("bracket does not enclose the energy minimum (dE/dR signs)");
    std::uintmax_t iters = 200;
    auto stop = [tol](double a, double b) { return std::abs(b - a) <= tol; };
    const auto [a, b] = boost::math::tools::toms748_solve([](double R) { return torus_energy_derivative(R); }, Rlo,
                                                          Rhi, flo, fhi, stop, iters);
    TorusMinimum out;
    out.R = 0.5 * (a + b);
    out.energy = torus_energy_closed(out.R);
    out.iterations = static_cast<int>(iters);
    return out;
}

double torus_potential_closed(double R, double alpha) {
    check_R(R);
    const double c = std::cos(alpha), s = std::sin(alpha);
    const double w = R + c, w2 = w * w;
    return 3.0 * kLog2 * kPi * R * R / (8.0 * w2) - kPi / 8.0 - kPi / (4.0 * R * R * w2) +
           kPi * (1.0 + s * s) / (8.0 * w2) + kPi * c / (4.0 * w);
}

double torus_cutoff_potential_closed(double R, double alpha, double eps) {
    check_R(R);
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("cutoff radius must lie in (0, 1)");
    const double c = std::cos(alpha), s = std::sin(alpha);
    const double w = R + c, w2 = w * w;
    return kPi / (eps * eps) - kPi * R * R / (16.0 * w2) * std::log(R * R * eps * eps / w2) +
           3.0 * kLog2 * kPi * R * R / (8.0 * w2) - kPi / 8.0 - kPi / (4.0 * R * R * w2) +
           kPi * (1.0 + s * s) / (8.0 * w2);
}

double delta_integral_closed(double R) {
    check_R(R);
    return 4.0 * kPi * kPi * R * R / root_r2m1(R);
}

double torus_area(double R) {
    check_R(R);
    return 4.0 * kPi * kPi * R;
}

double delta_log_delta_integral(double R) {
    check_R(R);
    // Delta = R^2 / w^2 with area element 2 pi w dalpha, w = R + cos alpha.
    auto f = [R](double a) {
        const double w = R + std::cos(a);
        const double delta = R * R / (w * w);
        return kTwoPi * w * delta * std::log(delta);
    };
    const double br[5] = {0.0, kPi / 2.0, kPi, 1.5 * kPi, kTwoPi};
    const Estimate e = adaptive_gk(f, std::span<const double>(br, 5), 0.0, 1e-13);
    if (!e.converged) throw ToleranceNotMetError("Delta log Delta quadrature did not converge", e.value, e.error);
    return e.value;
}

double willmore_torus(double R) {
    check_R(R);
    const ParamSurface S = make_torus_surface(RevolutionTorus(R));
    OuterConfig cfg;
    cfg.minNodes = 16;
    cfg.maxNodes = 4096;
    cfg.relTol = 1e-13;
    cfg.absTol = 0.0;
    const OuterResult r = integrate_surface_nodes(
        S,
        [&](double u, double v) {
            const SurfacePointData d = point_data(S, u, v);
            const double H = 0.5 * (d.kappa1 + d.kappa2);
            return PointValue{H * H, 0.0};
        },
        cfg, 1);
    if (!r.estimate.converged)
        throw ToleranceNotMetError("Willmore quadrature did not converge", r.estimate.value, r.estimate.error);
    return r.estimate.value;
}

void to_json(nlohmann::json& j, const TorusEnergyCurve& c) {
    j = {{"R", c.R}, {"energy", c.energy}, {"derivative", c.derivative}};
}

TorusEnergyCurve torus_energy_curve(const std::vector<double>& grid) {
    TorusEnergyCurve c;
    for (double R : grid) {
        c.R.push_back(R);
        c.energy.push_back(torus_energy_closed(R));
        c.derivative.push_back(torus_energy_derivative(R));
    }
    return c;
}

std::vector<double> linear_grid(double lo, double hi, int points) {
    if (points < 2 || !(hi > lo)) throw DomainError("grid needs at least two points and hi > lo");
    std::vector<double> g(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) g[i] = lo + (hi - lo) * i / (points - 1);
    g.back() = hi;
    return g;
}

} // namespace renorm
