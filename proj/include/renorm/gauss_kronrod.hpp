#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "renorm/parallel.hpp"

namespace renorm {

/// Integral estimate with an error bound. `converged` is false when the
/// adaptive budget ran out before the tolerance was met.
struct Estimate {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
    long evaluations = 0;
};

/// Integrand value together with the magnitude of the terms it was computed
/// from. Integrands that subtract a large model return this so that the
/// rounding floor reflects the cancellation.
struct Sample {
    double value;
    double magnitude;
};

namespace detail {

inline double value_of(double x) { return x; }
inline double value_of(const Sample& x) { return x.value; }
inline double magnitude_of(double x) { return std::abs(x); }
inline double magnitude_of(const Sample& x) { return x.magnitude; }

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK tables).
inline constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                   0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                   0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                   0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                   0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                   0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                   0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                  0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b;
    double value, error;
    /// Rounding floor of the rule on this panel; bisection cannot go below it.
    double floor;
    int depth;
};

template <class F>
Panel gk15(F& f, double a, double b, int depth) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const auto sc = f(center);
    const double fc = value_of(sc);
    double resk = fc * kWgk[7];
    double resg = fc * kWg[3];
    double resabs = std::abs(fc) * kWgk[7];
    double mag = magnitude_of(sc) * kWgk[7];
    double fv1[7], fv2[7];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const auto s1 = f(center - dx);
        const auto s2 = f(center + dx);
        const double f1 = value_of(s1), f2 = value_of(s2);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += kWgk[j] * (f1 + f2);
        resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
        mag += kWgk[j] * (magnitude_of(s1) + magnitude_of(s2));
        if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
    }
    const double reskh = resk * 0.5;
    double resasc = kWgk[7] * std::abs(fc - reskh);
    for (int j = 0; j < 7; ++j) resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));

    const double h = std::abs(half);
    double err = std::abs((resk - resg) * half);
    resasc *= h;
    resabs *= h;
    mag *= h;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const double floor = 50.0 * eps * std::max(resabs, mag);
    // A Gauss/Kronrod difference below the rounding floor is noise; the
    // QUADPACK scaling would otherwise amplify it.
    if (err <= floor)
        err = floor;
    else if (resasc != 0.0)
        err = std::max(floor, resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5)));
    return {a, b, resk * half, err, floor, depth};
}

} // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature over the union of the
/// intervals [breaks[i], breaks[i+1]]. The panel with the largest error is
/// bisected until the summed error drops below max(absTol, relTol*|I|).
/// Panels already at their rounding floor are not split further, and the
/// floor part of the error does not count against the tolerance.
/// Panel order and summation order are fixed, so the result is a pure function
/// of the inputs.
template <class F>
Estimate adaptive_gk(F&& f, std::span<const double> breaks, double absTol, double relTol, int maxDepth = 30,
                     int maxPanels = 2000) {
    using detail::Panel;
    std::vector<Panel> panels;
    panels.reserve(64);
    long evals = 0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (breaks[i + 1] == breaks[i]) continue;
        panels.push_back(detail::gk15(f, breaks[i], breaks[i + 1], 0));
        evals += 15;
    }
    auto totals = [&] {
        CompensatedSum v, e, x;
        for (const auto& p : panels) {
            v.add(p.value);
            e.add(p.error);
            x.add(p.error - p.floor);
        }
        return std::tuple{v.value(), e.value(), x.value()};
    };
    auto [value, error, excess] = totals();
    bool converged = true;
    while (excess > std::max(absTol, relTol * std::abs(value))) {
        std::size_t worst = panels.size();
        double worstErr = 0.0;
        for (std::size_t i = 0; i < panels.size(); ++i) {
            const double x = panels[i].error - panels[i].floor;
            if (panels[i].depth < maxDepth && x > worstErr) {
                worstErr = x;
                worst = i;
            }
        }
        if (worst == panels.size() || static_cast<int>(panels.size()) >= maxPanels) {
            converged = false;
            break;
        }
        const Panel p = panels[worst];
        const double mid = 0.5 * (p.a + p.b);
        panels[worst] = detail::gk15(f, p.a, mid, p.depth + 1);
        panels.insert(panels.begin() + static_cast<std::ptrdiff_t>(worst) + 1, detail::gk15(f, mid, p.b, p.depth + 1));
        evals += 30;
        std::tie(value, error, excess) = totals();
    }
    return {value, error, converged, evals};
}

template <class F>
Estimate adaptive_gk(F&& f, double a, double b, double absTol, double relTol, int maxDepth = 30) {
    const double br[2] = {a, b};
    return adaptive_gk(std::forward<F>(f), std::span<const double>(br, 2), absTol, relTol, maxDepth);
}

} // namespace renorm
