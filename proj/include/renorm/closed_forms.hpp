#pragma once

#include <vector>

#include <json.hpp>

namespace renorm {

/// Smallest center distance at which the torus formulas are evaluated.
inline constexpr double kMinTorusR = 1.0 + 1e-8;

/// Renormalized energy of T_R.
double torus_energy_closed(double R);

/// dE/dR of torus_energy_closed.
double torus_energy_derivative(double R);

struct TorusMinimum {
    double R = 0.0;
    double energy = 0.0;
    int iterations = 0;
};

void to_json(nlohmann::json& j, const TorusMinimum& m);

/// Root of dE/dR in [Rlo, Rhi]. The derivative must change sign on the bracket.
TorusMinimum minimize_torus_energy(double Rlo, double Rhi, double tol = 1e-12);

/// Renormalized potential of T_R at the point with generating angle alpha
/// (unit generating radius).
double torus_potential_closed(double R, double alpha);

/// Cutoff potential of T_R at alpha up to O(eps), including the divergent terms.
double torus_cutoff_potential_closed(double R, double alpha, double eps);

/// Integral of Delta over T_R.
double delta_integral_closed(double R);

/// Area of T_R.
double torus_area(double R);

/// Integral of Delta log Delta over T_R by 1-D quadrature in alpha.
double delta_log_delta_integral(double R);

/// Willmore functional of T_R by quadrature of the mean curvature squared.
double willmore_torus(double R);

struct TorusEnergyCurve {
    std::vector<double> R;
    std::vector<double> energy;
    std::vector<double> derivative;
};

void to_json(nlohmann::json& j, const TorusEnergyCurve& c);

TorusEnergyCurve torus_energy_curve(const std::vector<double>& grid);

/// Evenly spaced grid lo, ..., hi with `points` entries.
std::vector<double> linear_grid(double lo, double hi, int points);

} // namespace renorm
