#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "renorm/renormalization.hpp"

namespace renorm {

/// Which surface or curve a command acts on.
struct SurfaceSelector {
    /// "torus", "sphere", "disk", "circle" or "clifford".
    std::string kind = "torus";
    /// Torus R, or the radius of a sphere, disk or circle. Unused for "clifford".
    double value = 1.4142135623730951;
};

/// Everything one invocation needs. Output path and worker count are not
/// part of the echoed configuration: they never change a result.
struct RunConfig {
    /// energy, potential, sweep, minimize, fit, tube or verify.
    std::string command;
    SurfaceSelector surface;
    /// energy: closed, numeric or both.
    std::string method = "closed";
    /// potential: angles alpha on the generating circle.
    std::vector<double> alphas;
    /// sweep and minimize: R range; sweep: number of grid points.
    double from = 1.1;
    double to = 3.0;
    int steps = 20;
    /// sweep: also evaluate the numeric energy at every grid point.
    bool numericSweep = false;
    /// fit: exponent of the chord distance.
    double lambda = -4.0;
    /// tube: tube radii.
    std::vector<double> tubeEps;
    RenormConfig renorm;
    /// json or csv.
    std::string format = "json";
    std::string outPath;

    void validate() const;
};

void to_json(nlohmann::json& j, const SurfaceSelector& s);
void from_json(const nlohmann::json& j, SurfaceSelector& s);
void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

/// Executes the command and returns the serialised output. Throws renorm::Error.
std::string execute(const RunConfig& cfg);

/// execute() with the exit-code contract: 0 success, 2 validation, 3 numeric
/// failure, including a `verify` run with failing criteria. Output goes to
/// `out` (or cfg.outPath), diagnostics to `err`.
int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err);

} // namespace renorm
