#include "renorm/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "renorm/closed_forms.hpp"
#include "renorm/errors.hpp"
#include "renorm/moebius.hpp"
#include "renorm/report.hpp"
#include "renorm/verify.hpp"

namespace renorm {

namespace {

const char* const kCommands[] = {"energy", "potential", "sweep", "minimize", "fit", "tube", "verify"};
const char* const kKinds[] = {"torus", "sphere", "disk", "circle", "clifford"};

template <std::size_t N>
bool one_of(const std::string& s, const char* const (&set)[N]) {
    return std::any_of(std::begin(set), std::end(set), [&](const char* c) { return s == c; });
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw DomainError(msg);
}

} // namespace

void RunConfig::validate() const {
    require(one_of(command, kCommands), "unknown command '" + command + "'");
    require(one_of(surface.kind, kKinds), "unknown surface kind '" + surface.kind + "'");
    require(format == "json" || format == "csv", "format must be json or csv");
    require(std::isfinite(surface.value), "surface parameter must be finite");
    if (surface.kind == "torus")
        require(surface.value >= kMinTorusR, "torus needs R > 1");
    else if (surface.kind != "clifford")
        require(surface.value > 0.0, "radius must be positive");
    renorm.validate();

    if (command == "energy") {
        require(method == "closed" || method == "numeric" || method == "both", "method must be closed, numeric or both");
        require(surface.kind != "disk", "the disk has a boundary; its renormalized energy is not defined");
    } else if (command == "potential") {
        require(surface.kind == "torus", "potential needs a torus");
        for (double a : alphas) require(std::isfinite(a), "alpha values must be finite");
    } else if (command == "sweep") {
        require(from >= kMinTorusR && to > from, "sweep needs 1 < from < to");
        require(steps >= 2, "sweep needs at least 2 steps");
    } else if (command == "minimize") {
        require(from > 1.0 && to > from, "minimize needs 1 < from < to");
    } else if (command == "fit") {
        require(surface.kind == "torus" || surface.kind == "disk" || surface.kind == "circle",
                "fit supports a torus, the disk and the circle");
        require(lambda == (surface.kind == "circle" ? -2.0 : -4.0),
                surface.kind == "circle" ? "circle fits use lambda = -2" : "surface fits use lambda = -4");
    } else if (command == "tube") {
        for (double e : tubeEps) require(e > 0.0 && e < 1.0, "tube radii must lie in (0, 1)");
    }
}

void to_json(nlohmann::json& j, const SurfaceSelector& s) { j = {{"kind", s.kind}, {"value", s.value}}; }

void from_json(const nlohmann::json& j, SurfaceSelector& s) {
    s.kind = j.value("kind", s.kind);
    s.value = j.value("value", s.value);
}

void to_json(nlohmann::json& j, const RunConfig& c) {
    j = {{"command", c.command},
         {"surface", c.surface},
         {"method", c.method},
         {"alphas", c.alphas},
         {"from", c.from},
         {"to", c.to},
         {"steps", c.steps},
         {"numeric_sweep", c.numericSweep},
         {"lambda", c.lambda},
         {"tube_eps", c.tubeEps},
         {"renorm", c.renorm},
         {"format", c.format}};
}

void from_json(const nlohmann::json& j, RunConfig& c) {
    c.command = j.value("command", c.command);
    if (j.contains("surface")) j.at("surface").get_to(c.surface);
    c.method = j.value("method", c.method);
    c.alphas = j.value("alphas", c.alphas);
    c.from = j.value("from", c.from);
    c.to = j.value("to", c.to);
    c.steps = j.value("steps", c.steps);
    c.numericSweep = j.value("numeric_sweep", c.numericSweep);
    c.lambda = j.value("lambda", c.lambda);
    c.tubeEps = j.value("tube_eps", c.tubeEps);
    if (j.contains("renorm")) j.at("renorm").get_to(c.renorm);
    c.format = j.value("format", c.format);
}

namespace {

struct Output {
    nlohmann::json json;
    CsvTable csv;
};

RenormConfig threaded(const RunConfig& c) {
    RenormConfig r = c.renorm;
    r.quad.threads = r.threads;
    return r;
}

struct EnergyValue {
    double value = 0.0;
    double errEst = 0.0;
    EnergyMethod method = EnergyMethod::ClosedForm;
};

nlohmann::json energy_json(const EnergyValue& e) {
    return {{"value", e.value}, {"err_est", e.errEst}, {"method", to_string(e.method)}};
}

EnergyValue closed_energy(const SurfaceSelector& s) {
    if (s.kind == "torus") return {torus_energy_closed(s.value), 0.0, EnergyMethod::ClosedForm};
    if (s.kind == "clifford") return {torus_energy_closed(clifford_image().ratio), 0.0, EnergyMethod::ClosedForm};
    // Round spheres and circles: the renormalized energy vanishes identically.
    return {0.0, 0.0, EnergyMethod::ClosedForm};
}

EnergyValue numeric_energy(const SurfaceSelector& s, const RenormConfig& cfg) {
    EnergyReport r;
    if (s.kind == "torus")
        r = surface_energy(make_torus_surface(RevolutionTorus(s.value)), cfg);
    else if (s.kind == "sphere")
        r = surface_energy(make_sphere(s.value), cfg);
    else if (s.kind == "clifford")
        r = surface_energy(make_clifford_surface(), cfg);
    else
        r = knot_energy(make_circle(s.value), cfg);
    return {r.value, r.errEst, r.method};
}

Output cmd_energy(const RunConfig& c) {
    const RenormConfig cfg = threaded(c);
    Output o;
    o.json = {{"surface", c.surface}, {"method", c.method}};
    if (c.surface.kind == "torus") o.json["R"] = c.surface.value;
    if (c.method == "both") {
        const EnergyValue a = closed_energy(c.surface), b = numeric_energy(c.surface, cfg);
        const double diff = std::abs(a.value - b.value);
        o.json["closed"] = energy_json(a);
        o.json["numeric"] = energy_json(b);
        o.json["abs_diff"] = diff;
        o.csv = {{"closed", "numeric", "abs_diff"}, {}, {{a.value, b.value, diff}}};
    } else {
        const EnergyValue e = c.method == "closed" ? closed_energy(c.surface) : numeric_energy(c.surface, cfg);
        o.json["method"] = to_string(e.method);
        o.json["value"] = e.value;
        o.json["err_est"] = e.errEst;
        o.csv = {{"value", "err_est"}, {}, {{e.value, e.errEst}}};
    }
    return o;
}

Output cmd_potential(const RunConfig& c) {
    const RenormConfig cfg = threaded(c);
    const double R = c.surface.value;
    const ParamSurface S = make_torus_surface(RevolutionTorus(R));
    std::vector<double> alphas = c.alphas;
    if (alphas.empty()) alphas = {0.0, kPi / 4.0, kPi / 2.0, 3.0 * kPi / 4.0, kPi};
    Output o;
    o.csv.header = {"alpha", "closed", "numeric", "abs_diff"};
    nlohmann::json rows = nlohmann::json::array();
    for (double a : alphas) {
        const double closed = torus_potential_closed(R, a);
        const double numeric = surface_potential(S, a, 0.0, cfg).value;
        const double diff = std::abs(closed - numeric);
        o.csv.rows.push_back({a, closed, numeric, diff});
        rows.push_back({{"alpha", a}, {"closed", closed}, {"numeric", numeric}, {"abs_diff", diff}});
    }
    o.json = {{"R", R}, {"rows", rows}};
    return o;
}

Output cmd_sweep(const RunConfig& c) {
    const RenormConfig cfg = threaded(c);
    const std::vector<double> grid = linear_grid(c.from, c.to, c.steps);
    Output o;
    o.csv.header = {"R", "E", "dE_dR"};
    if (c.numericSweep) o.csv.header.push_back("E_numeric");
    nlohmann::json rows = nlohmann::json::array();
    double bestE = std::numeric_limits<double>::infinity(), bestR = 0.0;
    for (double R : grid) {
        const double E = torus_energy_closed(R), dE = torus_energy_derivative(R);
        std::vector<double> row{R, E, dE};
        nlohmann::json jr = {{"R", R}, {"E", E}, {"dE_dR", dE}};
        double key = E;
        if (c.numericSweep) {
            const double En = surface_energy(make_torus_surface(RevolutionTorus(R)), cfg).value;
            row.push_back(En);
            jr["E_numeric"] = En;
            key = En;
        }
        if (key < bestE) {
            bestE = key;
            bestR = R;
        }
        o.csv.rows.push_back(row);
        rows.push_back(jr);
    }
    o.json = {{"rows", rows}, {"argmin_R", bestR}};
    return o;
}

Output cmd_minimize(const RunConfig& c) {
    const TorusMinimum m = minimize_torus_energy(c.from, c.to, 1e-14);
    Output o;
    o.json = m;
    o.csv = {{"R_star", "E_star"}, {}, {{m.R, m.energy}}};
    return o;
}

Output cmd_fit(const RunConfig& c) {
    const RenormConfig cfg = threaded(c);
    ExpansionTarget target = PlanarDisk{c.surface.value};
    if (c.surface.kind == "circle")
        target = make_circle(c.surface.value);
    else if (c.surface.kind == "torus")
        target = TorusTarget{RevolutionTorus(c.surface.value)};
    const std::vector<BasisTerm> basis = default_expansion_basis(target);
    const ExpansionReport r = expansion_check(target, c.lambda, basis, cfg);

    Output o;
    o.json = r;
    o.csv.header = {"term", "fitted", "predicted", "abs_diff"};
    nlohmann::json coeffs = nlohmann::json::array();
    for (BasisTerm t : basis) {
        const std::string name = to_string(t);
        const auto it = r.predicted.find(name);
        const double fitted = r.fit.coefficient(t);
        nlohmann::json jc = {{"term", name}, {"fitted", fitted}};
        if (it != r.predicted.end()) {
            jc["predicted"] = it->second;
            jc["abs_diff"] = std::abs(fitted - it->second);
            o.csv.labels.push_back(name);
            o.csv.rows.push_back({fitted, it->second, std::abs(fitted - it->second)});
        }
        coeffs.push_back(jc);
    }
    o.json["coefficients"] = coeffs;
    return o;
}

Output cmd_tube(const RunConfig& c) {
    std::vector<double> eps = c.tubeEps;
    if (eps.empty()) eps = {0.1, 0.05, 0.02, 0.01, 1e-3};
    Output o;
    o.csv.header = {"eps", "value", "display", "series_residual", "residual_over_eps3"};
    nlohmann::json rows = nlohmann::json::array();
    for (double e : eps) {
        const TubeReport t = tube_energy(e);
        const double scaled = t.seriesResidual / (e * e * e);
        o.csv.rows.push_back({e, t.value, t.display, t.seriesResidual, scaled});
        nlohmann::json jr = t;
        jr["residual_over_eps3"] = scaled;
        rows.push_back(jr);
    }
    o.json = {{"rows", rows},
              {"c_minus1", tube_coefficient_inv()},
              {"c1", tube_coefficient_linear()},
              {"c3", tube_coefficient_cubic()}};
    return o;
}

Output verify_output(const VerifyReport& r) {
    Output o;
    o.json = r;
    o.csv.header = {"criterion", "pass"};
    for (const auto& cr : r.criteria) o.csv.rows.push_back({static_cast<double>(cr.id), cr.pass ? 1.0 : 0.0});
    return o;
}

std::string render(const RunConfig& cfg, Output o) {
    if (cfg.format == "csv") return dump_csv(o.csv);
    o.json["config"] = cfg;
    return dump_json(o.json);
}

bool emit(const RunConfig& cfg, const std::string& text, std::ostream& out, std::ostream& err) {
    if (cfg.outPath.empty()) {
        out << text;
        return true;
    }
    std::ofstream f(cfg.outPath);
    if (f << text) return true;
    err << "error: cannot write " << cfg.outPath << '\n';
    return false;
}

} // namespace

std::string execute(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.command == "energy") return render(cfg, cmd_energy(cfg));
    if (cfg.command == "potential") return render(cfg, cmd_potential(cfg));
    if (cfg.command == "sweep") return render(cfg, cmd_sweep(cfg));
    if (cfg.command == "minimize") return render(cfg, cmd_minimize(cfg));
    if (cfg.command == "fit") return render(cfg, cmd_fit(cfg));
    if (cfg.command == "tube") return render(cfg, cmd_tube(cfg));
    return render(cfg, verify_output(run_verify(cfg.renorm.threads)));
}

int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        if (cfg.command != "verify") return emit(cfg, execute(cfg), out, err) ? 0 : 2;
        cfg.validate();
        // Progress and timings go to the diagnostic stream only.
        const VerifyReport r = run_verify(cfg.renorm.threads, [&](const CriterionResult& c, double secs) {
            err << summary_line(c) << "  (" << secs << " s)" << std::endl;
        });
        if (!emit(cfg, render(cfg, verify_output(r)), out, err)) return 2;
        if (!r.all_pass()) {
            err << "verify: some criteria failed\n";
            return 3;
        }
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.exit_code();
    }
}

} // namespace renorm
