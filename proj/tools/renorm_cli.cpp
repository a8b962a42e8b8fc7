// Command-line front end: renorm <command> [options].

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "renorm/cli.hpp"
#include "renorm/errors.hpp"

namespace {

struct Flags {
    std::optional<double> torus, sphere, disk, circle;
    bool clifford = false;
    std::optional<std::string> format;
    std::string out;
    std::optional<int> threads;
    std::optional<std::string> configFile;

    std::vector<double> ladder;
    std::optional<int> ladderCount;
    std::optional<double> ladderTop, curveLadderTop, relTol, outerRelTol, logNormalization;
    std::optional<int> maxDepth, outerMaxNodes;
    std::optional<std::string> route, cutoff;

    std::optional<std::string> method;
    std::vector<double> alphas;
    std::optional<double> from, to, lambda;
    std::optional<int> steps;
    bool numeric = false;
    std::vector<double> tubeEps;
};

void add_common(CLI::App* cmd, Flags& f, bool surfaceOptions) {
    if (surfaceOptions) {
        auto* g = cmd->add_option_group("surface", "surface selector (exactly one)");
        g->add_option("--torus", f.torus, "torus of revolution T_R with unit generating circle");
        g->add_option("--sphere", f.sphere, "round sphere of the given radius");
        g->add_option("--disk", f.disk, "planar disk of the given radius");
        g->add_option("--circle", f.circle, "round circle of the given radius");
        g->add_flag("--clifford", f.clifford, "stereographic image of the Clifford torus");
        g->require_option(0, 1);
    }
    cmd->add_option("--format", f.format, "output format")->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--out", f.out, "write output to this file instead of standard output");
    cmd->add_option("--threads", f.threads, "worker cap (default: RENORM_THREADS or 1)")->check(CLI::PositiveNumber);
    cmd->add_option("--config", f.configFile, "start from the config echoed in a JSON report")->check(CLI::ExistingFile);
    cmd->add_option("--ladder", f.ladder, "explicit cutoff radii (at least 5)");
    cmd->add_option("--ladder-count", f.ladderCount, "rungs of the default ladder");
    cmd->add_option("--ladder-top", f.ladderTop, "surface ladder top, relative to the local length");
    cmd->add_option("--curve-ladder-top", f.curveLadderTop, "curve ladder top, relative to the length scale");
    cmd->add_option("--rel-tol", f.relTol, "relative tolerance of the cutoff quadrature");
    cmd->add_option("--max-depth", f.maxDepth, "bisection depth budget of the cutoff quadrature");
    cmd->add_option("--outer-rel-tol", f.outerRelTol, "relative tolerance of the outer energy quadrature");
    cmd->add_option("--outer-max-nodes", f.outerMaxNodes, "node budget per axis of the outer quadrature");
    cmd->add_option("--log-normalization", f.logNormalization, "constant c in log(c Delta eps^2)");
    cmd->add_option("--route", f.route, "ball exclusion route")->check(CLI::IsMember({"polar", "chart_preimage"}));
    cmd->add_option("--cutoff", f.cutoff, "curve cutoff")->check(CLI::IsMember({"chord", "arclength"}));
}

renorm::RunConfig build_config(const std::string& command, const Flags& f) {
    renorm::RunConfig c;
    if (f.configFile) {
        std::ifstream in(*f.configFile);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw renorm::DomainError(std::string("cannot parse config file: ") + e.what());
        }
        try {
            (j.contains("config") ? j.at("config") : j).get_to(c);
        } catch (const nlohmann::json::exception& e) {
            throw renorm::DomainError(std::string("invalid config file: ") + e.what());
        }
    }
    c.command = command;

    if (f.torus) c.surface = {"torus", *f.torus};
    if (f.sphere) c.surface = {"sphere", *f.sphere};
    if (f.disk) c.surface = {"disk", *f.disk};
    if (f.circle) c.surface = {"circle", *f.circle};
    if (f.clifford) c.surface = {"clifford", 0.0};

    if (f.format)
        c.format = *f.format;
    else if (!f.configFile)
        c.format = command == "potential" || command == "sweep" ? "csv" : "json";
    c.outPath = f.out;

    int threads = 1;
    if (const char* env = std::getenv("RENORM_THREADS")) threads = std::max(1, std::atoi(env));
    if (f.threads) threads = *f.threads;
    c.renorm.threads = threads;

    if (!f.ladder.empty()) c.renorm.ladder = f.ladder;
    if (f.ladderCount) c.renorm.ladderCount = *f.ladderCount;
    if (f.ladderTop) c.renorm.surfaceLadderTop = *f.ladderTop;
    if (f.curveLadderTop) c.renorm.curveLadderTop = *f.curveLadderTop;
    if (f.relTol) c.renorm.quad.relTol = *f.relTol;
    if (f.maxDepth) c.renorm.quad.maxDepth = *f.maxDepth;
    if (f.outerRelTol) c.renorm.outer.relTol = *f.outerRelTol;
    if (f.outerMaxNodes) c.renorm.outer.maxNodes = *f.outerMaxNodes;
    if (f.logNormalization) c.renorm.logNormalization = *f.logNormalization;
    if (f.route) c.renorm.route = *f.route == "polar" ? renorm::ExclusionRoute::Polar : renorm::ExclusionRoute::ChartPreimage;
    if (f.cutoff) c.renorm.curveCutoff = *f.cutoff == "chord" ? renorm::CurveCutoff::Chord : renorm::CurveCutoff::Arclength;

    if (f.method) c.method = *f.method;
    if (!f.alphas.empty()) c.alphas = f.alphas;
    if (f.from) c.from = *f.from;
    if (f.to) c.to = *f.to;
    if (f.steps) c.steps = *f.steps;
    if (f.numeric) c.numericSweep = true;
    if (f.lambda)
        c.lambda = *f.lambda;
    else if (command == "fit" && c.surface.kind == "circle")
        c.lambda = -2.0;
    if (!f.tubeEps.empty()) c.tubeEps = f.tubeEps;
    return c;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Renormalized r^-4 energies of surfaces and r^-2 energies of curves"};
    app.require_subcommand(1);
    Flags f;

    auto* energy = app.add_subcommand("energy", "renormalized energy of a closed surface or curve");
    add_common(energy, f, true);
    energy->add_option("--method", f.method, "closed, numeric or both")->check(CLI::IsMember({"closed", "numeric", "both"}));

    auto* potential = app.add_subcommand("potential", "pointwise potential on a torus: closed form vs numeric");
    add_common(potential, f, true);
    potential->add_option("--alpha", f.alphas, "angles on the generating circle");

    auto* sweep = app.add_subcommand("sweep", "closed-form E(R) and dE/dR on a grid");
    add_common(sweep, f, false);
    sweep->add_option("--from", f.from, "first R");
    sweep->add_option("--to", f.to, "last R");
    sweep->add_option("--steps", f.steps, "number of grid points");
    sweep->add_flag("--numeric", f.numeric, "also compute the numeric energy at each R");

    auto* minimize = app.add_subcommand("minimize", "minimizer of E(R) over a bracket");
    add_common(minimize, f, false);
    minimize->add_option("--from", f.from, "lower end of the bracket");
    minimize->add_option("--to", f.to, "upper end of the bracket");

    auto* fit = app.add_subcommand("fit", "fit the small-eps expansion of the cutoff energy");
    add_common(fit, f, true);
    fit->add_option("--lambda", f.lambda, "chord exponent (-4 for surfaces, -2 for curves)");

    auto* tube = app.add_subcommand("tube", "energy of tubes around the unit circle and its series");
    add_common(tube, f, false);
    tube->add_option("--eps", f.tubeEps, "tube radii");

    auto* verify = app.add_subcommand("verify", "run the acceptance checks");
    add_common(verify, f, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    renorm::RunConfig cfg;
    try {
        cfg = build_config(command, f);
    } catch (const renorm::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    }
    return renorm::run_command(cfg, std::cout, std::cerr);
}
