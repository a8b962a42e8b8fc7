#include "renorm/quadrature.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include <Eigen/SVD>

#include "renorm/errors.hpp"
#include "renorm/parallel.hpp"

namespace renorm {

void QuadratureConfig::validate() const {
    if (!(relTol > 0.0 && relTol <= 1e-2)) throw DomainError("relTol must lie in (0, 1e-2]");
    if (maxDepth < 4) throw DomainError("maxDepth must be at least 4");
    if (seedGrid < 8) throw DomainError("seedGrid must be at least 8");
    if (ringRefinement < 0) throw DomainError("ringRefinement must be non-negative");
    if (threads < 1) throw DomainError("threads must be positive");
}

void to_json(nlohmann::json& j, const QuadratureConfig& c) {
    j = {{"rel_tol", c.relTol},
         {"max_depth", c.maxDepth},
         {"ring_refinement", c.ringRefinement},
         {"seed_grid", c.seedGrid}};
}

void from_json(const nlohmann::json& j, QuadratureConfig& c) {
    c.relTol = j.value("rel_tol", c.relTol);
    c.maxDepth = j.value("max_depth", c.maxDepth);
    c.ringRefinement = j.value("ring_refinement", c.ringRefinement);
    c.seedGrid = j.value("seed_grid", c.seedGrid);
}

void to_json(nlohmann::json& j, const OuterConfig& c) {
    j = {{"min_nodes", c.minNodes}, {"max_nodes", c.maxNodes}, {"rel_tol", c.relTol}, {"abs_tol", c.absTol}};
}

void from_json(const nlohmann::json& j, OuterConfig& c) {
    c.minNodes = j.value("min_nodes", c.minNodes);
    c.maxNodes = j.value("max_nodes", c.maxNodes);
    c.relTol = j.value("rel_tol", c.relTol);
    c.absTol = j.value("abs_tol", c.absTol);
}

// ---------------------------------------------------------------------------
// integrate_chart

Estimate integrate_chart(const ParamSurface& S, const std::function<double(double, double)>& f,
                         const QuadratureConfig& cfg) {
    cfg.validate();
    const ChartDomain& dom = S.domain();
    auto integrand = [&](double u, double v) { return f(u, v) * S.area_density(u, v); };

    // Rough magnitude of the integral of |f| dA; sets the absolute tolerance of
    // each independent strip.
    double magnitude = 0.0;
    {
        constexpr int n = 16;
        const double hu = dom.span_u() / n, hv = dom.span_v() / n;
        CompensatedSum acc;
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                acc.add(std::abs(integrand(dom.u0 + (i + 0.5) * hu, dom.v0 + (k + 0.5) * hv)) * hu * hv);
        magnitude = acc.value();
    }
    const int strips = cfg.seedGrid;
    const double stripTol = std::max(cfg.relTol * magnitude / strips, 1e-300);

    std::vector<double> vBreaks(static_cast<std::size_t>(cfg.seedGrid) + 1);
    for (int k = 0; k <= cfg.seedGrid; ++k) vBreaks[k] = dom.v0 + dom.span_v() * k / cfg.seedGrid;
    const double innerTol = 0.1 * stripTol / (dom.span_u() / strips);

    auto results = parallel_map(static_cast<std::size_t>(strips), cfg.threads, [&](std::size_t i) {
        const double a = dom.u0 + dom.span_u() * static_cast<double>(i) / strips;
        const double b = dom.u0 + dom.span_u() * static_cast<double>(i + 1) / strips;
        bool innerOk = true;
        double innerErr = 0.0;
        auto inner = [&](double u) {
            const Estimate e = adaptive_gk([&](double v) { return integrand(u, v); }, vBreaks, innerTol, cfg.relTol,
                                           cfg.maxDepth);
            innerOk = innerOk && e.converged;
            innerErr = std::max(innerErr, e.error);
            return e.value;
        };
        Estimate e = adaptive_gk(inner, a, b, stripTol, cfg.relTol, cfg.maxDepth);
        e.converged = e.converged && innerOk;
        e.error += innerErr * (b - a);
        return e;
    });

    CompensatedSum value, error;
    bool converged = true;
    long evals = 0;
    for (const auto& r : results) {
        value.add(r.value);
        error.add(r.error);
        converged = converged && r.converged;
        evals += r.evaluations;
    }
    Estimate out{value.value(), error.value(), converged, evals};
    if (!converged) {
        std::ostringstream msg;
        msg << "integrate_chart: tolerance " << cfg.relTol << " not met; best value " << out.value << " +- "
            << out.error;
        throw ToleranceNotMetError(msg.str(), out.value, out.error);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Outer (nested-rule) integration

namespace {

/// Clenshaw-Curtis weights on [-1, 1] for nodes cos(pi k / n), k = 0..n.
std::vector<double> clenshaw_curtis_weights(int n) {
    std::vector<double> w(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        double s = 0.0;
        for (int j = 1; j <= n / 2; ++j) {
            const double b = (2 * j == n) ? 1.0 : 2.0;
            s += b / (4.0 * j * j - 1.0) * std::cos(2.0 * j * k * kPi / n);
        }
        const double c = (k == 0 || k == n) ? 1.0 : 2.0;
        w[k] = c / n * (1.0 - s);
    }
    return w;
}

/// Nodes and weights of one axis at resolution n. Periodic axes carry n
/// nodes, bounded axes n + 1. Index i at resolution n is index 2i at 2n.
struct AxisRule {
    std::vector<double> x, w;
};

AxisRule axis_rule(double a, double b, bool periodic, int n) {
    AxisRule r;
    if (periodic) {
        for (int k = 0; k < n; ++k) {
            r.x.push_back(a + (b - a) * k / n);
            r.w.push_back((b - a) / n);
        }
    } else {
        const auto w = clenshaw_curtis_weights(n);
        for (int k = 0; k <= n; ++k) {
            r.x.push_back(a + (b - a) * (1.0 - std::cos(kPi * k / n)) / 2.0);
            r.w.push_back(w[k] * (b - a) / 2.0);
        }
    }
    return r;
}

struct NodeValue {
    double weighted = 0.0; // value * density
    double weightedErr = 0.0;
};

} // namespace

OuterResult integrate_surface_nodes(const ParamSurface& S, const std::function<PointValue(double, double)>& value,
                                    const OuterConfig& cfg, int threads) {
    if (cfg.minNodes < 2 || cfg.maxNodes < cfg.minNodes) throw DomainError("invalid outer node budget");
    const ChartDomain& dom = S.domain();
    const bool oneD = S.revolution();

    auto eval = [&](double u, double v) {
        const double density = S.area_density(u, v);
        if (!(density > 0.0)) return NodeValue{};
        const PointValue pv = value(u, v);
        return NodeValue{pv.value * density, pv.error * density};
    };

    // Values keyed by node index at the finest resolution reached so far.
    std::map<std::pair<long, long>, NodeValue> cache;
    int n = cfg.minNodes;
    double previous = 0.0;
    bool havePrevious = false;
    OuterResult out;
    int levelN = n;
    for (;; n *= 2) {
        const AxisRule ru = axis_rule(dom.u0, dom.u1, dom.periodicU, n);
        const AxisRule rv = oneD ? AxisRule{{dom.v0}, {dom.span_v()}} : axis_rule(dom.v0, dom.v1, dom.periodicV, n);

        // Re-key the cache for the doubled resolution.
        if (havePrevious) {
            std::map<std::pair<long, long>, NodeValue> rekeyed;
            for (const auto& [key, val] : cache) rekeyed[{key.first * 2, oneD ? 0 : key.second * 2}] = val;
            cache = std::move(rekeyed);
        }

        std::vector<std::pair<long, long>> fresh;
        for (long i = 0; i < static_cast<long>(ru.x.size()); ++i)
            for (long k = 0; k < static_cast<long>(rv.x.size()); ++k)
                if (!cache.count({i, k})) fresh.push_back({i, k});
        auto vals = parallel_map(fresh.size(), threads,
                                 [&](std::size_t m) { return eval(ru.x[fresh[m].first], rv.x[fresh[m].second]); });
        for (std::size_t m = 0; m < fresh.size(); ++m) cache[fresh[m]] = vals[m];

        CompensatedSum sum, err;
        for (long i = 0; i < static_cast<long>(ru.x.size()); ++i)
            for (long k = 0; k < static_cast<long>(rv.x.size()); ++k) {
                const NodeValue& nv = cache.at({i, k});
                const double w = ru.w[i] * rv.w[k];
                sum.add(w * nv.weighted);
                err.add(std::abs(w) * nv.weightedErr);
            }
        const double current = sum.value();
        levelN = n;
        if (havePrevious) {
            const double diff = std::abs(current - previous);
            out.estimate = {current, diff + err.value(), true, static_cast<long>(cache.size())};
            if (diff <= std::max(cfg.absTol, cfg.relTol * std::abs(current))) break;
            if (2 * n > cfg.maxNodes) {
                out.estimate.converged = false;
                break;
            }
        }
        previous = current;
        havePrevious = true;
    }
    out.nodesU = levelN;
    out.nodesV = oneD ? 1 : levelN;
    return out;
}

OuterResult integrate_curve_nodes(const Curve& K, const std::function<PointValue(double)>& value,
                                  const OuterConfig& cfg, int threads) {
    if (cfg.minNodes < 2 || cfg.maxNodes < cfg.minNodes) throw DomainError("invalid outer node budget");
    std::vector<NodeValue> cache;
    double previous = 0.0;
    bool havePrevious = false;
    OuterResult out;
    for (int n = cfg.minNodes;; n *= 2) {
        std::vector<NodeValue> level(static_cast<std::size_t>(n));
        std::vector<std::size_t> fresh;
        for (std::size_t i = 0; i < level.size(); ++i) {
            if (havePrevious && i % 2 == 0)
                level[i] = cache[i / 2];
            else
                fresh.push_back(i);
        }
        const double h = K.period() / n;
        auto vals = parallel_map(fresh.size(), threads, [&](std::size_t m) {
            const double t = K.t0() + h * static_cast<double>(fresh[m]);
            const PointValue pv = value(t);
            const double sp = K.speed(t);
            return NodeValue{pv.value * sp, pv.error * sp};
        });
        for (std::size_t m = 0; m < fresh.size(); ++m) level[fresh[m]] = vals[m];
        cache = std::move(level);

        CompensatedSum sum, err;
        for (const auto& nv : cache) {
            sum.add(h * nv.weighted);
            err.add(h * nv.weightedErr);
        }
        const double current = sum.value();
        out.nodesU = n;
        if (havePrevious) {
            const double diff = std::abs(current - previous);
            out.estimate = {current, diff + err.value(), true, static_cast<long>(cache.size())};
            if (diff <= std::max(cfg.absTol, cfg.relTol * std::abs(current))) break;
            if (2 * n > cfg.maxNodes) {
                out.estimate.converged = false;
                break;
            }
        }
        previous = current;
        havePrevious = true;
    }
    return out;
}

std::vector<double> geometric_ladder(double top, int count) {
    if (!(top > 0.0) || count < 1) throw DomainError("ladder needs a positive top and at least one rung");
    std::vector<double> out;
    for (int k = 0; k < count; ++k) out.push_back(std::ldexp(top, -k));
    return out;
}

// ---------------------------------------------------------------------------
// Asymptotic fitting

std::string to_string(BasisTerm t) {
    switch (t) {
    case BasisTerm::InvEps2: return "eps^-2";
    case BasisTerm::InvEps: return "eps^-1";
    case BasisTerm::LogEps: return "log_eps";
    case BasisTerm::Const: return "1";
    case BasisTerm::Eps: return "eps";
    case BasisTerm::Eps2: return "eps^2";
    }
    return "?";
}

BasisTerm basis_term_from_string(const std::string& s) {
    for (int i = 0; i < kBasisSize; ++i)
        if (to_string(static_cast<BasisTerm>(i)) == s) return static_cast<BasisTerm>(i);
    throw DomainError("unknown basis term '" + s + "'");
}

double basis_value(BasisTerm t, double eps) {
    switch (t) {
    case BasisTerm::InvEps2: return 1.0 / (eps * eps);
    case BasisTerm::InvEps: return 1.0 / eps;
    case BasisTerm::LogEps: return std::log(eps);
    case BasisTerm::Const: return 1.0;
    case BasisTerm::Eps: return eps;
    case BasisTerm::Eps2: return eps * eps;
    }
    return 0.0;
}

void to_json(nlohmann::json& j, const AsymptoticFit& f) {
    nlohmann::json coeffs = nlohmann::json::object();
    for (BasisTerm t : f.basis) coeffs[to_string(t)] = f.coefficient(t);
    j = {{"basis", coeffs},
         {"residual_rms", f.residual},
         {"residual_max", f.maxResidual},
         {"condition", f.condition},
         {"samples", f.samples}};
}

AsymptoticFit fit_asymptotics(std::span<const CutoffSample> samples, std::span<const BasisTerm> basis) {
    const auto m = static_cast<Eigen::Index>(basis.size());
    const auto n = static_cast<Eigen::Index>(samples.size());
    if (m == 0) throw DomainError("fit basis is empty");
    if (n < m + 2) throw DomainError("fit needs at least len(basis) + 2 samples");
    double lo = samples[0].eps, hi = samples[0].eps;
    for (const auto& s : samples) {
        if (!(s.eps > 0.0)) throw DomainError("cutoff samples need eps > 0");
        lo = std::min(lo, s.eps);
        hi = std::max(hi, s.eps);
    }
    if (hi < 8.0 * lo) throw DomainError("cutoff samples must span at least a factor 8 in eps");

    Eigen::MatrixXd A(n, m);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < m; ++k) A(i, k) = basis_value(basis[k], samples[i].eps);
        b(i) = samples[i].value;
    }
    Eigen::VectorXd colScale(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        colScale(k) = A.col(k).norm();
        if (colScale(k) == 0.0) colScale(k) = 1.0;
        A.col(k) /= colScale(k);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cond = sv(m - 1) > 0.0 ? sv(0) / sv(m - 1) : std::numeric_limits<double>::infinity();
    if (!(cond < 1e12)) throw IllConditionedFitError("asymptotic fit design matrix is rank deficient", cond);

    const Eigen::VectorXd x = svd.solve(b);
    AsymptoticFit fit;
    fit.basis.assign(basis.begin(), basis.end());
    for (Eigen::Index k = 0; k < m; ++k) fit.coefficients[static_cast<int>(basis[k])] = x(k) / colScale(k);
    const Eigen::VectorXd r = A * x - b;
    fit.residual = std::sqrt(r.squaredNorm() / static_cast<double>(n));
    fit.maxResidual = r.cwiseAbs().maxCoeff();
    fit.condition = cond;
    fit.samples = static_cast<int>(n);
    return fit;
}

} // namespace renorm
