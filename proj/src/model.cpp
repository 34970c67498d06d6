#include "minkshoot/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "minkshoot/error.hpp"
#include "minkshoot/expr.hpp"

namespace minkshoot {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidSpec: return "InvalidSpec";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::NonFiniteWeight: return "NonFiniteWeight";
        case ErrorKind::DegenerateProblem: return "DegenerateProblem";
        case ErrorKind::SlopeOutOfRange: return "SlopeOutOfRange";
        case ErrorKind::StepSizeUnderflow: return "StepSizeUnderflow";
        case ErrorKind::OriginHit: return "OriginHit";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::LiftAmbiguous: return "LiftAmbiguous";
        case ErrorKind::CountMismatch: return "CountMismatch";
        case ErrorKind::NotSuperlinear: return "NotSuperlinear";
        case ErrorKind::NoBracket: return "NoBracket";
        case ErrorKind::SpiralBlowup: return "SpiralBlowup";
        case ErrorKind::BoxExceeded: return "BoxExceeded";
        case ErrorKind::TwistNotFound: return "TwistNotFound";
        case ErrorKind::NoFixedPoint: return "NoFixedPoint";
    }
    return "Unknown";
}

double ProblemSpec::inner_radius() const noexcept {
    if (const auto* a = std::get_if<Annulus>(&geometry)) return a->inner;
    return 0.0;
}

double ProblemSpec::outer_radius() const noexcept {
    if (const auto* a = std::get_if<Annulus>(&geometry)) return a->outer;
    return std::get<Ball>(geometry).radius;
}

namespace {

// Points of (-delta, delta) \ {0} used to check the local sign condition:
// geometric towards 0 plus uniform towards delta.
std::vector<double> sign_check_grid(double delta) {
    std::vector<double> pts;
    for (int i = 0; i <= 120; ++i) pts.push_back(delta * std::pow(10.0, -9.0 + 9.0 * i / 120.0));
    for (int i = 1; i < 400; ++i) pts.push_back(delta * i / 400.0);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::remove_if(pts.begin(), pts.end(), [&](double x) { return x >= delta; }), pts.end());
    return pts;
}

}  // namespace

void validate(const ProblemSpec& spec) {
    auto invalid = [](const std::string& msg) { throw Error(ErrorKind::InvalidSpec, msg); };

    if (spec.dimension < 1) invalid("dimension must be >= 1");
    if (!(spec.lambda > 0.0) || !std::isfinite(spec.lambda)) invalid("lambda must be positive");
    if (!spec.weight || !spec.nonlinearity) invalid("weight q and nonlinearity g are required");

    const double outer = spec.outer_radius();
    const double inner = spec.inner_radius();
    if (spec.is_ball()) {
        if (!(outer > 0.0)) invalid("ball radius must be positive");
    } else if (!(inner > 0.0 && inner < outer)) {
        invalid("annulus radii must satisfy 0 < R1 < R2");
    }
    if (!(spec.delta > 0.0 && spec.delta < outer)) invalid("delta must lie in (0, R)");

    const int samples = 2000;
    for (int i = 0; i <= samples; ++i) {
        const double r = inner + (outer - inner) * i / samples;
        if (!std::isfinite(spec.weight(r)))
            throw Error(ErrorKind::NonFiniteWeight, "q(" + std::to_string(r) + ") is not finite");
    }

    if (spec.nonlinearity(0.0) != 0.0) invalid("g(0) must vanish");
    for (double x : sign_check_grid(spec.delta)) {
        if (!(spec.nonlinearity(x) * x > 0.0) || !(spec.nonlinearity(-x) * -x > 0.0))
            invalid("g(u) u > 0 fails at |u| = " + std::to_string(x));
    }
    if (spec.superlinear) {
        constexpr double tol = 1e-3;
        for (double x : {spec.delta * 1e-9, spec.delta * 1e-8}) {
            if (std::abs(spec.nonlinearity(x) / x) > tol || std::abs(spec.nonlinearity(-x) / x) > tol)
                invalid("declared superlinear but |g(u)/u| is not small near 0");
        }
    }
}

ProblemSpec make_problem(int dimension, Geometry geometry, std::string_view q, std::string_view g,
                         double lambda, BoundaryKind bc, double delta, bool superlinear) {
    ProblemSpec spec;
    spec.dimension = dimension;
    spec.geometry = geometry;
    auto qe = Expression::parse(q, {"r", "t"});
    auto ge = Expression::parse(g, {"u"});
    spec.weight = [qe](double r) { return qe(r); };
    spec.nonlinearity = [ge](double u) { return ge(u); };
    spec.weight_source = std::string(q);
    spec.nonlinearity_source = std::string(g);
    spec.lambda = lambda;
    spec.bc = bc;
    spec.delta = delta;
    spec.superlinear = superlinear;
    validate(spec);
    return spec;
}

ProblemSpec problem_from_json(const nlohmann::json& doc) {
    try {
        const auto& geo = doc.at("geometry");
        Geometry geometry;
        if (geo.contains("ball")) {
            geometry = Ball{geo.at("ball").at("R").get<double>()};
        } else if (geo.contains("annulus")) {
            const auto& a = geo.at("annulus");
            geometry = Annulus{a.at("R1").get<double>(), a.at("R2").get<double>()};
        } else {
            throw Error(ErrorKind::InvalidSpec, "geometry must be 'ball' or 'annulus'");
        }

        const std::string bc = doc.value("bc", std::string("dirichlet"));
        BoundaryKind kind;
        if (bc == "dirichlet") {
            kind = BoundaryKind::Dirichlet;
        } else if (bc == "neumann") {
            kind = BoundaryKind::Neumann;
        } else {
            throw Error(ErrorKind::InvalidSpec, "bc must be 'dirichlet' or 'neumann'");
        }

        return make_problem(doc.at("dimension").get<int>(), geometry, doc.at("q").get<std::string>(),
                            doc.at("g").get<std::string>(), doc.at("lambda").get<double>(), kind,
                            doc.at("delta").get<double>(), doc.value("superlinear", false));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidSpec, e.what());
    }
}

nlohmann::json problem_to_json(const ProblemSpec& spec) {
    nlohmann::json doc;
    doc["dimension"] = spec.dimension;
    if (spec.is_ball()) {
        doc["geometry"] = {{"ball", {{"R", spec.outer_radius()}}}};
    } else {
        doc["geometry"] = {{"annulus", {{"R1", spec.inner_radius()}, {"R2", spec.outer_radius()}}}};
    }
    doc["lambda"] = spec.lambda;
    doc["bc"] = spec.bc == BoundaryKind::Dirichlet ? "dirichlet" : "neumann";
    doc["q"] = spec.weight_source;
    doc["g"] = spec.nonlinearity_source;
    doc["delta"] = spec.delta;
    doc["superlinear"] = spec.superlinear;
    return doc;
}

ProblemSpec load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot open problem file " + path);
    try {
        return problem_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::ConfigError, path + ": " + e.what());
    }
}

double phi(double s) {
    if (!(std::abs(s) < 1.0)) throw Error(ErrorKind::SlopeOutOfRange, "|s| >= 1 in phi");
    return s / std::sqrt((1.0 - s) * (1.0 + s));
}

double phi_slope(double s) {
    const double w = (1.0 - s) * (1.0 + s);
    return 1.0 / (w * std::sqrt(w));
}

double TruncatedSystem::phi(double s) const noexcept {
    if (s > gamma) return slope_at_gamma * (s - gamma) + phi_at_gamma;
    if (s < -gamma) return slope_at_gamma * (s + gamma) - phi_at_gamma;
    return s / std::sqrt((1.0 - s) * (1.0 + s));
}

double TruncatedSystem::phi_inverse(double y) const noexcept {
    if (y > phi_at_gamma) return gamma + (y - phi_at_gamma) / slope_at_gamma;
    if (y < -phi_at_gamma) return -gamma + (y + phi_at_gamma) / slope_at_gamma;
    return y / std::sqrt(1.0 + y * y);
}

double TruncatedSystem::ramp(double abs_u) const noexcept {
    if (abs_u <= strip) return 1.0;
    if (abs_u >= strip + ramp_width) return 0.0;
    const double t = (abs_u - strip) / ramp_width;
    return 1.0 - t * t * (3.0 - 2.0 * t);
}

double TruncatedSystem::force(double r, double u) const {
    const double psi = ramp(std::abs(u));
    if (psi == 0.0) return 0.0;
    return weight(r) * nonlinearity(u) * psi;
}

TruncatedSystem build_truncation(int dimension, double lambda, double strip, double r_begin, double r_end,
                                 double flux_length, const ScalarFn& weight, const ScalarFn& nonlinearity) {
    TruncatedSystem sys;
    sys.dimension = dimension;
    sys.lambda = lambda;
    sys.strip = strip;
    sys.r_begin = r_begin;
    sys.r_end = r_end;
    sys.flux_length = flux_length;
    sys.weight = weight;
    sys.nonlinearity = nonlinearity;

    // f~ = q(r) h(u) with h = g * ramp, so the grid maximum of |f~| over the
    // box factors into max|q| * max|h| on the two 1-d grids.
    const auto r_count = static_cast<long>(std::ceil((r_end - r_begin) / kBoundGridStep));
    double max_q = 0.0;
    for (long i = 0; i <= r_count; ++i) {
        const double r = std::min(r_end, r_begin + static_cast<double>(i) * kBoundGridStep);
        const double q = weight(r);
        if (!std::isfinite(q)) throw Error(ErrorKind::NonFiniteWeight, "q(" + std::to_string(r) + ") is not finite");
        max_q = std::max(max_q, std::abs(q));
    }

    const double umax = strip + sys.ramp_width;
    const auto u_count = static_cast<long>(std::ceil(2.0 * umax / kBoundGridStep));
    const double du = 2.0 * umax / static_cast<double>(u_count);
    double max_h = 0.0;
    double max_dq = 0.0;
    double prev = 0.0;
    for (long i = 0; i <= u_count; ++i) {
        const double u = -umax + static_cast<double>(i) * du;
        const double psi = sys.ramp(std::abs(u));
        const double h = psi == 0.0 ? 0.0 : nonlinearity(u) * psi;
        if (!std::isfinite(h)) throw Error(ErrorKind::InvalidSpec, "g(" + std::to_string(u) + ") is not finite");
        max_h = std::max(max_h, std::abs(h));
        if (i > 0) max_dq = std::max(max_dq, std::abs(h - prev) / du);
        prev = h;
    }

    sys.max_abs_weight = max_q;
    sys.bound = max_q * max_h * kBoundSafety;
    if (sys.bound == 0.0) throw Error(ErrorKind::DegenerateProblem, "q g vanishes on the scanned box");
    sys.force_lipschitz = max_q * max_dq * kBoundSafety;

    const double y = lambda * sys.bound * flux_length;
    sys.flux_cap = y;
    sys.gamma = y / std::sqrt(1.0 + y * y);
    const double w = (1.0 - sys.gamma) * (1.0 + sys.gamma);
    sys.phi_at_gamma = sys.gamma / std::sqrt(w);
    sys.slope_at_gamma = 1.0 / (w * std::sqrt(w));
    return sys;
}

TruncatedSystem build_truncation(const ProblemSpec& spec) {
    validate(spec);
    const double outer = spec.outer_radius();
    const double inner = spec.inner_radius();
    // Ball: |r^{N-1} phi(u')| <= lambda M r^N / N <= lambda M R r^{N-1}.
    // Annulus: u' vanishes somewhere in [R1, R2], hence
    // |phi(u')| <= lambda M (R2 - R1) (R2 / R1)^{N-1}.
    const double flux_length =
        spec.is_ball() ? outer : (outer - inner) * std::pow(outer / inner, spec.dimension - 1);
    auto sys = build_truncation(spec.dimension, spec.lambda, outer, inner, outer, flux_length, spec.weight,
                                spec.nonlinearity);
    sys.ball = spec.is_ball();
    sys.bc = spec.bc;
    sys.delta = spec.delta;
    sys.superlinear = spec.superlinear;
    return sys;
}

}  // namespace minkshoot
