#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <variant>

#include "json.hpp"

namespace minkshoot {

using ScalarFn = std::function<double(double)>;

enum class BoundaryKind { Dirichlet, Neumann };

struct Ball {
    double radius = 10.0;
};

struct Annulus {
    double inner = 5.0;
    double outer = 10.0;
};

using Geometry = std::variant<Ball, Annulus>;

/// Radial boundary value problem
///   (r^{N-1} phi(u'))' + lambda r^{N-1} q(r) g(u) = 0
/// on a ball (u'(0) = 0) or an annulus, with Dirichlet or Neumann data at the
/// outer radius (both ends for annuli).
struct ProblemSpec {
    int dimension = 2;
    Geometry geometry = Ball{};
    ScalarFn weight;        // q(r)
    ScalarFn nonlinearity;  // g(u)
    double lambda = 1.0;
    BoundaryKind bc = BoundaryKind::Dirichlet;
    double delta = 1.0;         // g(u) u > 0 on (-delta, delta) \ {0}
    bool superlinear = false;   // declares g(u)/u -> 0 at 0

    // Expression text when built from JSON; empty for programmatic specs.
    std::string weight_source;
    std::string nonlinearity_source;

    bool is_ball() const noexcept { return std::holds_alternative<Ball>(geometry); }
    double inner_radius() const noexcept;
    double outer_radius() const noexcept;
};

/// Checks the invariants of ProblemSpec; throws Error(InvalidSpec) or
/// Error(NonFiniteWeight).
void validate(const ProblemSpec& spec);

/// Builds a spec from expression strings (`q` in the variable r, `g` in u).
ProblemSpec make_problem(int dimension, Geometry geometry, std::string_view q, std::string_view g,
                         double lambda, BoundaryKind bc, double delta, bool superlinear = false);

ProblemSpec problem_from_json(const nlohmann::json& doc);
nlohmann::json problem_to_json(const ProblemSpec& spec);
ProblemSpec load_problem(const std::string& path);

/// Mean-curvature flux phi(s) = s / sqrt(1 - s^2); Error(SlopeOutOfRange) if |s| >= 1.
double phi(double s);

/// Derivative of phi at s, (1 - s^2)^{-3/2}.
double phi_slope(double s);

/// Globally Lipschitz surrogate of a ProblemSpec: phi is continued affinely
/// beyond +-gamma and the force q(r) g(u) is cut off smoothly between |u| = R
/// and |u| = R + 1. Solutions of the original problem and of this system
/// coincide, so every shot integrates this system.
struct TruncatedSystem {
    int dimension = 2;
    double lambda = 1.0;
    double strip = 10.0;        // R: force is untouched for |u| <= strip
    double ramp_width = 1.0;
    double r_begin = 0.0;       // radial (or time) interval of the problem
    double r_end = 10.0;
    double flux_length = 10.0;  // length entering the flux bound lambda*M*length
    bool ball = true;
    BoundaryKind bc = BoundaryKind::Dirichlet;
    double delta = 1.0;
    bool superlinear = false;

    double bound = 0.0;          // M >= sup |f~|
    double flux_cap = 0.0;       // lambda * M * flux_length
    double gamma = 0.0;          // phi^{-1}(flux_cap)
    double phi_at_gamma = 0.0;
    double slope_at_gamma = 0.0; // phi'(gamma)
    double force_lipschitz = 0.0;
    double max_abs_weight = 0.0;

    ScalarFn weight;
    ScalarFn nonlinearity;

    double phi(double s) const noexcept;
    double phi_inverse(double y) const noexcept;
    double ramp(double abs_u) const noexcept;
    double force(double r, double u) const;

    /// Lipschitz constant of phi_inverse (attained at 0).
    static constexpr double phi_inverse_lipschitz() noexcept { return 1.0; }
};

TruncatedSystem build_truncation(const ProblemSpec& spec);

/// Shared construction used by the radial and the periodic problems.
/// `strip` is the cut-off level, the bound M is scanned over
/// [r_begin, r_end] x [-(strip+1), strip+1].
TruncatedSystem build_truncation(int dimension, double lambda, double strip, double r_begin, double r_end,
                                 double flux_length, const ScalarFn& weight, const ScalarFn& nonlinearity);

/// Grid resolution and safety factor used when estimating M and Lip(f~).
inline constexpr double kBoundGridStep = 1e-3;
inline constexpr double kBoundSafety = 1.05;

}  // namespace minkshoot
