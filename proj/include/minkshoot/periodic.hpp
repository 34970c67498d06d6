#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "minkshoot/model.hpp"
#include "minkshoot/planar.hpp"

namespace minkshoot {

/// (phi(u'))' + lambda q(t) g(u) = 0 with T-periodic q.
struct PeriodicSpec {
    double period = 6.283185307179586;
    ScalarFn weight;
    ScalarFn nonlinearity;
    double lambda = 1.0;
    double delta = 1.0;
    double strip = 10.0;  // truncation half-width in u

    std::string weight_source;
    std::string nonlinearity_source;
};

/// Checks period > 0, lambda > 0, strip > 0, q(0) = q(T) to 1e-9 relative,
/// g(0) = 0 and g(u) u > 0 on (-delta, delta). Throws Error(InvalidSpec).
void validate(const PeriodicSpec& spec);

PeriodicSpec make_periodic(double period, std::string_view q, std::string_view g, double lambda, double delta,
                           double strip = 10.0);
PeriodicSpec periodic_from_json(const nlohmann::json& doc);
nlohmann::json periodic_to_json(const PeriodicSpec& spec);

/// The truncated planar Hamiltonian system u' = phi~^{-1}(v), v' = -lambda f~(t, u)
/// with the flux bound taken over one period.
struct PeriodicSystem {
    PeriodicSpec spec;
    TruncatedSystem truncation;

    PlanarField field() const;
};

PeriodicSystem build_periodic(const PeriodicSpec& spec);

struct MapSettings {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
};

struct ReturnMapSample {
    double u0 = 0.0, v0 = 0.0;
    double u1 = 0.0, v1 = 0.0;
    double winding = 0.0;  // of (u, v / sqrt(lambda)) over [0, T]
};

/// One period of the flow from (u0, v0). The origin maps to itself.
ReturnMapSample poincare_map(const PeriodicSystem& system, double u0, double v0, const MapSettings& settings = {});

/// Full path over one period (t, u, v samples with lifted angle).
PlanarPath periodic_path(const PeriodicSystem& system, double u0, double v0, const MapSettings& settings = {});

struct CircleWinding {
    double radius = 0.0;
    double min_winding = 0.0;
    double max_winding = 0.0;
};

struct TwistReport {
    int k = 1;
    std::vector<CircleWinding> circles;
    bool inner_slow = false;  // inner circle winds less than 2 pi everywhere
    bool outer_slow = false;
    std::optional<double> witness_radius;  // a circle winding more than 2 k pi everywhere
    double max_adjacent_jump = 0.0;        // largest change between neighbouring circles at equal angle
    bool found() const { return inner_slow && outer_slow && witness_radius.has_value(); }
};

/// Windings of the return map on circles u0^2 + v0^2 = rho^2 (rho from
/// `radii`, ascending), `angles` points per circle. Parallel over points.
TwistReport verify_twist(const PeriodicSystem& system, int k, const std::vector<double>& radii, int angles = 32,
                         const MapSettings& settings = {});

/// Geometric radius grid from 1e-3 to well beyond the region where the
/// force can act within one period.
std::vector<double> default_twist_radii(const PeriodicSystem& system, int count = 48);

struct PeriodicSolution {
    double u0 = 0.0, v0 = 0.0;
    double winding = 0.0;
    double residual = 0.0;  // |P(z) - z|
    double max_abs_u = 0.0;
    double max_abs_slope = 0.0;
    PlanarPath path;
};

struct FixedPointOptions {
    int seed_radii = 24;
    int seed_angles = 8;
    int max_seeds = 16;
    int max_iterations = 60;
    double residual_tol = 1e-8;
    double winding_tol = 1e-3;
    double dedupe_distance = 1e-6;
    MapSettings map;
};

struct FixedPointSearch {
    std::vector<PeriodicSolution> solutions;
    int seeds_tried = 0;
    int rejected = 0;  // converged points failing the winding or strip checks
};

/// Fixed points of the return map with winding 2 j pi in the annulus
/// rho_inner <= |z| <= rho_outer: seeds whose winding is within pi of the
/// target are refined by Levenberg-Marquardt on P(z) - z with a
/// central-difference Jacobian. Accepted points are re-integrated and must
/// satisfy |P(z) - z| < residual_tol, max|u| < strip and max|u'| < 1.
/// An empty result is not a proof of non-existence.
FixedPointSearch find_periodic(const PeriodicSystem& system, int j, double rho_inner, double rho_outer,
                               const FixedPointOptions& options = {});

/// |area(P(triangle)) / area(triangle) - 1|. The image boundary is sampled
/// with `per_edge` and 2*`per_edge` points per edge and the two polygon areas
/// are Richardson-extrapolated.
double area_distortion(const PeriodicSystem& system, const std::array<std::array<double, 2>, 3>& triangle,
                       int per_edge = 64, const MapSettings& settings = {});

}  // namespace minkshoot
