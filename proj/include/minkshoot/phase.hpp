#pragma once

#include <optional>
#include <vector>

#include "minkshoot/integrate.hpp"

namespace minkshoot {

/// Principal clockwise angle of (u, v / sqrt(lambda)):
/// u = rho cos(theta), v = -sqrt(lambda) rho sin(theta).
double scaled_angle(double u, double v, double lambda);

/// Difference to - from wrapped into (-pi, pi].
double principal_increment(double from, double to);

struct AngleLift {
    std::vector<double> r;
    std::vector<double> theta;
    double winding = 0.0;

    double start() const { return theta.front(); }
    double end() const { return theta.back(); }
};

/// Recomputes the lifted angle from the trajectory samples. Initial value is
/// 0 for eta > 0 and pi for eta < 0 at the center; for annulus shots the state
/// (0, phi~(eta)) sits at -pi/2 (eta > 0) or 3pi/2 (eta < 0).
/// Error(LiftAmbiguous) if a sampled increment reaches pi/2.
AngleLift lift_angle(const Trajectory& traj, double lambda);

struct NodalSummary {
    std::vector<double> zeros;
    int nodal_domains = 1;
    int sign_at_start = 1;
};

/// Zeros of u located by dense-output bisection, reconciled against the
/// count implied by the winding. A Dirichlet zero at the outer endpoint is not
/// interior. `bc` empty means no boundary condition is imposed.
/// Error(CountMismatch) when the two counts disagree.
NodalSummary count_nodal(const Trajectory& traj, const AngleLift& lift, std::optional<BoundaryKind> bc);

/// Number of u-zeros implied by the lifted angle.
int winding_zero_count(double theta_start, double theta_end, std::optional<BoundaryKind> bc);

struct AngularLemmaReport {
    double min_pair_increment = 0.0;   // min over r1 <= r2 of theta(r2) - theta(r1)
    double min_crossing_increment = 0.0;
    int crossings = 0;
    bool backward_ok = true;
    bool crossing_ok = true;
    bool passed() const { return backward_ok && crossing_ok; }
};

/// (a) theta(r2) - theta(r1) > -pi for all sample pairs;
/// (b) at each zero of u with v != 0 the one-sided increments of theta are >= -tol.
AngularLemmaReport verify_angular_lemmas(const Trajectory& traj, const AngleLift& lift, double tol = 1e-8);

}  // namespace minkshoot
