#pragma once

#include <vector>

#include "minkshoot/model.hpp"

namespace minkshoot {

struct ShotSettings {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double eps_sing = 1e-6;  // ball shots start at eps_sing * r_end
};

/// One initial value problem: u(0) = eta, u'(0) = 0 on a ball, or
/// u(R1) = 0, u'(R1) = eta on an annulus.
struct ShotInput {
    double eta = 0.0;
    double r_begin = 0.0;
    double r_end = 1.0;
    ShotSettings settings;
};

ShotInput make_shot(const TruncatedSystem& system, double eta, const ShotSettings& settings = {});

enum class StartKind { Center, InnerBoundary, Free };

struct TrajectorySample {
    double r = 0.0;
    double u = 0.0;
    double v = 0.0;   // r^{N-1} phi~(u')
    double du = 0.0;  // u'
    double dv = 0.0;  // v'
    double theta = 0.0;
};

/// Sampled path r -> (u, v, theta) with cubic Hermite dense output between
/// samples. theta is the lifted clockwise angle of (u, v / sqrt(lambda)).
struct Trajectory {
    double eta = 0.0;
    double lambda = 1.0;
    StartKind start = StartKind::Center;
    std::vector<TrajectorySample> samples;

    double r_begin() const { return samples.front().r; }
    double r_end() const { return samples.back().r; }
    double winding() const { return samples.back().theta - samples.front().theta; }

    /// Dense output; r is clamped to the sampled range.
    struct Point {
        double u, v, du, dv;
    };
    Point at(double r) const;
    std::size_t segment(double r) const;
};

/// Adaptive Dormand-Prince integration of
///   u' = phi~^{-1}(v / r^{N-1}),  v' = -lambda r^{N-1} f~(r, u).
/// Ball shots start at max(r_begin, eps_sing r_end) from the Taylor state
/// u = eta - lambda f~(0,eta) r^2/(2N), v = -lambda f~(0,eta) r^N / N.
/// Steps are limited so that consecutive samples differ by less than pi/4 in
/// angle. Throws StepSizeUnderflow or OriginHit.
Trajectory shoot_rk(const TruncatedSystem& system, const ShotInput& input);

struct PicardOptions {
    int panels = 4096;  // even
    int max_iter = 20000;
};

struct PicardResult {
    Trajectory trajectory;
    std::vector<double> distances;  // sup |u_{k+1} - u_k|
    int iterations = 0;
};

/// Fixed-point iteration of
///   Tu(r) = eta - int_0^r phi~^{-1}( s^{1-N} int_0^s lambda tau^{N-1} f~(tau,u) dtau ) ds
/// on a uniform grid with cumulative Simpson quadrature, starting from u = eta.
/// Ball geometry only. Stops when successive iterates differ by less than
/// abs_tol; Error(NoConvergence) after max_iter iterations.
PicardResult picard_solve(const TruncatedSystem& system, const ShotInput& input, const PicardOptions& options = {});

/// One application of the Picard operator to a grid function (uniform grid on
/// [0, r_end], size panels + 1). Exposed for contraction tests.
std::vector<double> picard_apply(const TruncatedSystem& system, double eta, double r_end,
                                 const std::vector<double>& u, std::vector<double>* flux = nullptr);

/// Constant of the contraction estimate: (lambda / N) Lip(phi~^{-1}) Lip(f~).
double picard_constant(const TruncatedSystem& system);

/// log of L^k R^{2k} / k!.
double picard_log_bound(double L, double R, int k);

/// Sup-norm distance between two trajectories over [r0, r1], sampled on the
/// union of both sample sets.
struct TrajectoryDistance {
    double u = 0.0;
    double v = 0.0;
};
TrajectoryDistance sup_distance(const Trajectory& a, const Trajectory& b, double r0, double r1);

struct ContinuityEntry {
    double radius = 0.0;
    double distance_u = 0.0;
    double distance_v = 0.0;
};

struct ContinuityReport {
    std::vector<ContinuityEntry> entries;
    double log_gronwall_constant = 0.0;  // log of K in distance <= K * radius
    bool monotone = true;                // each distance <= 2x the previous one
    bool within_gronwall = true;
};

/// Distances between the shots eta_center +- rho and eta_center for each rho.
ContinuityReport continuity_probe(const TruncatedSystem& system, double eta_center, const std::vector<double>& radii,
                                  const ShotSettings& settings = {});

}  // namespace minkshoot
