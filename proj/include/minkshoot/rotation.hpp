#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "minkshoot/integrate.hpp"
#include "minkshoot/model.hpp"
#include "minkshoot/planar.hpp"

namespace minkshoot {

/// Comparison functions for the planar system x' = X(t, y), y' = -Y(t, x):
///   a1(y) y <= X(t, y) y <= b1(y) y,   b2(x) x <= Y(t, x) x <= a2(x) x
/// for |x|, |y| < delta. Outside (-delta, delta) each function continues
/// linearly with its one-sided boundary slope (clamped at 0 so the sign
/// condition survives).
class BoundPair {
public:
    enum Fn { A1 = 0, B1 = 1, A2 = 2, B2 = 3 };

    BoundPair(ScalarFn a1, ScalarFn b1, ScalarFn a2, ScalarFn b2, double delta);

    double delta() const noexcept { return delta_; }
    double operator()(Fn which, double s) const;
    /// Integral of the extended function from 0 to s.
    double primitive(Fn which, double s) const;
    /// The s with sign(s) = sign and primitive(which, s) = level >= 0.
    double inverse_primitive(Fn which, double level, int sign) const;

    double energy_a(double x, double y) const { return primitive(A1, y) + primitive(A2, x); }
    double energy_b(double x, double y) const { return primitive(B1, y) + primitive(B2, x); }

    /// Sampled check of 0 < a1(s)s <= b1(s)s and 0 < b2(s)s <= a2(s)s on
    /// (-delta, delta) plus growth of every primitive beyond delta.
    /// Throws Error(InvalidSpec) naming the first failure.
    void validate() const;

    /// Hex FNV-1a digest of the four functions sampled on [-delta, delta].
    std::string hash() const;

private:
    struct Edge {
        double value = 0.0;
        double slope = 0.0;
        double primitive = 0.0;
    };
    std::array<ScalarFn, 4> fns_;
    std::array<Edge, 4> upper_{};
    std::array<Edge, 4> lower_{};
    double delta_;

    double inner_primitive(Fn which, double s) const;
};

/// Angular speed lower bound (b2(x) x + a1(y) y) / (x^2 + y^2) of any
/// squeezed system at (x, y).
double angular_speed_floor(const BoundPair& bounds, double x, double y);

/// Spiral rates d(log rho)/d(theta). The inner spiral follows a-level curves
/// where xy >= 0 and b-level curves where xy <= 0; the outer one the reverse.
enum class SpiralSide { Inner, Outer };
double spiral_rate(const BoundPair& bounds, SpiralSide side, double x, double y);

/// One spiral. Either sampled from the ODE (theta, rho, log_rate) or traced
/// exactly as a chain of energy level curves, one per quadrant, glued on the
/// axes (pieces non-empty).
struct Spiral {
    struct Piece {
        long quadrant = 0;  // theta in [quadrant pi/2, (quadrant + 1) pi/2]
        bool use_a = true;  // level curve of E_A (else E_B)
        double level = 0.0;
        double rho_lower = 0.0;  // rigorous radius bounds along the whole arc
        double rho_upper = 0.0;
        double extent = 0.0;     // max(|x|, |y|) along the arc
    };

    SpiralSide side = SpiralSide::Inner;
    const BoundPair* bounds = nullptr;
    std::vector<double> theta;
    std::vector<double> rho;
    std::vector<double> log_rate;  // d(log rho)/d(theta), ODE spirals only
    std::vector<Piece> pieces;

    double at(double th) const;
    /// Energy of (x, y) minus the spiral level at angle th; positive means
    /// (x, y) lies outside the spiral (level-traced spirals only).
    double energy_gap(double th, double x, double y) const;
    double min_rho() const;
    double max_rho() const;
    /// Largest max(|x|, |y|) reached; for ODE spirals the largest radius.
    double box_extent() const;
};

struct SpiralPair {
    Spiral inner;
    Spiral outer;
};

/// Integrates both spirals from (theta0, rho0) over [theta0, theta0 + span],
/// quadrant by quadrant. Error(SpiralBlowup) if a radius leaves
/// (0, 100 delta] or stops being finite.
SpiralPair build_spirals(const BoundPair& bounds, double theta0, double rho0, double span, double tol = 1e-11);

/// The same spirals glued from exact level curves: each quadrant costs two
/// primitive inversions, so extreme scale ratios are handled.
SpiralPair trace_spirals(const BoundPair& bounds, double theta0, double rho0, double span);

/// Radius of the level-traced spiral at angle theta.
double level_set_radius(const BoundPair& bounds, SpiralSide side, double theta0, double rho0, double theta);

struct ThresholdOptions {
    double margin = 1.1;
    int start_angles = 16;
    int angle_grid = 256;
    int radius_grid = 64;
    int max_halvings = 200;
    double initial_fraction = 0.5;  // first trial rho* as a fraction of delta
};

struct SpiralEstimate {
    int j = 0;
    double tau_star = 0.0;
    double rho_star = 0.0;
    double rho_min = 0.0;    // innermost spiral radius over all start angles
    double rho_max = 0.0;    // outermost
    double omega_min = 0.0;  // angular speed floor on the annulus [rho_min, rho_max]
    double span = 0.0;
    SpiralPair spirals;      // traced from start angle 0
};

/// rho* is halved from initial_fraction * delta until the traced outer spiral
/// stays inside |.| < delta over margin * j pi from every sampled start angle;
/// tau* = margin * j pi / omega_min. Error(BoxExceeded) if no rho* works.
SpiralEstimate estimate_thresholds(const BoundPair& bounds, int j, const ThresholdOptions& options = {});

nlohmann::json certificate_json(const SpiralEstimate& estimate, const BoundPair& bounds);

/// Piecewise-smooth selection X = a1 + alpha(t)(b1 - a1), Y = b2 + beta(t)(a2 - b2)
/// with alpha, beta in [0, 1] drawn from a seeded generator.
class SqueezedSystem {
public:
    SqueezedSystem(const BoundPair& bounds, double horizon, std::uint64_t seed);

    double alpha(double t) const;
    double beta(double t) const;
    double X(double t, double y) const;
    double Y(double t, double x) const;
    const std::vector<double>& breakpoints() const { return knots_; }
    PlanarField field() const;

private:
    struct Piece {
        double mean, amplitude, frequency, phase;
        double eval(double t) const;
    };
    const BoundPair* bounds_;
    std::vector<double> knots_;  // interior discontinuities
    std::vector<Piece> alpha_;
    std::vector<Piece> beta_;
    std::size_t piece(double t) const;
};

struct SqueezedRun {
    std::uint64_t seed = 0;
    double start_angle = 0.0;
    double winding = 0.0;
    double min_radius = 0.0;
    bool spiral_ok = true;  // radius between the spirals at equal angles
    bool failed = false;
    std::string error;
};

struct RotationValidation {
    int j = 0;
    SpiralEstimate estimate;
    std::vector<SqueezedRun> runs;
    bool all_rotate = true;     // winding > j pi for every run
    bool origin_clear = true;   // min radius > 1e-6 rho* for every run
    bool spirals_hold = true;
    bool passed() const { return all_rotate && origin_clear && spirals_hold; }
};

/// Integrates `count` random squeezed systems over [0, tau* (1 + 1e-6)] from
/// radius rho* at a random start angle. Parallel over systems; results do not
/// depend on the thread count.
RotationValidation validate_rotation(const BoundPair& bounds, int j, int count, std::uint64_t seed,
                                     const ThresholdOptions& options = {});

struct EnergyReport {
    int segments_a = 0;
    int segments_b = 0;
    int violations_a = 0;
    int violations_b = 0;
    double worst_excess = 0.0;  // largest relative wrong-signed change
    bool passed() const { return violations_a == 0 && violations_b == 0; }
};

/// E_A must not decrease on samples where xy >= 0 and not increase where
/// xy <= 0; E_B the other way round. Segments that change quadrant are
/// skipped. A change counts as a violation when it exceeds rel_tol times the
/// local energy.
EnergyReport verify_energy_monotonicity(const BoundPair& bounds, const PlanarPath& path, double rel_tol = 1e-8);

/// Bounds for the rescaled radial system on [r_lo, r_hi]:
/// b2 = m r_lo^{N-1} g, a2 = Q r_hi^{N-1} g, a1 = s / (phi'(gamma) r_hi^{N-1}),
/// b1 = s / r_lo^{N-1}, with m = min q on [r_lo, r_hi] > 0 and Q = max q+.
BoundPair radial_rotation_bounds(const TruncatedSystem& system, double r_lo, double r_hi, double delta);

/// (tau* / (r_hi - r_lo))^2: lambda beyond which the shot rotates tau*-long.
double lambda_star_from_tau(double tau_star, double r_lo, double r_hi);
/// log10 of the same quantity; stays finite when lambda* overflows a double.
double log10_lambda_star_from_tau(double tau_star, double r_lo, double r_hi);

/// The radial trajectory on [r_lo, r_hi] in the variables t = sqrt(lambda) r,
/// x = u, y = v / sqrt(lambda).
PlanarPath rescale_trajectory(const Trajectory& traj, double r_lo, double r_hi);

}  // namespace minkshoot
